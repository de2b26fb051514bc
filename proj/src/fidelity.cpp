#include "qsmatch/fidelity.hpp"

#include <stdexcept>
#include <string>

namespace qsmatch {

namespace {

double werner_of(double f) { return (4.0 * f - 1.0) / 3.0; }

}  // namespace

Fidelity::Fidelity(double value) : value_(value) {
  if (!(value >= kMin && value <= kMax)) {
    throw std::domain_error("fidelity " + std::to_string(value) + " outside [0.25, 1]");
  }
}

const char* Action::name() const {
  switch (kind) {
    case ActionKind::DirectSwap:
      return "direct-swap";
    case ActionKind::TxDistillSwap:
      return "tx-distill-swap";
    case ActionKind::RxDistillSwap:
      return "rx-distill-swap";
    case ActionKind::BothDistillSwap:
      return "both-distill-swap";
  }
  return "?";
}

Fidelity werner_to_fidelity(double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw std::domain_error("Werner parameter " + std::to_string(w) + " outside [0, 1]");
  }
  return Fidelity((3.0 * w + 1.0) / 4.0);
}

Fidelity swap_fidelity(Fidelity tx, Fidelity rx) {
  return Fidelity(0.25 + 0.75 * werner_of(tx.value()) * werner_of(rx.value()));
}

Fidelity distill_fidelity(Fidelity f) {
  const double v = f.value();
  const double third = (1.0 - v) / 3.0;
  const double num = v * v + third * third;
  const double den = v * v + 2.0 * v * third + 5.0 * third * third;
  return Fidelity(num / den);
}

Fidelity e2e_fidelity(Fidelity tx, Fidelity rx, Action action) {
  switch (action.kind) {
    case ActionKind::DirectSwap:
      return swap_fidelity(tx, rx);
    case ActionKind::TxDistillSwap:
      return swap_fidelity(distill_fidelity(tx), rx);
    case ActionKind::RxDistillSwap:
      return swap_fidelity(tx, distill_fidelity(rx));
    case ActionKind::BothDistillSwap:
      return swap_fidelity(distill_fidelity(tx), distill_fidelity(rx));
  }
  throw std::logic_error("unreachable action kind");
}

}  // namespace qsmatch
