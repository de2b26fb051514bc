#pragma once

#include <array>
#include <cstdint>

namespace qsmatch {

// Fidelity of a Werner-state EPR pair. F = (3W+1)/4 for Werner parameter
// W in [0,1], so physical values live in [1/4, 1]. Out-of-range values are
// rejected rather than clamped: anything below 1/4 indicates a sampling or
// arithmetic bug upstream.
class Fidelity {
 public:
  static constexpr double kMin = 0.25;
  static constexpr double kMax = 1.0;

  // Throws std::domain_error outside [0.25, 1].
  explicit Fidelity(double value);

  double value() const { return value_; }

 private:
  double value_;
};

// The four switch actions for serving one request: swap directly, or
// distill two pairs on one or both sides first. Distillation consumes a
// second link-level pair on that side, hence the per-side pair costs.
enum class ActionKind : std::uint8_t {
  DirectSwap,
  TxDistillSwap,
  RxDistillSwap,
  BothDistillSwap,
};

struct Action {
  ActionKind kind = ActionKind::DirectSwap;

  // Link-level EPR pairs consumed on the Tx / Rx side: (1,1), (2,1), (1,2), (2,2).
  int alpha_tx() const {
    return kind == ActionKind::TxDistillSwap || kind == ActionKind::BothDistillSwap ? 2 : 1;
  }
  int alpha_rx() const {
    return kind == ActionKind::RxDistillSwap || kind == ActionKind::BothDistillSwap ? 2 : 1;
  }
  int index() const { return static_cast<int>(kind) + 1; }  // 1-based
  const char* name() const;

  bool operator==(const Action&) const = default;
};

inline constexpr std::array<ActionKind, 4> kActionKinds = {
    ActionKind::DirectSwap,
    ActionKind::TxDistillSwap,
    ActionKind::RxDistillSwap,
    ActionKind::BothDistillSwap,
};

// F = (3w+1)/4 for w in [0,1]; throws std::domain_error otherwise.
Fidelity werner_to_fidelity(double w);

// Fidelity of the end-to-end pair produced by swapping two link-level
// pairs: 1/4 + (3/4) * ((4a-1)/3) * ((4b-1)/3). Symmetric; identity at 1.
Fidelity swap_fidelity(Fidelity tx, Fidelity rx);

// Fidelity after distilling two identical pairs into one (recurrence for
// the two-to-one purification protocol). Fixed points at 1/4, 1/2 and 1;
// strictly improving on (1/2, 1).
Fidelity distill_fidelity(Fidelity f);

// End-to-end fidelity of one action: distillation (if any) on each side,
// then the swap.
Fidelity e2e_fidelity(Fidelity tx, Fidelity rx, Action action);

}  // namespace qsmatch
