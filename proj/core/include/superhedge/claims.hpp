#pragma once

#include <span>

namespace superhedge {

enum class ClaimKind { european_call, barrier_up_out_call };

struct ClaimSpec {
  ClaimKind kind = ClaimKind::european_call;
  double strike = 100.0;   // K
  double barrier = 0.0;    // U, barrier kind only; requires K < U

  static ClaimSpec european_call(double strike);
  static ClaimSpec barrier_up_out_call(double strike, double barrier);

  void validate() const;
};

/// Payoff along a full price path X_0..X_T.
/// call: (X_T - K)^+; barrier: (X_T - K)^+ if X_t < U for every t in
/// {0,...,T} (strict, including both endpoints), else 0.
double payoff(const ClaimSpec& claim, std::span<const double> path);

/// Success ratio of a terminal portfolio value against the claim:
/// 1 if v_T >= h, else v_T / h. Requires v_T >= 0 (admissibility).
double success_ratio(double v_T, double h);

}  // namespace superhedge
