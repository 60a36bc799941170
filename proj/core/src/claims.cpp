#include "superhedge/claims.hpp"

#include <algorithm>
#include <stdexcept>

#include "superhedge/errors.hpp"

namespace superhedge {

ClaimSpec ClaimSpec::european_call(double strike) {
  ClaimSpec c;
  c.kind = ClaimKind::european_call;
  c.strike = strike;
  c.validate();
  return c;
}

ClaimSpec ClaimSpec::barrier_up_out_call(double strike, double barrier) {
  ClaimSpec c;
  c.kind = ClaimKind::barrier_up_out_call;
  c.strike = strike;
  c.barrier = barrier;
  c.validate();
  return c;
}

void ClaimSpec::validate() const {
  if (!(strike > 0.0)) throw ConfigError("claim: strike must be > 0");
  if (kind == ClaimKind::barrier_up_out_call && !(strike < barrier)) {
    throw ConfigError("claim: barrier up-and-out call requires K < U");
  }
}

double payoff(const ClaimSpec& claim, std::span<const double> path) {
  claim.validate();
  if (path.empty()) throw ConfigError("payoff: empty path");
  const double x_T = path.back();
  const double intrinsic = std::max(x_T - claim.strike, 0.0);
  if (claim.kind == ClaimKind::european_call) return intrinsic;
  for (double x : path) {
    if (!(x < claim.barrier)) return 0.0;
  }
  return intrinsic;
}

double success_ratio(double v_T, double h) {
  if (v_T < 0.0) throw std::domain_error("success_ratio: terminal value must be >= 0");
  if (v_T >= h) return 1.0;
  return v_T / h;  // here h > v_T >= 0, so h > 0
}

}  // namespace superhedge
