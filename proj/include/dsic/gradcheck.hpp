#pragma once

#include <functional>

#include "dsic/tape.hpp"
#include "dsic/rng.hpp"

namespace dsic {

// Central finite differences against the tape's analytic gradients. The
// numeric side only ever runs forward graphs, so it stays independent of the
// backward implementation it checks.

struct GradCheckOptions {
  double epsilon = 1e-3;
  double tolerance = 1e-4;  // relative, with a small-denominator floor
  int probes_per_input = 10;
};

struct GradCheckResult {
  bool pass = true;
  double max_rel_err = 0.0;
  int probes = 0;
  std::string detail;
};

// `build` must construct a scalar loss from leaves bound in input order; it is
// re-invoked for every probe with perturbed inputs.
GradCheckResult check_gradients(
    const std::vector<Tensor4>& inputs,
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    const GradCheckOptions& opts, Rng& rng);

// loss = sum(weights (.) value), fixing a deterministic random projection so
// scalar losses exercise every output coordinate.
Var weighted_sum(Var value, Rng& rng);

double relative_error(double a, double b);

}  // namespace dsic
