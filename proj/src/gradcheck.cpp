#include "dsic/gradcheck.hpp"

#include <cmath>
#include <sstream>

#include "dsic/ops.hpp"

namespace dsic {

double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-3});
  return std::abs(a - b) / denom;
}

Var weighted_sum(Var value, Rng& rng) {
  Tape& t = *value.tape;
  Tensor4 w(t.value(value).shape());
  for (long long i = 0; i < w.size(); ++i) w[static_cast<std::size_t>(i)] = rng.uniform(-1.0, 1.0);
  return sum_all(hadamard(value, t.constant(std::move(w))));
}

GradCheckResult check_gradients(
    const std::vector<Tensor4>& inputs,
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    const GradCheckOptions& opts, Rng& rng) {
  GradCheckResult result;

  auto forward_loss = [&](const std::vector<Tensor4>& values) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(values.size());
    for (const Tensor4& v : values) leaves.push_back(tape.leaf(v, false));
    Var loss = build(tape, leaves);
    return tape.value(loss)[0];
  };

  // analytic gradients once
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor4& v : inputs) leaves.push_back(tape.leaf(v, true));
  Var loss = build(tape, leaves);
  GradStore grads = tape.backward(loss);

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const long long count = inputs[i].size();
    const int probes = static_cast<int>(std::min<long long>(opts.probes_per_input, count));
    for (int probe = 0; probe < probes; ++probe) {
      const auto coord = static_cast<std::size_t>(rng.next_u64() % static_cast<std::uint64_t>(count));
      std::vector<Tensor4> plus = inputs;
      std::vector<Tensor4> minus = inputs;
      plus[i][coord] += opts.epsilon;
      minus[i][coord] -= opts.epsilon;
      const double numeric = (forward_loss(plus) - forward_loss(minus)) / (2.0 * opts.epsilon);
      const double analytic =
          grads.has(leaves[i].id) ? grads.at(leaves[i].id)[coord] : 0.0;
      const double rel = relative_error(analytic, numeric);
      result.max_rel_err = std::max(result.max_rel_err, rel);
      ++result.probes;
      if (rel > opts.tolerance && result.pass) {
        result.pass = false;
        std::ostringstream os;
        os << "input " << i << " coord " << coord << ": analytic " << analytic << " vs numeric "
           << numeric << " (rel " << rel << ")";
        result.detail = os.str();
      }
    }
  }
  return result;
}

}  // namespace dsic
