#include "rac/rng.hpp"

#include <random>

#include "rac/errors.hpp"

namespace rac {

std::size_t CounterRng::categorical(std::span<const double> weights) {
  if (weights.empty()) throw ValidationError("categorical draw over no outcomes");
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (target < acc) return i;
  }
  return last_positive;
}

double CounterRng::gamma(double shape) {
  if (shape == 0.0) return 0.0;
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(*this);
}

std::vector<double> CounterRng::dirichlet(std::span<const double> alpha) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma(alpha[i]);
    total += out[i];
  }
  if (!(total > 0.0)) {
    // Every gamma draw underflowed; fall back to the largest parameter.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < alpha.size(); ++i)
      if (alpha[i] > alpha[arg]) arg = i;
    std::fill(out.begin(), out.end(), 0.0);
    out[arg] = 1.0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace rac
