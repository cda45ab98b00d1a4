#include "matchsim/rng.hpp"

namespace matchsim {

CategoricalSampler::CategoricalSampler(std::span<const double> weights) {
  cumulative_.reserve(weights.size());
  double acc = 0.0;
  std::size_t positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    cumulative_.push_back(acc);
    if (weights[k] > 0.0) {
      ++positive;
      last_positive_ = static_cast<TypeId>(k);
    }
  }
  point_mass_ = positive == 1;
}

TypeId CategoricalSampler::operator()(Rng& rng) const {
  if (point_mass_) return last_positive_;
  const double u = rng.uniform01();
  for (std::size_t k = 0; k < cumulative_.size(); ++k) {
    if (u < cumulative_[k]) return static_cast<TypeId>(k);
  }
  // u landed in the rounding gap above the final partial sum.
  return last_positive_;
}

}  // namespace matchsim
