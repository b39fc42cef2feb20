#pragma once

#include "claimcheck/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace claimcheck {

/// Fixed-range histogram binning. Values outside [lo, hi] land in the edge
/// bins; the upper edge belongs to the last bin.
struct HistogramSpec {
  int bins = 50;
  double lo = -1.0;
  double hi = 1.0;

  int bin_of(double v) const {
    const double t = (v - lo) / (hi - lo) * bins;
    return std::clamp(static_cast<int>(std::floor(t)), 0, bins - 1);
  }
  double bin_width() const { return (hi - lo) / bins; }
  double bin_lo(int k) const { return lo + k * bin_width(); }
};

/// Normalized bin masses (sum 1), or all zeros for an empty sample.
template <typename Derived>
Eigen::ArrayXd histogram_mass(const Eigen::DenseBase<Derived>& sample, const HistogramSpec& spec = {}) {
  Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(spec.bins);
  for (Eigen::Index i = 0; i < sample.size(); ++i) mass(spec.bin_of(static_cast<double>(sample(i)))) += 1.0;
  if (sample.size() > 0) mass /= static_cast<double>(sample.size());
  return mass;
}

/// Shared mass of two binned samples, in [0, 1].
template <typename A, typename B>
double overlap_coefficient(const Eigen::DenseBase<A>& d1, const Eigen::DenseBase<B>& d2,
                           const HistogramSpec& spec = {}) {
  if (d1.size() == 0 || d2.size() == 0) throw EmptySampleError("overlap needs two non-empty samples");
  return std::min(1.0, histogram_mass(d1, spec).min(histogram_mass(d2, spec)).sum());
}

template <typename Derived>
typename Derived::Scalar population_std(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar mean = x.mean();
  return std::sqrt((x.derived().array() - mean).square().mean());
}

/// Separation |mu1 - mu2| / sqrt((s1^2 + s2^2) / 2) with population deviations.
template <typename A, typename B>
double d_prime(const Eigen::DenseBase<A>& d1, const Eigen::DenseBase<B>& d2) {
  if (d1.size() < 2 || d2.size() < 2) throw TooFewSamplesError("d' needs at least two scores per side");
  const double s1 = population_std(d1);
  const double s2 = population_std(d2);
  const double pooled = (s1 * s1 + s2 * s2) / 2.0;
  if (!(pooled > 0.0)) throw DegenerateVarianceError("both samples are constant");
  return std::abs(static_cast<double>(d1.mean()) - static_cast<double>(d2.mean())) / std::sqrt(pooled);
}

/// 1-based ranks with ties sharing their average rank.
template <typename Derived>
Eigen::ArrayXd average_ranks(const Eigen::DenseBase<Derived>& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  Eigen::ArrayXd ranks(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j + 1 < n && x(idx[j + 1]) == x(idx[i])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks(idx[k]) = avg;
    i = j + 1;
  }
  return ranks;
}

template <typename A, typename B>
double pearson(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  const Eigen::ArrayXd x = a.derived().template cast<double>().array() - static_cast<double>(a.mean());
  const Eigen::ArrayXd y = b.derived().template cast<double>().array() - static_cast<double>(b.mean());
  const double sxx = x.square().sum();
  const double syy = y.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateVarianceError("correlation of a constant sequence");
  return std::clamp((x * y).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman rank correlation with average-rank tie handling.
template <typename A, typename B>
double spearman(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  if (a.size() != b.size()) throw ValidationError("spearman needs equal-length sequences");
  if (a.size() < 3) throw TooFewSamplesError("spearman needs at least three observations");
  return pearson(average_ranks(a), average_ranks(b));
}

}  // namespace claimcheck
