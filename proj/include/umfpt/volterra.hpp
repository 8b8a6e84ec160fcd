#pragma once

#include <functional>
#include <vector>

#include "umfpt/params.hpp"

namespace umfpt {

/// Values of a function on a uniform TimeGrid; values[i] belongs to grid.at(i).
class SampledFunction {
 public:
  SampledFunction(const TimeGrid& grid, std::vector<double> values);

  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double t(std::size_t i) const noexcept { return grid_.at(i); }

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

SampledFunction sample(const TimeGrid& grid, const std::function<double(double)>& fn);

/// g(t_i) from the closed series, with g(0) set to exactly 0.
SampledFunction sample_return_rate(const ModelParams& params, const TimeGrid& grid);

/// Solves f(t) = g(t) - int_0^t g(t - s) f(s) ds by forward substitution with
/// product-trapezoid weights; f(0) = 0.
SampledFunction solve_volterra_fpt(const SampledFunction& g);

/// Trapezoidal convolution (a * b)(t_i) = h sum''_{j=0..i} a_{i-j} b_j.
/// GridError on mismatched grids.
SampledFunction convolve(const SampledFunction& a, const SampledFunction& b);

/// Cumulative trapezoid int_0^{t_i} a.
SampledFunction cumulative_trapezoid(const SampledFunction& a);

/// q[m](t_i): probability of at least m returns by t_i, for m = 0..m_max.
/// h[m](t_i) = q[m] - q[m+1]: exactly m returns. q_next holds q[m_max + 1].
struct ReturnDistributions {
  TimeGrid grid;
  int m_max = 0;
  std::vector<std::vector<double>> q;
  std::vector<double> q_next;
  std::vector<std::vector<double>> h;

  SampledFunction q_row(int m) const;
  SampledFunction h_row(int m) const;
};

inline constexpr int kDefaultMMax = 64;

/// q[0] = 1, q[m] = q[m-1] * f. h is left empty.
ReturnDistributions qm_probabilities(const SampledFunction& f, int m_max = kDefaultMMax);

/// Fills h[m] = q[m] - q[m+1] for m = 0..m_max.
ReturnDistributions hm_probabilities(ReturnDistributions dist);

/// mu(t) from sum_{n=1..m_max} n h[n] and the bracket on the omitted part
///   (M+1) q[M+1] <= deficit <= M q[M+1] + q[M+1] / (1 - q[1])
/// with M = m_max (upper bound is +inf where q[1] >= 1).
struct MeanReturnsEstimate {
  SampledFunction mu;
  std::vector<double> deficit_lower;
  std::vector<double> deficit_upper;
};

MeanReturnsEstimate mean_returns_from_hm(const ReturnDistributions& dist);

/// mu(t_i) = int_0^{t_i} g (cumulative trapezoid).
SampledFunction mean_returns_quadrature(const SampledFunction& g);

/// Full pipeline: g -> f -> q -> h.
struct VolterraPipeline {
  SampledFunction g;
  SampledFunction f;
  ReturnDistributions dist;
};

VolterraPipeline run_volterra_pipeline(const ModelParams& params, const TimeGrid& grid,
                                       int m_max = kDefaultMMax);

}  // namespace umfpt
