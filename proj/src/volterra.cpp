#include "umfpt/volterra.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "umfpt/errors.hpp"
#include "umfpt/kernels.hpp"
#include "umfpt/spectral.hpp"

namespace umfpt {

SampledFunction::SampledFunction(const TimeGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw GridError("sampled function has " + std::to_string(values_.size()) +
                    " values for a grid of " + std::to_string(grid_.size()) + " points");
}

SampledFunction sample(const TimeGrid& grid, const std::function<double(double)>& fn) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.at(i));
  return {grid, std::move(v)};
}

SampledFunction sample_return_rate(const ModelParams& params, const TimeGrid& grid) {
  auto g = sample(grid, [&](double t) { return return_rate_g(params, t); });
  g.values()[0] = 0.0;
  return g;
}

SampledFunction solve_volterra_fpt(const SampledFunction& g) {
  std::vector<double> f(g.size());
  kernels::omp::volterra_forward(g.values(), g.grid().h(), f);
  return {g.grid(), std::move(f)};
}

SampledFunction convolve(const SampledFunction& a, const SampledFunction& b) {
  if (!(a.grid() == b.grid())) throw GridError("convolution operands live on different grids");
  std::vector<double> out(a.size());
  kernels::omp::convolve_trapezoid(a.values(), b.values(), a.grid().h(), out);
  return {a.grid(), std::move(out)};
}

SampledFunction cumulative_trapezoid(const SampledFunction& a) {
  std::vector<double> out(a.size(), 0.0);
  const double h = a.grid().h();
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (a[i - 1] + a[i]);
  return {a.grid(), std::move(out)};
}

SampledFunction ReturnDistributions::q_row(int m) const {
  return {grid, q.at(static_cast<std::size_t>(m))};
}

SampledFunction ReturnDistributions::h_row(int m) const {
  return {grid, h.at(static_cast<std::size_t>(m))};
}

ReturnDistributions qm_probabilities(const SampledFunction& f, int m_max) {
  if (m_max < 1) throw ParameterError("m_max must be >= 1");
  ReturnDistributions d{f.grid(), m_max, {}, {}, {}};
  d.q.reserve(static_cast<std::size_t>(m_max) + 1);
  d.q.emplace_back(f.size(), 1.0);
  std::vector<double> next(f.size());
  for (int m = 1; m <= m_max + 1; ++m) {
    kernels::omp::convolve_trapezoid(d.q.back(), f.values(), f.grid().h(), next);
    if (m <= m_max)
      d.q.push_back(next);
    else
      d.q_next = next;
  }
  return d;
}

ReturnDistributions hm_probabilities(ReturnDistributions dist) {
  dist.h.assign(static_cast<std::size_t>(dist.m_max) + 1, {});
  for (int m = 0; m <= dist.m_max; ++m) {
    const auto& upper = dist.q[static_cast<std::size_t>(m)];
    const auto& lower = m < dist.m_max ? dist.q[static_cast<std::size_t>(m) + 1] : dist.q_next;
    auto& row = dist.h[static_cast<std::size_t>(m)];
    row.resize(upper.size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = upper[i] - lower[i];
  }
  return dist;
}

MeanReturnsEstimate mean_returns_from_hm(const ReturnDistributions& dist) {
  if (dist.h.size() != static_cast<std::size_t>(dist.m_max) + 1)
    throw ParameterError("h distributions have not been computed");
  const std::size_t n = dist.grid.size();
  const double M = dist.m_max;
  std::vector<double> mu(n, 0.0);
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  for (int m = 1; m <= dist.m_max; ++m) {
    const auto& row = dist.h[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < n; ++i) mu[i] += m * row[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double qn = std::max(dist.q_next[i], 0.0);
    const double q1 = dist.q[1][i];
    lo[i] = (M + 1.0) * qn;
    hi[i] = q1 < 1.0 ? M * qn + qn / (1.0 - q1) : std::numeric_limits<double>::infinity();
    if (qn == 0.0) hi[i] = 0.0;
  }
  return {SampledFunction(dist.grid, std::move(mu)), std::move(lo), std::move(hi)};
}

SampledFunction mean_returns_quadrature(const SampledFunction& g) { return cumulative_trapezoid(g); }

VolterraPipeline run_volterra_pipeline(const ModelParams& params, const TimeGrid& grid, int m_max) {
  auto g = sample_return_rate(params, grid);
  auto f = solve_volterra_fpt(g);
  auto dist = hm_probabilities(qm_probabilities(f, m_max));
  return {std::move(g), std::move(f), std::move(dist)};
}

}  // namespace umfpt
