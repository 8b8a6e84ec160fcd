#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "umfpt/kernels.hpp"

namespace umfpt::kernels::omp {

namespace {
// Below this many inner-loop operations a parallel region costs more than it saves.
constexpr std::int64_t kParallelThreshold = 4096;
}  // namespace

void exp_series(std::span<const double> lambda, std::span<const double> c,
                std::span<const double> t, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(t.size());
  const std::size_t K = lambda.size();
#pragma omp parallel for schedule(static) if (n * static_cast<std::int64_t>(K) > kParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += c[k] * std::exp(-lambda[k] * t[static_cast<std::size_t>(i)]);
    out[static_cast<std::size_t>(i)] = s;
  }
}

void convolve_trapezoid(std::span<const double> a, std::span<const double> b, double h,
                        std::span<double> out) {
  const auto n = static_cast<std::int64_t>(a.size());
  if (n == 0) return;
  out[0] = 0.0;
#pragma omp parallel for schedule(dynamic, 256) if (n > 256)
  for (std::int64_t ii = 1; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = 0.5 * (a[i] * b[0] + a[0] * b[i]);
    for (std::size_t j = 1; j < i; ++j) s += a[i - j] * b[j];
    out[i] = h * s;
  }
}

void volterra_forward(std::span<const double> g, double h, std::span<double> f) {
  const std::size_t n = g.size();
  if (n == 0) return;
  f[0] = 0.0;
  const double diag = 1.0 + 0.5 * h * g[0];
  for (std::size_t i = 1; i < n; ++i) {
    double s = 0.0;
    const auto hi = static_cast<std::int64_t>(i);
#pragma omp parallel for reduction(+ : s) schedule(static) if (hi > kParallelThreshold)
    for (std::int64_t j = 1; j < hi; ++j)
      s += g[i - static_cast<std::size_t>(j)] * f[static_cast<std::size_t>(j)];
    s += 0.5 * g[i] * f[0];
    f[i] = (g[i] - h * s) / diag;
  }
}

void hierarchy_apply(const HierarchyLevels& lv, std::span<const double> psi, bool absorbing,
                     std::span<double> out, std::span<double> scratch) {
  const std::size_t n = psi.size();
  const auto p = static_cast<std::size_t>(lv.p);
  const int L = lv.n_levels;
  const auto c = lv.per_target_rate;
  const bool par = static_cast<std::int64_t>(n) > kParallelThreshold;

  std::vector<std::size_t> off(static_cast<std::size_t>(L) + 1, 0);
  std::vector<std::size_t> count(static_cast<std::size_t>(L), 0);
  std::size_t cursor = 0;
  std::size_t m = n;
  for (int i = 0; i < L; ++i) {
    m /= p;
    off[static_cast<std::size_t>(i)] = cursor;
    count[static_cast<std::size_t>(i)] = m;
    cursor += m;
  }
  for (int i = 0; i < L; ++i) {
    const std::size_t o = off[static_cast<std::size_t>(i)];
    const double* src = i == 0 ? psi.data() : scratch.data() + off[static_cast<std::size_t>(i - 1)];
    const auto cnt = static_cast<std::int64_t>(count[static_cast<std::size_t>(i)]);
#pragma omp parallel for schedule(static) if (par && cnt > 256)
    for (std::int64_t bb = 0; bb < cnt; ++bb) {
      const auto b = static_cast<std::size_t>(bb);
      double s = 0.0;
      for (std::size_t j = 0; j < p; ++j) s += src[b * p + j];
      scratch[o + b] = s;
    }
  }

  double removed_gain = 0.0;
  if (absorbing) {
    for (int i = lv.first_outside_level; i < L; ++i) {
      const double ball = scratch[off[static_cast<std::size_t>(i)]];
      const double inner = i == 0 ? psi[0] : scratch[off[static_cast<std::size_t>(i - 1)]];
      removed_gain += c[static_cast<std::size_t>(i)] * (ball - inner);
    }
  }

  for (int i = L - 1; i >= 0; --i) {
    const std::size_t o = off[static_cast<std::size_t>(i)];
    const bool has_parent = i + 1 < L;
    const double w = c[static_cast<std::size_t>(i)] - (has_parent ? c[static_cast<std::size_t>(i + 1)] : 0.0);
    const std::size_t po = has_parent ? off[static_cast<std::size_t>(i + 1)] : 0;
    const auto cnt = static_cast<std::int64_t>(count[static_cast<std::size_t>(i)]);
#pragma omp parallel for schedule(static) if (par && cnt > 256)
    for (std::int64_t bb = 0; bb < cnt; ++bb) {
      const auto b = static_cast<std::size_t>(bb);
      scratch[o + b] = w * scratch[o + b] + (has_parent ? scratch[po + b / p] : 0.0);
    }
  }

  const double diag = c[0] + lv.loss_rate;
  const std::size_t base = off[0];
  const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t xx = 0; xx < nn; ++xx) {
    const auto x = static_cast<std::size_t>(xx);
    out[x] = scratch[base + x / p] - diag * psi[x];
  }
  if (absorbing)
    for (std::size_t x = 0; x < lv.zp_states && x < n; ++x) out[x] -= removed_gain;
}

}  // namespace umfpt::kernels::omp
