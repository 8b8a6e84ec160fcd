#include <cmath>
#include <cstddef>
#include <vector>

#include "umfpt/kernels.hpp"

namespace umfpt::kernels::serial {

void exp_series(std::span<const double> lambda, std::span<const double> c,
                std::span<const double> t, std::span<double> out) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < lambda.size(); ++k) s += c[k] * std::exp(-lambda[k] * t[i]);
    out[i] = s;
  }
}

void convolve_trapezoid(std::span<const double> a, std::span<const double> b, double h,
                        std::span<double> out) {
  const std::size_t n = a.size();
  if (n == 0) return;
  out[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
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
    double s = 0.5 * g[i] * f[0];
    for (std::size_t j = 1; j < i; ++j) s += g[i - j] * f[j];
    f[i] = (g[i] - h * s) / diag;
  }
}

// With Ball_i(x) the sum of psi over the level-i block containing x and
// Ball_{-1}(x) = psi(x), the gain is sum_i c_i (Ball_i - Ball_{i-1}), which
// telescopes to sum_i (c_i - c_{i+1}) Ball_i - c_0 psi with c_L = 0. The
// coefficient-weighted block sums are accumulated top-down, so the whole
// product costs O(n).
void hierarchy_apply(const HierarchyLevels& lv, std::span<const double> psi, bool absorbing,
                     std::span<double> out, std::span<double> scratch) {
  const std::size_t n = psi.size();
  const auto p = static_cast<std::size_t>(lv.p);
  const int L = lv.n_levels;
  const auto c = lv.per_target_rate;

  // Block sums for level i live at scratch[off[i] .. off[i] + n / p^(i+1)).
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
  for (std::size_t b = 0; b < count[0]; ++b) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) s += psi[b * p + j];
    scratch[off[0] + b] = s;
  }
  for (int i = 1; i < L; ++i) {
    const std::size_t o = off[static_cast<std::size_t>(i)];
    const std::size_t prev = off[static_cast<std::size_t>(i - 1)];
    for (std::size_t b = 0; b < count[static_cast<std::size_t>(i)]; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < p; ++j) s += scratch[prev + b * p + j];
      scratch[o + b] = s;
    }
  }

  // Ball values at the top level for index 0 are needed for the absorbing
  // correction before they are overwritten by the weighted accumulation.
  double removed_gain = 0.0;
  if (absorbing) {
    for (int i = lv.first_outside_level; i < L; ++i) {
      const double ball = scratch[off[static_cast<std::size_t>(i)]];
      const double inner = i == 0 ? psi[0] : scratch[off[static_cast<std::size_t>(i - 1)]];
      removed_gain += c[static_cast<std::size_t>(i)] * (ball - inner);
    }
  }

  // Top-down: acc_i(b) = (c_i - c_{i+1}) Ball_i(b) + acc_{i+1}(b / p), in place.
  for (int i = L - 1; i >= 0; --i) {
    const std::size_t o = off[static_cast<std::size_t>(i)];
    const double w = c[static_cast<std::size_t>(i)] - (i + 1 < L ? c[static_cast<std::size_t>(i + 1)] : 0.0);
    const bool has_parent = i + 1 < L;
    const std::size_t po = has_parent ? off[static_cast<std::size_t>(i + 1)] : 0;
    for (std::size_t b = 0; b < count[static_cast<std::size_t>(i)]; ++b) {
      scratch[o + b] = w * scratch[o + b] + (has_parent ? scratch[po + b / p] : 0.0);
    }
  }
  const double diag = c[0] + lv.loss_rate;
  for (std::size_t x = 0; x < n; ++x) {
    const double acc = L > 0 ? scratch[off[0] + x / p] : 0.0;
    out[x] = acc - diag * psi[x];
  }
  if (absorbing)
    for (std::size_t x = 0; x < lv.zp_states && x < n; ++x) out[x] -= removed_gain;
}

}  // namespace umfpt::kernels::serial
