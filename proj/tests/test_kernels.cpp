#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "umfpt/hierarchy.hpp"
#include "umfpt/kernels.hpp"
#include "umfpt/params.hpp"

using namespace umfpt;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::fabs(a[i] - b[i]) / std::max(1e-300, std::fabs(b[i]) + 1e-12));
  return worst;
}

}  // namespace

// Sizes above the OpenMP activation threshold so the parallel paths run.
TEST_CASE("exp_series: OpenMP matches serial") {
  const auto lambda = random_vector(150, 1, 0.0, 3.0);
  const auto c = random_vector(150, 2, -1.0, 1.0);
  const auto t = random_vector(9000, 3, 0.0, 20.0);
  std::vector<double> a(t.size()), b(t.size());
  kernels::serial::exp_series(lambda, c, t, a);
  kernels::omp::exp_series(lambda, c, t, b);
  CHECK(max_rel_diff(b, a) < 1e-12);
}

TEST_CASE("convolve_trapezoid: serial against a direct weighted sum, OpenMP against serial") {
  const std::size_t n = 6000;
  const auto x = random_vector(n, 4);
  const auto y = random_vector(n, 5);
  const double h = 0.003;
  std::vector<double> s(n), o(n);
  kernels::serial::convolve_trapezoid(x, y, h, s);
  kernels::omp::convolve_trapezoid(x, y, h, o);
  CHECK(s[0] == 0.0);
  for (std::size_t i : {std::size_t{1}, std::size_t{2}, std::size_t{377}, n - 1}) {
    double want = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      const double w = (j == 0 || j == i) ? 0.5 : 1.0;
      want += w * x[i - j] * y[j];
    }
    CHECK(s[i] == doctest::Approx(h * want).epsilon(1e-12));
  }
  CHECK(max_rel_diff(o, s) < 1e-12);
}

TEST_CASE("volterra_forward solves a kernel with a closed-form resolvent") {
  // g = a (e^-bt - e^-ct) has G = a (c-b) / ((s+b)(s+c)); F = G/(1+G) has
  // poles at the roots r1, r2 of s^2 + (b+c) s + bc + a(c-b).
  const double a = 0.8, b = 0.5, c = 2.0;
  const double disc = std::sqrt((b + c) * (b + c) - 4.0 * (b * c + a * (c - b)));
  const double r1 = 0.5 * ((b + c) - disc);
  const double r2 = 0.5 * ((b + c) + disc);
  auto exact = [&](double t) { return a * (c - b) * (std::exp(-r1 * t) - std::exp(-r2 * t)) / (r2 - r1); };

  double prev_err = 0.0;
  for (double h : {0.02, 0.01}) {
    const std::size_t n = static_cast<std::size_t>(std::lround(10.0 / h)) + 1;
    std::vector<double> g(n), f(n), fo(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = a * (std::exp(-b * i * h) - std::exp(-c * i * h));
    kernels::serial::volterra_forward(g, h, f);
    kernels::omp::volterra_forward(g, h, fo);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::fabs(f[i] - exact(i * h)));
    CHECK(err < 5e-4);
    CHECK(max_rel_diff(fo, f) < 1e-12);
    if (prev_err > 0.0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.1));  // second order
    prev_err = err;
  }
}

TEST_CASE("volterra_forward: OpenMP matches serial on a long grid") {
  auto g = random_vector(7000, 6);
  g[0] = 0.0;
  std::vector<double> s(g.size()), o(g.size());
  kernels::serial::volterra_forward(g, 1e-3, s);
  kernels::omp::volterra_forward(g, 1e-3, o);
  CHECK(max_rel_diff(o, s) < 1e-10);
}

TEST_CASE("hierarchy_apply: serial and OpenMP agree with a dense product") {
  for (bool absorbing : {false, true}) {
    const auto h = build_hierarchy(make_params(2, 1.0), 6, 3);
    const auto n = h.n_states();
    const auto dense = dense_generator(h, absorbing);
    const auto psi = random_vector(n, 7);
    std::vector<double> want(n, 0.0), s(n), o(n), scratch(n);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) want[x] += dense[x * n + y] * psi[y];
    const auto lv = h.kernel_levels();
    kernels::serial::hierarchy_apply(lv, psi, absorbing, s, scratch);
    kernels::omp::hierarchy_apply(lv, psi, absorbing, o, scratch);
    for (std::size_t x = 0; x < n; ++x) {
      CHECK(s[x] == doctest::Approx(want[x]).epsilon(1e-11).scale(1.0));
      CHECK(o[x] == doctest::Approx(s[x]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("hierarchy_apply: OpenMP matches serial above the parallel threshold") {
  const auto h = build_hierarchy(make_params(3, 0.5), 6, 3);
  const auto n = h.n_states();
  const auto psi = random_vector(n, 8);
  std::vector<double> s(n), o(n), scratch(n);
  kernels::serial::hierarchy_apply(h.kernel_levels(), psi, true, s, scratch);
  kernels::omp::hierarchy_apply(h.kernel_levels(), psi, true, o, scratch);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::fabs(o[i] - s[i]));
  CHECK(worst < 1e-13);
}
