#include <doctest.h>

#include <cmath>

#include "umfpt/errors.hpp"
#include "umfpt/params.hpp"
#include "umfpt/spectral.hpp"
#include "umfpt/volterra.hpp"

using namespace umfpt;

TEST_CASE("sampled functions check their sizes") {
  const auto grid = make_time_grid(1.0, 10);
  CHECK_THROWS_AS(SampledFunction(grid, std::vector<double>(5)), GridError);
  const auto f = sample(grid, [](double t) { return t * t; });
  CHECK(f.size() == 11);
  CHECK(f[10] == doctest::Approx(1.0));
}

TEST_CASE("convolution and cumulative trapezoid") {
  const auto grid = make_time_grid(2.0, 2000);
  const auto one = sample(grid, [](double) { return 1.0; });
  const auto lin = sample(grid, [](double t) { return t; });
  // 1 * t = t^2 / 2, exact for the trapezoid rule on linear integrands.
  const auto c = convolve(one, lin);
  for (std::size_t i = 0; i < grid.size(); i += 250)
    CHECK(c[i] == doctest::Approx(0.5 * grid.at(i) * grid.at(i)).epsilon(1e-12).scale(1.0));
  const auto cum = cumulative_trapezoid(lin);
  CHECK(cum[2000] == doctest::Approx(2.0).epsilon(1e-12));

  const auto other = sample(make_time_grid(2.0, 1000), [](double) { return 1.0; });
  CHECK_THROWS_AS(convolve(one, other), GridError);
}

TEST_CASE("return rate sampling starts at zero") {
  const auto g = sample_return_rate(make_params(2, 1.0), make_time_grid(5.0, 500));
  CHECK(g[0] == 0.0);
  CHECK(g[1] > 0.0);
}

TEST_CASE("Volterra density satisfies the renewal equation on the grid") {
  const auto params = make_params(2, 1.0);
  const auto grid = make_time_grid(10.0, 1000);
  const auto g = sample_return_rate(params, grid);
  const auto f = solve_volterra_fpt(g);
  const auto gf = convolve(g, f);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(f[i] + gf[i] == doctest::Approx(g[i]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("Volterra density converges to the spectral one at second order") {
  const auto params = make_params(3, 2.0);
  const auto d = decompose(params);
  double prev = 0.0;
  for (double h : {0.04, 0.02}) {
    const auto grid = make_time_grid_with_step(8.0, h);
    const auto f = solve_volterra_fpt(sample_return_rate(params, grid));
    double err = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
      err = std::max(err, std::fabs(f[i] - fpt_density_spectral(d, grid.at(i)).value));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.15));
    prev = err;
  }
}

TEST_CASE("return-count distributions") {
  const auto params = make_params(2, 0.5);
  const auto grid = make_time_grid(20.0, 2000);
  const auto pipe = run_volterra_pipeline(params, grid, 12);
  const auto& dist = pipe.dist;
  REQUIRE(dist.q.size() == 13);
  REQUIRE(dist.h.size() == 13);
  REQUIRE(dist.q_next.size() == grid.size());
  const auto cdf = cumulative_trapezoid(pipe.f);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(dist.q[0][i] == 1.0);
    CHECK(dist.q[1][i] == doctest::Approx(cdf[i]).epsilon(1e-12).scale(1.0));
    double total = 0.0;
    for (int m = 0; m <= 12; ++m) total += dist.h[static_cast<std::size_t>(m)][i];
    CHECK(total + dist.q_next[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(dist.q_row(2).values() == dist.q[2]);
  CHECK_THROWS(dist.q_row(13));

  const auto mu = mean_returns_from_hm(dist);
  const auto quad = mean_returns_quadrature(pipe.g);
  for (std::size_t i = 0; i < grid.size(); i += 100) {
    CHECK(mu.deficit_lower[i] <= mu.deficit_upper[i]);
    CHECK(std::fabs(mu.mu[i] - quad[i]) <= mu.deficit_upper[i] + 1e-6);
  }
}

TEST_CASE("pipeline rejects a negative m_max") {
  CHECK_THROWS_AS(run_volterra_pipeline(make_params(2, 1.0), make_time_grid(1.0, 10), -1),
                  ParameterError);
}

TEST_CASE("each m-th return density has a single maximum") {
  for (double a : {0.5, 2.0}) {
    const auto pipe = run_volterra_pipeline(make_params(2, a), make_time_grid(100.0, 10000), 4);
    for (int m = 1; m <= 4; ++m) {
      const auto& q = pipe.dist.q[static_cast<std::size_t>(m)];
      std::vector<double> density(q.size() - 1);
      for (std::size_t i = 0; i + 1 < q.size(); ++i) density[i] = q[i + 1] - q[i];
      int sign_changes = 0;
      int last = 0;
      for (std::size_t i = 0; i + 1 < density.size(); ++i) {
        const double slope = density[i + 1] - density[i];
        const int s = slope > 0 ? 1 : (slope < 0 ? -1 : 0);
        if (s != 0 && last != 0 && s != last) ++sign_changes;
        if (s != 0) last = s;
      }
      CAPTURE(a);
      CAPTURE(m);
      CHECK(sign_changes == 1);
    }
  }
}
