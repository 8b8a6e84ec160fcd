#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "umfpt/errors.hpp"
#include "umfpt/hierarchy.hpp"
#include "umfpt/params.hpp"
#include "umfpt/spectral.hpp"

#include <omp.h>

using namespace umfpt;

namespace {

// Highest base-p digit in which two indices differ, or -1.
int highest_differing_digit(std::uint64_t a, std::uint64_t b, int p) {
  int level = -1;
  for (int i = 0; a != b || (a | b); ++i) {
    if (a % p != b % p) level = i;
    a /= p;
    b /= p;
    if (a == 0 && b == 0) break;
  }
  return level;
}

}  // namespace

TEST_CASE("level rates and the outside rate at p=2 alpha=1") {
  const auto h = build_hierarchy(make_params(2, 1.0), 1, 1);
  REQUIRE(h.n_levels() == 2);
  CHECK(h.level_rates()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(h.level_rates()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(h.distance_exponent(0) == 0);
  CHECK(h.distance_exponent(1) == 1);

  const auto wide = build_hierarchy(make_params(2, 1.0), 6, 1);
  CHECK(wide.outside_rate() == doctest::Approx(4.0 / 3.0 * std::pow(2.0, -7)).epsilon(1e-14));
}

TEST_CASE("escape from Z_p happens at rate B_alpha whatever the truncation") {
  for (int p : {2, 3})
    for (double a : {0.5, 1.0, 2.0})
      for (int M : {1, 4, 9}) {
        const auto params = make_params(p, a);
        const auto h = build_hierarchy(params, M, 0);
        CHECK(h.total_rate() + h.outside_rate() == doctest::Approx(params.b_alpha()).epsilon(1e-13));
      }
}

TEST_CASE("per-target rates split each level evenly") {
  const auto h = build_hierarchy(make_params(3, 1.5), 3, 2);
  for (int i = 0; i < h.n_levels(); ++i) {
    const double targets = 2.0 * std::pow(3.0, i);  // (p-1) p^i cosets at that distance
    CHECK(h.per_target_rates()[static_cast<std::size_t>(i)] * targets ==
          doctest::Approx(h.level_rates()[static_cast<std::size_t>(i)]).epsilon(1e-14));
  }
}

TEST_CASE("distances follow the digit layout") {
  const auto h = build_hierarchy(make_params(3, 1.0), 3, 2);
  for (std::uint64_t a = 0; a < h.n_states(); a += 7)
    for (std::uint64_t b = 0; b < h.n_states(); b += 5)
      CHECK(h.distance_level(a, b) == highest_differing_digit(a, b, 3));
  CHECK(h.zp_states() == 9);
  CHECK(h.in_zp(8));
  CHECK_FALSE(h.in_zp(9));
}

TEST_CASE("dense generator built from the digit rule") {
  const auto h = build_hierarchy(make_params(2, 1.0), 4, 2);
  const auto n = h.n_states();
  for (bool absorbing : {false, true}) {
    const auto A = dense_generator(h, absorbing);
    for (std::uint64_t y = 0; y < n; ++y) {
      double column = 0.0;
      for (std::uint64_t x = 0; x < n; ++x) {
        double want;
        if (x == y) {
          want = -(h.total_rate() + h.outside_rate());
        } else {
          const int lvl = highest_differing_digit(x, y, 2);
          want = h.per_target_rates()[static_cast<std::size_t>(lvl)];
          if (absorbing && h.in_zp(x) && !h.in_zp(y)) want = 0.0;
        }
        CHECK(A[x * n + y] == doctest::Approx(want).epsilon(1e-15).scale(1.0));
        column += A[x * n + y];
      }
      if (!absorbing) CHECK(column == doctest::Approx(-h.outside_rate()).epsilon(1e-12).scale(1.0));
      if (absorbing && !h.in_zp(y))
        CHECK(column == doctest::Approx(-h.outside_rate() - h.rate_into_zp(y)).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("capacity limits") {
  const auto params = make_params(2, 1.0);
  CHECK_THROWS_AS(build_hierarchy(params, 21, 0), CapacityError);
  CHECK_NOTHROW(build_hierarchy(params, 40, 0, std::uint64_t{1} << 62));
  CHECK_THROWS_AS(dense_generator(build_hierarchy(params, 13, 0), false), CapacityError);
  CHECK_THROWS_AS(integrate_absorbed_master(build_hierarchy(params, 15, 0), make_time_grid(1.0, 10)),
                  CapacityError);
  CHECK_THROWS_AS(build_hierarchy(params, 0, 2), ParameterError);
  CHECK_THROWS_AS(build_hierarchy(params, 2, -1), ParameterError);
}

TEST_CASE("trajectories are reproducible and indexed streams differ") {
  const auto h = build_hierarchy(make_params(2, 1.0), 6, 2);
  const auto a = sample_trajectory(h, 42, 50.0, 3);
  const auto b = sample_trajectory(h, 42, 50.0, 3);
  const auto c = sample_trajectory(h, 42, 50.0, 4);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].state == b.events[i].state);
  }
  CHECK(a.start < h.zp_states());
  const bool same = a.events.size() == c.events.size() &&
                    std::equal(a.events.begin(), a.events.end(), c.events.begin(),
                               [](const JumpEvent& x, const JumpEvent& y) { return x.time == y.time; });
  CHECK_FALSE(same);

  for (std::size_t i = 0; i < a.events.size(); ++i) {
    const auto& e = a.events[i];
    const auto prev = i ? a.events[i - 1].state : a.start;
    if (e.flagged) {
      CHECK(e.state == prev);
      CHECK(e.level == -1);
    } else {
      CHECK(h.distance_level(prev, e.state) == e.level);
    }
  }
}

TEST_CASE("holding times are exponential with the total event rate") {
  const auto h = build_hierarchy(make_params(3, 0.5), 5, 1);
  const double rate = h.total_rate() + h.outside_rate();
  const int n = 40000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto tr = sample_trajectory(h, 9, 50.0 / rate, static_cast<std::uint64_t>(i));
    REQUIRE_FALSE(tr.events.empty());
    const double w = tr.events.front().time;
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::fabs(mean - 1.0 / rate) < 4.0 * (1.0 / rate) / std::sqrt(n));
  CHECK(sd == doctest::Approx(1.0 / rate).epsilon(0.03));
}

TEST_CASE("jump levels follow the level rates") {
  const auto h = build_hierarchy(make_params(2, 1.0), 4, 0);
  std::vector<double> counts(static_cast<std::size_t>(h.n_levels()), 0.0);
  double total = 0.0;
  for (std::uint64_t i = 0; i < 4000; ++i)
    for (const auto& e : sample_trajectory(h, 5, 400.0, i).events)
      if (!e.flagged) {
        counts[static_cast<std::size_t>(e.level)] += 1.0;
        total += 1.0;
      }
  for (int l = 0; l < h.n_levels(); ++l) {
    const double want = h.level_rates()[static_cast<std::size_t>(l)] / h.total_rate();
    const double sigma = std::sqrt(want * (1.0 - want) / total);
    CHECK(std::fabs(counts[static_cast<std::size_t>(l)] / total - want) < 3.0 * sigma);
  }
  CHECK(total > 1e6);
}

TEST_CASE("first-passage estimates are reproducible for a fixed seed") {
  const auto h = build_hierarchy(make_params(2, 2.0), 6, 2);
  const auto a = estimate_fpt(h, 3000, 100.0, 7, true);
  const auto b = estimate_fpt(h, 3000, 100.0, 7, true);
  CHECK(a.samples == b.samples);
  CHECK(a.return_events == b.return_events);
  CHECK(a.n_censored == b.n_censored);
  CHECK(std::is_sorted(a.samples.begin(), a.samples.end()));
  CHECK(a.samples.size() + a.n_censored == a.n_traj);
  const auto c = estimate_fpt(h, 3000, 100.0, 8);
  CHECK(a.samples != c.samples);
  CHECK(c.return_events.empty());
}

TEST_CASE("the first-passage flux does not depend on the inner resolution") {
  const auto params = make_params(2, 1.0);
  const auto grid = make_time_grid(10.0, 200);
  // Inner levels raise the total rate and so change the RK4 step; a small
  // step factor keeps the discretization error below the tolerance.
  MasterOptions opt;
  opt.step_factor = 0.01;
  const auto coarse = integrate_absorbed_master(build_hierarchy(params, 6, 0), grid, opt);
  const auto fine = integrate_absorbed_master(build_hierarchy(params, 6, 3), grid, opt);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(fine.flux[i] == doctest::Approx(coarse.flux[i]).epsilon(1e-9).scale(1.0));
    CHECK(fine.absorbed[i] == doctest::Approx(coarse.absorbed[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("master equation conserves mass") {
  const auto h = build_hierarchy(make_params(3, 1.0), 4, 1);
  const auto grid = make_time_grid(20.0, 100);
  for (bool absorbing : {false, true}) {
    MasterOptions opt;
    opt.absorbing = absorbing;
    const auto r = integrate_absorbed_master(h, grid, opt);
    CHECK(r.max_mass_defect < 1e-10);
    CHECK(r.zp_mass[0] == doctest::Approx(1.0));
    CHECK(r.flux[0] == 0.0);
    if (!absorbing) {
      CHECK(r.absorbed[grid.n_steps()] == 0.0);
      CHECK(r.total_mass[grid.n_steps()] + r.escaped[grid.n_steps()] == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  MasterOptions bad;
  bad.step_factor = 40.0;
  CHECK_THROWS_AS(integrate_absorbed_master(h, make_time_grid(200.0, 10), bad), IntegrationError);
}

TEST_CASE("absorbing master equation empties Z_p at rate B_alpha with fourth-order error") {
  const auto params = make_params(2, 2.0);
  const auto grid = make_time_grid(2.0, 20);
  const auto h = build_hierarchy(params, 12, 0);
  std::vector<double> errors;
  for (double factor : {0.1, 0.05}) {
    MasterOptions opt;
    opt.step_factor = factor;
    const auto r = integrate_absorbed_master(h, grid, opt);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::fabs(r.zp_mass[i] / std::exp(-params.b_alpha() * grid.at(i)) - 1.0));
    errors.push_back(worst);
  }
  CHECK(errors[0] < 1e-6);
  // One substep per grid interval against two.
  CHECK(errors[0] / errors[1] == doctest::Approx(16.0).epsilon(0.25));
}

TEST_CASE("free master equation reproduces the survival mass at short times") {
  // Paths reaching distance p^M by t = 2 are rare enough to be invisible here.
  const auto params = make_params(2, 2.0);
  const auto grid = make_time_grid(2.0, 20);
  MasterOptions opt;
  opt.absorbing = false;
  const auto r = integrate_absorbed_master(build_hierarchy(params, 12, 0), grid, opt);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(r.zp_mass[i] == doctest::Approx(survival_series(params, grid.at(i))).epsilon(1e-6));
}

TEST_CASE("return counts from recorded trajectories") {
  const auto h = build_hierarchy(make_params(2, 1.0), 6, 1);
  const auto res = estimate_fpt(h, 4000, 20.0, 3, true);
  const auto grid = make_time_grid(20.0, 40);
  const auto counts = estimate_return_counts(res, grid, 4);
  REQUIRE(counts.q_hat.size() == 5);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(counts.q_hat[0][i] == 1.0);
    for (std::size_t m = 1; m < 5; ++m) CHECK(counts.q_hat[m][i] <= counts.q_hat[m - 1][i]);
    if (i) CHECK(counts.mu_hat[i] >= counts.mu_hat[i - 1]);
  }
  // q_hat[1] is the empirical first-passage CDF.
  const auto n1 = std::upper_bound(res.samples.begin(), res.samples.end(), 10.0) - res.samples.begin();
  CHECK(counts.q_hat[1][20] == doctest::Approx(static_cast<double>(n1) / 4000.0));
  CHECK_THROWS_AS(estimate_return_counts(estimate_fpt(h, 10, 1.0, 3), grid, 2), ParameterError);
}

TEST_CASE("occupation of Z_p starts at one and decays") {
  const auto h = build_hierarchy(make_params(2, 2.0), 8, 0);
  const auto occ = estimate_zp_occupation(h, 20000, {0.0, 0.5, 2.0}, 11);
  CHECK(occ.fraction[0] == 1.0);
  // Particles that came back count as well, so the reference is the survival mass.
  const double want = survival_series(make_params(2, 2.0), 0.5);
  CHECK(std::fabs(occ.fraction[1] - want) < 4.0 * std::sqrt(want * (1 - want) / 20000));
  CHECK(occ.fraction[2] < occ.fraction[1]);
}

TEST_CASE("Kolmogorov-Smirnov helpers") {
  CHECK(ks_critical_value(100, 0.01) == doctest::Approx(0.16276));
  CHECK(ks_critical_value(10000, 0.05) == doctest::Approx(0.013581));
  CHECK_THROWS_AS(ks_critical_value(10, 0.2), ParameterError);
  auto uniform = [](double t) { return std::min(1.0, std::max(0.0, t)); };
  CHECK(ks_subdistribution_distance({0.5}, 1, 1.0, uniform) == doctest::Approx(0.5));
  // Two of four samples returned before t_max = 0.5; the rest are censored.
  CHECK(ks_subdistribution_distance({0.1, 0.2}, 4, 0.5, uniform) == doctest::Approx(0.3));
}

TEST_CASE("simulated first passage agrees with the spectral CDF at moderate size") {
  const auto params = make_params(2, 2.0);
  const auto h = build_hierarchy(params, 8, 0);
  const auto res = estimate_fpt(h, 20000, 200.0, 99);
  const auto d = decompose(params);
  const double ks = ks_subdistribution_distance(res.samples, res.n_traj, res.t_max,
                                                [&](double t) { return fpt_cdf_spectral(d, t).value; });
  const double a = res.truncation_bias_allowance();
  CHECK(ks <= ks_critical_value(res.n_traj, 0.001) + a + 3.0 * std::sqrt(a / res.n_traj));
}

TEST_CASE("results do not depend on the number of threads") {
  const auto h = build_hierarchy(make_params(2, 1.0), 6, 2);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = estimate_fpt(h, 2000, 50.0, 21, true);
  omp_set_num_threads(3);
  const auto three = estimate_fpt(h, 2000, 50.0, 21, true);
  omp_set_num_threads(saved);
  CHECK(one.samples == three.samples);
  CHECK(one.return_events == three.return_events);
  CHECK(one.n_flagged == three.n_flagged);
}

TEST_CASE("a wider truncation moves the empirical CDF toward the exact one") {
  const std::uint64_t n = 20000;
  for (double a : {0.5, 1.0, 2.0}) {
    const auto params = make_params(2, a);
    const auto d = decompose(params);
    std::vector<double> ks;
    for (int M : {4, 6, 8}) {
      const auto res = estimate_fpt(build_hierarchy(params, M, 0), n, 1e3, 17);
      ks.push_back(ks_subdistribution_distance(res.samples, res.n_traj, res.t_max,
                                               [&](double t) { return fpt_cdf_spectral(d, t).value; }));
    }
    CAPTURE(a);
    CHECK(ks[1] < ks[0]);
    if (a <= 1.0) {
      CHECK(ks[2] < ks[1]);
    } else {
      // Both wide truncations sit at the sampling-noise floor here.
      CHECK(ks[2] <= ks[1] + ks_critical_value(n, 0.01));
    }
  }
}
