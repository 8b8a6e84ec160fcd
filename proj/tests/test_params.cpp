#include <doctest.h>

#include <cmath>

#include "umfpt/errors.hpp"
#include "umfpt/params.hpp"

using namespace umfpt;

TEST_CASE("prime detection") {
  CHECK_FALSE(is_prime(0));
  CHECK_FALSE(is_prime(1));
  CHECK(is_prime(2));
  CHECK(is_prime(3));
  CHECK_FALSE(is_prime(4));
  CHECK(is_prime(7919));
  CHECK_FALSE(is_prime(7917));
}

TEST_CASE("model constants at p=2 alpha=1") {
  const auto m = make_params(2, 1.0);
  CHECK(m.gamma_p_neg_alpha() == doctest::Approx(-0.75).epsilon(1e-15));
  CHECK(m.kappa() == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(m.b_alpha() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.recurrent());
  CHECK(m.return_probability() == 1.0);
}

TEST_CASE("return probability at p=2 alpha=1/2 is 3 sqrt 2 - 4") {
  const auto m = make_params(2, 0.5);
  CHECK(m.c_alpha() == doctest::Approx(3.0 * std::sqrt(2.0) - 4.0).epsilon(1e-14));
  CHECK(m.c_alpha() == doctest::Approx(0.2426407).epsilon(1e-7));
  CHECK_FALSE(m.recurrent());
  CHECK(m.return_probability() == m.c_alpha());
}

TEST_CASE("constants satisfy their defining relations on a parameter sweep") {
  for (int p : {2, 3, 5, 7})
    for (double a : {0.25, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0}) {
      const auto m = make_params(p, a);
      CAPTURE(p);
      CAPTURE(a);
      CHECK(m.gamma_p_neg_alpha() < 0.0);
      CHECK(m.kappa() * m.gamma_p_neg_alpha() == doctest::Approx(-1.0));
      CHECK(m.b_alpha() > 0.0);
      CHECK(m.b_alpha() < 1.0);
      // The escape rate of Z_p is the sum of all outward jump rates.
      double escape = 0.0;
      for (int l = 1; l < 400; ++l) escape += m.kappa() * (1.0 - 1.0 / p) * std::pow(p, -a * l);
      CHECK(escape == doctest::Approx(m.b_alpha()).epsilon(1e-12));
      if (a < 1.0) {
        CHECK(m.c_alpha() > 0.0);
        CHECK(m.c_alpha() < 1.0);
      }
    }
}

TEST_CASE("escape rate lies between the first pole and one") {
  for (int p : {2, 3, 5, 7})
    for (double a : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
      const auto m = make_params(p, a);
      CHECK(std::pow(p, -a) < m.b_alpha());
      CHECK(m.b_alpha() < 1.0);
      CHECK(m.kappa() > 0.0);
    }
}

TEST_CASE("return probability increases with alpha and reaches one at alpha = 1") {
  for (int p : {2, 3, 5, 7}) {
    double prev = 0.0;
    for (int i = 1; i < 100; ++i) {
      const double c = make_params(p, i / 100.0).c_alpha();
      CHECK(c > prev);
      CHECK(c < 1.0);
      prev = c;
    }
    CHECK(make_params(p, 1.0).c_alpha() == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(make_params(1, 1.0), ParameterError);
  CHECK_THROWS_AS(make_params(4, 1.0), ParameterError);
  CHECK_THROWS_AS(make_params(-3, 1.0), ParameterError);
  CHECK_THROWS_AS(make_params(2, 0.0), ParameterError);
  CHECK_THROWS_AS(make_params(2, -1.0), ParameterError);
  CHECK_THROWS_AS(make_params(2, std::nan("")), ParameterError);
}

TEST_CASE("time grid points") {
  const auto g = make_time_grid(10.0, 10);
  CHECK(g.h() == 1.0);
  for (std::size_t i = 0; i <= 10; ++i) CHECK(g.at(i) == static_cast<double>(i));
  const auto q = make_time_grid(1.0, 4);
  CHECK(q.points() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("time grids") {
  const auto g = make_time_grid(50.0, 5000);
  CHECK(g.size() == 5001);
  CHECK(g.h() == doctest::Approx(0.01));
  CHECK(g.at(0) == 0.0);
  CHECK(g.at(5000) == 50.0);
  CHECK(g.points().size() == 5001);
  CHECK(g.index_at_or_below(0.015) == 1);
  CHECK(g.index_at_or_below(-1.0) == 0);
  CHECK(g.index_at_or_below(1e9) == 5000);

  const auto s = make_time_grid_with_step(20.0, 0.01);
  CHECK(s.n_steps() == 2000);
  CHECK(s.t_max() == doctest::Approx(20.0));
  CHECK(make_time_grid(20.0, 2000) == make_time_grid(20.0, 2000));
  CHECK_FALSE(make_time_grid(20.0, 2000) == make_time_grid(20.0, 1000));

  CHECK_THROWS_AS(make_time_grid(0.0, 10), ParameterError);
  CHECK_THROWS_AS(make_time_grid(1.0, 0), ParameterError);
  CHECK_THROWS_AS(make_time_grid_with_step(1.0, -0.1), ParameterError);
}
