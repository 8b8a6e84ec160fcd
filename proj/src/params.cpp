#include "umfpt/params.hpp"

#include <cmath>
#include <string>

#include "umfpt/errors.hpp"

namespace umfpt {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::domain: return "domain";
    case ErrorKind::pole_proximity: return "pole_proximity";
    case ErrorKind::root_isolation: return "root_isolation";
    case ErrorKind::degenerate_residue: return "degenerate_residue";
    case ErrorKind::grid: return "grid";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::integration: return "integration";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

bool is_prime(int n) noexcept {
  if (n < 2) return false;
  for (int d = 2; d <= n / d; ++d)
    if (n % d == 0) return false;
  return true;
}

ModelParams make_params(int p, double alpha) {
  if (!is_prime(p))
    throw ParameterError("p must be prime, got " + std::to_string(p));
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ParameterError("alpha must be positive and finite, got " + std::to_string(alpha));

  const double pd = p;
  const double p_alpha = std::pow(pd, alpha);
  const double p_neg_alpha_1 = std::pow(pd, -alpha - 1.0);

  ModelParams m;
  m.p_ = p;
  m.alpha_ = alpha;
  m.gamma_p_neg_alpha_ = (1.0 - p_neg_alpha_1) / (1.0 - p_alpha);
  m.kappa_ = -1.0 / m.gamma_p_neg_alpha_;
  m.b_alpha_ = (1.0 - 1.0 / pd) / (1.0 - p_neg_alpha_1);
  const double ratio = (p_alpha - 1.0) / (pd - 1.0);
  m.c_alpha_ = (pd / p_alpha) * ratio * ratio;
  return m;
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> t(size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = at(i);
  return t;
}

std::size_t TimeGrid::index_at_or_below(double t) const noexcept {
  if (t <= 0.0) return 0;
  if (t >= t_max_) return n_steps_;
  auto i = static_cast<std::size_t>(std::floor(t / h_ * (1.0 + 1e-14)));
  return i > n_steps_ ? n_steps_ : i;
}

TimeGrid make_time_grid(double t_max, std::size_t n_steps) {
  if (!(t_max > 0.0) || !std::isfinite(t_max))
    throw ParameterError("time grid needs t_max > 0");
  if (n_steps < 1) throw ParameterError("time grid needs n_steps >= 1");
  TimeGrid g;
  g.t_max_ = t_max;
  g.n_steps_ = n_steps;
  g.h_ = t_max / static_cast<double>(n_steps);
  return g;
}

TimeGrid make_time_grid_with_step(double t_max, double h) {
  if (!(h > 0.0)) throw ParameterError("time grid needs h > 0");
  if (!(t_max > 0.0)) throw ParameterError("time grid needs t_max > 0");
  auto n = static_cast<std::size_t>(std::llround(t_max / h));
  if (n < 1) n = 1;
  return make_time_grid(static_cast<double>(n) * h, n);
}

}  // namespace umfpt
