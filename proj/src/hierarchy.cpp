#include "umfpt/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "umfpt/errors.hpp"

namespace umfpt {

TruncatedHierarchy build_hierarchy(const ModelParams& params, int M, int N, std::uint64_t state_cap) {
  if (M < 1) throw ParameterError("hierarchy needs M >= 1");
  if (N < 0) throw ParameterError("hierarchy needs N >= 0");
  const auto p = static_cast<std::uint64_t>(params.p());
  TruncatedHierarchy h(params);
  h.M_ = M;
  h.N_ = N;
  h.powers_.assign(1, 1);
  for (int i = 0; i < M + N; ++i) {
    if (h.powers_.back() > state_cap / p)
      throw CapacityError("p^(M+N) exceeds the state cap of " + std::to_string(state_cap));
    h.powers_.push_back(h.powers_.back() * p);
  }
  h.n_states_ = h.powers_.back();
  h.zp_states_ = h.powers_[static_cast<std::size_t>(N)];

  const double pd = params.p();
  const double alpha = params.alpha();
  const double kappa = params.kappa();
  const double one_minus_inv_p = 1.0 - 1.0 / pd;
  for (int i = 0; i < M + N; ++i) {
    const double l = h.distance_exponent(i);
    h.level_rates_.push_back(kappa * one_minus_inv_p * std::pow(pd, -alpha * l));
    h.per_target_rates_.push_back(kappa * std::pow(pd, -l * (alpha + 1.0) - N));
    h.total_rate_ += h.level_rates_.back();
  }
  h.outside_rate_ =
      kappa * one_minus_inv_p * std::pow(pd, -alpha * (M + 1)) / (1.0 - std::pow(pd, -alpha));
  return h;
}

int TruncatedHierarchy::distance_level(std::uint64_t a, std::uint64_t b) const noexcept {
  if (a == b) return -1;
  // Highest base-p digit in which they differ.
  int level = 0;
  for (int i = n_levels() - 1; i >= 0; --i) {
    const std::uint64_t unit = powers_[static_cast<std::size_t>(i)];
    if ((a / unit) != (b / unit)) {
      level = i;
      break;
    }
  }
  return level;
}

double TruncatedHierarchy::rate_into_zp(std::uint64_t state) const noexcept {
  if (in_zp(state)) return 0.0;
  const int lvl = distance_level(state, 0);
  return per_target_rates_[static_cast<std::size_t>(lvl)] * static_cast<double>(zp_states_);
}

kernels::HierarchyLevels TruncatedHierarchy::kernel_levels() const noexcept {
  kernels::HierarchyLevels lv;
  lv.p = params_.p();
  lv.n_levels = n_levels();
  lv.per_target_rate = per_target_rates_;
  lv.loss_rate = total_rate_ + outside_rate_;
  lv.zp_states = zp_states_;
  lv.first_outside_level = N_;
  return lv;
}

std::vector<double> dense_generator(const TruncatedHierarchy& h, bool absorbing) {
  const auto n = h.n_states();
  if (n > (std::uint64_t{1} << 12)) throw CapacityError("dense generator limited to 4096 states");
  std::vector<double> a(n * n, 0.0);
  const double loss = h.total_rate() + h.outside_rate();
  for (std::uint64_t x = 0; x < n; ++x) {
    for (std::uint64_t y = 0; y < n; ++y) {
      if (x == y) {
        a[x * n + y] = -loss;
        continue;
      }
      if (absorbing && h.in_zp(x) && !h.in_zp(y)) continue;
      a[x * n + y] = h.per_target_rates()[static_cast<std::size_t>(h.distance_level(x, y))];
    }
  }
  return a;
}

// ---------------------------------------------------------------------------

namespace {

class Walker {
 public:
  Walker(const TruncatedHierarchy& h, std::uint64_t seed, std::uint64_t index)
      : h_(h), p_(static_cast<std::uint64_t>(h.params().p())) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    rng_.seed(seq);
    cumulative_.reserve(h.level_rates().size());
    double c = 0.0;
    for (double r : h.level_rates()) cumulative_.push_back(c += r);
    event_rate_ = h.total_rate() + h.outside_rate();
    state_ = std::uniform_int_distribution<std::uint64_t>(0, h.zp_states() - 1)(rng_);
  }

  std::uint64_t state() const noexcept { return state_; }

  /// Advances to the next event; returns its level index, or -1 for a null
  /// (outside) event.
  int step(double& t) {
    t += -std::log1p(-unit_(rng_)) / event_rate_;
    const double u = unit_(rng_) * event_rate_;
    if (u >= h_.total_rate()) return -1;
    int level = 0;
    const int L = static_cast<int>(cumulative_.size());
    while (level + 1 < L && u >= cumulative_[static_cast<std::size_t>(level)]) ++level;

    // Change digit `level` to one of the other p-1 values, redraw all lower digits.
    std::uint64_t lower = 1;
    for (int i = 0; i < level; ++i) lower *= p_;
    const std::uint64_t unit = lower * p_;
    const std::uint64_t digit = (state_ / lower) % p_;
    const std::uint64_t shift = std::uniform_int_distribution<std::uint64_t>(1, p_ - 1)(rng_);
    const std::uint64_t rest =
        lower > 1 ? std::uniform_int_distribution<std::uint64_t>(0, lower - 1)(rng_) : 0;
    state_ = (state_ / unit) * unit + ((digit + shift) % p_) * lower + rest;
    return level;
  }

 private:
  const TruncatedHierarchy& h_;
  std::uint64_t p_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<double> cumulative_;
  double event_rate_ = 0.0;
  std::uint64_t state_ = 0;
};

}  // namespace

Trajectory sample_trajectory(const TruncatedHierarchy& h, std::uint64_t seed, double t_max,
                             std::uint64_t index) {
  if (!(t_max > 0.0)) throw ParameterError("t_max must be positive");
  Walker w(h, seed, index);
  Trajectory tr;
  tr.start = w.state();
  double t = 0.0;
  for (;;) {
    const int level = w.step(t);
    if (t > t_max) break;
    tr.events.push_back({t, w.state(), level, level < 0});
  }
  return tr;
}

EmpiricalFptResult estimate_fpt(const TruncatedHierarchy& h, std::uint64_t n_traj, double t_max,
                                std::uint64_t seed, bool record_returns) {
  if (n_traj < 1) throw ParameterError("n_traj must be >= 1");
  if (!(t_max > 0.0)) throw ParameterError("t_max must be positive");
  constexpr double kNone = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> tau(n_traj, kNone);
  std::vector<unsigned char> never_left(n_traj, 0);
  std::vector<unsigned char> flagged(n_traj, 0);
  std::vector<std::vector<double>> returns(record_returns ? n_traj : 0);

  const auto n = static_cast<std::int64_t>(n_traj);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto idx = static_cast<std::size_t>(ii);
    Walker w(h, seed, static_cast<std::uint64_t>(ii));
    double t = 0.0;
    bool left = false;
    bool inside = true;
    bool flag = false;
    bool passed = false;
    for (;;) {
      const int level = w.step(t);
      if (t > t_max) break;
      if (level < 0) {
        if (!passed) flag = true;
        continue;
      }
      const bool now_inside = h.in_zp(w.state());
      if (inside && !now_inside) left = true;
      if (!inside && now_inside) {
        if (!passed) {
          tau[idx] = t;
          passed = true;
        }
        if (record_returns)
          returns[idx].push_back(t);
        else
          break;
      }
      inside = now_inside;
    }
    never_left[idx] = left ? 0 : 1;
    flagged[idx] = flag ? 1 : 0;
  }

  EmpiricalFptResult r;
  r.n_traj = n_traj;
  r.seed = seed;
  r.t_max = t_max;
  r.M = h.M();
  r.N = h.N();
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (std::isnan(tau[i]))
      ++r.n_censored;
    else
      r.samples.push_back(tau[i]);
    r.n_never_left += never_left[i];
    r.n_flagged += flagged[i];
  }
  std::sort(r.samples.begin(), r.samples.end());
  r.return_events = std::move(returns);
  return r;
}

EmpiricalReturnCounts estimate_return_counts(const EmpiricalFptResult& result, const TimeGrid& grid,
                                             int m_max) {
  if (m_max < 0) throw ParameterError("m_max must be >= 0");
  if (result.return_events.size() != result.n_traj)
    throw ParameterError("return events were not recorded for this run");
  const std::size_t n = grid.size();
  const double nt = static_cast<double>(result.n_traj);
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  // counts[m][i]: trajectories with >= m returns by t_i.
  std::vector<std::vector<double>> q(static_cast<std::size_t>(m_max) + 1, std::vector<double>(n, 0.0));
  std::vector<double> sum(n, 0.0);
  std::vector<double> sum_sq(n, 0.0);
  for (const auto& ev : result.return_events) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = grid.at(i);
      while (k < ev.size() && ev[k] <= t) ++k;
      const double c = static_cast<double>(k);
      sum[i] += c;
      sum_sq[i] += c * c;
      for (std::size_t m = 0; m <= std::min<std::size_t>(k, static_cast<std::size_t>(m_max)); ++m)
        q[m][i] += 1.0;
    }
  }
  std::vector<double> mu(n);
  std::vector<double> se(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool valid = grid.at(i) <= result.t_max;
    for (auto& row : q) row[i] = valid ? row[i] / nt : kNaN;
    const double mean = sum[i] / nt;
    const double var = nt > 1 ? std::max(0.0, (sum_sq[i] - nt * mean * mean) / (nt - 1.0)) : 0.0;
    mu[i] = valid ? mean : kNaN;
    se[i] = valid ? std::sqrt(var / nt) : kNaN;
  }
  return {grid, std::move(q), std::move(mu), std::move(se)};
}

OccupationEstimate estimate_zp_occupation(const TruncatedHierarchy& h, std::uint64_t n_traj,
                                          const std::vector<double>& times, std::uint64_t seed) {
  if (n_traj < 1) throw ParameterError("n_traj must be >= 1");
  if (!std::is_sorted(times.begin(), times.end()))
    throw ParameterError("occupation times must be ascending");
  OccupationEstimate out;
  out.times = times;
  out.fraction.assign(times.size(), 0.0);
  if (times.empty()) return out;
  const double t_end = times.back();
  std::vector<std::vector<unsigned char>> inside(n_traj, std::vector<unsigned char>(times.size(), 0));
  std::vector<unsigned char> flagged(n_traj, 0);
  const auto n = static_cast<std::int64_t>(n_traj);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto idx = static_cast<std::size_t>(ii);
    Walker w(h, seed, static_cast<std::uint64_t>(ii));
    std::uint64_t state = w.state();
    double t = 0.0;
    std::size_t k = 0;
    while (k < times.size()) {
      const int level = w.step(t);
      while (k < times.size() && times[k] < t) inside[idx][k++] = h.in_zp(state) ? 1 : 0;
      if (t > t_end) break;
      if (level < 0) flagged[idx] = 1;
      state = w.state();
    }
  }
  for (std::size_t i = 0; i < n_traj; ++i) {
    for (std::size_t k = 0; k < times.size(); ++k) out.fraction[k] += inside[i][k];
    out.flagged_fraction += flagged[i];
  }
  for (double& f : out.fraction) f /= static_cast<double>(n_traj);
  out.flagged_fraction /= static_cast<double>(n_traj);
  return out;
}

double ks_subdistribution_distance(const std::vector<double>& sorted_samples, std::uint64_t n_total,
                                   double t_max, const std::function<double(double)>& cdf) {
  if (n_total == 0) throw ParameterError("KS distance needs n_total >= 1");
  const double nt = static_cast<double>(n_total);
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted_samples.size() && sorted_samples[i] <= t_max) {
    const double t = sorted_samples[i];
    std::size_t j = i;
    while (j < sorted_samples.size() && sorted_samples[j] == t) ++j;
    const double f = cdf(t);
    d = std::max(d, std::fabs(static_cast<double>(i) / nt - f));
    d = std::max(d, std::fabs(static_cast<double>(j) / nt - f));
    i = j;
  }
  d = std::max(d, std::fabs(static_cast<double>(i) / nt - cdf(t_max)));
  return d;
}

double ks_critical_value(std::uint64_t n, double level) {
  if (n == 0) throw ParameterError("KS critical value needs n >= 1");
  double c;
  if (level == 0.10)
    c = 1.2238;
  else if (level == 0.05)
    c = 1.3581;
  else if (level == 0.01)
    c = 1.6276;
  else if (level == 0.001)
    c = 1.9495;
  else
    throw ParameterError("unsupported KS level");
  return c / std::sqrt(static_cast<double>(n));
}

// ---------------------------------------------------------------------------

MasterResult integrate_absorbed_master(const TruncatedHierarchy& h, const TimeGrid& grid,
                                       const MasterOptions& options) {
  if (h.n_states() > options.state_cap)
    throw CapacityError("master equation limited to " + std::to_string(options.state_cap) +
                        " states, got " + std::to_string(h.n_states()));
  if (!(options.step_factor > 0.0)) throw ParameterError("step_factor must be positive");

  const std::size_t n = h.n_states();
  const double max_dt = options.step_factor / h.total_rate();
  const int sub = std::max(1, static_cast<int>(std::ceil(grid.h() / max_dt - 1e-12)));
  const double dt = grid.h() / sub;
  // Spectrum of the generator lies in [-2 (total + outside), 0]; RK4 is
  // stable on the negative axis up to about -2.785.
  if (dt * 2.0 * (h.total_rate() + h.outside_rate()) > 2.78)
    throw IntegrationError("RK4 step " + std::to_string(dt) + " is outside the stability interval");

  const auto lv = h.kernel_levels();
  const bool absorbing = options.absorbing;
  const double outside = h.outside_rate();
  const std::uint64_t zp = h.zp_states();

  // Sum over states outside Z_p of psi times their rate into Z_p.
  std::vector<double> into(n, 0.0);
  for (std::uint64_t x = zp; x < n; ++x) into[x] = h.rate_into_zp(x);
  auto flux_of = [&](const std::vector<double>& psi) {
    double s = 0.0;
    for (std::size_t x = zp; x < n; ++x) s += psi[x] * into[x];
    return s;
  };
  auto mass_of = [](const std::vector<double>& psi) {
    double s = 0.0;
    for (double v : psi) s += v;
    return s;
  };

  std::vector<double> psi(n, 0.0);
  for (std::uint64_t x = 0; x < zp; ++x) psi[x] = 1.0 / static_cast<double>(zp);
  double absorbed = 0.0;
  double escaped = 0.0;

  std::vector<double> scratch(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy, double& da, double& de) {
    kernels::omp::hierarchy_apply(lv, y, absorbing, dy, scratch);
    da = absorbing ? flux_of(y) : 0.0;
    de = outside * mass_of(y);
  };

  const std::size_t np = grid.size();
  std::vector<double> flux(np), zp_mass(np), total(np), abs_c(np), esc_c(np);
  double defect = 0.0;
  auto record = [&](std::size_t i) {
    flux[i] = flux_of(psi);
    double m_in = 0.0;
    for (std::uint64_t x = 0; x < zp; ++x) m_in += psi[x];
    zp_mass[i] = m_in;
    total[i] = mass_of(psi);
    abs_c[i] = absorbed;
    esc_c[i] = escaped;
    defect = std::max(defect, std::fabs(total[i] + absorbed + escaped - 1.0));
  };
  record(0);
  for (std::size_t i = 1; i < np; ++i) {
    for (int s = 0; s < sub; ++s) {
      double a1, a2, a3, a4, e1, e2, e3, e4;
      rhs(psi, k1, a1, e1);
      for (std::size_t x = 0; x < n; ++x) tmp[x] = psi[x] + 0.5 * dt * k1[x];
      rhs(tmp, k2, a2, e2);
      for (std::size_t x = 0; x < n; ++x) tmp[x] = psi[x] + 0.5 * dt * k2[x];
      rhs(tmp, k3, a3, e3);
      for (std::size_t x = 0; x < n; ++x) tmp[x] = psi[x] + dt * k3[x];
      rhs(tmp, k4, a4, e4);
      for (std::size_t x = 0; x < n; ++x)
        psi[x] += dt / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]);
      absorbed += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
      escaped += dt / 6.0 * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
    }
    record(i);
  }

  MasterResult r{SampledFunction(grid, std::move(flux)), SampledFunction(grid, std::move(zp_mass)),
                 SampledFunction(grid, std::move(total)), SampledFunction(grid, std::move(abs_c)),
                 SampledFunction(grid, std::move(esc_c)), defect, sub};
  return r;
}

}  // namespace umfpt
