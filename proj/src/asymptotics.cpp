#include "umfpt/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umfpt/errors.hpp"

namespace umfpt {

double gamma_function(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("gamma_function requires x > 0");
  return std::tgamma(x);
}

EnvelopeBounds envelope_bounds(double a, double b, int k, double t) {
  if (!(a > 1.0) || !(b > 1.0)) throw DomainError("envelopes need a > 1 and b > 1");
  if (k < 0) throw DomainError("envelopes need k >= 0");
  if (!(t > 1.0)) throw DomainError("envelopes need t > 1");
  const double lb = std::log(b);
  const double z = std::log(a) / lb;
  const double g = gamma_function(z);
  const double kk = k;
  EnvelopeBounds e;
  e.s_min = std::pow(lb, kk - 1.0) * std::pow(std::log(b * t), -kk) * std::pow(b * t, -z) * g;
  e.s_max = a * std::pow(lb, kk - 1.0) * std::pow(std::log(t), -kk) * std::pow(t, -z) * g;
  return e;
}

double envelope_series(double a, double b, int k, double t) {
  if (!(a > 1.0) || !(b > 1.0)) throw DomainError("series needs a > 1 and b > 1");
  if (k < 0) throw DomainError("series needs k >= 0");
  double sum = 0.0;
  for (int i = (k == 0 ? 0 : 1); i < 1000000; ++i) {
    const double x = std::pow(b, -static_cast<double>(i)) * t;
    const double term = std::pow(static_cast<double>(i), -static_cast<double>(k)) *
                        std::pow(a, -static_cast<double>(i)) * std::exp(-x);
    sum += term;
    // Past the peak the terms decay at least geometrically.
    if (x < 1.0 && term < 1e-16 * sum) break;
  }
  return sum;
}

std::string_view to_string(LogCorrection form) noexcept {
  switch (form) {
    case LogCorrection::none: return "none";
    case LogCorrection::inverse_log_squared: return "inverse_log_squared";
    case LogCorrection::pure_log: return "pure_log";
  }
  return "unknown";
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
  double max_dev = 0.0;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    f.sse += w[i] * r * r;
    f.max_dev = std::max(f.max_dev, std::fabs(r));
  }
  return f;
}

}  // namespace

PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> y, double t_lo,
                          double t_hi, LogCorrection form) {
  if (t.size() != y.size()) throw ParameterError("fit inputs differ in length");
  if (!(t_lo > 0.0) || !(t_hi > t_lo)) throw DomainError("fit window must satisfy 0 < t_lo < t_hi");
  if (form == LogCorrection::inverse_log_squared && !(t_lo > 1.0))
    throw DomainError("log-corrected fit needs t_lo > 1");

  std::vector<double> lt;
  std::vector<double> ly;
  std::vector<double> raw;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (form != LogCorrection::pure_log && !(y[i] > 0.0))
      throw DomainError("nonpositive value at t = " + std::to_string(t[i]) + " in fit window");
    lt.push_back(std::log(t[i]));
    raw.push_back(y[i]);
    ly.push_back(form == LogCorrection::pure_log ? y[i] : std::log(y[i]));
  }
  const std::size_t n = lt.size();
  if (n < 3) throw DomainError("fit window holds fewer than 3 points");
  if (!std::is_sorted(lt.begin(), lt.end())) throw DomainError("fit abscissae must be ascending");

  // Trapezoid weights in log t.
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? lt[i] - lt[i - 1] : 0.0;
    const double right = i + 1 < n ? lt[i + 1] - lt[i] : 0.0;
    w[i] = 0.5 * (left + right);
  }

  PowerLawFit out;
  out.t_lo = t_lo;
  out.t_hi = t_hi;
  out.form = form;
  out.n_points = n;

  if (form != LogCorrection::inverse_log_squared) {
    const LineFit f = weighted_line(lt, ly, w);
    out.exponent = f.slope;
    out.amplitude = form == LogCorrection::pure_log ? f.intercept : std::exp(f.intercept);
    out.residual = f.max_dev;
    return out;
  }

  auto fit_with = [&](double c) {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = ly[i] + 2.0 * std::log(lt[i] + c);
    return weighted_line(lt, z, w);
  };
  // Offset must keep ln t + c > 0 on the window. Coarse scan, then golden section.
  const double c_min = -lt.front() * 0.95;
  const double c_max = 50.0;
  const int n_scan = 400;
  double best_c = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n_scan; ++i) {
    const double c = c_min + (c_max - c_min) * i / n_scan;
    const double s = fit_with(c).sse;
    if (s < best) {
      best = s;
      best_c = c;
    }
  }
  const double step = (c_max - c_min) / n_scan;
  double lo = std::max(c_min, best_c - step);
  double hi = std::min(c_max, best_c + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = fit_with(x1).sse;
  double f2 = fit_with(x2).sse;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = fit_with(x1).sse;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = fit_with(x2).sse;
    }
  }
  const double c = 0.5 * (lo + hi);
  const LineFit f = fit_with(c);
  out.exponent = f.slope;
  out.amplitude = std::exp(f.intercept);
  out.residual = f.max_dev;
  out.log_offset = c;
  return out;
}

PowerLawFit fit_power_law(const SampledFunction& curve, double t_lo, double t_hi, LogCorrection form) {
  const auto t = curve.grid().points();
  // Skip t = 0, which has no logarithm.
  return fit_power_law(std::span<const double>(t).subspan(1),
                       std::span<const double>(curve.values()).subspan(1), t_lo, t_hi, form);
}

namespace {

bool critical(const ModelParams& params) { return std::fabs(params.alpha() - 1.0) < 1e-12; }

double relative_gap(double fitted, double expected) { return std::fabs(fitted / expected - 1.0); }

double value_at(std::span<const double> t, std::span<const double> y, double at) {
  // Nearest sample at or below `at`.
  auto it = std::upper_bound(t.begin(), t.end(), at);
  if (it == t.begin()) throw DomainError("requested time precedes the curve");
  return y[static_cast<std::size_t>(std::distance(t.begin(), it) - 1)];
}

}  // namespace

double expected_tail_exponent(const ModelParams& params) {
  const double a = params.alpha();
  if (critical(params)) return -1.0;
  return a > 1.0 ? -(2.0 * a - 1.0) / a : -1.0 / a;
}

RegimeReport tail_exponent_report(const ModelParams& params, std::span<const double> t,
                            std::span<const double> f, double t_lo, double t_hi) {
  RegimeReport r;
  r.check = "fpt_tail_exponent";
  r.t_lo = t_lo;
  r.t_hi = t_hi;
  r.tolerance = kExponentTolerance;
  r.expected = expected_tail_exponent(params);
  LogCorrection form = LogCorrection::none;
  if (critical(params)) {
    r.regime = "critical";
    form = LogCorrection::inverse_log_squared;
  } else {
    r.regime = params.alpha() > 1.0 ? "recurrent" : "transient";
  }
  r.fit = fit_power_law(t, f, t_lo, t_hi, form);
  r.fitted = r.fit.exponent;
  r.pass = relative_gap(r.fitted, r.expected) <= r.tolerance;
  r.extras.emplace_back("amplitude", r.fit.amplitude);
  r.extras.emplace_back("residual", r.fit.residual);
  if (form == LogCorrection::inverse_log_squared) r.extras.emplace_back("log_offset", r.fit.log_offset);
  return r;
}

RegimeReport mean_growth_report(const ModelParams& params, std::span<const double> t,
                            std::span<const double> mu, double t_lo, double t_hi) {
  RegimeReport r;
  r.check = "mean_returns_growth";
  r.t_lo = t_lo;
  r.t_hi = t_hi;
  const double a = params.alpha();
  const double p = params.p();

  if (critical(params)) {
    r.regime = "critical";
    r.fit = fit_power_law(t, mu, t_lo, t_hi, LogCorrection::pure_log);
    r.fitted = r.fit.exponent;
    const double center = (1.0 - 1.0 / p) * params.b_alpha() / std::log(p);
    const double lo = center / p;
    const double hi = center * p;
    const double ratio = value_at(t, mu, t_hi) / std::log(t_hi);
    r.expected = center;
    r.tolerance = 0.0;
    r.pass = r.fitted >= lo && r.fitted <= hi && ratio >= lo && ratio <= hi;
    r.extras.emplace_back("bracket_lo", lo);
    r.extras.emplace_back("bracket_hi", hi);
    r.extras.emplace_back("mu_over_log_t_at_t_hi", ratio);
    return r;
  }

  if (a > 1.0) {
    r.regime = "recurrent";
    r.fit = fit_power_law(t, mu, t_lo, t_hi, LogCorrection::none);
    r.fitted = r.fit.exponent;
    r.expected = (a - 1.0) / a;
    r.tolerance = kExponentTolerance;
    r.pass = relative_gap(r.fitted, r.expected) <= r.tolerance;
    r.extras.emplace_back("amplitude", r.fit.amplitude);
    return r;
  }

  r.regime = "transient";
  const double c = params.c_alpha();
  const double limit = c / (1.0 - c);
  const double at_hi = value_at(t, mu, t_hi);
  std::vector<double> gap(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) gap[i] = limit - mu[i];
  r.fit = fit_power_law(t, gap, t_lo, t_hi, LogCorrection::none);
  r.fitted = r.fit.exponent;
  r.expected = -(1.0 - a) / a;
  r.tolerance = kExponentTolerance;
  const double saturation_gap = relative_gap(at_hi, limit);
  r.pass = saturation_gap <= 0.02 && relative_gap(r.fitted, r.expected) <= r.tolerance;
  r.extras.emplace_back("limit", limit);
  r.extras.emplace_back("mu_at_t_hi", at_hi);
  r.extras.emplace_back("saturation_relative_gap", saturation_gap);
  return r;
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ParameterError("log_space needs 0 < lo < hi, n >= 2");
  std::vector<double> out(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace umfpt
