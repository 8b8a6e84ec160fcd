#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "umfpt/params.hpp"
#include "umfpt/volterra.hpp"

namespace umfpt {

/// Real gamma function for x > 0 (DomainError otherwise).
double gamma_function(double x);

/// Envelopes for the series  sum_i i^-k a^-i exp(-b^-i t)  at t >> 1:
///   s_min = (ln b)^(k-1) (ln bt)^-k  (bt)^-z Gamma(z)
///   s_max = a (ln b)^(k-1) (ln t)^-k  t^-z Gamma(z),    z = ln a / ln b.
struct EnvelopeBounds {
  double s_min = 0.0;
  double s_max = 0.0;
};

EnvelopeBounds envelope_bounds(double a, double b, int k, double t);

/// Direct summation of the series; the i = 0 term is included only for
/// k = 0. Terms are summed until they drop below 1e-16 of the running sum.
double envelope_series(double a, double b, int k, double t);

enum class LogCorrection { none, inverse_log_squared, pure_log };

std::string_view to_string(LogCorrection form) noexcept;

/// Weighted least squares fit on the window, weights proportional to the
/// spacing in log t so unevenly sampled curves are not biased to one end.
///   none:                log y = gamma log t + A
///   inverse_log_squared: log y = gamma log t - 2 log(ln t + c) + A, with the
///                        offset c chosen to minimise the residual
///   pure_log:            y = gamma ln t + A
/// `exponent` is gamma, `amplitude` is e^A (or A for pure_log), `residual` the
/// maximum deviation in the fitted coordinates.
struct PowerLawFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual = 0.0;
  LogCorrection form = LogCorrection::none;
  double log_offset = 0.0;
  std::size_t n_points = 0;
};

PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> y, double t_lo,
                          double t_hi, LogCorrection form);
PowerLawFit fit_power_law(const SampledFunction& curve, double t_lo, double t_hi, LogCorrection form);

/// Outcome of an asymptotic regime check.
struct RegimeReport {
  std::string check;
  std::string regime;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double fitted = 0.0;
  double expected = 0.0;
  /// Relative tolerance on |fitted / expected - 1|.
  double tolerance = 0.0;
  bool pass = false;
  PowerLawFit fit;
  /// Additional named quantities (bracket ends, limits, ...).
  std::vector<std::pair<std::string, double>> extras;
};

inline constexpr double kExponentTolerance = 0.05;

/// Tail exponent of the first-passage density: -(2 alpha - 1)/alpha for
/// alpha > 1, -1/alpha for alpha < 1, and -1 with the inverse-log-squared
/// correction at alpha = 1.
double expected_tail_exponent(const ModelParams& params);

RegimeReport tail_exponent_report(const ModelParams& params, std::span<const double> t,
                            std::span<const double> f, double t_lo, double t_hi);

/// Growth of the mean return count.
///   alpha > 1: exponent (alpha - 1)/alpha.
///   alpha = 1: slope of mu against ln t and mu(t_hi)/ln t_hi must both lie in
///              [1/p, p] (1 - 1/p) B_1 / ln p.
///   alpha < 1: mu(t_hi) within 2% of C/(1-C) and the approach exponent of
///              C/(1-C) - mu within 5% of -(1-alpha)/alpha.
RegimeReport mean_growth_report(const ModelParams& params, std::span<const double> t,
                            std::span<const double> mu, double t_lo, double t_hi);

/// n points log-spaced on [lo, hi].
std::vector<double> log_space(double lo, double hi, std::size_t n);

}  // namespace umfpt
