#include "umfpt/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "umfpt/errors.hpp"
#include "umfpt/kernels.hpp"

namespace umfpt {

namespace {

constexpr int kMaxSeriesTerms = 200000;
constexpr double kPoleGuard = 1e-13;

// Powers x_n = p^(-alpha n) and y_n = p^-n, grown on demand. pow() is used per
// entry (not repeated multiplication) so bracket endpoints are correctly
// rounded for every n.
class PowerTable {
 public:
  explicit PowerTable(const ModelParams& params) : p_(params.p()), alpha_(params.alpha()) {}

  double x(int n) {
    ensure(n);
    return x_[static_cast<std::size_t>(n)];
  }
  double y(int n) {
    ensure(n);
    return y_[static_cast<std::size_t>(n)];
  }

 private:
  void ensure(int n) {
    while (static_cast<int>(x_.size()) <= n) {
      const double k = static_cast<double>(x_.size());
      x_.push_back(std::pow(p_, -alpha_ * k));
      y_.push_back(std::pow(p_, -k));
    }
  }

  double p_;
  double alpha_;
  std::vector<double> x_;
  std::vector<double> y_;
};

struct JSum {
  double value = 0.0;
  double abs_sum = 0.0;
};

// sum_n y_n / d_n where d_n = s + x_n, except that for n == edge and
// n == edge + 1 the caller supplies the denominators directly (root finding
// needs them without cancellation). The second-order tail bound is compared
// against max(tol_abs, tol_rel * running |sum|).
template <class Denom>
JSum j_series(PowerTable& tab, double one_minus_inv_p, double sum_decay, double s, double tol_abs,
              double tol_rel, Denom&& denom) {
  const double abs_s = std::fabs(s);
  const double c = s < 0.0 ? 2.0 : 1.0;
  double head = 0.0;
  double abs_head = 0.0;
  int n = 0;
  for (;; ++n) {
    if (n > kMaxSeriesTerms) throw PoleProximityError("J series did not converge (|s| too small)");
    const double d = denom(n);
    const double term = tab.y(n) / d;
    head += term;
    abs_head += std::fabs(term);
    const double xn1 = tab.x(n + 1);
    if (xn1 <= 0.5 * abs_s) {
      const double bound = one_minus_inv_p * c * tab.y(n + 1) * xn1 / (abs_s * abs_s * sum_decay);
      if (bound <= std::max(tol_abs, tol_rel * one_minus_inv_p * abs_head)) break;
    }
  }
  const double tail = tab.y(n + 1) / (one_minus_inv_p * s);
  JSum out;
  out.value = one_minus_inv_p * (head + tail);
  out.abs_sum = one_minus_inv_p * (abs_head + std::fabs(tail));
  return out;
}

double decay_factor(const ModelParams& params) {
  return 1.0 - std::pow(static_cast<double>(params.p()), -1.0 - params.alpha());
}

bool is_critical(const ModelParams& params) { return std::fabs(params.alpha() - 1.0) < 1e-12; }

// Evaluates J(-lambda) for lambda = x_{k+1} + (x_k - x_{k+1}) * delta.
JSum j_at_bracket(PowerTable& tab, const ModelParams& params, int k, double delta, double tol_rel) {
  const double lo = tab.x(k + 1);
  const double hi = tab.x(k);
  const double width = hi - lo;
  const double lambda = lo + width * delta;
  const double one_minus_inv_p = 1.0 - 1.0 / params.p();
  return j_series(tab, one_minus_inv_p, decay_factor(params), -lambda, 0.0, tol_rel, [&](int n) {
    if (n == k) return width * (1.0 - delta);
    if (n == k + 1) return -width * delta;
    return tab.x(n) - lambda;
  });
}

// sum_n y_n (lambda / (lambda - x_n))^2 with the two bracket-edge differences
// supplied exactly. Scaled by lambda^2 so nothing overflows for tiny lambda.
double residue_denominator_sum(PowerTable& tab, const ModelParams& params, double lambda, int k,
                               double edge_lo_diff, double edge_hi_diff) {
  const double sum_decay = decay_factor(params);
  double sum = 0.0;
  int n = 0;
  for (;; ++n) {
    if (n > kMaxSeriesTerms) throw DegenerateResidueError("residue series did not converge");
    double d;
    if (k >= 0 && n == k)
      d = edge_hi_diff;
    else if (k >= 0 && n == k + 1)
      d = edge_lo_diff;
    else
      d = lambda - tab.x(n);
    const double r = lambda / d;
    sum += tab.y(n) * r * r;
    const double xn1 = tab.x(n + 1);
    if (xn1 <= 0.5 * lambda) {
      const double bound = 6.0 * tab.y(n + 1) * xn1 / (lambda * sum_decay);
      if (bound <= 1e-17 * sum) break;
    }
  }
  return sum + tab.y(n + 1) / (1.0 - 1.0 / params.p());
}

double residue_from_root(PowerTable& tab, const ModelParams& params, double lambda, int k,
                         double delta) {
  const double b = params.b_alpha();
  if (std::fabs(b - lambda) <= 1e-12 * b)
    throw DegenerateResidueError("eigenvalue " + std::to_string(k) + " coincides with B_alpha");
  const double width = tab.x(k) - tab.x(k + 1);
  const double s = residue_denominator_sum(tab, params, lambda, k, width * delta,
                                           -width * (1.0 - delta));
  return lambda * lambda / ((b - lambda) * (1.0 - 1.0 / params.p()) * s);
}

double residue_at_b(const ModelParams& params) {
  PowerTable tab(params);
  const double b = params.b_alpha();
  const JSum j = j_series(tab, 1.0 - 1.0 / params.p(), decay_factor(params), -b, 0.0, 1e-17,
                          [&](int n) { return tab.x(n) - b; });
  if (std::fabs(j.value) <= 1e-14 * j.abs_sum)
    throw DegenerateResidueError("J(-B_alpha) vanishes; residue at -B_alpha undefined");
  return -1.0 / j.value;
}

Eigenvalue find_eigenvalue_impl(PowerTable& tab, const ModelParams& params, int k, double root_tol,
                                double series_tol) {
  if (k < 0) throw ParameterError("eigenvalue index must be >= 0");
  const double rel = std::max(series_tol * 1e-3, 1e-18);
  double a = 0.0;
  double b = 1.0;
  bool seen_negative = false;
  bool seen_positive = false;
  for (int it = 0; it < 4000; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double v = j_at_bracket(tab, params, k, mid, rel).value;
    if (v < 0.0) {
      a = mid;
      seen_negative = true;
    } else {
      b = mid;
      seen_positive = true;
    }
    if (seen_negative && seen_positive && (b - a) <= root_tol * a) break;
  }
  if (!seen_negative || !seen_positive || !(a > 0.0) || !(b < 1.0))
    throw RootIsolationError("no sign change of J(-lambda) isolated in bracket " +
                             std::to_string(k));
  const double delta = 0.5 * (a + b);
  const double lo = tab.x(k + 1);
  const double hi = tab.x(k);
  Eigenvalue ev;
  ev.k = k;
  ev.delta = delta;
  ev.lambda = lo + (hi - lo) * delta;
  if (!(ev.lambda > lo) || !(ev.lambda < hi))
    throw RootIsolationError("root in bracket " + std::to_string(k) +
                             " is within rounding of the bracket edge");
  const JSum j = j_at_bracket(tab, params, k, delta, rel);
  ev.scaled_residual = std::fabs(j.value) / j.abs_sum;
  return ev;
}

// Hurwitz zeta for integer s >= 2 and a >= 1: direct terms up to a + n >= 24,
// then Euler-Maclaurin with five Bernoulli corrections.
double hurwitz_zeta(int s, double a) {
  static constexpr std::array<double, 5> kB2j = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
                                                 5.0 / 66.0};
  double sum = 0.0;
  while (a < 24.0) {
    sum += std::pow(a, -s);
    a += 1.0;
  }
  const double sd = s;
  sum += std::pow(a, 1.0 - sd) / (sd - 1.0) + 0.5 * std::pow(a, -sd);
  double rising = sd;  // s (s+1) ... (s+2j-2)
  double fact = 2.0;   // (2j)!
  for (int j = 1; j <= 5; ++j) {
    sum += kB2j[static_cast<std::size_t>(j - 1)] / fact * rising * std::pow(a, -sd - 2.0 * j + 1.0);
    rising *= (sd + 2.0 * j - 1.0) * (sd + 2.0 * j);
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
  }
  return sum;
}

// Least squares y ~ sum_j c_j u^j via normal equations on u in [0.5, 1].
std::vector<double> poly_fit(const std::vector<double>& u, const std::vector<double>& y, int degree) {
  const int m = degree + 1;
  std::vector<double> a(static_cast<std::size_t>(m * (m + 1)), 0.0);
  auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r * (m + 1) + c)]; };
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::vector<double> pw(static_cast<std::size_t>(2 * m), 1.0);
    for (std::size_t e = 1; e < pw.size(); ++e) pw[e] = pw[e - 1] * u[i];
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) at(r, c) += pw[static_cast<std::size_t>(r + c)];
      at(r, m) += pw[static_cast<std::size_t>(r)] * y[i];
    }
  }
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::fabs(at(r, col)) > std::fabs(at(piv, col))) piv = r;
    for (int c = 0; c <= m; ++c) std::swap(at(col, c), at(piv, c));
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = at(r, col) / at(col, col);
      for (int c = col; c <= m; ++c) at(r, c) -= f * at(col, c);
    }
  }
  std::vector<double> coef(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) coef[static_cast<std::size_t>(r)] = at(r, m) / at(r, r);
  return coef;
}

}  // namespace

double eval_J(const ModelParams& params, double s, double tol) {
  if (!std::isfinite(s)) {
    if (s > 0) return 0.0;
    throw DomainError("J evaluated at non-finite argument");
  }
  const double one_minus_inv_p = 1.0 - 1.0 / params.p();
  if (s == 0.0) {
    if (params.alpha() < 1.0)
      return one_minus_inv_p / (1.0 - std::pow(static_cast<double>(params.p()), params.alpha() - 1.0));
    throw PoleProximityError("J diverges at s = 0 for alpha >= 1");
  }
  if (std::fabs(s) < 1e-300) throw PoleProximityError("s too close to the accumulation point 0");
  PowerTable tab(params);
  return j_series(tab, one_minus_inv_p, decay_factor(params), s, tol, 0.0, [&](int n) {
           const double x = tab.x(n);
           const double d = s + x;
           if (s < 0.0 && std::fabs(d) <= kPoleGuard * x)
             throw PoleProximityError("s = " + std::to_string(s) + " is within guard of pole " +
                                      std::to_string(n));
           return d;
         })
      .value;
}

double eval_G(const ModelParams& params, double s, double tol) {
  return (params.b_alpha() + s) * eval_J(params, s, tol) - 1.0;
}

double eval_F(const ModelParams& params, double s, double tol) {
  if (!(s > 0.0)) throw DomainError("F is evaluated on s > 0 only");
  return 1.0 - 1.0 / ((params.b_alpha() + s) * eval_J(params, s, tol));
}

Eigenvalue find_eigenvalue(const ModelParams& params, int k, double root_tol, double series_tol) {
  PowerTable tab(params);
  return find_eigenvalue_impl(tab, params, k, root_tol, series_tol);
}

std::vector<double> find_eigenvalues(const ModelParams& params, int K, double root_tol,
                                     double series_tol) {
  if (K < 0) throw ParameterError("K must be >= 0");
  PowerTable tab(params);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(K + 1));
  for (int k = 0; k <= K; ++k)
    out.push_back(find_eigenvalue_impl(tab, params, k, root_tol, series_tol).lambda);
  return out;
}

std::vector<double> residues(const ModelParams& params, std::span<const double> lambdas) {
  PowerTable tab(params);
  std::vector<double> out;
  out.reserve(lambdas.size() + 1);
  out.push_back(residue_at_b(params));
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const int k = static_cast<int>(i);
    const double lo = tab.x(k + 1);
    const double hi = tab.x(k);
    const double delta = (lambdas[i] - lo) / (hi - lo);
    if (!(delta > 0.0 && delta < 1.0))
      throw DomainError("lambda_" + std::to_string(k) + " lies outside its bracket");
    out.push_back(residue_from_root(tab, params, lambdas[i], k, delta));
  }
  return out;
}

std::vector<double> residues(const ModelParams& params, std::span<const Eigenvalue> roots) {
  PowerTable tab(params);
  std::vector<double> out;
  out.reserve(roots.size() + 1);
  out.push_back(residue_at_b(params));
  for (const auto& r : roots) out.push_back(residue_from_root(tab, params, r.lambda, r.k, r.delta));
  return out;
}

int max_truncation(const ModelParams& params) {
  const double k = 280.0 * std::log(10.0) / (params.alpha() * std::log(params.p())) - 1.0;
  return std::max(0, static_cast<int>(std::floor(k)));
}

int auto_truncation(const ModelParams& params) {
  const int cap = max_truncation(params);
  if (is_critical(params)) return std::min(200, cap);
  PowerTable tab(params);
  const double p = params.p();
  const double r_w = std::pow(p, -std::fabs(params.alpha() - 1.0));
  const double r_b = params.alpha() > 1.0 ? std::pow(p, 1.0 - 2.0 * params.alpha()) : 1.0 / p;
  double weight_sum = std::fabs(residue_at_b(params) / params.b_alpha());
  for (int k = 0; k <= cap; ++k) {
    const Eigenvalue ev = find_eigenvalue_impl(tab, params, k, 1e-15, 1e-14);
    const double b = residue_from_root(tab, params, ev.lambda, k, ev.delta);
    const double w = std::fabs(b / ev.lambda);
    weight_sum += w;
    const bool weights_done = w * r_w / (1.0 - r_w) < 1e-14 * weight_sum;
    const bool residues_done = std::fabs(b) * r_b / (1.0 - r_b) < 1e-16;
    // For alpha < 1 the root approaches the lower bracket edge geometrically;
    // stop before it is no longer resolvable in double precision.
    const bool edge_limit = ev.delta < 1e-9;
    if (k >= 20 && ((weights_done && residues_done) || edge_limit)) return k;
  }
  return cap;
}

SpectralDecomposition decompose(const ModelParams& params, int K, double series_tol) {
  if (!(series_tol > 0.0)) throw ParameterError("series_tol must be positive");
  if (K < 0) K = auto_truncation(params);
  if (K > max_truncation(params))
    throw ParameterError("K = " + std::to_string(K) + " exceeds the representable range " +
                         std::to_string(max_truncation(params)));
  PowerTable tab(params);
  std::vector<Eigenvalue> roots;
  roots.reserve(static_cast<std::size_t>(K + 1));
  for (int k = 0; k <= K; ++k) roots.push_back(find_eigenvalue_impl(tab, params, k, 1e-15, series_tol));

  std::vector<double> lambdas;
  lambdas.reserve(roots.size() + 1);
  lambdas.push_back(params.b_alpha());
  for (const auto& r : roots) lambdas.push_back(r.lambda);
  SpectralDecomposition d(params, K, series_tol, std::move(lambdas), residues(params, roots));
  d.scaled_residuals_.reserve(roots.size());
  for (const auto& r : roots) d.scaled_residuals_.push_back(r.scaled_residual);
  return d;
}

SpectralDecomposition::SpectralDecomposition(const ModelParams& params, int K, double series_tol,
                                             std::vector<double> lambdas, std::vector<double> res)
    : params_(params), K_(K), series_tol_(series_tol), lambdas_(std::move(lambdas)),
      residues_(std::move(res)) {
  if (K_ < 0) throw ParameterError("K must be >= 0");
  const auto n = static_cast<std::size_t>(K_ + 2);
  if (lambdas_.size() != n || residues_.size() != n)
    throw ParameterError("spectral arrays must hold K + 2 entries");
  if (lambdas_[0] != params_.b_alpha())
    throw ParameterError("lambda_{-1} must equal B_alpha");
  build_tail_model();
}

void SpectralDecomposition::build_tail_model() {
  const double p = params_.p();
  const double alpha = params_.alpha();
  ratio_lambda_ = std::pow(p, -alpha);
  ratio_residue_ = alpha > 1.0 ? std::pow(p, 1.0 - 2.0 * alpha) : 1.0 / p;
  const double wK = residue(K_) / lambda(K_);

  if (!is_critical(params_) || K_ < 12) {
    ratio_weight_ = is_critical(params_) ? 1.0 / p : std::pow(p, -std::fabs(alpha - 1.0));
    weight_tail_ = wK * ratio_weight_ / (1.0 - ratio_weight_);
    if (K_ >= 1) {
      const double rho = wK / (residue(K_ - 1) / lambda(K_ - 1));
      const double alt = (rho > 0.0 && rho < 1.0) ? wK * rho / (1.0 - rho) : 2.0 * weight_tail_;
      weight_tail_err_ = std::fabs(alt - weight_tail_);
    } else {
      weight_tail_err_ = std::fabs(weight_tail_);
    }
    if (is_critical(params_)) weight_tail_err_ = std::max(weight_tail_err_, std::fabs(wK) * K_);
    return;
  }

  // Critical case: k^2 w_k = sum_j c_j u^j with u = k0 / k on k in [k0, K].
  const int k0 = K_ / 2;
  std::vector<double> u;
  std::vector<double> y;
  for (int k = k0; k <= K_; ++k) {
    u.push_back(static_cast<double>(k0) / k);
    y.push_back(static_cast<double>(k) * k * residue(k) / lambda(k));
  }
  auto tail_sum = [&](const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      s += c[j] * std::pow(static_cast<double>(k0), static_cast<double>(j)) *
           hurwitz_zeta(static_cast<int>(j) + 2, K_ + 1.0);
    return s;
  };
  weight_poly_ = poly_fit(u, y, 3);
  weight_tail_ = tail_sum(weight_poly_);
  weight_tail_err_ = std::fabs(tail_sum(poly_fit(u, y, 2)) - weight_tail_);
  ratio_weight_ = 1.0 / p;
}

double SpectralDecomposition::weight_ext(int k) const {
  if (k <= K_) return residue(k) / lambda(k);
  if (!weight_poly_.empty()) {
    const double u = static_cast<double>(K_ / 2) / k;
    double v = 0.0;
    for (std::size_t j = weight_poly_.size(); j-- > 0;) v = v * u + weight_poly_[j];
    return v / (static_cast<double>(k) * k);
  }
  return residue(K_) / lambda(K_) * std::pow(ratio_weight_, k - K_);
}

double SpectralDecomposition::lambda_ext(int k) const {
  if (k <= K_) return lambda(k);
  // Extrapolate the in-bracket offset delta_k and rebuild lambda from it.
  const double p = params_.p();
  const double alpha = params_.alpha();
  const double loK = std::pow(p, -alpha * (K_ + 1));
  const double hiK = std::pow(p, -alpha * K_);
  const double dK = std::clamp((lambda(K_) - loK) / (hiK - loK), 0.0, 1.0);
  double dk = dK;
  if (is_critical(params_))
    dk = dK * K_ / k;
  else if (alpha < 1.0)
    dk = dK * std::pow(p, (alpha - 1.0) * (k - K_));
  const double lo = std::pow(p, -alpha * (k + 1));
  const double hi = std::pow(p, -alpha * k);
  return lo + (hi - lo) * dk;
}

double SpectralDecomposition::residue_ext(int k) const {
  if (k <= K_) return residue(k);
  return weight_ext(k) * lambda_ext(k);
}

double SpectralDecomposition::residue_tail_abs_sum() const {
  return std::fabs(residue_ext(K_ + 1)) / (1.0 - ratio_residue_);
}

SeriesValue fpt_density_spectral(const SpectralDecomposition& decomp, double t, double rel_tol) {
  if (!(t > 0.0)) throw DomainError("spectral density requires t > 0");
  SeriesValue out;
  const auto lam = decomp.lambdas();
  const auto res = decomp.residues();
  for (std::size_t i = 0; i < lam.size(); ++i) out.value += res[i] * std::exp(-lam[i] * t);

  // Omitted part: sum_{k>K} b_k exp(-lambda_k t), summed while it still
  // decays, then closed geometrically.
  double tail = 0.0;
  const int K = decomp.K();
  const double scale = std::fabs(out.value) + 1e-300;
  for (int k = K + 1; k <= K + 4000; ++k) {
    const double b = decomp.residue_ext(k);
    const double l = decomp.lambda_ext(k);
    tail += std::fabs(b) * std::exp(-l * t);
    if (std::fabs(b) < 1e-20 * scale || l * t < 1e-12) {
      tail += std::fabs(b) / (1.0 - std::pow(decomp.params().p(), -1.0));
      break;
    }
  }
  out.truncation_error = tail;
  out.truncation_warning = tail > rel_tol * std::fabs(out.value);
  return out;
}

std::vector<double> fpt_density_on(const SpectralDecomposition& decomp, std::span<const double> t) {
  std::vector<double> out(t.size());
  kernels::omp::exp_series(decomp.lambdas(), decomp.residues(), t, out);
  return out;
}

namespace {

// sum_{k>K} w_k (1 - exp(-lambda_k t)) for finite t.
double cdf_tail(const SpectralDecomposition& d, double t) {
  const int K = d.K();
  double tail = 0.0;
  for (int k = K + 1; k <= K + 20000; ++k) {
    const double l = d.lambda_ext(k);
    const double b = d.residue_ext(k);
    if (l * t < 1e-8) {
      // Remaining terms are w_k lambda_k t = b_k t to first order and the
      // b_k decay geometrically with ratio close to 1/p.
      tail += t * b / (1.0 - std::pow(d.params().p(), -std::min(1.0, d.params().alpha())));
      break;
    }
    tail += b / l * -std::expm1(-l * t);
  }
  return tail;
}

}  // namespace

SeriesValue fpt_cdf_spectral(const SpectralDecomposition& decomp, double t) {
  if (!(t >= 0.0)) throw DomainError("spectral CDF requires t >= 0");
  SeriesValue out;
  if (t == 0.0) return out;
  const auto lam = decomp.lambdas();
  const auto res = decomp.residues();
  double head = 0.0;
  if (std::isinf(t)) {
    for (std::size_t i = 0; i < lam.size(); ++i) head += res[i] / lam[i];
    out.value = head + decomp.weight_tail_sum();
    out.truncation_error = decomp.weight_tail_error();
    return out;
  }
  for (std::size_t i = 0; i < lam.size(); ++i) head += res[i] / lam[i] * -std::expm1(-lam[i] * t);
  const double tail = cdf_tail(decomp, t);
  out.value = head + tail;
  const double wt = decomp.weight_tail_sum();
  out.truncation_error =
      wt != 0.0 ? std::fabs(tail) * decomp.weight_tail_error() / std::fabs(wt) : 0.0;
  return out;
}

SeriesValue fpt_tail_mass(const SpectralDecomposition& decomp, double T) {
  if (!(T >= 0.0)) throw DomainError("tail mass requires T >= 0");
  const auto lam = decomp.lambdas();
  const auto res = decomp.residues();
  SeriesValue out;
  for (std::size_t i = 0; i < lam.size(); ++i) out.value += res[i] / lam[i] * std::exp(-lam[i] * T);
  out.value += decomp.weight_tail_sum() - cdf_tail(decomp, T);
  out.truncation_error = decomp.weight_tail_error();
  return out;
}

double residue_partial_sum(const SpectralDecomposition& decomp) noexcept {
  double s = 0.0;
  for (double b : decomp.residues()) s += b;
  return s;
}

// ---------------------------------------------------------------------------

namespace {

struct Geometric {
  double p;
  double alpha;
  double one_minus_inv_p;
};

Geometric geometric(const ModelParams& params) {
  return {static_cast<double>(params.p()), params.alpha(), 1.0 - 1.0 / params.p()};
}

}  // namespace

double survival_series(const ModelParams& params, double t) {
  if (!(t >= 0.0)) throw DomainError("survival series requires t >= 0");
  const auto g = geometric(params);
  double sum = 0.0;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    const double y = std::pow(g.p, -n);
    sum += y * std::exp(-std::pow(g.p, -g.alpha * n) * t);
    const double tail = y / g.p / g.one_minus_inv_p;
    if (tail <= 1e-17 * sum || tail < 1e-300) break;
  }
  return g.one_minus_inv_p * sum;
}

double survival_derivative(const ModelParams& params, double t) {
  if (!(t >= 0.0)) throw DomainError("survival derivative requires t >= 0");
  const auto g = geometric(params);
  const double decay = decay_factor(params);
  double sum = 0.0;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    const double y = std::pow(g.p, -n);
    const double x = std::pow(g.p, -g.alpha * n);
    sum += y * x * std::exp(-x * t);
    const double tail = y * x * std::pow(g.p, -1.0 - g.alpha) / decay;
    if (tail <= 1e-17 * sum || tail < 1e-300) break;
  }
  return -g.one_minus_inv_p * sum;
}

double return_rate_g(const ModelParams& params, double t) {
  if (!(t >= 0.0)) throw DomainError("return rate requires t >= 0");
  const auto g = geometric(params);
  const double b = params.b_alpha();
  double sum = 0.0;
  double abs_sum = 0.0;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    const double y = std::pow(g.p, -n);
    const double x = std::pow(g.p, -g.alpha * n);
    const double term = y * (b - x) * std::exp(-x * t);
    sum += term;
    abs_sum += std::fabs(term);
    const double tail = b * y / g.p / g.one_minus_inv_p;
    if (tail <= 1e-17 * std::max(std::fabs(sum), 1e-3 * abs_sum) || tail < 1e-300) break;
  }
  return g.one_minus_inv_p * sum;
}

double mean_returns_closed(const ModelParams& params, double t) {
  if (!(t >= 0.0)) throw DomainError("mean returns require t >= 0");
  if (t == 0.0) return 0.0;
  const auto g = geometric(params);
  double growth = 0.0;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    const double x = std::pow(g.p, -g.alpha * n);
    const double w = std::pow(g.p, (g.alpha - 1.0) * n);
    growth += w * -std::expm1(-x * t);
    if (x * t < 1e-3) {
      // 1 - e^-u <= u, so the rest is at most t sum_{m>n} p^-m.
      const double tail = t * std::pow(g.p, -(n + 1)) / g.one_minus_inv_p;
      if (tail <= 1e-17 * growth) break;
    }
  }
  return params.b_alpha() * g.one_minus_inv_p * growth + survival_series(params, t) - 1.0;
}

}  // namespace umfpt
