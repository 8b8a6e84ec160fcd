#pragma once

#include <limits>
#include <span>
#include <vector>

#include "umfpt/params.hpp"

namespace umfpt {

// ---------------------------------------------------------------------------
// Laplace-domain functions on the real axis.
//
//   J(s) = (1 - 1/p) sum_n p^-n / (s + p^(-alpha n))
//   G(s) = (B_alpha + s) J(s) - 1
//   F(s) = G / (1 + G) = 1 - 1 / ((B_alpha + s) J(s))
//
// J has simple poles at s = -p^(-alpha n) accumulating at 0.
// ---------------------------------------------------------------------------

/// J(s) with absolute truncation error below tol. The series is cut once
/// p^(-alpha n) <= |s|/2 and the second-order tail bound drops below tol; the
/// geometric tail sum_{n>N} p^-n / s is added in closed form.
/// Throws PoleProximityError near a pole (or near the accumulation point 0).
double eval_J(const ModelParams& params, double s, double tol = 1e-14);

double eval_G(const ModelParams& params, double s, double tol = 1e-14);

/// F(s) for s > 0; DomainError otherwise.
double eval_F(const ModelParams& params, double s, double tol = 1e-14);

/// One located zero of J(-lambda) in (p^(-alpha(k+1)), p^(-alpha k)).
/// `delta` is the offset inside the bracket,
///   lambda = p^(-alpha(k+1)) + p^(-alpha k) (1 - p^-alpha) delta,
/// kept because for alpha < 1 the root hugs the lower edge and the
/// differences lambda - p^(-alpha n) at the edges are needed to full precision.
struct Eigenvalue {
  int k = 0;
  double lambda = 0.0;
  double delta = 0.0;
  /// |J(-lambda)| divided by the sum of absolute series terms at -lambda.
  double scaled_residual = 0.0;
};

/// Bisection for the zero of J(-lambda) in bracket k. `root_tol` is the
/// relative bracket width at which refinement stops (machine precision by
/// default). RootIsolationError if the sign change is not detected.
Eigenvalue find_eigenvalue(const ModelParams& params, int k, double root_tol = 1e-15,
                           double series_tol = 1e-14);

/// lambda_0 .. lambda_K.
std::vector<double> find_eigenvalues(const ModelParams& params, int K, double root_tol = 1e-15,
                                     double series_tol = 1e-14);

/// Residues b_{-1}, b_0 .. b_K of F at -B_alpha and -lambda_k.
///   b_{-1} = -1 / J(-B_alpha)
///   b_k    = 1 / ((B_alpha - lambda_k)(1 - 1/p) sum_n p^-n / (lambda_k - p^(-alpha n))^2)
/// DegenerateResidueError if some lambda_k coincides with B_alpha.
std::vector<double> residues(const ModelParams& params, std::span<const double> lambdas);
std::vector<double> residues(const ModelParams& params, std::span<const Eigenvalue> roots);

/// Default truncation index: enough terms that the geometric tails of
/// b_k and b_k / lambda_k fall below double rounding (alpha != 1), and 200
/// for alpha == 1 where b_k / lambda_k ~ k^-2 and the tail is modelled.
int auto_truncation(const ModelParams& params);

/// Largest K for which lambda_K stays a normal double with headroom.
int max_truncation(const ModelParams& params);

class SpectralDecomposition;

/// lambdas/residues with index 0 <-> k = -1 (lambda_{-1} = B_alpha).
SpectralDecomposition decompose(const ModelParams& params, int K = -1,
                                double series_tol = 1e-12);

/// Closed-form pole expansion of F and its time-domain series.
class SpectralDecomposition {
 public:
  /// Reassembles a decomposition from stored arrays (deserialization).
  /// Only sizes and the lambda_{-1} = B_alpha convention are checked.
  SpectralDecomposition(const ModelParams& params, int K, double series_tol,
                        std::vector<double> lambdas, std::vector<double> residues);

  const ModelParams& params() const noexcept { return params_; }
  int K() const noexcept { return K_; }
  double series_tol() const noexcept { return series_tol_; }

  std::span<const double> lambdas() const noexcept { return lambdas_; }
  std::span<const double> residues() const noexcept { return residues_; }
  /// Root residuals for k = 0..K (empty when deserialized).
  std::span<const double> scaled_residuals() const noexcept { return scaled_residuals_; }

  double lambda(int k) const { return lambdas_.at(static_cast<std::size_t>(k + 1)); }
  double residue(int k) const { return residues_.at(static_cast<std::size_t>(k + 1)); }

  // Tail model for k > K. For alpha != 1 everything is geometric:
  // lambda ratio p^-alpha, b ratio p^(1-2 alpha) (alpha > 1) or 1/p (alpha < 1).
  // For alpha == 1, b_k / lambda_k is fit as k^-2 (c0 + c1/k + c2/k^2 + c3/k^3)
  // on the upper half of the computed range and summed via Hurwitz zeta.

  /// lambda_k and b_k for any k >= -1, extrapolated past K.
  double lambda_ext(int k) const;
  double residue_ext(int k) const;
  /// sum_{k>K} b_k / lambda_k and an estimate of its own error.
  double weight_tail_sum() const noexcept { return weight_tail_; }
  double weight_tail_error() const noexcept { return weight_tail_err_; }
  /// sum_{k>K} |b_k|.
  double residue_tail_abs_sum() const;

 private:
  friend SpectralDecomposition decompose(const ModelParams&, int, double);
  void build_tail_model();
  double weight_ext(int k) const;

  ModelParams params_;
  int K_;
  double series_tol_;
  std::vector<double> lambdas_;
  std::vector<double> residues_;
  std::vector<double> scaled_residuals_;

  double ratio_lambda_ = 0.0;
  double ratio_weight_ = 0.0;
  double ratio_residue_ = 0.0;
  std::vector<double> weight_poly_;  // alpha == 1 only
  double weight_tail_ = 0.0;
  double weight_tail_err_ = 0.0;
};

struct SeriesValue {
  double value = 0.0;
  /// Estimated magnitude of the omitted k > K part.
  double truncation_error = 0.0;
  bool truncation_warning = false;
};

/// f(t) = sum_{k=-1..K} b_k exp(-lambda_k t), t > 0. The warning is raised
/// when the truncation estimate exceeds rel_tol * |f(t)|.
SeriesValue fpt_density_spectral(const SpectralDecomposition& decomp, double t,
                                 double rel_tol = 1e-5);

/// P(tau <= t) = sum_k b_k (1 - exp(-lambda_k t)) / lambda_k, including the
/// modelled k > K tail. t may be +infinity.
SeriesValue fpt_cdf_spectral(const SpectralDecomposition& decomp, double t);

/// int_T^inf f(t) dt from the series (head plus modelled tail).
SeriesValue fpt_tail_mass(const SpectralDecomposition& decomp, double T);

/// sum_{k=-1..K} b_k.
double residue_partial_sum(const SpectralDecomposition& decomp) noexcept;

/// f on many points; OpenMP kernel.
std::vector<double> fpt_density_on(const SpectralDecomposition& decomp, std::span<const double> t);

// ---------------------------------------------------------------------------
// Closed-form time-domain series.
// ---------------------------------------------------------------------------

/// S(t) = (1 - 1/p) sum_n p^-n exp(-p^(-alpha n) t): mass remaining in Z_p.
double survival_series(const ModelParams& params, double t);

/// dS/dt by term-wise differentiation.
double survival_derivative(const ModelParams& params, double t);

/// g(t) = (1 - 1/p) sum_n p^-n (B_alpha - p^(-alpha n)) exp(-p^(-alpha n) t),
/// the return-rate density (equals dS/dt + B_alpha S). g(0) = 0.
double return_rate_g(const ModelParams& params, double t);

/// mu(t) = B_alpha (1-1/p) sum_n p^((alpha-1) n) (1 - exp(-p^(-alpha n) t))
///         + S(t) - 1.
double mean_returns_closed(const ModelParams& params, double t);

}  // namespace umfpt
