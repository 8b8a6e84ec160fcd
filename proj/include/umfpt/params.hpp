#pragma once

#include <cstddef>
#include <vector>

namespace umfpt {

bool is_prime(int n) noexcept;

/// Model constants of the ultrametric walk on Q_p with exponent alpha.
///
/// All derived constants are fixed at construction:
///   gamma_p(-alpha) = (1 - p^(-alpha-1)) / (1 - p^alpha)      (< 0)
///   kappa           = -1 / gamma_p(-alpha)                    (jump-rate prefactor)
///   B_alpha         = (1 - 1/p) / (1 - p^(-alpha-1))          (escape rate of Z_p)
///   C_alpha         = (p / p^alpha) ((p^alpha - 1)/(p - 1))^2 (return probability, alpha < 1)
class ModelParams {
 public:
  int p() const noexcept { return p_; }
  double alpha() const noexcept { return alpha_; }
  double gamma_p_neg_alpha() const noexcept { return gamma_p_neg_alpha_; }
  double b_alpha() const noexcept { return b_alpha_; }
  double c_alpha() const noexcept { return c_alpha_; }
  double kappa() const noexcept { return kappa_; }

  /// True when returns to Z_p are certain (alpha >= 1).
  bool recurrent() const noexcept { return alpha_ >= 1.0; }
  /// lim_{s->0+} F(s): 1 for alpha >= 1, C_alpha otherwise.
  double return_probability() const noexcept { return recurrent() ? 1.0 : c_alpha_; }

  friend ModelParams make_params(int p, double alpha);

 private:
  ModelParams() = default;

  int p_ = 2;
  double alpha_ = 1.0;
  double gamma_p_neg_alpha_ = 0.0;
  double b_alpha_ = 0.0;
  double c_alpha_ = 0.0;
  double kappa_ = 0.0;
};

/// Throws ParameterError unless p is prime and alpha > 0.
ModelParams make_params(int p, double alpha);

/// Uniform grid t_i = i*h, i = 0..n_steps.
class TimeGrid {
 public:
  double t_max() const noexcept { return t_max_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t size() const noexcept { return n_steps_ + 1; }
  double h() const noexcept { return h_; }
  double at(std::size_t i) const noexcept {
    return i == n_steps_ ? t_max_ : static_cast<double>(i) * h_;
  }
  std::vector<double> points() const;

  /// Index of the last grid point <= t (clamped to the grid).
  std::size_t index_at_or_below(double t) const noexcept;

  bool operator==(const TimeGrid& other) const noexcept {
    return n_steps_ == other.n_steps_ && t_max_ == other.t_max_;
  }

  friend TimeGrid make_time_grid(double t_max, std::size_t n_steps);

 private:
  TimeGrid() = default;

  double t_max_ = 1.0;
  std::size_t n_steps_ = 1;
  double h_ = 1.0;
};

TimeGrid make_time_grid(double t_max, std::size_t n_steps);
/// Grid with spacing h (t_max rounded to a whole number of steps).
TimeGrid make_time_grid_with_step(double t_max, double h);

}  // namespace umfpt
