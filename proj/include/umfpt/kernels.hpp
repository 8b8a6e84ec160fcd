#pragma once

// Inner loops shared by the spectral, Volterra and hierarchy modules. Every
// kernel exists twice: `serial` is the plain reference used by the tests,
// `omp` is the OpenMP version used by the library. Both agree to rounding.

#include <cstdint>
#include <span>

namespace umfpt::kernels {

/// Per-level data of the hierarchical generator. Level index i runs over
/// distances p^l for l = -N+1 .. M (i = l + N - 1); the ball of radius p^l
/// around a state is a contiguous index block of length p^(i+1).
struct HierarchyLevels {
  int p = 2;
  int n_levels = 0;
  /// Rate to one target coset at distance exactly p^l, indexed by level.
  std::span<const double> per_target_rate;
  /// total_rate + outside_rate.
  double loss_rate = 0.0;
  /// Number of states in Z_p (p^N); they occupy indices [0, zp_states).
  std::uint64_t zp_states = 1;
  /// Index of the first level at distance > 1 (equals N).
  int first_outside_level = 0;
};

namespace serial {

/// out[i] = sum_k c[k] exp(-lambda[k] t[i]).
void exp_series(std::span<const double> lambda, std::span<const double> c,
                std::span<const double> t, std::span<double> out);

/// out[i] = h * sum''_{j=0..i} a[i-j] b[j] (endpoint weights 1/2), out[0] = 0.
void convolve_trapezoid(std::span<const double> a, std::span<const double> b, double h,
                        std::span<double> out);

/// Forward substitution for f = g - (g * f) with product-trapezoid weights and
/// f[0] = 0.
void volterra_forward(std::span<const double> g, double h, std::span<double> f);

/// out = A psi for the hierarchical generator. With `absorbing`, gains into
/// Z_p from states outside it are dropped. `scratch` needs psi.size() entries.
void hierarchy_apply(const HierarchyLevels& lv, std::span<const double> psi, bool absorbing,
                     std::span<double> out, std::span<double> scratch);

}  // namespace serial

namespace omp {

void exp_series(std::span<const double> lambda, std::span<const double> c,
                std::span<const double> t, std::span<double> out);
void convolve_trapezoid(std::span<const double> a, std::span<const double> b, double h,
                        std::span<double> out);
void volterra_forward(std::span<const double> g, double h, std::span<double> f);
void hierarchy_apply(const HierarchyLevels& lv, std::span<const double> psi, bool absorbing,
                     std::span<double> out, std::span<double> scratch);

}  // namespace omp

}  // namespace umfpt::kernels
