#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "umfpt/kernels.hpp"
#include "umfpt/params.hpp"
#include "umfpt/volterra.hpp"

namespace umfpt {

inline constexpr std::uint64_t kDefaultStateCap = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kDefaultMasterCap = std::uint64_t{1} << 14;

/// Cosets of radius p^-N inside the ball of radius p^M, indexed 0..p^(M+N)-1.
/// Digit i of the index (base p, least significant first) is the p-adic digit
/// at position N-1-i, so the ball of radius p^l around a state is the
/// contiguous block of p^(l+N) indices sharing all digits >= l+N, and Z_p is
/// the block [0, p^N).
class TruncatedHierarchy {
 public:
  const ModelParams& params() const noexcept { return params_; }
  int M() const noexcept { return M_; }
  int N() const noexcept { return N_; }
  std::uint64_t n_states() const noexcept { return n_states_; }
  std::uint64_t zp_states() const noexcept { return zp_states_; }

  /// Number of distance levels, M + N; level index i <-> distance p^(i-N+1).
  int n_levels() const noexcept { return M_ + N_; }
  int distance_exponent(int level_index) const noexcept { return level_index - N_ + 1; }

  /// Aggregate rate of jumping to distance exactly p^l, indexed by level.
  const std::vector<double>& level_rates() const noexcept { return level_rates_; }
  /// Rate to a single target coset at that distance.
  const std::vector<double>& per_target_rates() const noexcept { return per_target_rates_; }
  double total_rate() const noexcept { return total_rate_; }
  /// Rate of proposals beyond radius p^M.
  double outside_rate() const noexcept { return outside_rate_; }

  bool in_zp(std::uint64_t state) const noexcept { return state < zp_states_; }
  /// Level index of the distance between two distinct states; -1 if equal.
  int distance_level(std::uint64_t a, std::uint64_t b) const noexcept;
  /// Rate from `state` (outside Z_p) into Z_p as a whole.
  double rate_into_zp(std::uint64_t state) const noexcept;

  kernels::HierarchyLevels kernel_levels() const noexcept;

  friend TruncatedHierarchy build_hierarchy(const ModelParams&, int, int, std::uint64_t);

 private:
  explicit TruncatedHierarchy(const ModelParams& params) : params_(params) {}

  ModelParams params_;
  int M_ = 1;
  int N_ = 0;
  std::uint64_t n_states_ = 0;
  std::uint64_t zp_states_ = 1;
  std::vector<std::uint64_t> powers_;  // p^0 .. p^(M+N)
  std::vector<double> level_rates_;
  std::vector<double> per_target_rates_;
  double total_rate_ = 0.0;
  double outside_rate_ = 0.0;
};

/// CapacityError if p^(M+N) exceeds state_cap.
TruncatedHierarchy build_hierarchy(const ModelParams& params, int M, int N,
                                   std::uint64_t state_cap = kDefaultStateCap);

/// Dense generator, entry [x * n + y] = rate y -> x, diagonal = -(total + outside).
/// With `absorbing`, entries from outside Z_p into Z_p are zeroed (they stay in
/// the diagonal loss). Intended for small n only.
std::vector<double> dense_generator(const TruncatedHierarchy& h, bool absorbing);

// ---------------------------------------------------------------------------
// Event-driven simulation.
//
// Events are generated at rate total_rate + outside_rate. An event drawn from
// the outside share is a null event: the particle stays, and the event is
// flagged. Conditioned on not being null, the destination follows
// level_rates / total_rate, so the path law equals the kernel conditioned on
// the truncated ball. Up to the first flagged event the path also coincides
// with a path of the untruncated walk, which gives the bias allowance below.
// ---------------------------------------------------------------------------

struct JumpEvent {
  double time = 0.0;
  std::uint64_t state = 0;
  int level = -1;  // level index of the jump, -1 for a flagged null event
  bool flagged = false;
};

struct Trajectory {
  std::uint64_t start = 0;
  std::vector<JumpEvent> events;
};

/// Trajectory `index` of the stream derived from `seed`. Starts uniformly in Z_p.
Trajectory sample_trajectory(const TruncatedHierarchy& h, std::uint64_t seed, double t_max,
                             std::uint64_t index = 0);

struct EmpiricalFptResult {
  /// First-passage times that occurred by t_max, ascending.
  std::vector<double> samples;
  std::uint64_t n_traj = 0;
  /// No return by t_max (includes the never-left ones).
  std::uint64_t n_censored = 0;
  std::uint64_t n_never_left = 0;
  /// Trajectories with a flagged null event before min(tau, t_max).
  std::uint64_t n_flagged = 0;
  /// Per trajectory: every re-entry time into Z_p up to t_max (empty unless
  /// returns were recorded).
  std::vector<std::vector<double>> return_events;
  std::uint64_t seed = 0;
  double t_max = 0.0;
  int M = 0;
  int N = 0;

  /// Fraction of trajectories that may differ from the untruncated walk
  /// before their first passage.
  double truncation_bias_allowance() const noexcept {
    return n_traj ? static_cast<double>(n_flagged) / static_cast<double>(n_traj) : 0.0;
  }
};

EmpiricalFptResult estimate_fpt(const TruncatedHierarchy& h, std::uint64_t n_traj, double t_max,
                                std::uint64_t seed, bool record_returns = false);

struct EmpiricalReturnCounts {
  TimeGrid grid;
  /// q_hat[m][i]: fraction with >= m re-entries by t_i (NaN beyond t_max).
  std::vector<std::vector<double>> q_hat;
  std::vector<double> mu_hat;
  std::vector<double> mu_stderr;
};

EmpiricalReturnCounts estimate_return_counts(const EmpiricalFptResult& result, const TimeGrid& grid,
                                             int m_max);

/// Fraction of trajectories inside Z_p at each requested time.
struct OccupationEstimate {
  std::vector<double> times;
  std::vector<double> fraction;
  double flagged_fraction = 0.0;
};

OccupationEstimate estimate_zp_occupation(const TruncatedHierarchy& h, std::uint64_t n_traj,
                                          const std::vector<double>& times, std::uint64_t seed);

/// sup_{t <= t_max} |F_hat(t) - F(t)| where F_hat counts samples / n_total
/// (censored trajectories contribute mass only beyond t_max).
double ks_subdistribution_distance(const std::vector<double>& sorted_samples, std::uint64_t n_total,
                                   double t_max, const std::function<double(double)>& cdf);

/// Asymptotic two-sided Kolmogorov-Smirnov critical value c(level) / sqrt(n)
/// for level in {0.10, 0.05, 0.01, 0.001}.
double ks_critical_value(std::uint64_t n, double level = 0.01);

// ---------------------------------------------------------------------------
// Master equation on the truncated hierarchy.
// ---------------------------------------------------------------------------

struct MasterOptions {
  /// Drop gains from outside Z_p into Z_p (first-passage flux formulation).
  bool absorbing = true;
  /// RK4 step is at most step_factor / total_rate.
  double step_factor = 0.1;
  std::uint64_t state_cap = kDefaultMasterCap;
};

struct MasterResult {
  /// Rate of mass entering Z_p from outside at each grid time.
  SampledFunction flux;
  /// Mass inside Z_p.
  SampledFunction zp_mass;
  /// Mass anywhere in the truncated ball.
  SampledFunction total_mass;
  /// Cumulative mass absorbed into Z_p (absorbing mode) and escaped past p^M.
  SampledFunction absorbed;
  SampledFunction escaped;
  /// max_i |total_mass + absorbed + escaped - 1|.
  double max_mass_defect = 0.0;
  int substeps = 1;
};

/// Integrates d psi / dt = A psi from psi(0) uniform on Z_p with classical RK4.
/// CapacityError above the state cap; IntegrationError if the step leaves the
/// RK4 stability interval.
MasterResult integrate_absorbed_master(const TruncatedHierarchy& h, const TimeGrid& grid,
                                       const MasterOptions& options = {});

}  // namespace umfpt
