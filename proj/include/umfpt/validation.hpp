#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "umfpt/params.hpp"
#include "umfpt/spectral.hpp"

namespace umfpt {

struct CheckResult {
  std::string id;      // e.g. "route_equivalence"
  std::string label;   // case description, e.g. "p=2 alpha=0.5"
  bool pass = false;
  std::string detail;  // one-line human readable summary
  nlohmann::json metrics = nlohmann::json::object();
};

struct ValidationConfig {
  std::vector<std::pair<int, double>> cases = {{2, 0.5}, {2, 1.0}, {2, 2.0},
                                               {3, 0.5}, {3, 1.0}, {3, 2.0}};
  double volterra_h = 0.01;
  double route_t_lo = 0.5;
  double route_t_hi = 50.0;
  int m_max = 64;

  bool run_simulation = true;
  std::uint64_t n_traj = 100000;
  std::uint64_t seed = 20240611;

  bool run_master = true;

  /// Replaces the computed decomposition for a matching (p, alpha).
  std::optional<SpectralDecomposition> spectrum_override;
};

/// Returns the decomposition the checks should use for these parameters.
SpectralDecomposition spectrum_for(const ModelParams& params, const ValidationConfig& cfg);

// One function per cross-route or analytic check. Each is self-contained and
// deterministic (simulation checks use cfg.seed).

CheckResult check_route_equivalence(const ModelParams& params, const ValidationConfig& cfg);
CheckResult check_normalization(const ModelParams& params, const ValidationConfig& cfg);
CheckResult check_absorbed_flux(const ValidationConfig& cfg);
CheckResult check_monte_carlo_cdf(const ValidationConfig& cfg);
CheckResult check_monte_carlo_transient(const ValidationConfig& cfg);
CheckResult check_return_structure(const ModelParams& params, const ValidationConfig& cfg);
CheckResult check_return_limits(const ValidationConfig& cfg);
CheckResult check_three_route_mu(const ModelParams& params, const ValidationConfig& cfg);
CheckResult check_tail_exponent(const ModelParams& params, const ValidationConfig& cfg);
CheckResult check_mean_growth(const ModelParams& params, const ValidationConfig& cfg);
CheckResult check_envelope_containment();
CheckResult check_spectral_structure(const ModelParams& params, const ValidationConfig& cfg);

/// Runs every check for every configured case.
std::vector<CheckResult> run_validation(const ValidationConfig& cfg);

nlohmann::json to_json(const CheckResult& r);

}  // namespace umfpt
