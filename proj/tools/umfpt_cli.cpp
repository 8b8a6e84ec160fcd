// umfpt: command-line front end. Subcommands write plot-ready tables into the
// output directory; see README.md for the file layout.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "umfpt/asymptotics.hpp"
#include "umfpt/errors.hpp"
#include "umfpt/hierarchy.hpp"
#include "umfpt/io.hpp"
#include "umfpt/params.hpp"
#include "umfpt/spectral.hpp"
#include "umfpt/validation.hpp"
#include "umfpt/volterra.hpp"

namespace fs = std::filesystem;
using namespace umfpt;

namespace {

enum ExitCode : int {
  kOk = 0,
  kParameter = 2,
  kCapacity = 3,
  kValidationFailed = 4,
  kNumerical = 5,
  kIo = 6,
};

struct RunConfig {
  int p = 2;
  double alpha = 1.0;
  double t_max = 50.0;
  std::size_t steps = 5000;
  int roots = 0;  // 0: automatic truncation
  double series_tol = 1e-12;
  int m_max = kDefaultMMax;
  int M = 8;
  int N = 0;
  std::uint64_t n_traj = 10000;
  double t_max_sim = 1000.0;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string format = "csv";
  std::string spectrum_file;
  std::vector<std::string> cases;
  bool quick = false;
  bool seed_given = false;
  bool n_traj_given = false;
  std::string command_line;
};

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--p", cfg.p, "prime p")->capture_default_str();
  sub->add_option("--alpha", cfg.alpha, "exponent alpha > 0")->capture_default_str();
  sub->add_option("--t-max", cfg.t_max, "time horizon of the sampled curves")->capture_default_str();
  sub->add_option("--steps", cfg.steps, "number of grid steps on [0, t-max]")->capture_default_str();
  sub->add_option("--K", cfg.roots, "number of eigenvalues (0 = automatic)")->capture_default_str();
  sub->add_option("--series-tol", cfg.series_tol, "inner-series tolerance")->capture_default_str();
  sub->add_option("--m-max", cfg.m_max, "highest return count m")->capture_default_str();
  sub->add_option("--M", cfg.M, "outer radius exponent of the hierarchy")->capture_default_str();
  sub->add_option("--N", cfg.N, "resolution exponent of the hierarchy")->capture_default_str();
  sub->add_option("--n-traj", cfg.n_traj, "number of simulated trajectories")->capture_default_str();
  sub->add_option("--t-max-sim", cfg.t_max_sim, "simulation horizon")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  sub->add_option("--out", cfg.out, "output directory")->envname("UMFPT_OUT_DIR")->capture_default_str();
  sub->add_option("--format", cfg.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

Provenance provenance(const RunConfig& cfg, const std::string& command) {
  Provenance prov;
  prov.command = cfg.command_line;
  prov.add("subcommand", command)
      .add("p", static_cast<long long>(cfg.p))
      .add("alpha", cfg.alpha)
      .add("t_max", cfg.t_max)
      .add("n_steps", static_cast<long long>(cfg.steps));
  return prov;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) { return fs::path(cfg.out) / name; }

TimeGrid grid_of(const RunConfig& cfg) { return make_time_grid(cfg.t_max, cfg.steps); }

SpectralDecomposition spectrum_of(const RunConfig& cfg, const ModelParams& params) {
  if (!cfg.spectrum_file.empty()) return spectral_from_json(read_json(cfg.spectrum_file));
  if (cfg.roots < 0) throw ParameterError("--K must be >= 0");
  return decompose(params, cfg.roots == 0 ? -1 : cfg.roots - 1, cfg.series_tol);
}

void report_file(const fs::path& p) { std::cout << "wrote " << p.string() << '\n'; }

int cmd_spectrum(const RunConfig& cfg) {
  const auto params = make_params(cfg.p, cfg.alpha);
  const auto d = spectrum_of(cfg, params);
  const auto fmt = parse_output_format(cfg.format);
  auto prov = provenance(cfg, "spectrum");
  prov.add("K", static_cast<long long>(d.K())).add("series_tol", d.series_tol());

  Table lam;
  std::vector<double> k, l, b, res;
  for (int i = -1; i <= d.K(); ++i) {
    k.push_back(i);
    l.push_back(d.lambda(i));
    b.push_back(d.residue(i));
    res.push_back(i < 0 || d.scaled_residuals().empty()
                      ? std::numeric_limits<double>::quiet_NaN()
                      : d.scaled_residuals()[static_cast<std::size_t>(i)]);
  }
  lam.add_column("k", k);
  lam.add_column("lambda", l);
  lam.add_column("residue", b);
  lam.add_column("scaled_residual", res);
  report_file(write_table(out_path(cfg, "lambdas"), fmt, prov, lam));

  const auto grid = grid_of(cfg);
  std::vector<double> t = grid.points();
  std::vector<double> f(t.size()), err(t.size()), cdf(t.size()), s(t.size()), g(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 0.0) {
      const auto sv = fpt_density_spectral(d, t[i]);
      f[i] = sv.value;
      err[i] = sv.truncation_error;
    } else {
      err[i] = std::numeric_limits<double>::quiet_NaN();
    }
    cdf[i] = fpt_cdf_spectral(d, t[i]).value;
    s[i] = survival_series(params, t[i]);
    g[i] = return_rate_g(params, t[i]);
  }
  Table series;
  series.add_column("t", t);
  series.add_column("f", f);
  series.add_column("f_truncation_error", err);
  series.add_column("cdf", cdf);
  series.add_column("survival", s);
  series.add_column("return_rate", g);
  report_file(write_table(out_path(cfg, "series"), fmt, prov, series));

  const auto doc_path = out_path(cfg, "spectrum.json");
  write_json(doc_path, to_json(d));
  report_file(doc_path);
  return kOk;
}

int cmd_returns(const RunConfig& cfg) {
  const auto params = make_params(cfg.p, cfg.alpha);
  const auto fmt = parse_output_format(cfg.format);
  const auto grid = grid_of(cfg);
  auto prov = provenance(cfg, "returns");
  prov.add("m_max", static_cast<long long>(cfg.m_max));
  const auto pipe = run_volterra_pipeline(params, grid, cfg.m_max);

  Table fg;
  fg.add_column("t", grid.points());
  fg.add_column("return_rate", pipe.g.values());
  fg.add_column("f", pipe.f.values());
  report_file(write_table(out_path(cfg, "fpt_volterra"), fmt, prov, fg));

  Table q, h;
  q.add_column("t", grid.points());
  h.add_column("t", grid.points());
  for (int m = 0; m <= cfg.m_max; ++m) {
    q.add_column("q" + std::to_string(m), pipe.dist.q[static_cast<std::size_t>(m)]);
    h.add_column("h" + std::to_string(m), pipe.dist.h[static_cast<std::size_t>(m)]);
  }
  report_file(write_table(out_path(cfg, "q_table"), fmt, prov, q));
  report_file(write_table(out_path(cfg, "h_table"), fmt, prov, h));

  const auto quad = mean_returns_quadrature(pipe.g);
  const auto hm = mean_returns_from_hm(pipe.dist);
  std::vector<double> closed(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) closed[i] = mean_returns_closed(params, grid.at(i));
  Table mu;
  mu.add_column("t", grid.points());
  mu.add_column("mu_closed", closed);
  mu.add_column("mu_quadrature", quad.values());
  mu.add_column("mu_from_h", hm.mu.values());
  mu.add_column("deficit_lower", hm.deficit_lower);
  mu.add_column("deficit_upper", hm.deficit_upper);
  report_file(write_table(out_path(cfg, "mean_returns"), fmt, prov, mu));
  return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  const auto params = make_params(cfg.p, cfg.alpha);
  const auto fmt = parse_output_format(cfg.format);
  const auto hier = build_hierarchy(params, cfg.M, cfg.N);
  auto prov = provenance(cfg, "simulate");
  prov.add("seed", static_cast<long long>(cfg.seed))
      .add("n_traj", static_cast<long long>(cfg.n_traj))
      .add("M", static_cast<long long>(cfg.M))
      .add("N", static_cast<long long>(cfg.N))
      .add("t_max_sim", cfg.t_max_sim);
  const auto res = estimate_fpt(hier, cfg.n_traj, cfg.t_max_sim, cfg.seed, true);
  prov.add("n_censored", static_cast<long long>(res.n_censored))
      .add("n_never_left", static_cast<long long>(res.n_never_left))
      .add("truncation_bias_allowance", res.truncation_bias_allowance());

  auto doc = to_json(res);
  doc["provenance"] = to_json(prov);
  const auto samples_path = out_path(cfg, "fpt_samples.json");
  write_json(samples_path, doc);
  report_file(samples_path);

  // Empirical CDF on the grid with a 95% Dvoretzky-Kiefer-Wolfowitz band.
  const double t_hi = std::min(cfg.t_max, cfg.t_max_sim);
  const auto grid = make_time_grid(t_hi, cfg.steps);
  const auto d = decompose(params);
  const double n = static_cast<double>(res.n_traj);
  const double band = std::sqrt(std::log(2.0 / 0.05) / (2.0 * n));
  std::vector<double> ecdf(grid.size()), lo(grid.size()), hi(grid.size()), exact(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.at(i);
    const auto c = std::upper_bound(res.samples.begin(), res.samples.end(), t) - res.samples.begin();
    ecdf[i] = static_cast<double>(c) / n;
    lo[i] = std::max(0.0, ecdf[i] - band);
    hi[i] = std::min(1.0, ecdf[i] + band);
    exact[i] = fpt_cdf_spectral(d, t).value;
  }
  Table cdf;
  cdf.add_column("t", grid.points());
  cdf.add_column("ecdf", ecdf);
  cdf.add_column("band_lower", lo);
  cdf.add_column("band_upper", hi);
  cdf.add_column("spectral_cdf", exact);
  report_file(write_table(out_path(cfg, "empirical_cdf"), fmt, prov, cdf));

  const auto counts = estimate_return_counts(res, grid, cfg.m_max);
  Table ret;
  ret.add_column("t", grid.points());
  for (int m = 0; m <= cfg.m_max; ++m)
    ret.add_column("q_hat" + std::to_string(m), counts.q_hat[static_cast<std::size_t>(m)]);
  std::vector<double> closed(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) closed[i] = mean_returns_closed(params, grid.at(i));
  ret.add_column("mu_hat", counts.mu_hat);
  ret.add_column("mu_stderr", counts.mu_stderr);
  ret.add_column("mu_closed", closed);
  report_file(write_table(out_path(cfg, "empirical_returns"), fmt, prov, ret));
  return kOk;
}

int cmd_absorbed(const RunConfig& cfg) {
  const auto params = make_params(cfg.p, cfg.alpha);
  const auto fmt = parse_output_format(cfg.format);
  const auto hier = build_hierarchy(params, cfg.M, cfg.N);
  const auto grid = grid_of(cfg);
  auto prov = provenance(cfg, "absorbed");
  prov.add("M", static_cast<long long>(cfg.M)).add("N", static_cast<long long>(cfg.N));
  const auto master = integrate_absorbed_master(hier, grid);
  const auto f = solve_volterra_fpt(sample_return_rate(params, grid));
  prov.add("max_mass_defect", master.max_mass_defect);

  Table flux;
  flux.add_column("t", grid.points());
  flux.add_column("flux", master.flux.values());
  flux.add_column("f_volterra", f.values());
  report_file(write_table(out_path(cfg, "absorbed_flux"), fmt, prov, flux));

  std::vector<double> balance(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    balance[i] = master.total_mass[i] + master.absorbed[i] + master.escaped[i];
  Table mass;
  mass.add_column("t", grid.points());
  mass.add_column("zp_mass", master.zp_mass.values());
  mass.add_column("total_mass", master.total_mass.values());
  mass.add_column("absorbed", master.absorbed.values());
  mass.add_column("escaped", master.escaped.values());
  mass.add_column("balance", balance);
  report_file(write_table(out_path(cfg, "absorbed_mass"), fmt, prov, mass));
  return kOk;
}

int cmd_asymptotics(const RunConfig& cfg) {
  const auto params = make_params(cfg.p, cfg.alpha);
  const auto d = spectrum_of(cfg, params);
  const auto t = log_space(1e2, 1e4, 400);
  const auto f = fpt_density_on(d, t);
  const auto tail = tail_exponent_report(params, t, f, 1e2, 1e4);

  double lo = 1e3, hi = 1e5;
  if (std::fabs(cfg.alpha - 1.0) < 1e-12) hi = 1e6;
  if (cfg.alpha < 1.0) {
    lo = 1e2;
    hi = 1e3;
  }
  const auto tm = log_space(lo, hi, 300);
  std::vector<double> mu(tm.size());
  for (std::size_t i = 0; i < tm.size(); ++i) mu[i] = mean_returns_closed(params, tm[i]);
  const auto growth = mean_growth_report(params, tm, mu, lo, hi);

  nlohmann::json env = nlohmann::json::array();
  for (double a : {1.5, 2.0, 4.0})
    for (double b : {1.5, 2.0, 4.0})
      for (int k : {0, 1, 2})
        for (double tt : {1e2, 1e3, 1e4}) {
          const auto e = envelope_bounds(a, b, k, tt);
          env.push_back({{"a", a}, {"b", b}, {"k", k}, {"t", tt}, {"s_min", e.s_min},
                         {"series", envelope_series(a, b, k, tt)}, {"s_max", e.s_max}});
        }

  nlohmann::json doc;
  doc["provenance"] = to_json(provenance(cfg, "asymptotics"));
  doc["tail_exponent"] = to_json(tail);
  doc["mean_growth"] = to_json(growth);
  doc["envelopes"] = env;
  const auto path = out_path(cfg, "asymptotics.json");
  write_json(path, doc);
  report_file(path);
  std::cout << "tail exponent " << tail.fitted << " (expected " << tail.expected << ") "
            << (tail.pass ? "PASS" : "FAIL") << '\n';
  std::cout << "mean growth " << growth.fitted << " (expected " << growth.expected << ") "
            << (growth.pass ? "PASS" : "FAIL") << '\n';
  return kOk;
}

int cmd_validate(const RunConfig& cfg) {
  ValidationConfig vc;
  if (!cfg.cases.empty()) {
    vc.cases.clear();
    for (const auto& c : cfg.cases) {
      const auto colon = c.find(':');
      if (colon == std::string::npos) throw ParameterError("case '" + c + "' is not p:alpha");
      vc.cases.emplace_back(std::stoi(c.substr(0, colon)), std::stod(c.substr(colon + 1)));
      make_params(vc.cases.back().first, vc.cases.back().second);
    }
  }
  // Defaults of the suite apply unless the user asked for something else.
  if (cfg.seed_given) vc.seed = cfg.seed;
  if (cfg.n_traj_given) vc.n_traj = cfg.n_traj;
  vc.run_simulation = !cfg.quick;
  vc.run_master = !cfg.quick;
  if (!cfg.spectrum_file.empty()) vc.spectrum_override = spectral_from_json(read_json(cfg.spectrum_file));

  const auto results = run_validation(vc);
  nlohmann::json doc;
  doc["provenance"] = to_json(provenance(cfg, "validate"));
  doc["checks"] = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    doc["checks"].push_back(to_json(r));
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << (r.label.empty() ? "" : " [" + r.label + "]")
              << ": " << r.detail << '\n';
  }
  doc["all_pass"] = all;
  const auto path = out_path(cfg, "validation_report.json");
  write_json(path, doc);
  report_file(path);
  return all ? kOk : kValidationFailed;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return kParameter;
    case ErrorKind::capacity: return kCapacity;
    case ErrorKind::io: return kIo;
    default: return kNumerical;
  }
}

void emit_error(std::string_view kind, std::string_view message, int code) {
  nlohmann::json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-passage and return statistics of the ultrametric random walk on Q_p"};
  app.set_version_flag("--version", std::string(version()));
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);

  RunConfig cfg;
  {
    std::ostringstream cl;
    for (int i = 0; i < argc; ++i) cl << (i ? " " : "") << argv[i];
    cfg.command_line = cl.str();
  }

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues, residues and series curves");
  auto* returns = app.add_subcommand("returns", "Volterra pipeline: f, q, h and mean returns");
  auto* simulate = app.add_subcommand("simulate", "event-driven simulation of the truncated walk");
  auto* absorbed = app.add_subcommand("absorbed", "absorbed master equation flux and mass balance");
  auto* asymptotics = app.add_subcommand("asymptotics", "tail and growth exponents, envelope table");
  auto* validate = app.add_subcommand("validate", "cross-route validation suite");
  for (auto* sub : {spectrum, returns, simulate, absorbed, asymptotics, validate}) add_common(sub, cfg);
  for (auto* sub : {spectrum, asymptotics, validate})
    sub->add_option("--spectrum-file", cfg.spectrum_file, "use a stored spectral document");
  validate->add_option("--case", cfg.cases, "p:alpha pair (repeatable)");
  validate->add_flag("--quick", cfg.quick, "skip the simulation and master-equation checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("parameter", e.what(), kParameter);
    return kParameter;
  }

  cfg.seed_given = validate->count("--seed") > 0;
  cfg.n_traj_given = validate->count("--n-traj") > 0;

  try {
    if (*spectrum) return cmd_spectrum(cfg);
    if (*returns) return cmd_returns(cfg);
    if (*simulate) return cmd_simulate(cfg);
    if (*absorbed) return cmd_absorbed(cfg);
    if (*asymptotics) return cmd_asymptotics(cfg);
    if (*validate) return cmd_validate(cfg);
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    emit_error(to_string(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    emit_error("internal", e.what(), kNumerical);
    return kNumerical;
  }
  return kOk;
}
