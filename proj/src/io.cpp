#include "umfpt/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "umfpt/errors.hpp"

namespace umfpt {

std::string_view version() noexcept { return UMFPT_VERSION; }

OutputFormat parse_output_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ParameterError("unknown output format '" + std::string(s) + "' (expected csv or json)");
}

Provenance& Provenance::add(std::string key, std::string value) {
  fields.emplace_back(std::move(key), std::move(value));
  return *this;
}

Provenance& Provenance::add(std::string key, double value) {
  return add(std::move(key), format_double(value));
}

Provenance& Provenance::add(std::string key, long long value) {
  return add(std::move(key), std::to_string(value));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add_column(std::string name, std::vector<double> values) {
  if (!data.empty() && values.size() != data.front().size())
    throw ParameterError("column '" + name + "' has a different length");
  columns.push_back(std::move(name));
  data.push_back(std::move(values));
}

std::size_t Table::rows() const { return data.empty() ? 0 : data.front().size(); }

Table table_from(const SampledFunction& f, const std::string& name) {
  Table t;
  t.add_column("t", f.grid().points());
  t.add_column(name, f.values());
  return t;
}

nlohmann::json to_json(const Provenance& prov) {
  nlohmann::json j;
  j["command"] = prov.command;
  j["version"] = std::string(version());
  for (const auto& [k, v] : prov.fields) j["parameters"][k] = v;
  return j;
}

namespace {

// JSON has no NaN/inf; store them as null.
nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json array_of(const std::vector<double>& v) {
  auto a = nlohmann::json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::filesystem::path write_table(const std::filesystem::path& stem, OutputFormat format,
                                  const Provenance& prov, const Table& table) {
  auto path = stem;
  if (format == OutputFormat::json) {
    path += ".json";
    nlohmann::json doc;
    doc["provenance"] = to_json(prov);
    doc["columns"] = table.columns;
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      doc["data"][table.columns[c]] = array_of(table.data[c]);
    write_json(path, doc);
    return path;
  }
  path += ".csv";
  auto out = open_for_write(path);
  out << "# command: " << prov.command << '\n';
  out << "# version: " << version() << '\n';
  for (const auto& [k, v] : prov.fields) out << "# " << k << ": " << v << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out << (c ? "," : "") << format_double(table.data[c][r]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
  return path;
}

nlohmann::json to_json(const SpectralDecomposition& d) {
  nlohmann::json j;
  j["p"] = d.params().p();
  j["alpha"] = d.params().alpha();
  j["K"] = d.K();
  j["series_tol"] = d.series_tol();
  j["lambdas"] = std::vector<double>(d.lambdas().begin(), d.lambdas().end());
  j["residues"] = std::vector<double>(d.residues().begin(), d.residues().end());
  return j;
}

SpectralDecomposition spectral_from_json(const nlohmann::json& j) {
  try {
    const auto params = make_params(j.at("p").get<int>(), j.at("alpha").get<double>());
    return SpectralDecomposition(params, j.at("K").get<int>(), j.at("series_tol").get<double>(),
                                 j.at("lambdas").get<std::vector<double>>(),
                                 j.at("residues").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed spectral document: ") + e.what());
  }
}

nlohmann::json to_json(const EmpiricalFptResult& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["n_traj"] = r.n_traj;
  j["t_max"] = r.t_max;
  j["M"] = r.M;
  j["N"] = r.N;
  j["n_censored"] = r.n_censored;
  j["n_never_left"] = r.n_never_left;
  j["n_flagged"] = r.n_flagged;
  j["truncation_bias_allowance"] = r.truncation_bias_allowance();
  j["samples"] = r.samples;
  return j;
}

nlohmann::json to_json(const PowerLawFit& f) {
  nlohmann::json j;
  j["form"] = std::string(to_string(f.form));
  j["exponent"] = number_or_null(f.exponent);
  j["amplitude"] = number_or_null(f.amplitude);
  j["window"] = {f.t_lo, f.t_hi};
  j["residual"] = number_or_null(f.residual);
  j["log_offset"] = f.log_offset;
  j["n_points"] = f.n_points;
  return j;
}

nlohmann::json to_json(const RegimeReport& r) {
  nlohmann::json j;
  j["check"] = r.check;
  j["regime"] = r.regime;
  j["window"] = {r.t_lo, r.t_hi};
  j["fitted"] = number_or_null(r.fitted);
  j["expected"] = number_or_null(r.expected);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["fit"] = to_json(r.fit);
  for (const auto& [k, v] : r.extras) j["extras"][k] = number_or_null(v);
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace umfpt
