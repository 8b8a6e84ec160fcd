#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "umfpt/asymptotics.hpp"
#include "umfpt/hierarchy.hpp"
#include "umfpt/spectral.hpp"
#include "umfpt/volterra.hpp"

namespace umfpt {

std::string_view version() noexcept;

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(std::string_view s);

/// Header block written in front of every output file.
struct Provenance {
  std::string command;
  std::vector<std::pair<std::string, std::string>> fields;

  Provenance& add(std::string key, std::string value);
  Provenance& add(std::string key, double value);
  Provenance& add(std::string key, long long value);
};

/// Shortest text that round-trips the double (17 significant digits).
std::string format_double(double v);

/// A named set of equally long columns.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[c][row]

  void add_column(std::string name, std::vector<double> values);
  std::size_t rows() const;
};

Table table_from(const SampledFunction& f, const std::string& name);

/// CSV with a '#'-prefixed provenance header, or one JSON document holding
/// the provenance and the columns. The extension is chosen by `format`.
std::filesystem::path write_table(const std::filesystem::path& stem, OutputFormat format,
                                  const Provenance& prov, const Table& table);

nlohmann::json to_json(const Provenance& prov);
nlohmann::json to_json(const SpectralDecomposition& d);
nlohmann::json to_json(const EmpiricalFptResult& r);
nlohmann::json to_json(const PowerLawFit& f);
nlohmann::json to_json(const RegimeReport& r);

/// Rebuilds a decomposition from its JSON form; ParameterError/IoError on
/// malformed input.
SpectralDecomposition spectral_from_json(const nlohmann::json& j);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace umfpt
