#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "umfpt/errors.hpp"
#include "umfpt/io.hpp"
#include "umfpt/spectral.hpp"

using namespace umfpt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("umfpt_io_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("doubles are written with full precision") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(INFINITY) == "inf");
}

TEST_CASE("output formats") {
  CHECK(parse_output_format("csv") == OutputFormat::csv);
  CHECK(parse_output_format("json") == OutputFormat::json);
  CHECK_THROWS_AS(parse_output_format("xml"), ParameterError);
}

TEST_CASE("tables carry provenance in both formats") {
  const auto dir = scratch_dir("table");
  Provenance prov;
  prov.command = "umfpt test";
  prov.add("p", 2LL).add("alpha", 0.5).add("note", std::string("x"));
  Table t;
  t.add_column("t", {0.0, 1.0});
  t.add_column("f", {0.25, 1.0 / 3.0});
  CHECK_THROWS_AS(t.add_column("bad", {1.0}), ParameterError);

  const auto csv = write_table(dir / "tab", OutputFormat::csv, prov, t);
  CHECK(csv.extension() == ".csv");
  const auto text = slurp(csv);
  CHECK(text.find("# command: umfpt test\n") == 0);
  CHECK(text.find("# version: " + std::string(version())) != std::string::npos);
  CHECK(text.find("# alpha: 0.5\n") != std::string::npos);
  CHECK(text.find("t,f\n0,0.25\n1,0.33333333333333331\n") != std::string::npos);

  const auto js = write_table(dir / "tab", OutputFormat::json, prov, t);
  const auto doc = read_json(js);
  CHECK(doc["provenance"]["command"] == "umfpt test");
  CHECK(doc["provenance"]["parameters"]["p"] == "2");
  CHECK(doc["data"]["f"][1].get<double>() == 1.0 / 3.0);
  fs::remove_all(dir);
}

TEST_CASE("spectral decompositions survive a JSON round trip") {
  const auto d = decompose(make_params(3, 0.5), 30);
  const auto dir = scratch_dir("spectrum");
  write_json(dir / "s.json", to_json(d));
  const auto back = spectral_from_json(read_json(dir / "s.json"));
  CHECK(back.K() == d.K());
  CHECK(back.params().p() == 3);
  REQUIRE(back.lambdas().size() == d.lambdas().size());
  for (std::size_t i = 0; i < d.lambdas().size(); ++i) {
    CHECK(back.lambdas()[i] == d.lambdas()[i]);
    CHECK(back.residues()[i] == d.residues()[i]);
  }
  CHECK(fpt_density_spectral(back, 2.0).value == fpt_density_spectral(d, 2.0).value);
  fs::remove_all(dir);
}

TEST_CASE("malformed documents raise IO errors") {
  CHECK_THROWS_AS(spectral_from_json(nlohmann::json{{"p", 2}}), IoError);
  CHECK_THROWS_AS(read_json("/nonexistent/definitely/missing.json"), IoError);
  const auto dir = scratch_dir("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(read_json(dir / "bad.json"), IoError);
  fs::remove_all(dir);
}
