#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpdate/errors.hpp"
#include "dpdate/report_io.hpp"

using namespace dpdate;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("fnv-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("settings hash ignores order") {
  const Settings a = {{"x", "1"}, {"y", "2"}};
  const Settings b = {{"y", "2"}, {"x", "1"}};
  CHECK(Provenance::make("estimate", a, 1, {0.5}).config_hash ==
        Provenance::make("estimate", b, 1, {0.5}).config_hash);
  CHECK(Provenance::make("estimate", a, 1, {0.5}).config_hash !=
        Provenance::make("test", a, 1, {0.5}).config_hash);
}

TEST_CASE("tables print six significant digits and json keeps full precision") {
  Table t;
  t.columns = {"name", "value", "n", "flag"};
  t.add({std::string("pi"), 3.14159265358979, std::int64_t{3}, true});
  t.add({std::string("a,b"), -0.000123456789, std::int64_t{-1}, false});
  CHECK_THROWS_AS(t.add({1.0}), Error);
  const auto prov = Provenance::make("estimate", {{"k", "v"}}, 42, {0.1, 0.5});
  const std::string csv = format_csv(prov, t);
  CHECK(csv.find("# seed: 42\n") != std::string::npos);
  CHECK(csv.find("# alphas: 0.1;0.5\n") != std::string::npos);
  CHECK(csv.find("# config_hash: " + prov.hash_hex() + "\n") != std::string::npos);
  CHECK(csv.find("# version: ") != std::string::npos);
  CHECK(csv.find("pi,3.14159,3,true\n") != std::string::npos);
  CHECK(csv.find("\"a,b\",-0.000123457,-1,false\n") != std::string::npos);

  const auto j = to_json(prov, t, {{"extra", 1}});
  CHECK(j["rows"][0]["value"].get<double>() == 3.14159265358979);
  CHECK(j["provenance"]["seed"] == 42);
  CHECK(j["extra"] == 1);
}

TEST_CASE("outputs are byte-identical across writes") {
  Table t;
  t.columns = {"v"};
  t.add({1.0 / 3.0});
  const auto prov = Provenance::make("simulate", {{"seed", "1"}}, 1, {0.5});
  const auto dir = std::filesystem::temp_directory_path() / "dpdate_report_test";
  const auto first = write_outputs(dir / "a", "out", OutputFormat::Both, prov, t);
  const auto second = write_outputs(dir / "b", "out", OutputFormat::Both, prov, t);
  REQUIRE(first.size() == 2);
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(slurp(first[i]) == slurp(second[i]));
  CHECK(write_outputs(dir / "c", "out", OutputFormat::Csv, prov, t).size() == 1);
  CHECK_THROWS_AS(parse_format("xml"), Error);
}

TEST_CASE("simulation table layout") {
  SimConfig c;
  c.reps = 5;
  c.alphas = {0.5};
  const auto r = run_bias_mse(c);
  const auto t = sim_table(r);
  CHECK(t.rows.size() == 3);
  CHECK(t.columns.front() == "estimator");
  const auto p = run_power(c, 0.0, {0.0, 1.0, 2.0});
  CHECK(sim_table(p).rows.size() == 9);
}
