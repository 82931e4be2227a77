#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pendulon/config.hpp"
#include "pendulon/io.hpp"

using namespace pendulon;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;
using Catch::Matchers::WithinRel;

namespace {

ExperimentConfig from_text(const std::string& text) {
  return read_config(IniDocument::parse(text, "test.ini"));
}

std::string error_of(const std::string& text) {
  try {
    from_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pendulon_test_" + name);
}

}  // namespace

TEST_CASE("ini parsing") {
  const IniDocument d = IniDocument::parse(
      "# leading comment\n"
      "[a]\n"
      "x = 1.5   # trailing\n"
      "name = foo;bar\n"
      "  y=2  \n"
      "\n"
      "[b]\n"
      "list = 1, 2.5 ,3e-2\n"
      "z = 4 ; also a comment",
      "t.ini");
  CHECK(d.number("a", "x", 0.0) == 1.5);
  CHECK(d.number("a", "y", 0.0) == 2.0);
  CHECK(d.text("a", "name", "") == "foo;bar");
  CHECK(d.number("b", "z", 0.0) == 4.0);
  CHECK(d.number("b", "missing", -1.0) == -1.0);
  const auto l = d.list("b", "list", {});
  REQUIRE(l.size() == 3);
  CHECK(l[2] == 3e-2);
  CHECK_NOTHROW(d.reject_unknown({"a", "b"}));
}

TEST_CASE("ini syntax errors carry file and line") {
  auto msg = [](const std::string& text) {
    try {
      IniDocument::parse(text, "s.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK_THAT(msg("[a]\nx = 1\nx = 2\n"), StartsWith("s.ini:3:") && ContainsSubstring("duplicate key"));
  CHECK_THAT(msg("[a]\n[a]\n"), StartsWith("s.ini:2:") && ContainsSubstring("duplicate section"));
  CHECK_THAT(msg("x = 1\n"), StartsWith("s.ini:1:") && ContainsSubstring("outside any section"));
  CHECK_THAT(msg("[a]\njunk\n"), StartsWith("s.ini:2:"));
  CHECK_THAT(msg("[a\n"), StartsWith("s.ini:1:"));
  CHECK_THAT(msg("[a]\n = 3\n"), StartsWith("s.ini:2:"));
}

TEST_CASE("defaults") {
  const ExperimentConfig c = from_text("");
  const ChainParams p = default_chain();
  CHECK(c.chain.M == p.M);
  CHECK_THAT(c.chain.Ks(), WithinRel(0.01, 1e-15));
  CHECK(c.chain.Kt() == 0.0);
  CHECK(c.sites == 400);
  CHECK(c.scaling.e0 == 1e-4);
  CHECK(c.lagexp.samples == 100);
  CHECK(c.expansion.h.family == c.chain.h.family);
}

TEST_CASE("continuum and per-bond couplings") {
  const ExperimentConfig a = from_text("[chain]\ndelta = 0.01\nK_s = 0.02\nK_t = 0.001\n");
  CHECK_THAT(a.chain.kappa_s, WithinRel(200.0, 1e-14));
  CHECK_THAT(a.chain.Kt(), WithinRel(0.001, 1e-14));
  const ExperimentConfig b = from_text("[chain]\ndelta = 0.01\nkappa_s = 200\n");
  CHECK_THAT(b.chain.Ks(), WithinRel(0.02, 1e-14));
  CHECK_THAT(error_of("[chain]\nkappa_s = 1\nK_s = 1\n"),
             StartsWith("test.ini:3:") && ContainsSubstring("not both"));
}

TEST_CASE("semantic errors") {
  CHECK_THAT(error_of("[chain]\nM = 1\nbogus = 3\n"),
             StartsWith("test.ini:3:") && ContainsSubstring("unknown key 'bogus'"));
  CHECK_THAT(error_of("\n[nope]\n"), StartsWith("test.ini:2:") && ContainsSubstring("unknown section"));
  CHECK_THAT(error_of("[chain]\nM = heavy\n"), StartsWith("test.ini:2:") && ContainsSubstring("expected a number"));
  CHECK_THAT(error_of("[chain]\nsites = -4\n"), StartsWith("test.ini:2:"));
  CHECK_THAT(error_of("[chain]\nsites = 2\n"), ContainsSubstring("at least 3"));
  CHECK_THAT(error_of("[chain]\ntopology = ring\n"), StartsWith("test.ini:2:"));
  CHECK_THAT(error_of("[potential]\nfamily = cubic\n"), StartsWith("test.ini:2:"));
  CHECK_THAT(error_of("[potential]\nc2 = -1\n"), StartsWith("test.ini:2:"));
  CHECK_THAT(error_of("[chain]\nM = -1\n"), StartsWith("test.ini: [chain]"));
  CHECK_THAT(error_of("[integrator]\n\ndt = 0\n"), StartsWith("test.ini:3:"));
  CHECK_THAT(error_of("[stiff]\nladder = 10, 5\n"), ContainsSubstring("increasing"));
  CHECK_THAT(error_of("[scaling]\neps_list = 0.1,,0.2\n"), ContainsSubstring("empty list item"));
  CHECK_THAT(error_of("[initial]\nkind = wobble\n"), StartsWith("test.ini:2:"));
  CHECK_THROWS_AS(load_config(temp_path("does_not_exist.ini").string()), ConfigError);
  CHECK_THROWS_AS(from_text("[chain]\nM = x\n"), DomainError);
}

TEST_CASE("shipped configs load") {
  const std::filesystem::path dir = std::filesystem::path(PENDULON_SOURCE_DIR) / "tools" / "configs";
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".ini") continue;
    INFO(e.path().string());
    CHECK_NOTHROW(load_config(e.path().string()));
    ++n;
  }
  CHECK(n >= 3);
}

TEST_CASE("csv output") {
  const auto path = temp_path("out.csv");
  const std::vector<double> xs{0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23};
  {
    CsvWriter w(path.string(), "example", {"a", "b"});
    for (double x : xs) w.row({x, -x});
    CHECK_THROWS_AS(w.row({1.0}), DomainError);
  }
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# schema: example v1");
  std::getline(in, line);
  CHECK(line == "a,b");
  for (double x : xs) {
    REQUIRE(std::getline(in, line));
    const auto comma = line.find(',');
    CHECK(std::strtod(line.substr(0, comma).c_str(), nullptr) == x);
    CHECK(std::strtod(line.substr(comma + 1).c_str(), nullptr) == -x);
  }
  std::filesystem::remove(path);
  CHECK(fmt_double(0.1) == "0.10000000000000001");
}
