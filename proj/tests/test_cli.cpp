#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "twolocus/asymptotic.hpp"
#include "twolocus/two_locus.hpp"

using namespace twolocus;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

Rational r(const char* text) { return parse_rational(text); }

}  // namespace

TEST_CASE("exact") {
  auto res = run({"exact", "--config", R"({"a":[1],"b":[1],"c":[[0]]})", "--theta-a", "1", "--theta-b", "1", "--rho", "5"});
  CHECK(res.code == 0);
  CHECK(trimmed(res.out) == "1");

  res = run({"exact", "--config", R"({"a":[0],"b":[0],"c":[[2]]})", "--theta-a", "1/2", "--rho", "5/2"});
  REQUIRE(res.code == 0);
  GoldingSolver<Rational> solver({r("1/2"), Rational(1), r("5/2")});
  CHECK(parse_rational(trimmed(res.out)) == solver.probability(TwoLocusConfig({0}, {0}, {2})));

  res = run({"exact", "--config", R"({"a":[0],"b":[0],"c":[[2]]})", "--rho", "5", "--backend", "float"});
  REQUIRE(res.code == 0);
  GoldingSolver<Rational> unit({Rational(1), Rational(1), Rational(5)});
  CHECK(std::stod(res.out) == doctest::Approx(unit.probability(TwoLocusConfig({0}, {0}, {2})).get_d()).epsilon(1e-12));
}

TEST_CASE("asym") {
  auto res = run({"asym", "--config", R"({"a":[2],"b":[1,1],"c":[[0,0]]})", "--order", "1", "--rho", "10"});
  CHECK(res.code == 0);
  const auto plain = TwoLocusConfig({2}, {1, 1}, {0, 0});
  CHECK(parse_rational(trimmed(res.out)) == q0(plain, Params<Rational>{Rational(1), Rational(1), Rational(0)}));

  res = run({"asym", "--config", R"({"a":[0],"b":[0],"c":[[2]]})", "--rho", "10", "--terms"});
  CHECK(res.code == 0);
  CHECK(res.out.find("q0=1/4") != std::string::npos);
  CHECK(res.out.find("sigma=-1/4") != std::string::npos);
  CHECK(res.out.find("value=111/400") != std::string::npos);

  res = run({"asym", "--config", R"({"a":[0],"b":[0],"c":[[2]]})", "--rho", "10", "--format", "json", "--sigma-terms"});
  CHECK(res.code == 0);
  CHECK_NOTHROW(nlohmann::json::parse(res.out));
}

TEST_CASE("esf") {
  auto res = run({"esf", "--counts", "2,1,1"});
  CHECK(res.code == 0);
  CHECK(trimmed(res.out) == "q=1/24 p=1/4 orderings=6");
  res = run({"esf", "--n", "3", "--theta", "1", "--format", "csv"});
  CHECK(res.code == 0);
  CHECK(res.out == "n,k,pmf\n3,1,1/3\n3,2,1/2\n3,3,1/6\n");
}

TEST_CASE("counts") {
  auto res = run({"counts", "--c", "2", "--k", "1", "--l", "1", "--rho", "8", "--method", "asymptotic", "--order", "1"});
  CHECK(res.code == 0);
  CHECK(trimmed(res.out) == "9/32");
  res = run({"counts", "--a", "1", "--c", "1", "--rho", "8", "--format", "csv"});
  CHECK(res.code == 0);
  CHECK(res.out == "k,l,p\n1,1,1/2\n2,1,1/2\n");
  res = run({"counts", "--c", "2", "--k", "1", "--l", "1", "--rho", "8"});
  CHECK(res.code == 0);
  CHECK(parse_rational(trimmed(res.out)) > 0);
}

TEST_CASE("verify") {
  auto res = run({"verify", "--n-max", "4"});
  CHECK(res.code == 0);
  res = run({"verify", "--n-max", "3"});
  CHECK(res.code == 0);
  CHECK(res.out.find("configs: 51,") != std::string::npos);
  res = run({"verify", "--n-max", "2", "--rho-schedule", "10", "5"});
  CHECK(res.code == 2);
}

TEST_CASE("table") {
  auto res = run({"table", "--n-max", "2", "--rho", "10", "100", "--method", "asymptotic", "--order", "2"});
  CHECK(res.code == 0);
  CHECK(res.out.rfind("config,theta_a", 0) == 0);
  res = run({"table", "--n-max", "1", "--rho", "10", "--format", "json"});
  CHECK(res.code == 0);
  const auto doc = nlohmann::json::parse(res.out);
  CHECK(doc.size() == 3);
}

TEST_CASE("error exits") {
  auto res = run({"exact", "--config", R"({"a":[1],)", "--rho", "1"});
  CHECK(res.code == 2);
  CHECK(res.err.find("byte 10") != std::string::npos);

  res = run({"exact", "--config", R"({"a":[0,0],"b":[0,0],"c":[[3,1],[0,2]]})", "--rho", "1", "--max-states", "5"});
  CHECK(res.code == 3);
  CHECK(res.err.find("state") != std::string::npos);

  CHECK(run({"exact", "--bogus"}).code == 2);
  CHECK(run({"exact", "--config", R"({"a":[1],"b":[],"c":[]})", "--rho", "-1"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"exact", "--help"}).code == 0);
}

TEST_CASE("run file values yield to the command line") {
  const auto path = std::filesystem::temp_directory_path() / "twolocus_cli_run_file.json";
  {
    std::ofstream f(path);
    f << R"({"config":"{\"a\":[0],\"b\":[0],\"c\":[[2]]}","theta_a":"1/2","rho":"5/2"})";
  }
  auto res = run({"exact", "--run-file", path.string()});
  REQUIRE(res.code == 0);
  GoldingSolver<Rational> solver({r("1/2"), Rational(1), r("5/2")});
  CHECK(parse_rational(trimmed(res.out)) == solver.probability(TwoLocusConfig({0}, {0}, {2})));

  res = run({"exact", "--run-file", path.string(), "--rho", "7"});
  REQUIRE(res.code == 0);
  GoldingSolver<Rational> other({r("1/2"), Rational(1), Rational(7)});
  CHECK(parse_rational(trimmed(res.out)) == other.probability(TwoLocusConfig({0}, {0}, {2})));

  {
    std::ofstream f(path);
    f << "{\"rho\": ";
  }
  CHECK(run({"exact", "--run-file", path.string()}).code == 2);
  std::filesystem::remove(path);
}
