#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vetobar/cli_config.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(VETOBAR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path dir = fs::temp_directory_path() / "vetobar_cli_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kOut = fs::temp_directory_path() / "vetobar_cli_test" / "out";

}  // namespace

TEST_CASE("config schema validation") {
  using vetobar::parse_config;
  CHECK_THROWS_AS(parse_config("{not json"), vetobar::ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"bogus_key": 1})"), vetobar::ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"distribution": {"family": "uniform"}})"),
                  vetobar::ConfigError);  // missing support
  CHECK_THROWS_AS(parse_config(R"({"delta": 1.5})"), vetobar::ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"distribution": {"family": "uniform", "support": [0,1], "peak": 2}})"),
      vetobar::ConfigError);  // peak is not a uniform-family key
  const auto cfg = parse_config(
      R"({"distribution": {"family": "triangular", "support": [0,1], "peak": 0.6},
          "utility": {"kind": "linear_loss"}, "delta": 0.99, "seed": 3})");
  CHECK(cfg.distribution.has_value());
  CHECK(cfg.delta_list.size() == 1);
  CHECK(cfg.seed == 3u);
}

TEST_CASE("static command") {
  const auto cfgp = write_config("static.json", R"({
    "distribution": {"family": "uniform", "support": [0.2, 1.0]},
    "utility": {"kind": "linear_loss"},
    "seed": 1,
    "output": {"dir": ")" + (kOut / "static").string() + R"(", "formats": ["json", "csv"]}
  })");
  CHECK(run("static --config " + cfgp.string()) == 0);
  CHECK(fs::exists(kOut / "static" / "static_report.json"));
  const auto rep = nlohmann::json::parse(slurp(kOut / "static" / "static_report.json"));
  CHECK(rep.at("U").get<double>() == Catch::Approx(0.625).margin(1e-9));
  CHECK(rep.at("c_star").get<double>() == Catch::Approx(0.4).margin(1e-6));
  // Payoff curve has the provenance comment and header.
  const auto csv = slurp(kOut / "static" / "payoff_curve.csv");
  CHECK(csv.rfind("# config_hash=", 0) == 0);
  CHECK(csv.find("c,payoff") != std::string::npos);
}

TEST_CASE("missing config and bad usage exit with code 1") {
  CHECK(run("static --config /nonexistent.json") == 1);
  CHECK(run("bogus-subcommand") == 1);
  // schema error with an unknown key
  const auto bad = write_config("bad.json", R"({"frobnicate": 1})");
  CHECK(run("static --config " + bad.string()) == 1);
}

TEST_CASE("hypothesis gates exit with code 2") {
  // mu_delta undefined at low delta
  const auto lowdelta = write_config("lowdelta.json", R"({
    "two_type": {"l": 0.3, "h": 0.55, "delta": 0.2, "mu0": 0.5},
    "seed": 1,
    "output": {"dir": ")" + (kOut / "gate").string() + R"("}
  })");
  CHECK(run("two-type --config " + lowdelta.string()) == 2);
  // leapfrog hypothesis violated: v_lo > 0 and v_hi > 1/2
  const auto badleap = write_config("badleap.json", R"({
    "distribution": {"family": "uniform", "support": [0.2, 1.0]},
    "delta": 0.99,
    "seed": 1,
    "output": {"dir": ")" + (kOut / "gate").string() + R"("}
  })");
  CHECK(run("leapfrog --config " + badleap.string()) == 2);
}

TEST_CASE("two-type command with traces is reproducible") {
  const auto cfgp = write_config("tt.json", R"({
    "two_type": {"l": 0.3, "h": 0.55, "delta": 0.99, "mu0": 0.7},
    "seed": 99,
    "simulate": 20,
    "output": {"dir": ")" + (kOut / "tt").string() + R"(", "formats": ["json", "csv"]}
  })");
  CHECK(run("two-type --config " + cfgp.string()) == 0);
  const auto first = slurp(kOut / "tt" / "traces.csv");
  CHECK(run("two-type --config " + cfgp.string()) == 0);
  CHECK(first == slurp(kOut / "tt" / "traces.csv"));  // byte-identical re-run
  CHECK(first.find("trace,period,offer,acceptor,posterior") != std::string::npos);
  const auto rep = slurp(kOut / "tt" / "two_type_report.json");
  CHECK(rep.find("\"region\": \"Leapfrogging\"") != std::string::npos);
  // Simulation without a seed is refused.
  const auto noseed = write_config("tt_noseed.json", R"({
    "two_type": {"l": 0.3, "h": 0.55, "delta": 0.99, "mu0": 0.7},
    "simulate": 5,
    "output": {"dir": ")" + (kOut / "tt2").string() + R"("}
  })");
  CHECK(run("two-type --config " + noseed.string()) == 1);
}

TEST_CASE("sweep command emits the pinned CSV format") {
  const auto cfgp = write_config("sweep.json", R"({
    "distribution": {"family": "uniform", "support": [0.2, 1.0]},
    "utility": {"kind": "linear_loss"},
    "delta_list": [0.9, 0.99],
    "grid": {"auto": true},
    "seed": 1,
    "sweep": {"target": "skim"},
    "output": {"dir": ")" + (kOut / "sweep").string() + R"(", "formats": ["csv", "svg"]}
  })");
  CHECK(run("sweep --config " + cfgp.string()) == 0);
  const auto csv = slurp(kOut / "sweep" / "sweep.csv");
  CHECK(csv.find("delta,payoff,benchmark,gap") != std::string::npos);
  CHECK(fs::exists(kOut / "sweep" / "sweep.svg"));
  const auto svg = slurp(kOut / "sweep" / "sweep.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("verify command exit codes") {
  const auto good = write_config("verify_ok.json", R"({
    "two_type": {"l": 0.3, "h": 0.55, "delta": 0.9, "mu0": 0.7},
    "seed": 1,
    "verify": {"profile": "two-type", "mutation": "none"},
    "output": {"dir": ")" + (kOut / "verify").string() + R"("}
  })");
  CHECK(run("verify --config " + good.string()) == 0);
  const auto bad = write_config("verify_bad.json", R"({
    "two_type": {"l": 0.3, "h": 0.55, "delta": 0.9, "mu0": 0.7},
    "seed": 1,
    "verify": {"profile": "two-type", "mutation": "wrong_lambda"},
    "output": {"dir": ")" + (kOut / "verify_bad").string() + R"("}
  })");
  CHECK(run("verify --config " + bad.string()) == 3);
  const auto body = slurp(kOut / "verify_bad" / "deviation_report.json");
  CHECK(body.find("\"pass\": false") != std::string::npos);
}
