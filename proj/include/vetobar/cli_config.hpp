#pragma once

// Declarative experiment configuration: a single JSON document with strict
// schema validation (unknown keys rejected).

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "vetobar/core.hpp"
#include "vetobar/two_type.hpp"

namespace vetobar {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::optional<TypeDistribution> distribution;
  ProposerUtility utility = ProposerUtility::linear_loss();
  std::vector<double> delta_list;  // single delta stored as a 1-element list
  bool grid_auto = true;
  int type_points = 2001;
  int action_points = 801;
  std::optional<TwoTypeParams> two_type;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::set<std::string> formats{"json", "csv"};
  // command-specific options
  std::string sweep_target = "skim";          // skim | leapfrog | necessity
  std::string verify_profile = "two-type";    // two-type | skim
  std::string verify_mutation = "none";
  int verify_offer_points = 200;
  int verify_horizon = 200;
  double verify_eps = 1e-3;
  int simulate_traces = 0;

  std::string canonical;  // raw document for provenance hashing
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

inline TypeDistribution parse_distribution(const nlohmann::json& j) {
  if (!j.contains("family") || !j.contains("support"))
    throw ConfigError("distribution needs 'family' and 'support'");
  const std::string fam = j.at("family");
  const auto sup = j.at("support");
  if (!sup.is_array() || sup.size() != 2) throw ConfigError("support must be [lo, hi]");
  const double lo = sup[0], hi = sup[1];
  if (fam == "uniform") {
    require_keys(j, "distribution", {"family", "support"});
    return TypeDistribution::uniform(lo, hi);
  }
  if (fam == "triangular") {
    require_keys(j, "distribution", {"family", "support", "peak"});
    if (!j.contains("peak")) throw ConfigError("triangular needs 'peak'");
    return TypeDistribution::triangular(lo, j.at("peak"), hi);
  }
  if (fam == "truncated_normal") {
    require_keys(j, "distribution", {"family", "support", "mean", "sd"});
    if (!j.contains("mean") || !j.contains("sd"))
      throw ConfigError("truncated_normal needs 'mean' and 'sd'");
    return TypeDistribution::truncated_normal(lo, hi, j.at("mean"), j.at("sd"));
  }
  if (fam == "piecewise_linear") {
    require_keys(j, "distribution", {"family", "support", "knots"});
    if (!j.contains("knots")) throw ConfigError("piecewise_linear needs 'knots'");
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j.at("knots")) knots.emplace_back(k.at(0), k.at(1));
    return TypeDistribution::piecewise_linear(std::move(knots));
  }
  throw ConfigError("unknown distribution family '" + fam + "'");
}

inline ProposerUtility parse_utility(const nlohmann::json& j) {
  require_keys(j, "utility", {"kind", "weight"});
  const std::string kind = j.value("kind", "linear_loss");
  if (kind == "linear_loss") return ProposerUtility::linear_loss();
  if (kind == "quadratic_loss") return ProposerUtility::quadratic_loss();
  if (kind == "mixture") {
    if (!j.contains("weight")) throw ConfigError("mixture utility needs 'weight'");
    return ProposerUtility::mixture(j.at("weight"));
  }
  throw ConfigError("unknown utility kind '" + kind + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  detail::require_keys(j, "config",
                       {"distribution", "utility", "delta", "delta_list", "grid", "two_type",
                        "seed", "output", "sweep", "verify", "simulate"});
  ExperimentConfig cfg;
  cfg.canonical = j.dump();
  try {
    if (j.contains("distribution")) cfg.distribution = detail::parse_distribution(j["distribution"]);
    if (j.contains("utility")) cfg.utility = detail::parse_utility(j["utility"]);
    if (j.contains("delta") && j.contains("delta_list"))
      throw ConfigError("give either 'delta' or 'delta_list', not both");
    if (j.contains("delta")) cfg.delta_list = {j["delta"].get<double>()};
    if (j.contains("delta_list")) cfg.delta_list = j["delta_list"].get<std::vector<double>>();
    for (double d : cfg.delta_list)
      if (!(d >= 0.0 && d < 1.0)) throw ConfigError("delta outside [0,1)");
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      detail::require_keys(g, "grid", {"auto", "type_points", "action_points"});
      cfg.grid_auto = g.value("auto", false);
      if (g.contains("type_points")) {
        cfg.type_points = g["type_points"];
        cfg.grid_auto = g.value("auto", false);
      }
      if (g.contains("action_points")) cfg.action_points = g["action_points"];
      if (cfg.type_points < 3 || cfg.action_points < 3) throw ConfigError("grid too small");
    }
    if (j.contains("two_type")) {
      const auto& t = j["two_type"];
      detail::require_keys(t, "two_type", {"l", "h", "delta", "mu0"});
      TwoTypeParams p;
      p.l = t.at("l");
      p.h = t.at("h");
      p.delta = t.at("delta");
      p.mu0 = t.at("mu0");
      p.validate();
      cfg.two_type = p;
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output")) {
      const auto& o = j["output"];
      detail::require_keys(o, "output", {"dir", "formats"});
      cfg.out_dir = o.value("dir", cfg.out_dir);
      if (o.contains("formats")) {
        cfg.formats.clear();
        for (const auto& f : o["formats"]) {
          const std::string s = f;
          if (s != "json" && s != "csv" && s != "svg")
            throw ConfigError("unknown output format '" + s + "'");
          cfg.formats.insert(s);
        }
      }
    }
    if (j.contains("sweep")) {
      detail::require_keys(j["sweep"], "sweep", {"target"});
      cfg.sweep_target = j["sweep"].value("target", cfg.sweep_target);
      if (cfg.sweep_target != "skim" && cfg.sweep_target != "leapfrog" &&
          cfg.sweep_target != "necessity")
        throw ConfigError("sweep target must be skim, leapfrog or necessity");
    }
    if (j.contains("verify")) {
      const auto& v = j["verify"];
      detail::require_keys(v, "verify", {"profile", "mutation", "offer_points", "horizon", "eps"});
      cfg.verify_profile = v.value("profile", cfg.verify_profile);
      cfg.verify_mutation = v.value("mutation", cfg.verify_mutation);
      cfg.verify_offer_points = v.value("offer_points", cfg.verify_offer_points);
      cfg.verify_horizon = v.value("horizon", cfg.verify_horizon);
      cfg.verify_eps = v.value("eps", cfg.verify_eps);
    }
    if (j.contains("simulate")) cfg.simulate_traces = j["simulate"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  }
  return cfg;
}

}  // namespace vetobar
