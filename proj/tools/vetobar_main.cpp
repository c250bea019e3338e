// Command-line front end: solve the static benchmark, the two-type example,
// the continuum skimming and leapfrogging equilibria, certify encoded
// profiles, and run discount-factor sweeps from a declarative JSON config.
//
// Exit codes: 0 success, 1 usage/config error, 2 precondition or hypothesis
// gate, 3 verification failure.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vetobar/cli_config.hpp"
#include "vetobar/io.hpp"
#include "vetobar/leapfrog.hpp"
#include "vetobar/profiles.hpp"
#include "vetobar/skim.hpp"
#include "vetobar/static_mech.hpp"
#include "vetobar/two_type.hpp"
#include "vetobar/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace vetobar;

namespace {

struct Cli {
  std::string config_path;
  std::string out_dir;
  std::string formats;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int simulate = -1;
};

ExperimentConfig load_config(const Cli& cli) {
  std::ifstream in(cli.config_path);
  if (!in) throw ConfigError("cannot read config file " + cli.config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str());
  if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
  if (cli.seed_set) cfg.seed = cli.seed;
  if (cli.simulate >= 0) cfg.simulate_traces = cli.simulate;
  if (!cli.formats.empty()) {
    cfg.formats.clear();
    std::stringstream fs_(cli.formats);
    std::string tok;
    while (std::getline(fs_, tok, ',')) {
      if (tok != "json" && tok != "csv" && tok != "svg")
        throw ConfigError("unknown output format '" + tok + "'");
      cfg.formats.insert(tok);
    }
  }
  return cfg;
}

std::string provenance(const ExperimentConfig& cfg) {
  return "config_hash=" + hex64(fnv1a(cfg.canonical)) + " tool=" + kToolVersion;
}

Belief require_distribution(const ExperimentConfig& cfg) {
  if (!cfg.distribution) throw ConfigError("config needs a 'distribution' section");
  return Belief::full(*cfg.distribution);
}

double require_delta(const ExperimentConfig& cfg) {
  if (cfg.delta_list.empty()) throw ConfigError("config needs 'delta' or 'delta_list'");
  return cfg.delta_list.front();
}

int grid_points_for(const ExperimentConfig& cfg, const Belief& F, double delta) {
  return cfg.grid_auto ? auto_grid_points(F, delta) : cfg.type_points;
}

ordered_json skim_report_json(const SkimSolution& sol) {
  return ordered_json{{"payoff", sol.payoff},
                      {"delta", sol.delta},
                      {"grid_points", sol.v.size()},
                      {"floor", sol.v[sol.floor_index]},
                      {"terminal_offer", sol.Pbar[sol.floor_index]},
                      {"path_length", skim_path(sol).size()},
                      {"diagnostics",
                       {{"max_bellman_residual", sol.diag.max_bellman_residual},
                        {"max_indiff_residual", sol.diag.max_indiff_residual},
                        {"envelope_dips", sol.diag.envelope_dips},
                        {"support_warning", sol.diag.support_warning},
                        {"seed_segment_end", sol.diag.seed_segment_end}}}};
}

int cmd_static(const ExperimentConfig& cfg) {
  const auto F = require_distribution(cfg);
  const auto rep = optimal_interval(F, cfg.utility);
  std::cout << "c_star = " << rep.c_star << "\nU(F) = " << rep.U << "\nU_lower(F) = " << rep.U_full
            << "\n";
  fs::create_directories(cfg.out_dir);
  if (cfg.formats.count("json")) {
    write_json(fs::path(cfg.out_dir) / "static_report.json",
               ordered_json{{"c_star", rep.c_star},
                            {"U", rep.U},
                            {"U_full", rep.U_full},
                            {"utility", cfg.utility.name()}});
  }
  if (cfg.formats.count("csv")) {
    CsvWriter csv(fs::path(cfg.out_dir) / "payoff_curve.csv", provenance(cfg));
    csv.header({"c", "payoff"});
    for (const auto& [c, val] : rep.payoff_curve) csv.row(c, val);
  }
  if (cfg.formats.count("svg")) {
    std::vector<double> xs, ys;
    for (const auto& [c, val] : rep.payoff_curve) {
      xs.push_back(c);
      ys.push_back(val);
    }
    write_svg_chart(fs::path(cfg.out_dir) / "payoff_curve.svg", "interval delegation payoff", xs,
                    {{"payoff", ys}});
  }
  return 0;
}

int cmd_two_type(const ExperimentConfig& cfg) {
  if (!cfg.two_type) throw ConfigError("config needs a 'two_type' section");
  const TwoTypeModel model(*cfg.two_type);
  const auto eq = model.solve();
  std::cout << "region = " << to_string(eq.region) << "\nmu_star = " << eq.mu_star
            << "\nmu_delta = " << eq.mu_delta << "\nmu_bar_delta = " << eq.mu_bar_delta
            << "\nproposer_payoff = " << eq.proposer_payoff << "\n";
  fs::create_directories(cfg.out_dir);
  if (cfg.formats.count("json")) {
    write_json(fs::path(cfg.out_dir) / "two_type_report.json",
               ordered_json{{"params",
                             {{"l", eq.params.l},
                              {"h", eq.params.h},
                              {"delta", eq.params.delta},
                              {"mu0", eq.params.mu0}}},
                            {"a_star", eq.a_star},
                            {"mu_star", eq.mu_star},
                            {"a_delta", eq.a_delta},
                            {"ladder", eq.ladder},
                            {"ladder_capped", eq.ladder_capped},
                            {"cutoff_beliefs", eq.cutoff_beliefs},
                            {"mu_delta", eq.mu_delta},
                            {"u_h_star", eq.u_h_star},
                            {"a_bar_delta", eq.a_bar_delta},
                            {"mu_bar_delta", eq.mu_bar_delta},
                            {"region", to_string(eq.region)},
                            {"boundary", eq.boundary},
                            {"proposer_payoff", eq.proposer_payoff},
                            {"h_payoff", eq.h_payoff},
                            {"l_payoff", eq.l_payoff},
                            {"dynamic_commitment_lower_bound",
                             model.dynamic_commitment_lower_bound()}});
  }
  if (cfg.simulate_traces > 0) {
    if (!cfg.seed) throw ConfigError("simulation requires a seed");
    std::mt19937_64 rng(*cfg.seed);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    CsvWriter csv(fs::path(cfg.out_dir) / "traces.csv", provenance(cfg));
    csv.header({"trace", "period", "offer", "acceptor", "posterior"});
    for (int i = 0; i < cfg.simulate_traces; ++i) {
      const bool is_h = ud(rng) < cfg.two_type->mu0;
      for (const auto& step : model.simulate(is_h, rng))
        csv.row(i, step.period, step.offer,
                step.accepted ? (is_h ? "h" : "l") : "none", step.posterior);
    }
  }
  return 0;
}

int cmd_skim(const ExperimentConfig& cfg) {
  const auto F = require_distribution(cfg);
  const double delta = require_delta(cfg);
  const auto sol = skim_solve(F, cfg.utility, delta, grid_points_for(cfg, F, delta));
  std::cout << "payoff = " << sol.payoff << "\nterminal offer = " << sol.Pbar[sol.floor_index]
            << "\n";
  if (sol.diag.support_warning)
    std::cout << "warning: neither v_lo <= 0 nor v_hi <= 1/2; the solved (R, P) system is "
                 "well-defined but the equilibrium support guarantee does not apply\n";
  fs::create_directories(cfg.out_dir);
  if (cfg.formats.count("json"))
    write_json(fs::path(cfg.out_dir) / "skim_report.json", skim_report_json(sol));
  if (cfg.formats.count("csv")) {
    write_skim_solution_csv(fs::path(cfg.out_dir) / "skim_solution.csv", sol, provenance(cfg));
    write_skim_path_csv(fs::path(cfg.out_dir) / "skim_path.csv", sol, provenance(cfg));
  }
  return 0;
}

int cmd_leapfrog(const ExperimentConfig& cfg) {
  const auto F = require_distribution(cfg);
  const double delta = require_delta(cfg);
  const auto eq = leapfrog_construct(F, cfg.utility, delta,
                                     cfg.grid_auto ? 0 : cfg.type_points);
  std::cout << "c_star = " << eq.c_star << "\nU(F) = " << eq.U << "\npayoff = " << eq.payoff
            << "\ngap = " << eq.gap_to_U << "\n";
  if (eq.full_delegation) std::cout << "note: " << eq.note << "\n";
  // First-period deviation guard against the fallback skimming equilibrium.
  ordered_json guard_json;
  if (!eq.full_delegation) {
    const auto fallback = skim_solve(F, cfg.utility, delta, grid_points_for(cfg, F, delta));
    const auto probes = linspace_with(0.0, 1.0, 201);
    const auto guard = deviation_guard(eq, fallback, F, cfg.utility, probes);
    guard_json = ordered_json{{"pass", guard.pass},
                              {"max_deviation_payoff", guard.max_deviation_payoff},
                              {"worst_offer", guard.worst_offer}};
    std::cout << "deviation_guard: " << (guard.pass ? "pass" : "FAIL") << "\n";
  }
  fs::create_directories(cfg.out_dir);
  if (cfg.formats.count("json")) {
    ordered_json j{{"c_star", eq.c_star},
                   {"U", eq.U},
                   {"U_full", eq.U_full},
                   {"payoff", eq.payoff},
                   {"gap_to_U", eq.gap_to_U},
                   {"full_delegation", eq.full_delegation},
                   {"first_offer", eq.first_offer},
                   {"acceptance_set", {eq.accept_lo, eq.accept_hi}},
                   {"accepted_mass", eq.accepted_mass},
                   {"continuation", skim_report_json(eq.cont)}};
    if (!guard_json.is_null()) j["deviation_guard"] = guard_json;
    if (!eq.note.empty()) j["note"] = eq.note;
    write_json(fs::path(cfg.out_dir) / "leapfrog_report.json", j);
  }
  if (cfg.formats.count("csv")) {
    write_skim_solution_csv(fs::path(cfg.out_dir) / "leapfrog_continuation.csv", eq.cont,
                            provenance(cfg));
    write_skim_path_csv(fs::path(cfg.out_dir) / "leapfrog_path.csv", eq.cont, provenance(cfg));
  }
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
  DeviationReport rep;
  std::string what;
  if (cfg.verify_profile == "two-type") {
    if (!cfg.two_type) throw ConfigError("two-type verification needs a 'two_type' section");
    TwoTypeProfile::Mutation mut = TwoTypeProfile::Mutation::None;
    if (cfg.verify_mutation == "skip_rung") mut = TwoTypeProfile::Mutation::SkipRung;
    else if (cfg.verify_mutation == "wrong_reject_prob") mut = TwoTypeProfile::Mutation::WrongRejectProb;
    else if (cfg.verify_mutation == "wrong_lambda") mut = TwoTypeProfile::Mutation::WrongLambda;
    else if (cfg.verify_mutation == "flipped_belief") mut = TwoTypeProfile::Mutation::FlippedOffPathBelief;
    else if (cfg.verify_mutation != "none") throw ConfigError("unknown two-type mutation");
    const TwoTypeModel model(*cfg.two_type);
    TwoTypeProfile prof(model, mut);
    const auto offers = linspace_with(0.0, 1.0, cfg.verify_offer_points);
    const std::vector<double> types{cfg.two_type->l, cfg.two_type->h};
    const std::vector<double> prior{1.0 - cfg.two_type->mu0, cfg.two_type->mu0};
    rep = eps_equilibrium(prof, ProposerUtility::linear_loss(), cfg.two_type->delta, offers,
                          types, prior, cfg.verify_horizon, cfg.verify_eps);
    what = "two-type " + to_string(prof.equilibrium().region) + " profile";
  } else if (cfg.verify_profile == "skim") {
    const auto F = require_distribution(cfg);
    const double delta = require_delta(cfg);
    SkimProfile::Mutation mut = SkimProfile::Mutation::None;
    if (cfg.verify_mutation == "terminal_offer") mut = SkimProfile::Mutation::TerminalOffer;
    else if (cfg.verify_mutation != "none") throw ConfigError("unknown skim mutation");
    auto sol = skim_solve(F, cfg.utility, delta, grid_points_for(cfg, F, delta));
    const auto [types, prior] = skim_type_sample(sol, F);
    SkimProfile prof(std::move(sol), F, cfg.utility, mut);
    const auto offers = linspace_with(0.0, 2.0, cfg.verify_offer_points);
    rep = eps_equilibrium(prof, cfg.utility, delta, offers, types, prior, cfg.verify_horizon,
                          cfg.verify_eps);
    what = "continuum skim profile";
  } else {
    throw ConfigError("verify profile must be 'two-type' or 'skim'");
  }
  std::cout << what << ": " << (rep.pass() ? "PASS" : "FAIL")
            << " (proposer gain " << rep.max_proposer_gain << ", vetoer gain "
            << rep.max_vetoer_gain << ", states " << rep.states_checked << ")\n";
  fs::create_directories(cfg.out_dir);
  if (cfg.formats.count("json")) {
    write_json(fs::path(cfg.out_dir) / "deviation_report.json",
               ordered_json{{"profile", what},
                            {"pass", rep.pass()},
                            {"max_proposer_gain", rep.max_proposer_gain},
                            {"max_vetoer_gain", rep.max_vetoer_gain},
                            {"worst_proposer",
                             {{"state", rep.worst_proposer.state},
                              {"deviation", rep.worst_proposer.deviation},
                              {"gain", rep.worst_proposer.gain}}},
                            {"worst_vetoer",
                             {{"state", rep.worst_vetoer.state},
                              {"deviation", rep.worst_vetoer.deviation},
                              {"gain", rep.worst_vetoer.gain}}},
                            {"states_checked", rep.states_checked},
                            {"horizon", rep.horizon},
                            {"tail_bound", rep.tail_bound},
                            {"eps", rep.eps},
                            {"onpath_value", rep.onpath_value},
                            {"belief_consistency", rep.belief_consistency},
                            {"anomalies", rep.anomalies}});
  }
  return rep.pass() ? 0 : 3;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const auto F = require_distribution(cfg);
  if (cfg.delta_list.empty()) throw ConfigError("sweep needs 'delta_list'");
  std::vector<SweepRow> rows;
  std::string title;
  double fan_lower = 0.0;
  bool has_fan_lower = false;
  if (cfg.sweep_target == "skim") {
    const auto rep = optimal_interval(F, cfg.utility);
    // Fan out over deltas; results joined in list order for determinism.
    std::vector<std::future<SweepRow>> futs;
    for (double d : cfg.delta_list)
      futs.push_back(std::async(std::launch::async, [&, d] {
        const int n = auto_grid_points(F, d);
        const auto sol = skim_solve(F, cfg.utility, d, n);
        return SweepRow{d, sol.payoff, rep.U_full, rep.U_full - sol.payoff, n};
      }));
    for (auto& f : futs) rows.push_back(f.get());
    title = "skim payoff vs full delegation";
  } else if (cfg.sweep_target == "leapfrog") {
    const auto rep = optimal_interval(F, cfg.utility);
    fan_lower = rep.U_full;
    has_fan_lower = true;
    std::vector<std::future<SweepRow>> futs;
    for (double d : cfg.delta_list)
      futs.push_back(std::async(std::launch::async, [&, d] {
        const auto eq = leapfrog_construct(F, cfg.utility, d);
        return SweepRow{d, eq.payoff, eq.U, eq.gap_to_U, static_cast<int>(eq.cont.v.size())};
      }));
    for (auto& f : futs) rows.push_back(f.get());
    title = "leapfrog payoff vs commitment";
  } else {
    rows = necessity_gap(F, cfg.utility, cfg.delta_list);
    title = "skim payoff vs commitment (necessity margin)";
  }
  for (const auto& r : rows)
    std::cout << "delta=" << r.delta << " payoff=" << r.payoff << " benchmark=" << r.benchmark
              << " gap=" << r.gap << "\n";
  fs::create_directories(cfg.out_dir);
  if (cfg.formats.count("csv"))
    write_sweep_csv(fs::path(cfg.out_dir) / "sweep.csv", rows, provenance(cfg));
  if (cfg.formats.count("json")) {
    ordered_json jrows = ordered_json::array();
    for (const auto& r : rows)
      jrows.push_back(ordered_json{{"delta", r.delta},
                                   {"payoff", r.payoff},
                                   {"benchmark", r.benchmark},
                                   {"gap", r.gap},
                                   {"grid_points", r.grid_points}});
    write_json(fs::path(cfg.out_dir) / "sweep_report.json",
               ordered_json{{"target", cfg.sweep_target}, {"rows", jrows}});
  }
  if (cfg.formats.count("svg")) {
    std::vector<double> xs, payoff, bench;
    for (const auto& r : rows) {
      xs.push_back(r.delta);
      payoff.push_back(r.payoff);
      bench.push_back(r.benchmark);
    }
    std::vector<std::pair<std::string, std::vector<double>>> series{{"payoff", payoff},
                                                                    {"U(F)", bench}};
    if (has_fan_lower)
      series.emplace_back("U_lower(F)", std::vector<double>(xs.size(), fan_lower));
    write_svg_chart(fs::path(cfg.out_dir) / "sweep.svg", title, xs, series);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential veto bargaining solver and verifier"};
  app.require_subcommand(1);
  Cli cli;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cli.config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", cli.out_dir, "output directory override");
    sub->add_option("--seed", cli.seed, "seed override")->each([&](const std::string&) {
      cli.seed_set = true;
    });
    sub->add_option("--format", cli.formats, "comma-separated output formats (json,csv,svg)");
  };
  auto* c_static = app.add_subcommand("static", "optimal interval delegation benchmark");
  auto* c_two = app.add_subcommand("two-type", "two-type thresholds, regions and traces");
  c_two->add_option("--simulate", cli.simulate, "emit this many seeded traces");
  auto* c_skim = app.add_subcommand("skim", "continuum skimming equilibrium");
  auto* c_leap = app.add_subcommand("leapfrog", "commitment-payoff equilibrium");
  auto* c_verify = app.add_subcommand("verify", "eps-equilibrium certification");
  auto* c_sweep = app.add_subcommand("sweep", "discount-factor convergence sweep");
  for (auto* sub : {c_static, c_two, c_skim, c_leap, c_verify, c_sweep}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto cfg = load_config(cli);
    if (c_static->parsed()) return cmd_static(cfg);
    if (c_two->parsed()) return cmd_two_type(cfg);
    if (c_skim->parsed()) return cmd_skim(cfg);
    if (c_leap->parsed()) return cmd_leapfrog(cfg);
    if (c_verify->parsed()) return cmd_verify(cfg);
    if (c_sweep->parsed()) return cmd_sweep(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "precondition not met: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "hypothesis gate: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
