// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vetobar/leapfrog.hpp"
#include "vetobar/profiles.hpp"
#include "vetobar/skim.hpp"
#include "vetobar/static_mech.hpp"
#include "vetobar/two_type.hpp"
#include "vetobar/verify.hpp"

using namespace vetobar;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
  std::string name;
  double budget_s;
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  void finish(double elapsed_s) {
    if (elapsed_s > budget_s)
      problems.push_back("runtime " + std::to_string(elapsed_s) + "s over budget");
    if (problems.empty()) {
      std::printf("[PASS] %s (%.2fs)\n", name.c_str(), elapsed_s);
    } else {
      ++g_failures;
      std::printf("[FAIL] %s (%.2fs)\n", name.c_str(), elapsed_s);
      for (const auto& p : problems) std::printf("       - %s\n", p.c_str());
    }
  }
};

void run(const std::string& name, double budget_s, const std::function<void(Criterion&)>& body) {
  Criterion c{name, budget_s, {}};
  const auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.problems.push_back(std::string("exception: ") + e.what());
  }
  c.finish(std::chrono::duration<double>(Clock::now() - t0).count());
}

const ProposerUtility kLin = ProposerUtility::linear_loss();

}  // namespace

int main() {
  // 1. Two-type thresholds.
  run("criterion 1: two-type thresholds (l=0.3, h=0.55)", 1.0, [](Criterion& c) {
    const TwoTypeModel m({0.3, 0.55, 0.9, 0.5});
    c.require(std::abs(m.mu_star() - 5.0 / 9.0) < 1e-14, "mu* != 5/9");
    const double resid =
        m.u(0.6) - ((1.0 - m.mu_star()) * m.u(m.a_star()) + m.mu_star() * m.u(1.0));
    c.require(std::abs(resid) < 1e-12, "Eq.(1) residual >= 1e-12");
    double prev_gap = 1.0;
    for (double d : {0.9, 0.99, 0.999}) {
      const TwoTypeModel md({0.3, 0.55, d, 0.5});
      const double ms = md.mu_star(), mdel = md.mu_delta(), mbar = md.mu_bar_delta();
      c.require(0.0 < ms && ms < mdel && mdel < mbar && mbar < 1.0,
                "ordering chain fails at delta=" + std::to_string(d));
      const double gap = mdel - ms;
      c.require(gap < prev_gap, "|mu_delta - mu*| not decreasing at delta=" + std::to_string(d));
      prev_gap = gap;
      c.require(mbar <= 1.0 - 0.01, "mu_bar_delta > 0.99 at delta=" + std::to_string(d));
    }
  });

  // 2. Two-type payoffs at delta = 0.99.
  run("criterion 2: two-type payoffs at delta=0.99", 10.0, [](Criterion& c) {
    {
      const auto eq = TwoTypeModel({0.3, 0.55, 0.99, 0.3}).solve();
      c.require(eq.region == TwoTypeRegion::Skimming, "mu0=0.3 not in the skimming region");
      c.require(eq.proposer_payoff >= 0.60 && eq.proposer_payoff <= 0.62,
                "skimming payoff outside [0.60, 0.62]");
    }
    const double mu0 = 0.7;
    const TwoTypeModel m({0.3, 0.55, 0.99, mu0});
    const auto eq = m.solve();
    c.require(eq.region == TwoTypeRegion::Leapfrogging, "mu0=0.7 not in the leapfrogging region");
    const double closed = (1.0 - mu0) * m.u(m.a_delta()) + mu0 * 0.99 * m.u(1.0);
    c.require(std::abs(eq.proposer_payoff - closed) < 1e-9, "leapfrog payoff != closed form");
    const double delegation = (1.0 - mu0) * m.u(m.a_star()) + mu0 * m.u(1.0);
    c.require(std::abs(eq.proposer_payoff - delegation) < 0.02,
              "leapfrog payoff not within 0.02 of the delegation payoff");
    // Monte Carlo over 1e5 seeded traces, both regions.
    for (double mc_mu0 : {0.3, 0.7}) {
      const TwoTypeModel mm({0.3, 0.55, 0.99, mc_mu0});
      const double analytic = mm.solve().proposer_payoff;
      std::mt19937_64 rng(20240718);
      std::uniform_real_distribution<double> ud(0.0, 1.0);
      const int n = 100000;
      double sum = 0.0, sumsq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double pay = mm.trace_payoff(mm.simulate(ud(rng) < mc_mu0, rng));
        sum += pay;
        sumsq += pay * pay;
      }
      const double mean = sum / n;
      const double se = std::sqrt(std::max(0.0, sumsq / n - mean * mean) / n);
      c.require(std::abs(mean - analytic) <= 3.0 * se + 1e-12,
                "Monte Carlo payoff off by more than 3 s.e. at mu0=" + std::to_string(mc_mu0));
    }
  });

  // 3. eps-equilibrium certification and mutation sensitivity.
  run("criterion 3: eps-equilibrium certification", 60.0, [](Criterion& c) {
    const auto offers01 = linspace_with(0.0, 1.0, 200);
    const std::vector<double> tt_types{0.3, 0.55};
    const std::vector<double> tt_prior{0.3, 0.7};
    const TwoTypeModel m({0.3, 0.55, 0.9, 0.7});
    {
      TwoTypeProfile prof(m);
      c.require(prof.equilibrium().region == TwoTypeRegion::Leapfrogging,
                "profile not in the leapfrogging region");
      const auto rep = eps_equilibrium(prof, kLin, 0.9, offers01, tt_types, tt_prior, 200, 1e-3);
      c.require(rep.pass() && rep.max_proposer_gain < 1e-3 && rep.max_vetoer_gain < 1e-3,
                "two-type leapfrogging profile fails the check");
    }
    {
      const auto F = Belief::full(TypeDistribution::uniform(0.2, 1.0));
      auto sol = skim_solve(F, kLin, 0.9, 2001);
      const auto [stypes, sprior] = skim_type_sample(sol, F);
      SkimProfile prof(std::move(sol), F, kLin);
      const auto offers02 = linspace_with(0.0, 2.0, 200);
      const auto rep = eps_equilibrium(prof, kLin, 0.9, offers02, stypes, sprior, 200, 1e-3);
      c.require(rep.pass() && rep.max_proposer_gain < 1e-3 && rep.max_vetoer_gain < 1e-3,
                "skim profile on uniform[0.2,1] fails the check");
    }
    using TM = TwoTypeProfile::Mutation;
    int mut_id = 0;
    for (auto mut : {TM::SkipRung, TM::WrongRejectProb, TM::WrongLambda,
                     TM::FlippedOffPathBelief}) {
      TwoTypeProfile bad(m, mut);
      const auto rep = eps_equilibrium(bad, kLin, 0.9, offers01, tt_types, tt_prior, 200, 1e-3);
      c.require(!rep.pass(), "two-type mutation " + std::to_string(++mut_id) + " not caught");
    }
    {
      const auto F = Belief::full(TypeDistribution::uniform(0.2, 1.0));
      auto sol = skim_solve(F, kLin, 0.9, 1201);
      const auto [stypes, sprior] = skim_type_sample(sol, F);
      SkimProfile bad(std::move(sol), F, kLin, SkimProfile::Mutation::TerminalOffer);
      const auto offers02 = linspace_with(0.0, 2.0, 200);
      const auto rep = eps_equilibrium(bad, kLin, 0.9, offers02, stypes, sprior, 200, 1e-3);
      c.require(!rep.pass() && rep.max_vetoer_gain > 1e-3, "terminal-offer mutation not caught");
    }
  });

  // 4. Continuum skim solver contracts on uniform[0.2,1].
  run("criterion 4: continuum skim solver on uniform[0.2,1]", 10.0, [](Criterion& c) {
    const auto F = Belief::full(TypeDistribution::uniform(0.2, 1.0));
    const double delta = 0.9;
    const auto sol = skim_solve(F, kLin, delta, 2001);
    c.require(sol.P[sol.floor_index] == 0.4, "P(v_lo) != 2 v_lo exactly");
    bool seed_ok = sol.diag.seed_segment_end > sol.floor_index;
    for (int k = sol.floor_index; k <= sol.diag.seed_segment_end && seed_ok; ++k) {
      const double v = sol.v[k];
      const double closed = v + std::sqrt(v * v - 4.0 * delta * 0.2 * (v - 0.2));
      if (std::abs(sol.P[k] - closed) > 1e-9) seed_ok = false;
    }
    c.require(seed_ok, "seed segment deviates from the closed form by > 1e-9");
    c.require(sol.diag.max_bellman_residual < 1e-9, "Bellman residual >= 1e-9");
    c.require(sol.diag.max_indiff_residual < 1e-9, "indifference residual >= 1e-9");
    const auto path = skim_path(sol);
    bool decreasing = true;
    for (size_t i = 1; i < path.size(); ++i)
      if (path[i].offer >= path[i - 1].offer) decreasing = false;
    c.require(decreasing, "path offers not strictly decreasing");
    c.require(std::abs(path.back().offer - 0.4) < 1e-12, "terminal offer != 2 v_lo");
  });

  // 5. Patient limit of skimming toward the full-delegation payoff.
  run("criterion 5: skim payoff converges to U_lower(F)", 60.0, [](Criterion& c) {
    const double deltas[] = {0.9, 0.99, 0.999};
    struct Case {
      TypeDistribution F;
      double target;
      std::string name;
    };
    const Case cases[] = {{TypeDistribution::uniform(0.0, 1.0), 0.5, "uniform[0,1]"},
                          {TypeDistribution::uniform(0.2, 1.0), 0.625, "uniform[0.2,1]"}};
    for (const auto& cs : cases) {
      const auto F = Belief::full(cs.F);
      const auto rows = skim_limit_sweep(F, kLin, deltas, cs.target);
      c.require(rows[0].gap > rows[1].gap && rows[1].gap > rows[2].gap,
                cs.name + ": gap not monotone decreasing");
      c.require(std::abs(rows[2].gap) < 0.02, cs.name + ": final gap >= 0.02");
    }
  });

  // 6. Leapfrogging commitment gap on the triangular-peak prior.
  run("criterion 6: leapfrog reaches the commitment payoff", 60.0, [](Criterion& c) {
    const auto F = Belief::full(TypeDistribution::triangular(0.0, 0.6, 1.0));
    const auto rep = optimal_interval(F, kLin);
    // Golden from the independent analytic oracle for this density.
    const double c_oracle = (3.0 + std::sqrt(0.9)) / 4.5;
    c.require(std::abs(rep.c_star - c_oracle) < 1e-4, "c* deviates from the analytic golden");
    c.require(rep.c_star > 0.0, "c* not positive");
    const auto eq995 = leapfrog_construct(F, kLin, 0.995);
    c.require(eq995.gap_to_U < 0.03, "gap to U(F) >= 0.03 at delta=0.995");
    const double deltas[] = {0.9, 0.99, 0.999};
    const auto rows = commitment_gap_sweep(F, kLin, deltas);
    c.require(rows[0].gap > rows[1].gap && rows[1].gap > rows[2].gap, "gap not monotone in delta");
    for (const auto& r : rows) c.require(r.gap >= -1e-6, "gap below -1e-6 (commitment bound violated)");
    // First offer 0 accepted exactly by grid types in (0, c*/2).
    const auto eq = leapfrog_construct(F, kLin, 0.99);
    const auto out = leapfrog_outcome(eq, F, kLin);
    bool accept_ok = true;
    for (size_t i = 0; i < out.types.size(); ++i) {
      const double v = out.types[i];
      const bool zero_now = !out.outcomes[i].atoms.empty() &&
                            out.outcomes[i].atoms[0].period == 0 &&
                            out.outcomes[i].atoms[0].action == 0.0;
      if (v > 0.0 && v < 0.5 * eq.c_star - 1e-9 && !zero_now) accept_ok = false;
      if (v > 0.5 * eq.c_star + 1e-9 && zero_now) accept_ok = false;
    }
    c.require(accept_ok, "first-offer acceptance set is not (0, c*/2)");
    const auto fallback = skim_solve(F, kLin, 0.99, auto_grid_points(F, 0.99));
    const auto guard = deviation_guard(eq, fallback, F, kLin, linspace_with(0.0, 1.0, 201));
    c.require(guard.pass, "deviation guard fails");
  });

  // 7. Necessity margin of skimming on the triangular-peak prior.
  run("criterion 7: skimming stays bounded away from U(F)", 60.0, [](Criterion& c) {
    const auto F = Belief::full(TypeDistribution::triangular(0.0, 0.6, 1.0));
    const auto rep = optimal_interval(F, kLin);
    const double limit_gap = rep.U - rep.U_full;
    const double deltas[] = {0.9, 0.99, 0.999};
    const auto rows = necessity_gap(F, kLin, deltas);
    for (const auto& r : rows)
      c.require(r.gap >= 0.5 * limit_gap,
                "margin below (U - U_lower)/2 at delta=" + std::to_string(r.delta));
    c.require(std::abs(rows[2].gap - limit_gap) < 0.02,
              "margin at delta=0.999 not within 0.02 of U - U_lower");
  });

  // 8. Static-image and conditional-optimality properties.
  run("criterion 8: static images and conditional optimality", 60.0, [](Criterion& c) {
    // Every produced equilibrium outcome: two-type (all three regions),
    // continuum skim, and leapfrog.
    for (double mu0 : {0.3, 0.7, 0.95}) {
      const TwoTypeModel m({0.3, 0.55, 0.99, mu0});
      const auto out = m.outcome();
      const auto mech = mechanism_from_outcome(out, 0.99, VetoerForm::Linear);
      const auto rep = ic_ir_check(mech);
      c.require(rep.ic_ok && rep.ir_ok, "two-type image fails IC/IR at mu0=" + std::to_string(mu0));
      c.require(std::abs(mech.proposer_payoff(kLin) - out.proposer_payoff) < 1e-9,
                "two-type image payoff mismatch at mu0=" + std::to_string(mu0));
      c.require(std::abs(out.proposer_payoff - m.solve().proposer_payoff) < 1e-9,
                "two-type outcome payoff != equilibrium payoff at mu0=" + std::to_string(mu0));
    }
    {
      const auto F = Belief::full(TypeDistribution::uniform(0.2, 1.0));
      const auto sol = skim_solve(F, kLin, 0.9, 1201);
      const auto out = skim_outcome(sol, F, kLin);
      const auto mech = mechanism_from_outcome(out, 0.9);
      const auto rep = ic_ir_check(mech);
      c.require(rep.ic_ok && rep.ir_ok, "skim image fails IC/IR");
      c.require(std::abs(mech.proposer_payoff(kLin) - out.proposer_payoff) < 1e-9,
                "skim image payoff mismatch");
      c.require(std::abs(out.proposer_payoff - sol.payoff) < 1e-9,
                "skim outcome payoff != R(v_top)");
    }
    const auto F = Belief::full(TypeDistribution::triangular(0.0, 0.6, 1.0));
    const auto rep = optimal_interval(F, kLin);
    {
      const auto eq = leapfrog_construct(F, kLin, 0.99);
      const auto out = leapfrog_outcome(eq, F, kLin);
      const auto mech = mechanism_from_outcome(out, 0.99);
      const auto icir = ic_ir_check(mech);
      c.require(icir.ic_ok && icir.ir_ok, "leapfrog image fails IC/IR");
      c.require(std::abs(mech.proposer_payoff(kLin) - out.proposer_payoff) < 1e-9,
                "leapfrog image payoff mismatch");
    }
    // 50 windows satisfying c <= c*/2 <= c* <= c_hi.
    int window = 0;
    for (int i = 0; i < 10; ++i) {
      for (int k = 0; k < 5; ++k) {
        const double clo = F.lo() + (0.5 * rep.c_star - F.lo()) * i / 9.0;
        const double chi = rep.c_star + (F.hi() - rep.c_star) * k / 4.0;
        const auto cond = conditional_optimality_check(F, kLin, rep.c_star, clo, chi,
                                                       20240718 + window);
        if (!cond.holds)
          c.require(false, "conditional optimality fails for window " + std::to_string(window) +
                               " (gap " + std::to_string(cond.worst_gap) + ")");
        ++window;
      }
    }
    c.require(window == 50, "window grid is not 50 points");
  });

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
