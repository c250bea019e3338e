#pragma once

// Commitment-payoff equilibrium: offer 0 first (accepted exactly by types
// in (0, c*/2)), then skim the conditional belief down to c*.  Also the
// commitment-gap convergence sweep and the skimming necessity margin.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vetobar/core.hpp"
#include "vetobar/skim.hpp"
#include "vetobar/static_mech.hpp"

namespace vetobar {

struct LeapfrogEquilibrium {
  double c_star = 0.0;
  double first_offer = 0.0;
  double accept_lo = 0.0, accept_hi = 0.0;  // acceptance set of the first offer
  double accepted_mass = 0.0;
  Belief posterior;          // belief after the first offer is rejected
  SkimSolution cont;         // continuation skim with floor c*/2
  double payoff = 0.0;
  double U = 0.0;            // commitment payoff U(F)
  double U_full = 0.0;
  double gap_to_U = 0.0;
  bool full_delegation = false;  // c* = 2*pos_floor: leapfrogging degenerate
  std::string note;

  LeapfrogEquilibrium() : posterior(Belief::full(TypeDistribution::uniform(0.0, 1.0))) {}
};

// Builds the leapfrogging equilibrium.  Preconditions: v_lo <= 0 or
// v_hi <= 1/2.  When full delegation is already optimal the plain skimming
// solution is returned with a note.
inline LeapfrogEquilibrium leapfrog_construct(const Belief& F, const ProposerUtility& u,
                                              double delta, int grid_points = 0) {
  if (!(F.lo() <= 0.0 || F.hi() <= 0.5))
    throw std::invalid_argument("leapfrog requires v_lo <= 0 or v_hi <= 1/2");
  const auto rep = optimal_interval(F, u);
  LeapfrogEquilibrium eq;
  eq.c_star = rep.c_star;
  eq.U = rep.U;
  eq.U_full = rep.U_full;
  if (grid_points <= 0) grid_points = auto_grid_points(F, delta);

  const double floor0 = 2.0 * F.pos_floor();
  if (rep.c_star <= floor0 + 2e-3) {
    // Full delegation optimal: skimming alone reaches U(F) in the patient limit.
    eq.full_delegation = true;
    eq.note = "full delegation optimal; returning the plain skimming solution";
    eq.posterior = F;
    eq.cont = skim_solve(F, u, delta, grid_points);
    eq.payoff = eq.cont.payoff;
    eq.gap_to_U = eq.U - eq.payoff;
    eq.first_offer = eq.cont.offer_at(static_cast<int>(eq.cont.v.size()) - 1);
    return eq;
  }

  const double cut = 0.5 * eq.c_star;
  eq.first_offer = 0.0;
  eq.accept_lo = 0.0;
  eq.accept_hi = cut;
  eq.accepted_mass = F.cdf(cut) - F.cdf(0.0);
  eq.posterior = F.lo() < 0.0 ? Belief::union_after_zero(F.base(), cut)
                              : truncate(F, cut, F.hi());
  eq.cont = skim_solve(eq.posterior, u, delta, grid_points);
  // One period of delay on the rejected mass; accepted mass yields u(0) = 0.
  eq.payoff = delta * (1.0 - eq.accepted_mass) * eq.cont.payoff;
  eq.gap_to_U = eq.U - eq.payoff;
  return eq;
}

// Full outcome map of the leapfrog equilibrium on the continuation grid plus
// the first-offer acceptors.
inline EquilibriumOutcome leapfrog_outcome(const LeapfrogEquilibrium& eq, const Belief& F,
                                           const ProposerUtility& u) {
  if (eq.full_delegation) return skim_outcome(eq.cont, F, u);
  EquilibriumOutcome cont = skim_outcome(eq.cont, eq.posterior, u, 1);
  EquilibriumOutcome out;
  const double cut = 0.5 * eq.c_star;
  const double reject_mass = 1.0 - eq.accepted_mass;
  // First-offer acceptors: a small interior grid over (0, c*/2).
  const auto accept_grid = linspace_with(0.0, cut, 33);
  for (size_t i = 0; i + 1 < accept_grid.size(); ++i) {
    const double v = accept_grid[i + 1];
    out.types.push_back(v);
    out.weights.push_back(F.cdf(v) - F.cdf(accept_grid[i]));
    out.outcomes.push_back({{{0.0, 0, 1.0}}});
  }
  for (size_t i = 0; i < cont.types.size(); ++i) {
    out.types.push_back(cont.types[i]);
    out.weights.push_back(cont.weights[i] * reject_mass);
    out.outcomes.push_back(cont.outcomes[i]);
  }
  out.proposer_payoff = out.recompute_proposer_payoff(u, eq.cont.delta);
  return out;
}

// Commitment-gap sweep: the leapfrog payoff against U(F) for each delta, grid
// refined with patience.
inline std::vector<SweepRow> commitment_gap_sweep(const Belief& F, const ProposerUtility& u,
                                                  std::span<const double> deltas) {
  std::vector<SweepRow> rows;
  for (double d : deltas) {
    const auto eq = leapfrog_construct(F, u, d);
    rows.push_back({d, eq.payoff, eq.U, eq.gap_to_U, static_cast<int>(eq.cont.v.size())});
  }
  return rows;
}

// Necessity margin: U(F) minus the skimming payoff, bounded away from 0
// whenever interval delegation is essentially uniquely optimal and is not
// full delegation.  Refuses otherwise.
inline std::vector<SweepRow> necessity_gap(const Belief& F, const ProposerUtility& u,
                                           std::span<const double> deltas) {
  const auto rep = optimal_interval(F, u);
  const double floor0 = 2.0 * F.pos_floor();
  if (rep.c_star <= floor0 + 2e-3)
    throw std::invalid_argument("necessity-gap preconditions not met: full delegation optimal");
  // Flatness probe: the optimum must beat every interval outside a small
  // neighbourhood of c* (0.05 wide; a quadratic peak clears 1e-4 there).
  double second_best = -std::numeric_limits<double>::infinity();
  for (const auto& [c, val] : rep.payoff_curve)
    if (std::abs(c - rep.c_star) > 0.05) second_best = std::max(second_best, val);
  if (!(rep.U - second_best > 1e-4))
    throw std::invalid_argument("necessity-gap preconditions not met: optimum not essentially unique");

  std::vector<SweepRow> rows;
  for (double d : deltas) {
    const auto sol = skim_solve(F, u, d, auto_grid_points(F, d));
    rows.push_back({d, sol.payoff, rep.U, rep.U - sol.payoff, static_cast<int>(sol.v.size())});
  }
  return rows;
}

struct DeviationGuardReport {
  double max_deviation_payoff = 0.0;
  double equilibrium_payoff = 0.0;
  double worst_offer = 0.0;
  bool pass = false;
};

// First-period deviation guard: any offer a > 0 is answered
// by the fallback skimming equilibrium on the prior; the deviation payoff is
// the immediately accepted mass plus the discounted fallback continuation.
inline DeviationGuardReport deviation_guard(const LeapfrogEquilibrium& eq,
                                            const SkimSolution& fallback, const Belief& F,
                                            const ProposerUtility& u,
                                            std::span<const double> probe_offers,
                                            double tol = 1e-3) {
  DeviationGuardReport rep;
  rep.equilibrium_payoff = eq.payoff;
  const auto& v = fallback.v;
  const int n = static_cast<int>(v.size());
  for (double a : probe_offers) {
    double dev;
    if (a <= 0.0) {
      dev = eq.payoff;  // the on-path offer itself
    } else if (a < fallback.Pbar[fallback.floor_index] - kStructTol) {
      // Below the envelope range: every nonnegative type accepts; rejection
      // leaves only negative types, worth zero.
      dev = u(a) * (1.0 - (F.lo() < 0.0 ? F.cdf(0.0) : 0.0));
    } else {
      // State after rejection: largest grid type whose envelope lies
      // strictly below the offer.
      int k = fallback.floor_index;
      while (k + 1 < n && fallback.Pbar[k + 1] < a - kStructTol) ++k;
      dev = u(a) * (1.0 - F.cdf(v[k])) + fallback.delta * fallback.R[k];
    }
    if (dev > rep.max_deviation_payoff) {
      rep.max_deviation_payoff = dev;
      rep.worst_offer = a;
    }
  }
  rep.pass = rep.max_deviation_payoff <= eq.payoff + tol;
  return rep;
}

}  // namespace vetobar
