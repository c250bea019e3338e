#pragma once

// Continuum skimming equilibrium: solve the (R, P) system
//
//   R(v) = max_{y < v} { u(min(Pbar(y),1)) [G(v) - G(y)] + delta R(y) }
//   u_V(P(v), v) = delta u_V(min(Pbar(t(v)), 1), v)
//
// on a type grid, with Pbar the increasing envelope of P and t(v) the
// largest maximizer.  States walk down from the top of the belief support
// to the floor max(0, v_lo) (or the union cut for a leapfrog posterior),
// where the terminal offer is twice the floor.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vetobar/core.hpp"
#include "vetobar/static_mech.hpp"

namespace vetobar {

struct SkimDiagnostics {
  double max_bellman_residual = 0.0;
  double max_indiff_residual = 0.0;
  int envelope_dips = 0;       // grid points with P < Pbar
  int envelope_tie_checks = 0; // argmax ties examined for envelope ordering
  int envelope_tie_violations = 0;
  bool support_warning = false;  // neither v_lo <= 0 nor v_hi <= 1/2
  int seed_segment_end = 0;      // last grid index covered by the closed-form seed
};

struct SkimSolution {
  std::vector<double> v;     // type grid (union gap excluded)
  std::vector<double> R;     // Proposer value per state
  std::vector<double> P;     // indifference offer per type
  std::vector<double> Pbar;  // increasing envelope of P
  std::vector<int> t;        // largest-argmax next state (index into v)
  int floor_index = 0;       // index of the screening floor max(0, v_lo)
  double payoff = 0.0;       // R at the top state
  double delta = 0.0;
  SkimDiagnostics diag;

  double offer_at(int state) const { return std::min(Pbar[t[state]], 1.0); }
};

struct SkimPathStep {
  int period = 0;
  int state = 0;       // index of the state the offer is made in
  double offer = 0.0;
  double accept_lo = 0.0;  // acceptance interval [accept_lo, accept_hi]
  double accept_hi = 0.0;
};

// Forward recursion for the (R, P) system on the given type grid.
//
// For a gap-case belief (floor > 0) the closed-form seed R = u(2 floor) G,
// P = v + sqrt(v^2 - 4 delta floor (v - floor)) is used on the maximal
// initial segment where the derivative of the Bellman objective stays
// negative at every grid point, mirroring the constructive existence proof.
// With floor = 0 the seed collapses to R = 0, P = 2v at the floor itself.
inline SkimSolution skim_solve(const Belief& F, const ProposerUtility& u, double delta,
                               const std::vector<double>& type_grid) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta outside (0,1)");
  if (type_grid.size() < 3) throw std::invalid_argument("degenerate grid");

  SkimSolution sol;
  sol.delta = delta;
  sol.diag.support_warning = !(F.lo() <= 0.0 || F.hi() <= 0.5);

  const double floor = F.pos_floor();
  // Keep grid points in the support only: negative part (if any) plus
  // [floor, v_hi].
  for (double x : type_grid) {
    if (x <= 0.0 || x >= floor - kStructTol) sol.v.push_back(x);
  }
  const int n = static_cast<int>(sol.v.size());
  sol.R.assign(n, 0.0);
  sol.P.assign(n, 0.0);
  sol.Pbar.assign(n, 0.0);
  sol.t.assign(n, 0);

  int f0 = 0;
  while (f0 < n && sol.v[f0] < floor - kStructTol) ++f0;
  if (f0 >= n || std::abs(sol.v[f0] - floor) > 1e-9)
    throw std::invalid_argument("grid must contain the screening floor");
  sol.floor_index = f0;
  for (int i = 0; i < f0; ++i) sol.t[i] = i;  // negative types: R = P = 0

  auto G = [&](int i) { return F.cdf(sol.v[i]); };
  const double u_floor_offer = u(2.0 * floor);

  // Closed-form seed on the initial segment (gap case only).
  int seed_end = f0;  // last index assigned by the seed
  sol.P[f0] = 2.0 * floor;
  sol.Pbar[f0] = sol.P[f0];
  sol.t[f0] = f0;
  sol.R[f0] = 0.0;
  if (floor > 0.0) {
    auto seed_P = [&](double v) {
      return v + std::sqrt(std::max(0.0, v * v - 4.0 * delta * floor * (v - floor)));
    };
    auto seed_dP = [&](double v) {
      const double s = std::sqrt(std::max(1e-300, v * v - 4.0 * delta * floor * (v - floor)));
      return 1.0 + (v - 2.0 * delta * floor) / s;
    };
    // Objective derivative at y, for a segment topped at v:
    //   u'(P(y)) P'(y) [G(v) - G(y)] - u(P(y)) f(y) + delta u(2 floor) f(y)
    auto deriv = [&](double y, double vtop) {
      const double p = std::min(seed_P(y), 1.0);
      const double dp = seed_P(y) < 1.0 ? seed_dP(y) : 0.0;
      const double fy = F.pdf(y);
      return u.deriv(p) * dp * (F.cdf(vtop) - F.cdf(y)) - u(p) * fy + delta * u_floor_offer * fy;
    };
    int k = f0 + 1;
    for (; k < n; ++k) {
      bool ok = true;
      for (int j = f0; j <= k && ok; ++j) ok = deriv(sol.v[j], sol.v[k]) < 0.0;
      if (!ok) break;
      sol.R[k] = u_floor_offer * (G(k) - G(f0));
      sol.P[k] = seed_P(sol.v[k]);
      sol.Pbar[k] = std::max(sol.Pbar[k - 1], sol.P[k]);
      sol.t[k] = f0;
    }
    seed_end = k - 1;
  }
  sol.diag.seed_segment_end = seed_end;

  // Grid Bellman recursion for the remaining states.  The maximization
  // excludes y = v; ties go to the largest y (t = max T(v)).
  for (int k = seed_end + 1; k < n; ++k) {
    if (k <= f0) continue;
    const double Gk = G(k);
    double best = -std::numeric_limits<double>::infinity();
    int best_y = f0;
    std::vector<int> ties;
    for (int y = f0; y < k; ++y) {
      const double val = u(std::min(sol.Pbar[y], 1.0)) * (Gk - G(y)) + delta * sol.R[y];
      if (val > best + kStructTol) {
        best = val;
        best_y = y;
        ties.clear();
      } else if (val > best - kStructTol) {
        ties.push_back(best_y);
        best_y = y;  // largest maximizer
        best = std::max(best, val);
      }
    }
    // Tied maximizers must carry strictly ordered envelopes (the value of
    // stopping at the smaller one would otherwise dominate).
    for (int z : ties) {
      ++sol.diag.envelope_tie_checks;
      if (!(sol.Pbar[z] < sol.Pbar[best_y] - kStructTol)) ++sol.diag.envelope_tie_violations;
    }
    sol.t[k] = best_y;
    sol.R[k] = best;
    if (best < -kStructTol) throw std::runtime_error("negative value above the floor");
    const double next_offer = std::min(sol.Pbar[best_y], 1.0);
    const double w = delta * uv_eval(sol.v[k], next_offer);
    sol.P[k] = largest_indifferent_action(sol.v[k], w);
    sol.Pbar[k] = std::max(sol.Pbar[k - 1], sol.P[k]);
  }
  sol.payoff = sol.R[n - 1];

  // Residual certificates.
  for (int k = f0 + 1; k < n; ++k) {
    const double Gk = G(k);
    double best = -std::numeric_limits<double>::infinity();
    for (int y = f0; y < k; ++y)
      best = std::max(best, u(std::min(sol.Pbar[y], 1.0)) * (Gk - G(y)) + delta * sol.R[y]);
    sol.diag.max_bellman_residual =
        std::max(sol.diag.max_bellman_residual, std::abs(best - sol.R[k]));
    const double lhs = uv_eval(sol.v[k], sol.P[k]);
    const double rhs = delta * uv_eval(sol.v[k], std::min(sol.Pbar[sol.t[k]], 1.0));
    sol.diag.max_indiff_residual = std::max(sol.diag.max_indiff_residual, std::abs(lhs - rhs));
    if (sol.P[k] < sol.Pbar[k] - kStructTol) ++sol.diag.envelope_dips;
  }
  return sol;
}

inline SkimSolution skim_solve(const Belief& F, const ProposerUtility& u, double delta,
                               int type_points = 2001) {
  return skim_solve(F, u, delta, make_grid(F, type_points).type_grid);
}

// Equilibrium path: iterate the state v_{k+1} = t(v_k) from the top of the
// support to the floor.  Offers are strictly decreasing; the terminal offer
// is 2 * floor, accepted by every remaining type.
inline std::vector<SkimPathStep> skim_path(const SkimSolution& sol) {
  std::vector<SkimPathStep> path;
  const int n = static_cast<int>(sol.v.size());
  int state = n - 1;
  int period = 0;
  while (state > sol.floor_index) {
    const int next = sol.t[state];
    if (next >= state) throw std::runtime_error("skim path stalled");
    SkimPathStep step;
    step.period = period++;
    step.state = state;
    step.offer = sol.offer_at(state);
    step.accept_lo = sol.v[next];
    step.accept_hi = sol.v[state];
    if (!path.empty() && step.offer >= path.back().offer - 0.0)
      throw std::runtime_error("skim path offers not strictly decreasing");
    path.push_back(step);
    if (static_cast<int>(path.size()) > n) throw std::runtime_error("skim path too long");
    state = next;
  }
  return path;
}

// Per-type agreement map read off the path.  Types in the half-open
// interval (v_{k+1}, v_k] agree at step k, so the cell masses telescope and
// the recomputed Proposer payoff matches R(v_top) exactly.
inline EquilibriumOutcome skim_outcome(const SkimSolution& sol, const Belief& F,
                                       const ProposerUtility& u, int period_offset = 0) {
  EquilibriumOutcome out;
  const auto path = skim_path(sol);
  const int n = static_cast<int>(sol.v.size());
  out.types = sol.v;
  out.weights.assign(n, 0.0);
  out.outcomes.resize(n);
  for (int i = 0; i < n; ++i)
    out.weights[i] = F.cdf(sol.v[i]) - (i == 0 ? 0.0 : F.cdf(sol.v[i - 1]));

  size_t step = 0;
  for (int i = n - 1; i >= 0; --i) {
    if (i < sol.floor_index || sol.v[i] < 0.0) continue;  // never agree
    if (i == sol.floor_index) {
      // Floor type accepts the terminal offer 2*floor at its reservation
      // utility (zero-mass cell, kept for completeness).
      if (!path.empty())
        out.outcomes[i].atoms.push_back(
            {path.back().offer, path.back().period + period_offset, 1.0});
      continue;
    }
    while (step < path.size() && sol.v[i] <= path[step].accept_lo) ++step;
    if (step < path.size())
      out.outcomes[i].atoms.push_back({path[step].offer, path[step].period + period_offset, 1.0});
  }
  out.proposer_payoff = out.recompute_proposer_payoff(u, sol.delta);
  return out;
}

struct SweepRow {
  double delta = 0.0;
  double payoff = 0.0;
  double benchmark = 0.0;
  double gap = 0.0;
  int grid_points = 0;
};

// Grid resolution scaled with patience: step proportional to sqrt(1-delta).
inline int auto_grid_points(const Belief& F, double delta, double step_scale = 0.01,
                            int min_points = 401, int max_points = 6001) {
  const double span = F.hi() - F.pos_floor();
  const int n = static_cast<int>(std::ceil(span / (step_scale * std::sqrt(1.0 - delta)))) + 1;
  return std::clamp(n, min_points, max_points);
}

// Patient-limit sweep: payoff against the full-delegation benchmark
// U_lower(F), with grids refined as delta -> 1.
inline std::vector<SweepRow> skim_limit_sweep(const Belief& F, const ProposerUtility& u,
                                              std::span<const double> deltas, double benchmark) {
  std::vector<SweepRow> rows;
  for (double d : deltas) {
    const int n = auto_grid_points(F, d);
    const auto sol = skim_solve(F, u, d, n);
    rows.push_back({d, sol.payoff, benchmark, benchmark - sol.payoff, n});
  }
  return rows;
}

}  // namespace vetobar
