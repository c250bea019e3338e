#pragma once

// The auxiliary static problem over interval delegation sets: commitment
// payoff U(F), full-delegation payoff U_lower(F), conditional optimality
// probes, and the payoff-preserving transform from dynamic outcomes to
// static mechanisms.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vetobar/core.hpp"

namespace vetobar {

// A static mechanism as used here: either a delegation interval [c,1], a
// finite menu, or the stochastic image of a dynamic outcome (per type a
// lottery over actions, residual mass on the status quo).
struct StaticMechanism {
  enum class Rep { Interval, Menu, StochasticImage };
  Rep rep = Rep::Interval;
  double interval_lo = 0.0;
  std::vector<double> menu;
  VetoerForm form = VetoerForm::Quadratic;

  std::vector<double> types;
  std::vector<double> weights;
  // assignment[i]: list of (action, prob); remaining probability goes to 0.
  std::vector<std::vector<std::pair<double, double>>> assignment;

  double vetoer_utility(size_t i) const {
    double acc = 0.0;
    for (const auto& [a, p] : assignment[i]) acc += p * uv_eval(types[i], a, form);
    return acc;
  }
  // Utility type v would get from type j's assignment.
  double vetoer_utility_as(double v, size_t j) const {
    double acc = 0.0;
    for (const auto& [a, p] : assignment[j]) acc += p * uv_eval(v, a, form);
    return acc;
  }
  double proposer_payoff(const ProposerUtility& u) const {
    double acc = 0.0;
    for (size_t i = 0; i < types.size(); ++i)
      for (const auto& [a, p] : assignment[i]) acc += weights[i] * p * (u(a) - u(0.0));
    return acc;
  }
};

// Vetoer's choice from the delegation set [c,1] u {0}: veto below c/2 (and
// for v < 0), the threshold c on [c/2, c], the ideal point on [c, 1], and 1
// above.  The boundary type c/2 takes c (Proposer-favoring tie).
inline double interval_choice(double v, double c) {
  if (v < 0.0 || v < 0.5 * c) return 0.0;
  if (v <= c) return c;
  if (v <= 1.0) return v;
  return 1.0;
}

// Expected Proposer payoff from delegating [c, 1] under belief F.
inline double interval_delegation_payoff(const Belief& F, const ProposerUtility& u, double c,
                                         int quad_points = 2001) {
  if (c < 0.0 || c > 1.0) throw std::invalid_argument("threshold outside [0,1]");
  // Integrate only over the region where the choice is nonzero; anchor the
  // kinks of the choice function so the trapezoid stays exact where the
  // integrand is piecewise linear.
  const double lo = std::max(F.is_union() ? F.pos_floor() : F.lo(), 0.5 * c);
  const double hi = F.hi();
  if (lo >= hi) {
    // All mass (weakly) below c/2 except possibly the endpoint.
    return 0.0;
  }
  const double anchors[] = {0.5 * c, c, 1.0, F.pos_floor()};
  auto grid = linspace_with(lo, hi, quad_points, anchors);
  return cdf_trapezoid(F, grid, [&](double v) { return u(interval_choice(v, c)); });
}

inline double interval_delegation_payoff(const TypeDistribution& F, const ProposerUtility& u,
                                         double c, int quad_points = 2001) {
  return interval_delegation_payoff(Belief::full(F), u, c, quad_points);
}

struct DelegationReport {
  double c_star = 0.0;
  double U = 0.0;       // commitment payoff U(F)
  double U_full = 0.0;  // full-delegation payoff at c = 2*pos_floor
  std::vector<std::pair<double, double>> payoff_curve;
};

// Maximize the interval-delegation payoff over c in [2*pos_floor, 1]:
// coarse scan (no unimodality assumed), then golden-section refinement when
// the maximizer is locally strict.  Ties resolve toward the smaller c, so a
// payoff plateau (e.g. uniform F with linear loss) reports its left edge.
inline DelegationReport optimal_interval(const Belief& F, const ProposerUtility& u,
                                         int scan_points = 400) {
  const double c_lo = std::min(2.0 * F.pos_floor(), 1.0);
  DelegationReport rep;
  rep.payoff_curve.reserve(scan_points);
  int best_i = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scan_points; ++i) {
    const double c = c_lo + (1.0 - c_lo) * i / (scan_points - 1);
    const double val = interval_delegation_payoff(F, u, c);
    rep.payoff_curve.emplace_back(c, val);
    if (val > best_val + kStructTol) {
      best_val = val;
      best_i = i;
    }
  }
  double c_star = rep.payoff_curve[best_i].first;
  const bool strict_left = best_i == 0 || rep.payoff_curve[best_i - 1].second < best_val - kStructTol;
  const bool strict_right =
      best_i + 1 == scan_points || rep.payoff_curve[best_i + 1].second < best_val - kStructTol;
  if (strict_left && strict_right && best_i > 0 && best_i + 1 < scan_points) {
    // Golden-section refinement inside the bracketing cells.
    double a = rep.payoff_curve[best_i - 1].first;
    double b = rep.payoff_curve[best_i + 1].first;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = interval_delegation_payoff(F, u, x1);
    double f2 = interval_delegation_payoff(F, u, x2);
    while (b - a > kRootTol) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = interval_delegation_payoff(F, u, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = interval_delegation_payoff(F, u, x2);
      }
    }
    c_star = 0.5 * (a + b);
    best_val = interval_delegation_payoff(F, u, c_star);
  }
  rep.c_star = c_star;
  rep.U = best_val;
  rep.U_full = interval_delegation_payoff(F, u, c_lo);
  return rep;
}

inline DelegationReport optimal_interval(const TypeDistribution& F, const ProposerUtility& u,
                                         int scan_points = 400) {
  return optimal_interval(Belief::full(F), u, scan_points);
}

// Proposer payoff of an arbitrary finite menu under belief F: each type
// picks its favorite from menu u {0}.  The choice is piecewise constant in
// the type, switching only at pairwise midpoints and surplus boundaries, so
// integrating segment by segment is exact.
inline double menu_payoff(const Belief& F, const ProposerUtility& u,
                          std::span<const double> menu) {
  std::vector<double> sorted(menu.begin(), menu.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts{F.lo(), F.hi(), 0.0, F.pos_floor()};
  for (size_t i = 0; i < sorted.size(); ++i) {
    cuts.push_back(0.5 * sorted[i]);
    for (size_t j = i + 1; j < sorted.size(); ++j) cuts.push_back(0.5 * (sorted[i] + sorted[j]));
  }
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double x0 = std::clamp(cuts[i], F.lo(), F.hi());
    const double x1 = std::clamp(cuts[i + 1], F.lo(), F.hi());
    if (x1 - x0 < kStructTol) continue;
    const double mass = F.cdf(x1) - F.cdf(x0);
    if (mass <= 0.0) continue;
    const double v = 0.5 * (x0 + x1);
    if (v < 0.0 || (F.is_union() && v < F.pos_floor())) continue;
    acc += (u(vetoer_best_in_menu(v, sorted, u)) - u(0.0)) * mass;
  }
  return acc;
}

struct CondOptReport {
  bool holds = false;
  double worst_gap = 0.0;  // max payoff improvement found; <= 0 when holds
  std::string worst_alternative;
};

// Conditional-optimality probe: under the conditional belief F_[c, c_hi], compare the
// delegation set [c_star, 1] against every interval [c',1] on a grid and
// against random finite menus.  A falsification probe, not an optimizer.
inline CondOptReport conditional_optimality_check(const Belief& F, const ProposerUtility& u,
                                                  double c_star, double c, double c_hi,
                                                  std::uint64_t seed = 20240711,
                                                  int interval_points = 200, int menu_probes = 500) {
  if (!(c <= 0.5 * c_star + kStructTol) || !(c_hi >= c_star - kStructTol))
    throw std::invalid_argument("window violates c <= c*/2 <= c* <= c_hi");
  const Belief G = truncate(F, c, c_hi);
  const double base = interval_delegation_payoff(G, u, c_star);
  CondOptReport rep;
  rep.worst_gap = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < interval_points; ++i) {
    const double cp = static_cast<double>(i) / (interval_points - 1);
    const double gap = interval_delegation_payoff(G, u, cp) - base;
    if (gap > rep.worst_gap) {
      rep.worst_gap = gap;
      rep.worst_alternative = "interval [" + std::to_string(cp) + ",1]";
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size_dist(1, 5);
  std::uniform_real_distribution<double> act_dist(0.0, 1.0);
  for (int p = 0; p < menu_probes; ++p) {
    const int sz = size_dist(rng);
    std::vector<double> menu(sz);
    for (auto& a : menu) a = act_dist(rng);
    const double gap = menu_payoff(G, u, menu) - base;
    if (gap > rep.worst_gap) {
      rep.worst_gap = gap;
      std::string s = "menu {";
      for (double a : menu) s += std::to_string(a) + ",";
      s.back() = '}';
      rep.worst_alternative = s;
    }
  }
  rep.holds = rep.worst_gap <= kPayoffTol;
  return rep;
}

// The payoff-preserving transform: agreement on action a at time t becomes
// the static lottery {a w.p. delta^t, 0 w.p. 1 - delta^t}; no agreement
// becomes the status quo.
inline StaticMechanism mechanism_from_outcome(const EquilibriumOutcome& out, double delta,
                                              VetoerForm form = VetoerForm::Quadratic) {
  if (delta < 0.0 || delta >= 1.0) throw std::invalid_argument("delta outside [0,1)");
  StaticMechanism m;
  m.rep = StaticMechanism::Rep::StochasticImage;
  m.form = form;
  m.types = out.types;
  m.weights = out.weights;
  m.assignment.resize(out.types.size());
  for (size_t i = 0; i < out.types.size(); ++i)
    for (const auto& atom : out.outcomes[i].atoms)
      m.assignment[i].emplace_back(atom.action, atom.prob * std::pow(delta, atom.period));
  return m;
}

// Assignment induced by the delegation set [c,1] on a type grid.
inline StaticMechanism interval_mechanism(const Belief& F, double c,
                                          std::span<const double> type_grid) {
  StaticMechanism m;
  m.rep = StaticMechanism::Rep::Interval;
  m.interval_lo = c;
  m.types.assign(type_grid.begin(), type_grid.end());
  m.weights.resize(m.types.size(), 0.0);
  for (size_t i = 0; i < m.types.size(); ++i) {
    m.weights[i] = F.cdf(m.types[i]) - (i == 0 ? 0.0 : F.cdf(m.types[i - 1]));
    m.assignment.push_back({{interval_choice(m.types[i], c), 1.0}});
  }
  return m;
}

struct IcIrReport {
  bool ic_ok = true;
  bool ir_ok = true;
  double worst_violation = 0.0;
  size_t worst_i = 0, worst_j = 0;
};

// Pairwise incentive compatibility and per-type individual rationality over
// the mechanism's type grid, with slack kPayoffTol.
inline IcIrReport ic_ir_check(const StaticMechanism& m) {
  IcIrReport rep;
  const size_t n = m.types.size();
  std::vector<double> own(n);
  for (size_t i = 0; i < n; ++i) own[i] = m.vetoer_utility(i);
  for (size_t i = 0; i < n; ++i) {
    const double ir_gap = -own[i];  // u_V(v, 0) = 0
    if (ir_gap > rep.worst_violation) {
      rep.worst_violation = ir_gap;
      rep.worst_i = rep.worst_j = i;
    }
    if (ir_gap > kPayoffTol) rep.ir_ok = false;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double gain = m.vetoer_utility_as(m.types[i], j) - own[i];
      if (gain > rep.worst_violation) {
        rep.worst_violation = gain;
        rep.worst_i = i;
        rep.worst_j = j;
      }
      if (gain > kPayoffTol) rep.ic_ok = false;
    }
  }
  return rep;
}

}  // namespace vetobar
