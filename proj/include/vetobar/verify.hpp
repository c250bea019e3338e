#pragma once

// Certification layer: one-shot deviation checking of encoded strategy
// profiles (horizon-truncated rollouts, checker-side Bayes tracking) and a
// finite-horizon backward-induction oracle for small discretized games.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vetobar/core.hpp"

namespace vetobar {

// Opaque profile state: a history summary (belief descriptor, plan, mixing
// weights) interpreted by the concrete profile.
struct ProfileState {
  int kind = 0;
  int i = 0;
  double x = 0.0;
  double y = 0.0;

  bool operator<(const ProfileState& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (i != o.i) return i < o.i;
    if (x != o.x) return x < o.x;
    return y < o.y;
  }
};

// Encoded equilibrium profile.  The checker owns belief tracking; the
// profile supplies behavior (offer distributions, acceptance rules, state
// transitions after a rejection).
class StrategyProfile {
 public:
  virtual ~StrategyProfile() = default;
  virtual ProfileState initial() const = 0;
  virtual VetoerForm vetoer_form() const { return VetoerForm::Quadratic; }
  // (offer, probability) pairs, probabilities summing to 1.
  virtual std::vector<std::pair<double, double>> offer_dist(const ProfileState&) const = 0;
  virtual double accept_prob(const ProfileState&, double type, double offer) const = 0;
  virtual ProfileState after_reject(const ProfileState&, double offer) const = 0;
  // Closed-form continuation values (proposer-utility, vetoer-utility) at
  // absorbing states, to keep rollouts short.
  virtual std::optional<std::pair<double, double>> absorbing_value(const ProfileState&,
                                                                   double /*type*/) const {
    return std::nullopt;
  }
  // The belief the construction assigns to the state; used where Bayes rule
  // is silent (zero-probability events).
  virtual std::vector<double> stated_weights(const ProfileState&,
                                             std::span<const double> types) const = 0;
  virtual std::string describe(const ProfileState&) const = 0;
};

struct DeviationWitness {
  std::string state;
  std::string deviation;
  double gain = 0.0;
};

struct DeviationReport {
  double max_proposer_gain = 0.0;
  double max_vetoer_gain = 0.0;
  DeviationWitness worst_proposer, worst_vetoer;
  int states_checked = 0;
  int horizon = 0;
  double tail_bound = 0.0;
  double eps = 0.0;
  double onpath_value = 0.0;  // simulated Proposer value at the initial state
  double belief_consistency = 0.0;  // max L1 gap, tracked vs stated on-path beliefs
  std::vector<std::string> anomalies;

  bool pass() const {
    return anomalies.empty() && max_proposer_gain < eps && max_vetoer_gain < eps;
  }
};

namespace detail {

// Discounted (proposer, vetoer) continuation value for one type under the
// profile, truncated at `depth` periods.
inline std::pair<double, double> roll_value(const StrategyProfile& prof, const ProfileState& s,
                                            double type, const ProposerUtility& u, double delta,
                                            int depth) {
  if (auto closed = prof.absorbing_value(s, type)) return *closed;
  if (depth <= 0) return {0.0, 0.0};
  const VetoerForm form = prof.vetoer_form();
  double vp = 0.0, vv = 0.0;
  for (const auto& [offer, p] : prof.offer_dist(s)) {
    if (p <= 0.0) continue;
    const double q = prof.accept_prob(s, type, offer);
    double branch_p = q * u(offer);
    double branch_v = q * uv_eval(type, offer, form);
    if (q < 1.0) {
      const auto next = prof.after_reject(s, offer);
      const auto [cp, cv] = roll_value(prof, next, type, u, delta, depth - 1);
      branch_p += (1.0 - q) * delta * cp;
      branch_v += (1.0 - q) * delta * cv;
    }
    vp += p * branch_p;
    vv += p * branch_v;
  }
  return {vp, vv};
}

struct TrackedState {
  ProfileState s;
  std::vector<double> weights;  // unnormalized per-type reach mass
  bool on_path = true;
  int depth_left = 0;
};

}  // namespace detail

// One-shot deviation certification.  Reachable on-path states are
// enumerated with checker-side Bayes weights (prior times rejection
// probabilities); one extra layer of states reached by single Proposer
// deviations is added.  At every state the Proposer's best deviation over
// the offer grid and each supported type's accept/reject flip are evaluated
// by rolling the profile forward `horizon` periods.
inline DeviationReport eps_equilibrium(const StrategyProfile& prof, const ProposerUtility& u,
                                       double delta, std::span<const double> offer_grid,
                                       std::span<const double> type_sample,
                                       std::span<const double> prior_weights, int horizon,
                                       double eps) {
  if (type_sample.size() != prior_weights.size())
    throw std::invalid_argument("type sample / prior weights size mismatch");
  DeviationReport rep;
  rep.horizon = horizon;
  rep.eps = eps;
  rep.tail_bound = std::pow(delta, horizon) * 2.0;  // utility span bound
  if (rep.tail_bound >= eps / 10.0)
    throw std::invalid_argument("horizon too short for the requested eps");

  const int nt = static_cast<int>(type_sample.size());
  auto weighted_proposer_value = [&](const ProfileState& s, std::span<const double> w,
                                     int depth) {
    double tot = 0.0, val = 0.0;
    for (int i = 0; i < nt; ++i) {
      if (w[i] <= 1e-15) continue;
      val += w[i] * detail::roll_value(prof, s, type_sample[i], u, delta, depth).first;
      tot += w[i];
    }
    return tot > 0.0 ? val / tot : 0.0;
  };

  // Breadth-first enumeration of on-path states.
  std::vector<detail::TrackedState> states;
  std::map<ProfileState, size_t> seen;
  {
    detail::TrackedState init;
    init.s = prof.initial();
    init.weights.assign(prior_weights.begin(), prior_weights.end());
    init.depth_left = horizon;
    states.push_back(init);
    seen[init.s] = 0;
  }
  for (size_t head = 0; head < states.size(); ++head) {
    const auto cur = states[head];  // copy: states may reallocate
    if (!cur.on_path || cur.depth_left <= 0) continue;
    bool absorbing = true;
    for (int i = 0; i < nt && absorbing; ++i)
      if (!prof.absorbing_value(cur.s, type_sample[i])) absorbing = false;
    if (absorbing) continue;
    for (const auto& [offer, p] : prof.offer_dist(cur.s)) {
      if (p <= 0.0) continue;
      std::vector<double> rw(nt, 0.0);
      double mass = 0.0;
      for (int i = 0; i < nt; ++i) {
        rw[i] = cur.weights[i] * (1.0 - prof.accept_prob(cur.s, type_sample[i], offer));
        mass += rw[i];
      }
      if (mass <= 1e-12) continue;  // rejection is a zero-probability event
      const auto next = prof.after_reject(cur.s, offer);
      // On-path Bayes consistency: tracked posterior vs the stated belief.
      {
        const auto stated = prof.stated_weights(next, type_sample);
        double sm = 0.0;
        for (double w : stated) sm += w;
        if (sm > 0.0) {
          double l1 = 0.0;
          for (int i = 0; i < nt; ++i) l1 += std::abs(rw[i] / mass - stated[i] / sm);
          rep.belief_consistency = std::max(rep.belief_consistency, l1);
        }
      }
      auto it = seen.find(next);
      if (it == seen.end()) {
        detail::TrackedState child;
        child.s = next;
        child.weights = rw;
        child.depth_left = cur.depth_left - 1;
        seen[next] = states.size();
        states.push_back(child);
      }
    }
  }
  const size_t onpath_count = states.size();

  // One layer of off-path states reached by single Proposer deviations.
  for (size_t k = 0; k < onpath_count; ++k) {
    const auto cur = states[k];
    for (double a : offer_grid) {
      ProfileState next;
      try {
        next = prof.after_reject(cur.s, a);
      } catch (const std::exception& e) {
        rep.anomalies.push_back("after_reject(" + prof.describe(cur.s) + ", " +
                                std::to_string(a) + "): " + e.what());
        continue;
      }
      if (seen.count(next)) continue;
      detail::TrackedState child;
      child.s = next;
      child.on_path = false;
      child.weights.assign(nt, 0.0);
      double mass = 0.0;
      for (int i = 0; i < nt; ++i) {
        child.weights[i] = cur.weights[i] * (1.0 - prof.accept_prob(cur.s, type_sample[i], a));
        mass += child.weights[i];
      }
      // Zero-probability rejection: Bayes is silent, use the stated belief.
      if (mass <= 1e-12) child.weights = prof.stated_weights(next, type_sample);
      child.depth_left = horizon;
      seen[next] = states.size();
      states.push_back(child);
    }
  }

  rep.onpath_value = weighted_proposer_value(states[0].s, states[0].weights, horizon);

  // Deviation checks at every collected state.
  for (const auto& st : states) {
    ++rep.states_checked;
    const double eq_value = weighted_proposer_value(st.s, st.weights, horizon);
    // Proposer: best one-shot deviation over the offer grid.
    for (double a : offer_grid) {
      double tot = 0.0, dev = 0.0;
      bool bad = false;
      for (int i = 0; i < nt; ++i) {
        if (st.weights[i] <= 1e-15) continue;
        const double q = prof.accept_prob(st.s, type_sample[i], a);
        double val = q * u(a);
        if (q < 1.0) {
          try {
            const auto next = prof.after_reject(st.s, a);
            val += (1.0 - q) * delta *
                   detail::roll_value(prof, next, type_sample[i], u, delta, horizon).first;
          } catch (const std::exception& e) {
            rep.anomalies.push_back("deviation rollout failed at " + prof.describe(st.s) + ": " +
                                    e.what());
            bad = true;
            break;
          }
        }
        dev += st.weights[i] * val;
        tot += st.weights[i];
      }
      if (bad || tot <= 0.0) continue;
      const double gain = dev / tot - eq_value;
      if (gain > rep.max_proposer_gain) {
        rep.max_proposer_gain = gain;
        rep.worst_proposer = {prof.describe(st.s), "offer " + std::to_string(a), gain};
      }
    }
    // Vetoer: accept/reject flip per supported type, at the state's own
    // offers and at every probe offer.
    auto check_flip = [&](double a) {
      for (int i = 0; i < nt; ++i) {
        if (st.weights[i] <= 1e-15) continue;
        const double v = type_sample[i];
        double q = 0.0;
        ProfileState next;
        try {
          q = prof.accept_prob(st.s, v, a);
          next = prof.after_reject(st.s, a);
        } catch (const std::exception& e) {
          rep.anomalies.push_back("vetoer flip rollout failed at " + prof.describe(st.s) + ": " +
                                  e.what());
          continue;
        }
        const double acc_val = uv_eval(v, a, prof.vetoer_form());
        const double rej_val =
            delta * detail::roll_value(prof, next, v, u, delta, horizon).second;
        const double eq = q * acc_val + (1.0 - q) * rej_val;
        const double gain = std::max(acc_val, rej_val) - eq;
        if (gain > rep.max_vetoer_gain) {
          rep.max_vetoer_gain = gain;
          rep.worst_vetoer = {prof.describe(st.s),
                              "type " + std::to_string(v) + " flip at offer " + std::to_string(a),
                              gain};
        }
      }
    };
    for (const auto& [offer, p] : prof.offer_dist(st.s))
      if (p > 0.0) check_flip(offer);
    for (double a : offer_grid) check_flip(a);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-horizon backward-induction oracle (sanity instrument).

struct FiniteHorizonOracle {
  std::vector<double> types;            // 2 or 3 types, increasing
  std::vector<double> mu_grid;          // belief grid (probability of the top type for 2 types)
  std::vector<std::vector<double>> V;   // V[t][mu]: Proposer value
  std::vector<std::vector<std::vector<double>>> W;  // W[t][type][mu]: Vetoer value
  std::vector<std::vector<double>> policy;          // best offer per (t, mu)
};

namespace detail {

// Three-type finite-horizon oracle: beliefs on a triangular simplex grid,
// pure accept/reject responses only (posterior snapped to the grid), the
// Proposer-favorable consistent pattern per offer.  Type-indifference
// mixing is implemented in the two-type version; here a marginal type that
// cannot be made indifferent simply gets the pure pattern nearest to it.
inline FiniteHorizonOracle finite_horizon_oracle3(std::span<const double> types,
                                                  std::span<const double> offer_grid, double delta,
                                                  int T, int resolution = 44) {
  FiniteHorizonOracle orc;
  orc.types.assign(types.begin(), types.end());
  const int R = resolution;
  // Belief index: weights (i, j, R - i - j) / R on (low, mid, high).
  std::vector<std::array<int, 2>> pts;
  for (int i = 0; i <= R; ++i)
    for (int j = 0; j + i <= R; ++j) pts.push_back({i, j});
  const int M = static_cast<int>(pts.size());
  auto index_of = [&](int i, int j) { return i * (R + 1) - i * (i - 1) / 2 + j; };
  const ProposerUtility u = ProposerUtility::linear_loss();
  auto uvl = [&](double a, double v) { return uv_eval(v, a, VetoerForm::Linear); };

  orc.V.assign(T + 1, std::vector<double>(M, 0.0));
  orc.W.assign(T + 1, std::vector<std::vector<double>>(3, std::vector<double>(M, 0.0)));
  orc.policy.assign(T, std::vector<double>(M, 0.0));
  for (const auto& p : pts) orc.mu_grid.push_back(static_cast<double>(R - p[0] - p[1]) / R);

  for (int t = T - 1; t >= 0; --t) {
    for (int b = 0; b < M; ++b) {
      const double w0 = static_cast<double>(pts[b][0]) / R;
      const double w1 = static_cast<double>(pts[b][1]) / R;
      const double w2 = 1.0 - w0 - w1;
      double best_v = -1.0, best_a = 0.0;
      std::array<double, 3> best_w{0.0, 0.0, 0.0};
      for (double a : offer_grid) {
        for (int mask = 0; mask < 8; ++mask) {
          // Posterior over rejecting types, snapped to the grid.
          const double wts[3] = {w0, w1, w2};
          double rej_mass = 0.0;
          for (int k = 0; k < 3; ++k)
            if (!(mask >> k & 1)) rej_mass += wts[k];
          int pb = b;
          if (rej_mass > 1e-12 && rej_mass < 1.0 - 1e-12) {
            const int pi = static_cast<int>(
                std::lround(((mask >> 0 & 1) ? 0.0 : wts[0] / rej_mass) * R));
            const int pj = std::min(
                R - pi, static_cast<int>(std::lround(
                            ((mask >> 1 & 1) ? 0.0 : wts[1] / rej_mass) * R)));
            pb = index_of(pi, pj);
          }
          bool ok = true;
          double val = 0.0, acc_mass = 0.0;
          std::array<double, 3> wv{};
          for (int k = 0; k < 3 && ok; ++k) {
            const double mine = uvl(a, types[k]);
            const double cont = delta * orc.W[t + 1][k][pb];
            if (mask >> k & 1) {
              if (mine < cont - 1e-9) ok = false;
              wv[k] = mine;
              acc_mass += wts[k];
            } else {
              if (mine > cont + 1e-9) ok = false;
              wv[k] = cont;
            }
          }
          if (!ok) continue;
          val = acc_mass * u(a) + (1.0 - acc_mass) * delta * orc.V[t + 1][pb];
          if (val > best_v) {
            best_v = val;
            best_a = a;
            best_w = wv;
          }
        }
      }
      orc.V[t][b] = std::max(best_v, 0.0);
      orc.policy[t][b] = best_a;
      for (int k = 0; k < 3; ++k) orc.W[t][k][b] = best_w[k];
    }
  }
  return orc;
}

}  // namespace detail

// Small finite-horizon game solved by backward induction, linear loss,
// offers from `offer_grid`, horizon T (period T has value 0).  Two types:
// belief grid of `mu_points`; Vetoer responses are pure accept/reject
// against next period's values, and when only a mixed response is
// consistent the indifferent (top) type mixes with the posterior snapped to
// the belief grid.  Among consistent responses the Proposer-favorable one
// is used.  Three types: pure-response variant on a simplex grid.
inline FiniteHorizonOracle finite_horizon_oracle(std::span<const double> types,
                                                 std::span<const double> offer_grid, double delta,
                                                 int T, int mu_points = 1001) {
  if (T < 1 || T > 20) throw std::invalid_argument("horizon outside [1,20]");
  if (types.size() == 3) return detail::finite_horizon_oracle3(types, offer_grid, delta, T);
  if (types.size() != 2) throw std::invalid_argument("oracle supports two or three types");
  const double l = types[0], h = types[1];
  FiniteHorizonOracle orc;
  orc.types.assign(types.begin(), types.end());
  orc.mu_grid = linspace_with(0.0, 1.0, mu_points);
  const int M = static_cast<int>(orc.mu_grid.size());
  const ProposerUtility u = ProposerUtility::linear_loss();
  auto uvl = [&](double a, double v) { return uv_eval(v, a, VetoerForm::Linear); };

  orc.V.assign(T + 1, std::vector<double>(M, 0.0));
  orc.W.assign(T + 1, {std::vector<double>(M, 0.0), std::vector<double>(M, 0.0)});
  orc.policy.assign(T, std::vector<double>(M, 0.0));

  for (int t = T - 1; t >= 0; --t) {
    for (int j = 0; j < M; ++j) {
      const double mu = orc.mu_grid[j];
      double best_v = -1.0, best_a = 0.0, best_wl = 0.0, best_wh = 0.0;
      for (double a : offer_grid) {
        // Candidate responses, Proposer-best consistent one wins.
        double cand_v = -1.0, cand_wl = 0.0, cand_wh = 0.0;
        auto consider = [&](double pv, double wl, double wh) {
          if (pv > cand_v) {
            cand_v = pv;
            cand_wl = wl;
            cand_wh = wh;
          }
        };
        const double ul = uvl(a, l), uh = uvl(a, h);
        // both reject: belief unchanged.
        if (ul <= delta * orc.W[t + 1][0][j] && uh <= delta * orc.W[t + 1][1][j])
          consider(delta * orc.V[t + 1][j], delta * orc.W[t + 1][0][j],
                   delta * orc.W[t + 1][1][j]);
        // both accept: off-path rejection keeps the current belief.
        if (ul >= delta * orc.W[t + 1][0][j] && uh >= delta * orc.W[t + 1][1][j])
          consider(u(a), ul, uh);
        // only l accepts: posterior 1.
        if (ul >= delta * orc.W[t + 1][0][M - 1] && uh <= delta * orc.W[t + 1][1][M - 1])
          consider((1.0 - mu) * u(a) + mu * delta * orc.V[t + 1][M - 1],
                   ul, delta * orc.W[t + 1][1][M - 1]);
        // only h accepts: posterior 0.
        if (uh >= delta * orc.W[t + 1][1][0] && ul <= delta * orc.W[t + 1][0][0])
          consider(mu * u(a) + (1.0 - mu) * delta * orc.V[t + 1][0],
                   delta * orc.W[t + 1][0][0], uh);
        // h mixes, l rejects: the posterior is the grid point where h's
        // continuation value crosses her acceptance utility (W_h decreases
        // in the belief, so the crossing is bracketed within one cell).  At
        // mu = 1 the mix degenerates to sure acceptance with the crossing
        // point as the off-path rejection belief.
        if (mu > 0.0) {
          // Largest c < j with delta W_h(c) >= uh (binary search; W_h is
          // decreasing in the belief).
          int jp = -1;
          {
            int lo = 0, hi = j - 1;
            while (lo <= hi) {
              const int mid = (lo + hi) / 2;
              if (delta * orc.W[t + 1][1][mid] >= uh) {
                jp = mid;
                lo = mid + 1;
              } else {
                hi = mid - 1;
              }
            }
          }
          if (jp >= 0 && ul <= delta * orc.W[t + 1][0][jp]) {
            const double mup = orc.mu_grid[jp];
            const double acc = (mu - mup) / (1.0 - mup);
            consider(acc * u(a) + (1.0 - acc) * delta * orc.V[t + 1][jp],
                     delta * orc.W[t + 1][0][jp], uh);
          }
        }
        if (cand_v > best_v) {
          best_v = cand_v;
          best_a = a;
          best_wl = cand_wl;
          best_wh = cand_wh;
        }
      }
      orc.V[t][j] = std::max(best_v, 0.0);
      orc.policy[t][j] = best_a;
      orc.W[t][0][j] = best_wl;
      orc.W[t][1][j] = best_wh;
    }
  }
  return orc;
}

}  // namespace vetobar
