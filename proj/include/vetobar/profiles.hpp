#pragma once

// Strategy-profile encodings consumed by the eps-equilibrium checker: the
// two-type equilibrium of the worked example (all three regions, including
// the off-path rung mixing and the second-period skim/leapfrog
// randomization) and the continuum skimming equilibrium on a grid.  Canned
// mutations inject known defects for checker sensitivity tests.

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vetobar/core.hpp"
#include "vetobar/skim.hpp"
#include "vetobar/two_type.hpp"
#include "vetobar/verify.hpp"

namespace vetobar {

// ---------------------------------------------------------------------------
// Two-type profile.

class TwoTypeProfile : public StrategyProfile {
 public:
  enum class Mutation { None, SkipRung, WrongRejectProb, WrongLambda, FlippedOffPathBelief };

  // State encoding:
  //   kind 0: PLAN   i = rung (>= 0) | -1 leapfrog | -2 delayed, x = belief
  //   kind 1: MIX2   i = upper rung k, x = belief (cutoff), y = P(offer a^k)
  //   kind 2: MIXLS  x = mu_delta, y = P(skim start)
  //   kind 3: DEGEN_H (belief on h, offers 1 forever)
  //   kind 4: DEGEN_L (belief on l, offers 2l forever)
  explicit TwoTypeProfile(const TwoTypeModel& model, Mutation mut = Mutation::None)
      : m_(model), mut_(mut), u_(ProposerUtility::linear_loss()) {
    eq_ = m_.solve();
    start_at_mu_delta_ = m_.skim_value(eq_.mu_delta).second;
  }

  const TwoTypeEquilibrium& equilibrium() const { return eq_; }

  VetoerForm vetoer_form() const override { return VetoerForm::Linear; }

  ProfileState initial() const override {
    const double mu0 = m_.params().mu0;
    switch (eq_.region) {
      case TwoTypeRegion::Skimming:
        return plan(m_.skim_value(mu0).second, mu0);
      case TwoTypeRegion::Leapfrogging:
        return plan(-1, mu0);
      case TwoTypeRegion::DelayedLeapfrogging:
        return plan(-2, mu0);
    }
    return plan(0, mu0);
  }

  std::vector<std::pair<double, double>> offer_dist(const ProfileState& s) const override {
    switch (s.kind) {
      case 0:
        if (s.i == -1) return {{eq_.a_delta, 1.0}};
        if (s.i == -2) return {{1.0, 1.0}};
        return {{m_.ladder()[s.i], 1.0}};
      case 1:
        return {{m_.ladder()[s.i], s.y}, {m_.ladder()[s.i - 1], 1.0 - s.y}};
      case 2:
        return {{m_.ladder()[start_at_mu_delta_], s.y}, {eq_.a_delta, 1.0 - s.y}};
      case 3:
        return {{1.0, 1.0}};
      case 4:
        return {{2.0 * m_.params().l, 1.0}};
    }
    throw std::logic_error("bad state");
  }

  double accept_prob(const ProfileState& s, double v, double a) const override {
    const bool is_h = std::abs(v - m_.params().h) < std::abs(v - m_.params().l);
    const double delta = m_.params().delta;
    if (s.kind == 3) {  // belief on h: 1 forever
      if (is_h) return uv(a, m_.params().h) >= delta * uv(1.0, m_.params().h) - kStructTol;
      return in_l_range(a);
    }
    if (s.kind == 4) {  // belief on l: 2l forever
      if (is_h)
        return uv(a, m_.params().h) >= delta * uv(2.0 * m_.params().l, m_.params().h) - kStructTol;
      return in_l_range(a);
    }
    const auto r = respond(s, a);
    return is_h ? r.accept_h : r.accept_l;
  }

  ProfileState after_reject(const ProfileState& s, double a) const override {
    if (s.kind == 3 || s.kind == 4) return s;
    return respond(s, a).next;
  }

  std::optional<std::pair<double, double>> absorbing_value(const ProfileState& s,
                                                           double v) const override {
    const bool is_h = std::abs(v - m_.params().h) < std::abs(v - m_.params().l);
    if (s.kind == 3) {
      if (is_h) return std::make_pair(u_(1.0), uv(1.0, m_.params().h));
      return std::make_pair(0.0, 0.0);
    }
    if (s.kind == 4) {
      const double a0 = 2.0 * m_.params().l;
      return std::make_pair(u_(a0), uv(a0, v));
    }
    return std::nullopt;
  }

  std::vector<double> stated_weights(const ProfileState& s,
                                     std::span<const double> types) const override {
    double mu = 0.0;
    if (s.kind == 0 || s.kind == 1) mu = s.x;
    if (s.kind == 2) mu = eq_.mu_delta;
    if (s.kind == 3) mu = 1.0;
    if (s.kind == 4) mu = 0.0;
    std::vector<double> w(types.size(), 0.0);
    for (size_t i = 0; i < types.size(); ++i) {
      const bool is_h = std::abs(types[i] - m_.params().h) < std::abs(types[i] - m_.params().l);
      w[i] = is_h ? mu : 1.0 - mu;
    }
    return w;
  }

  std::string describe(const ProfileState& s) const override {
    switch (s.kind) {
      case 0:
        if (s.i == -1) return "leapfrog(mu=" + std::to_string(s.x) + ")";
        if (s.i == -2) return "delayed(mu=" + std::to_string(s.x) + ")";
        return "skim(rung=" + std::to_string(s.i) + ",mu=" + std::to_string(s.x) + ")";
      case 1:
        return "mix-rungs(" + std::to_string(s.i) + "/" + std::to_string(s.i - 1) +
               ",mu=" + std::to_string(s.x) + ",p=" + std::to_string(s.y) + ")";
      case 2:
        return "mix-skim-leapfrog(p=" + std::to_string(s.y) + ")";
      case 3:
        return "degenerate-h";
      case 4:
        return "degenerate-l";
    }
    return "?";
  }

 private:
  struct Response {
    double accept_l = 0.0, accept_h = 0.0;
    ProfileState next;
  };

  static ProfileState plan(int rung, double mu) { return {0, rung, mu, 0.0}; }

  double uv(double a, double v) const { return uv_eval(v, a, VetoerForm::Linear); }
  bool in_l_range(double a) const { return a >= -kStructTol && a <= 2.0 * m_.params().l + kStructTol; }

  // Smallest rung index i >= 1 with a <= ladder[i].
  int rung_index(double a) const {
    const auto& lad = m_.ladder();
    for (int i = 1; i < static_cast<int>(lad.size()); ++i)
      if (a <= lad[i] + kStructTol) return i;
    return static_cast<int>(lad.size()) - 1;
  }

  Response respond(const ProfileState& s, double a) const {
    const double mu = s.kind == 2 ? eq_.mu_delta : s.x;
    const double delta = m_.params().delta;
    const double h = m_.params().h;
    const double two_l = 2.0 * m_.params().l;
    Response r;
    if (a <= two_l + kStructTol) {
      // Regions I and II: l accepts anything in [0, 2l]; h accepts only
      // strictly above a_delta.  A rejection flips the belief to the
      // degenerate one (on h, unless mutated).
      r.accept_l = a >= -kStructTol ? 1.0 : 0.0;
      r.accept_h = uv(a, h) > delta * uv(1.0, h) + kStructTol ? 1.0 : 0.0;
      r.next = mut_ == Mutation::FlippedOffPathBelief ? ProfileState{4, 0, 0.0, 0.0}
                                                      : ProfileState{3, 0, 0.0, 0.0};
      return r;
    }
    r.accept_l = 0.0;
    if (a > eq_.a_bar_delta + kStructTol && mu >= eq_.mu_delta - kStructTol) {
      // Region IV: h rejects with the probability that brings the posterior
      // to mu_delta; next period the Proposer mixes skimming against
      // leapfrogging so that h is exactly indifferent at a.
      double rej = TwoTypeModel::rejection_prob(mu, eq_.mu_delta);
      if (mut_ == Mutation::WrongRejectProb) rej = std::min(1.0, rej + 0.2);
      r.accept_h = 1.0 - std::clamp(rej, 0.0, 1.0);
      double lam = (uv(a, h) - delta * delta * uv(1.0, h)) /
                   (delta * eq_.u_h_star - delta * delta * uv(1.0, h));
      if (mut_ == Mutation::WrongLambda) lam += 0.25;
      r.next = {2, 0, eq_.mu_delta, std::clamp(lam, 0.0, 1.0)};
      return r;
    }
    // Region III: classify the offer into its rung interval.
    int i = rung_index(a);
    // Skipped-rung corruption: offers in (a^1, a^2] are treated as if the
    // ladder had no rung a^1, so h accepts them outright.
    if (mut_ == Mutation::SkipRung && i == 2) i = 1;
    const auto& lad = m_.ladder();
    if (i == 1) {
      r.accept_h = 1.0;  // posterior 0
      r.next = {4, 0, 0.0, 0.0};
      return r;
    }
    if (i - 1 >= static_cast<int>(m_.cutoffs().size())) {
      // Rung unreachable for any belief below the cutoff saturation point:
      // everyone rejects and nothing is learned.
      r.accept_h = 0.0;
      r.next = s;
      return r;
    }
    const double target = m_.cutoffs()[i - 1];
    if (target <= mu + kStructTol) {
      r.accept_h = 1.0 - std::clamp(TwoTypeModel::rejection_prob(mu, target), 0.0, 1.0);
      double lam = (uv(a, h) / delta - uv(lad[i - 2], h)) /
                   (uv(lad[i - 1], h) - uv(lad[i - 2], h));
      lam = std::clamp(lam, 0.0, 1.0);
      if (lam >= 1.0 - 1e-9) {
        r.next = plan(i - 1, target);
      } else if (lam <= 1e-9) {
        r.next = plan(i - 2, target);
      } else {
        r.next = {1, i - 1, target, lam};
      }
      return r;
    }
    // Offer too high for this belief: everyone rejects, nothing is learned.
    r.accept_h = 0.0;
    r.next = s;
    return r;
  }

  TwoTypeModel m_;
  Mutation mut_;
  ProposerUtility u_;
  TwoTypeEquilibrium eq_;
  int start_at_mu_delta_ = 0;
};

// ---------------------------------------------------------------------------
// Continuum skimming profile on a solved grid.

class SkimProfile : public StrategyProfile {
 public:
  enum class Mutation { None, TerminalOffer };

  // State encoding:
  //   kind 0: TRUNC  i = grid index of the belief's top state
  //   kind 1: DEGEN  x = degenerate point (offers min(2x,1) forever)
  SkimProfile(SkimSolution sol, Belief belief, const ProposerUtility& u,
              Mutation mut = Mutation::None)
      : sol_(std::move(sol)), F_(std::move(belief)), u_(u), mut_(mut) {}

  const SkimSolution& solution() const { return sol_; }

  ProfileState initial() const override {
    return {0, static_cast<int>(sol_.v.size()) - 1, 0.0, 0.0};
  }

  double state_offer(int k) const {
    double o = sol_.offer_at(k);
    if (mut_ == Mutation::TerminalOffer && k == sol_.floor_index) o += 0.1;
    if (mut_ == Mutation::TerminalOffer && sol_.t[k] == sol_.floor_index) o += 0.1;
    return o;
  }

  std::vector<std::pair<double, double>> offer_dist(const ProfileState& s) const override {
    if (s.kind == 1) return {{std::min(2.0 * s.x, 1.0), 1.0}};
    return {{state_offer(s.i), 1.0}};
  }

  double accept_prob(const ProfileState& s, double v, double a) const override {
    const double delta = sol_.delta;
    if (s.kind == 1) {
      const double o = std::min(2.0 * s.x, 1.0);
      const double cont = std::max(0.0, uv_eval(v, o));
      return uv_eval(v, a) >= delta * cont - kStructTol && uv_eval(v, a) >= -kStructTol;
    }
    if (v < 0.0) return a < 0.0 && uv_eval(v, a) > 0.0;
    if (v < sol_.v[sol_.floor_index] - 1e-9) return uv_eval(v, a) > 0.0;  // off-support types
    if (a < 0.0) return 0.0;
    if (mut_ == Mutation::TerminalOffer && s.i == sol_.floor_index)
      return pbar_at(v) >= state_offer(s.i) - 0.1 - kStructTol;  // original acceptors keep accepting
    if (a > pbar_at(v) + kStructTol) return 0.0;
    // Below the envelope: accept only when the offer beats the discounted
    // continuation of staying on the path.
    const ProfileState next = after_reject(s, a);
    const double cont =
        next.kind == 0 ? continuation_value(next.i, v).second : degen_value(next.x, v);
    return uv_eval(v, a) >= delta * cont - 1e-9 ? 1.0 : 0.0;
  }

  ProfileState after_reject(const ProfileState& s, double a) const override {
    if (s.kind == 1) return s;
    const int k = s.i;
    if (a > sol_.Pbar[k] + kStructTol || a <= 0.0) return s;  // nobody accepts
    if (a < sol_.Pbar[sol_.floor_index] - kStructTol) return s;  // rejected by the whole path
    // First state whose envelope reaches the offer.
    const auto begin = sol_.Pbar.begin() + sol_.floor_index;
    const auto it = std::lower_bound(begin, sol_.Pbar.begin() + k, a - kStructTol);
    return {0, static_cast<int>(it - sol_.Pbar.begin()), 0.0, 0.0};
  }

  // Every state has a closed-form per-type continuation: walk the t-chain
  // until the type's first acceptable offer.  Keeps checker rollouts O(path).
  std::optional<std::pair<double, double>> absorbing_value(const ProfileState& s,
                                                           double v) const override {
    if (s.kind == 1) {
      const double o = std::min(2.0 * s.x, 1.0);
      const double val = uv_eval(v, o);
      if (val >= 0.0) return std::make_pair(u_(o), val);
      return std::make_pair(0.0, 0.0);
    }
    return continuation_value(s.i, v);
  }

  std::vector<double> stated_weights(const ProfileState& s,
                                     std::span<const double> types) const override {
    std::vector<double> w(types.size(), 0.0);
    if (s.kind == 1) {
      // Degenerate belief: all mass on the sample type closest to x.
      size_t best = 0;
      for (size_t i = 1; i < types.size(); ++i)
        if (std::abs(types[i] - s.x) < std::abs(types[best] - s.x)) best = i;
      w[best] = 1.0;
      return w;
    }
    const double top = sol_.v[s.i];
    double prev = F_.lo();
    for (size_t i = 0; i < types.size(); ++i) {
      if (types[i] <= top + kStructTol) w[i] = F_.cdf(types[i]) - F_.cdf(prev);
      prev = types[i];
    }
    return w;
  }

  std::string describe(const ProfileState& s) const override {
    if (s.kind == 1) return "degenerate(" + std::to_string(s.x) + ")";
    return "trunc(v<=" + std::to_string(sol_.v[s.i]) + ")";
  }

 private:
  double pbar_at(double v) const {
    // Envelope at an arbitrary type: value at the largest grid point <= v.
    const auto& g = sol_.v;
    auto it = std::upper_bound(g.begin(), g.end(), v + 1e-12);
    if (it == g.begin()) return sol_.Pbar.front();
    return sol_.Pbar[static_cast<size_t>(it - g.begin()) - 1];
  }

  // Type v's discounted (proposer, vetoer) value of play continuing from
  // state k: she takes the first offer on the t-chain that is below her
  // threshold and beats her own continuation.
  std::pair<double, double> continuation_value(int k, double v) const {
    const auto key = std::make_pair(k, v);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::pair<double, double> val;
    const double offer = state_offer(k);
    const double mine = uv_eval(v, offer);
    bool accepts;
    if (v < 0.0) {
      accepts = false;  // chain offers stay positive
    } else if (mut_ == Mutation::TerminalOffer && k == sol_.floor_index) {
      accepts = pbar_at(v) >= offer - 0.1 - kStructTol && v >= sol_.v[sol_.floor_index] - 1e-9;
    } else if (k == sol_.floor_index) {
      accepts = offer <= pbar_at(v) + kStructTol && mine >= -kStructTol &&
                v >= sol_.v[sol_.floor_index] - 1e-9;
    } else {
      if (offer <= pbar_at(v) + kStructTol) {
        const auto next = continuation_value(sol_.t[k], v);
        accepts = mine >= sol_.delta * next.second - 1e-9;
        if (!accepts) val = {sol_.delta * next.first, sol_.delta * next.second};
      } else {
        accepts = false;
        const auto next = continuation_value(sol_.t[k], v);
        val = {sol_.delta * next.first, sol_.delta * next.second};
      }
    }
    if (accepts) val = {u_(offer), mine};
    if (!accepts && k == sol_.floor_index) val = {0.0, 0.0};
    cache_[key] = val;
    return val;
  }

  double degen_value(double x, double v) const {
    return std::max(0.0, uv_eval(v, std::min(2.0 * x, 1.0)));
  }

  SkimSolution sol_;
  Belief F_;
  ProposerUtility u_;
  Mutation mut_;
  mutable std::map<std::pair<int, double>, std::pair<double, double>> cache_;
};

// Type sample for checking a skim profile: midpoints of the solution grid's
// own cells, weighted by cell mass.  Probe acceptance boundaries always sit
// on solution grid points, so no cell ever straddles a boundary and both the
// rolled on-path payoff and deviation acceptance masses are cell-exact.
inline std::pair<std::vector<double>, std::vector<double>> skim_type_sample(
    const SkimSolution& sol, const Belief& F) {
  std::vector<double> types, weights;
  if (F.has_negative_part()) {
    types.push_back(0.5 * (F.lo() + std::min(0.0, F.hi())));
    weights.push_back(F.cdf(0.0));
  }
  for (size_t i = static_cast<size_t>(sol.floor_index); i + 1 < sol.v.size(); ++i) {
    types.push_back(0.5 * (sol.v[i] + sol.v[i + 1]));
    weights.push_back(F.cdf(sol.v[i + 1]) - F.cdf(sol.v[i]));
  }
  return {types, weights};
}

}  // namespace vetobar
