#pragma once

// Two-type example: linear loss utilities, actions in [0,1], types l and h
// with 0 < l < 1/2 < h < 2l < 1.  Builds the skimming ladder a^0 = 2l <
// a^1 < ... < a^N = 1, the cutoff beliefs, the leapfrogging thresholds
// mu_delta and mu_bar_delta, classifies the prior into the three on-path
// regions, and replays seeded traces.

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vetobar/core.hpp"

namespace vetobar {

struct TwoTypeParams {
  double l = 0.3;
  double h = 0.55;
  double delta = 0.9;
  double mu0 = 0.5;

  void validate() const {
    if (!(0.0 < l && l < 0.5 && 0.5 < h && h < 2.0 * l && 2.0 * l < 1.0))
      throw std::invalid_argument("two-type parameters must satisfy 0 < l < 1/2 < h < 2l < 1");
    if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta outside [0,1)");
    if (!(mu0 >= 0.0 && mu0 <= 1.0)) throw std::invalid_argument("mu0 outside [0,1]");
  }
};

enum class TwoTypeRegion { Skimming, Leapfrogging, DelayedLeapfrogging };

inline std::string to_string(TwoTypeRegion r) {
  switch (r) {
    case TwoTypeRegion::Skimming: return "Skimming";
    case TwoTypeRegion::Leapfrogging: return "Leapfrogging";
    case TwoTypeRegion::DelayedLeapfrogging: return "DelayedLeapfrogging";
  }
  return "?";
}

struct TwoTypeEquilibrium {
  TwoTypeParams params;
  double a_star = 0.0;   // 2h - 1
  double mu_star = 0.0;  // separation threshold of the static benchmark
  double a_delta = 0.0;  // delta * (2h - 1)
  std::vector<double> ladder;          // a^0 = 2l, ..., a^N = 1
  bool ladder_capped = false;          // a^N pinned by the action cap
  std::vector<double> cutoff_beliefs;  // mu^1 < ... < mu^N
  double mu_delta = 0.0;
  double u_h_star = 0.0;
  double a_bar_delta = 0.0;
  double mu_bar_delta = 0.0;
  TwoTypeRegion region = TwoTypeRegion::Skimming;
  bool boundary = false;  // mu0 sits on a region threshold
  double proposer_payoff = 0.0;
  double h_payoff = 0.0;
  double l_payoff = 0.0;
};

struct TraceStep {
  int period = 0;
  double offer = 0.0;
  bool accepted = false;
  double posterior = 0.0;  // Proposer belief in h after this period
};

// Model wrapper: all thresholds computed once, cheap queries afterwards.
class TwoTypeModel {
 public:
  explicit TwoTypeModel(TwoTypeParams p) : p_(p), u_(ProposerUtility::linear_loss()) {
    p_.validate();
    build_ladder();
    build_cutoffs();
  }

  const TwoTypeParams& params() const { return p_; }
  double u(double a) const { return u_(a); }
  double uv(double a, double v) const { return uv_eval(v, a, VetoerForm::Linear); }

  double a_star() const { return 2.0 * p_.h - 1.0; }
  double a_delta() const { return p_.delta * a_star(); }
  double mu_star() const {
    // u(2l) = (1 - mu*) u(a*) + mu* u(1)
    return (u_(2.0 * p_.l) - u_(a_star())) / (u_(1.0) - u_(a_star()));
  }

  const std::vector<double>& ladder() const { return ladder_; }
  bool ladder_capped() const { return capped_; }
  // cutoff mu^n for n in 1..N; index 0 is the sentinel mu^0 = 0.
  const std::vector<double>& cutoffs() const { return m_; }
  int top_rung() const { return static_cast<int>(ladder_.size()) - 1; }

  // Value of starting the decreasing offer sequence with rung n at belief
  // mu.  On each rung type h rejects with the Bayes probability that moves
  // the posterior to the next cutoff.
  double rung_value(int n, double mu) const {
    if (n == 0) return u_(2.0 * p_.l);
    if (n >= static_cast<int>(m_.size())) return -std::numeric_limits<double>::infinity();
    const double q = m_[n - 1];
    if (mu < q - kStructTol) return -std::numeric_limits<double>::infinity();
    return ((mu - q) * u_(ladder_[n]) + (1.0 - mu) * p_.delta * wcut_[n - 1]) / (1.0 - q);
  }

  // Proposer value of the restricted skimming equilibrium and its starting
  // rung; exact ties at segment knots resolve to the lower index.
  std::pair<double, int> skim_value(double mu) const {
    double best = rung_value(0, mu);
    int best_n = 0;
    const int usable = std::min(top_rung(), static_cast<int>(m_.size()) - 1);
    for (int n = 1; n <= usable; ++n) {
      if (mu < m_[n - 1] - kStructTol) break;
      const double val = rung_value(n, mu);
      if (val > best + kStructTol) {
        best = val;
        best_n = n;
      }
    }
    return {best, best_n};
  }

  double leapfrog_value(double mu) const {
    return (1.0 - mu) * u_(a_delta()) + mu * p_.delta * u_(1.0);
  }

  // Smallest belief where the skimming and leapfrogging values cross.
  // Throws when delta is too small for the crossing to exist.
  double mu_delta() const {
    auto diff = [&](double mu) { return skim_value(mu).first - leapfrog_value(mu); };
    std::vector<double> knots{0.0};
    for (double m : m_) {
      if (m > 0.0 && m < 1.0) knots.push_back(m);
    }
    knots.push_back(1.0);
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
      double a = knots[i], b = knots[i + 1];
      double fa = diff(a), fb = diff(b);
      if (fa > 0.0 && fb > 0.0) continue;
      if (fa <= 0.0) {
        // The crossing happened at (or numerically before) the left knot.
        return a;
      }
      for (int it = 0; it < 200 && b - a > kRootTol * 0.5; ++it) {
        const double mid = 0.5 * (a + b);
        if (diff(mid) > 0.0)
          a = mid;
        else
          b = mid;
      }
      return 0.5 * (a + b);
    }
    throw std::runtime_error("mu_delta undefined at this delta");
  }

  // Type h's payoff in the skimming equilibrium at belief mu_delta.
  double u_h_star() const {
    const double md = mu_delta();
    const int start = skim_value(md).second;
    return uv(ladder_[start], p_.h);
  }

  // h indifferent between a_bar_delta now and u_h_star next period.
  double a_bar_delta() const { return 2.0 * p_.h - p_.delta * u_h_star(); }

  // Rejection probability of type h moving the posterior from mu down to
  // target (type l rejects for sure).
  static double rejection_prob(double mu, double target) {
    return target * (1.0 - mu) / ((1.0 - target) * mu);
  }

  // Root of the leapfrog-vs-delayed indifference in (mu_delta, 1).
  double mu_bar_delta() const {
    const double md = mu_delta();
    auto g = [&](double mu) {
      const double r = rejection_prob(mu, md);
      const double rhs = (1.0 - mu) * p_.delta * u_(a_delta()) +
                         mu * (1.0 - r + r * p_.delta * p_.delta) * u_(1.0);
      return leapfrog_value(mu) - rhs;
    };
    double a = std::min(md * (1.0 + 1e-12) + 1e-15, 1.0);
    double b = 1.0 - 1e-15;
    if (!(g(a) > 0.0 && g(b) < 0.0))
      throw std::runtime_error("mu_bar_delta: no sign change (unexpected)");
    for (int it = 0; it < 200 && b - a > kRootTol * 0.5; ++it) {
      const double mid = 0.5 * (a + b);
      if (g(mid) > 0.0)
        a = mid;
      else
        b = mid;
    }
    return 0.5 * (a + b);
  }

  // Smallest t >= 0 with u_V(1,h) >= delta^t u_V(2l,h), then the dynamic
  // commitment bound mu0 u(1) + (1-mu0) delta^t u(2l).
  double dynamic_commitment_lower_bound() const {
    const double ratio = uv(1.0, p_.h) / uv(2.0 * p_.l, p_.h);  // in (0,1)
    int t = 0;
    if (p_.delta > 0.0) {
      t = static_cast<int>(std::ceil(std::log(ratio) / std::log(p_.delta) - kStructTol));
      t = std::max(t, 0);
    } else {
      t = 1;
    }
    return p_.mu0 * u_(1.0) + (1.0 - p_.mu0) * std::pow(p_.delta, t) * u_(2.0 * p_.l);
  }

  TwoTypeEquilibrium solve() const {
    TwoTypeEquilibrium eq;
    eq.params = p_;
    eq.a_star = a_star();
    eq.mu_star = mu_star();
    eq.a_delta = a_delta();
    eq.ladder = ladder_;
    eq.ladder_capped = capped_;
    eq.cutoff_beliefs.assign(m_.begin() + 1, m_.end());
    eq.mu_delta = mu_delta();
    eq.u_h_star = u_h_star();
    eq.a_bar_delta = a_bar_delta();
    eq.mu_bar_delta = mu_bar_delta();

    const double mu0 = p_.mu0;
    eq.boundary =
        std::abs(mu0 - eq.mu_delta) < kStructTol || std::abs(mu0 - eq.mu_bar_delta) < kStructTol;
    // Boundary priors resolve toward the lower region.
    if (mu0 < eq.mu_delta || std::abs(mu0 - eq.mu_delta) < kStructTol) {
      eq.region = TwoTypeRegion::Skimming;
      auto [val, start] = skim_value(mu0);
      eq.proposer_payoff = val;
      eq.h_payoff = mu0 > 0.0 ? uv(ladder_[start], p_.h) : 0.0;
      eq.l_payoff = std::pow(p_.delta, start) * uv(2.0 * p_.l, p_.l);
    } else if (mu0 < eq.mu_bar_delta || std::abs(mu0 - eq.mu_bar_delta) < kStructTol) {
      eq.region = TwoTypeRegion::Leapfrogging;
      eq.proposer_payoff = leapfrog_value(mu0);
      eq.h_payoff = p_.delta * uv(1.0, p_.h);
      eq.l_payoff = uv(a_delta(), p_.l);
    } else {
      eq.region = TwoTypeRegion::DelayedLeapfrogging;
      const double r0 = rejection_prob(mu0, eq.mu_delta);
      eq.proposer_payoff = (1.0 - mu0) * p_.delta * u_(a_delta()) +
                           mu0 * ((1.0 - r0) + r0 * p_.delta * p_.delta) * u_(1.0);
      eq.h_payoff = uv(1.0, p_.h);
      eq.l_payoff = (1.0 - second_period_skim_prob(1.0)) * p_.delta * uv(a_delta(), p_.l);
    }
    return eq;
  }

  // lambda(a0): probability of starting the skimming path in the second
  // period after a first-period offer a0 > a_bar_delta is rejected; makes
  // type h indifferent about accepting a0.
  double second_period_skim_prob(double a0) const {
    const double num = uv(a0, p_.h) - p_.delta * p_.delta * uv(1.0, p_.h);
    const double den = p_.delta * u_h_star() - p_.delta * p_.delta * uv(1.0, p_.h);
    const double lam = num / den;
    if (lam < -kRootTol || lam > 1.0 + kRootTol)
      throw std::runtime_error("second-period randomization outside [0,1]");
    return std::clamp(lam, 0.0, 1.0);
  }

  // Proposer randomization over starting rungs after a capped offer of 1 is
  // rejected: h indifferent between 1 now and the rung lottery next period.
  double cap_mix_prob() const {
    const int N = top_rung();
    if (!capped_ || N < 2) throw std::runtime_error("cap randomization needs a capped ladder");
    const double num = uv(1.0, p_.h) - p_.delta * uv(ladder_[N - 2], p_.h);
    const double den = p_.delta * (uv(ladder_[N - 1], p_.h) - uv(ladder_[N - 2], p_.h));
    const double lam = num / den;
    if (lam < -kRootTol || lam > 1.0 + kRootTol)
      throw std::runtime_error("cap randomization outside [0,1]");
    return std::clamp(lam, 0.0, 1.0);
  }

  // On-path play for a given Vetoer type.  All randomness (type h mixing,
  // Proposer mixing) comes from the RNG.
  std::vector<TraceStep> simulate(bool vetoer_is_h, std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<TraceStep> trace;
    const TwoTypeEquilibrium eq = solve();
    int t = 0;
    double mu = p_.mu0;

    auto play_skim = [&](int rung, double belief) {
      int i = rung;
      double mu_cur = belief;
      while (true) {
        const double offer = ladder_[i];
        if (i == 0) {
          trace.push_back({t, offer, true, mu_cur});
          return;
        }
        bool accepted = false;
        double next_mu = m_[i - 1];
        if (vetoer_is_h) {
          const double r = rejection_prob(mu_cur, next_mu);
          accepted = unif(rng) > r;
        }
        trace.push_back({t, offer, accepted, accepted ? mu_cur : next_mu});
        if (accepted) return;
        ++t;
        mu_cur = next_mu;
        if (i == top_rung() && capped_) {
          i = unif(rng) < cap_mix_prob() ? i - 1 : i - 2;
        } else {
          i -= 1;
        }
      }
    };

    auto play_leapfrog = [&]() {
      trace.push_back({t, a_delta(), !vetoer_is_h, vetoer_is_h ? 1.0 : mu});
      if (!vetoer_is_h) return;
      ++t;
      trace.push_back({t, 1.0, true, 1.0});
    };

    switch (eq.region) {
      case TwoTypeRegion::Skimming:
        play_skim(skim_value(mu).second, mu);
        break;
      case TwoTypeRegion::Leapfrogging:
        play_leapfrog();
        break;
      case TwoTypeRegion::DelayedLeapfrogging: {
        const double r0 = rejection_prob(mu, eq.mu_delta);
        bool accepted = vetoer_is_h && unif(rng) > r0;
        trace.push_back({t, 1.0, accepted, accepted ? mu : eq.mu_delta});
        if (accepted) return trace;
        ++t;
        mu = eq.mu_delta;
        if (unif(rng) < second_period_skim_prob(1.0)) {
          play_skim(skim_value(mu).second, mu);
        } else {
          play_leapfrog();
        }
        break;
      }
    }
    return trace;
  }

  // Discounted Proposer payoff of one trace.
  double trace_payoff(const std::vector<TraceStep>& trace) const {
    for (const auto& s : trace)
      if (s.accepted) return std::pow(p_.delta, s.period) * u_(s.offer);
    return 0.0;
  }

  // Full per-type agreement lotteries for the on-path play, mirroring
  // simulate() with explicit probabilities.
  EquilibriumOutcome outcome() const {
    const TwoTypeEquilibrium eq = solve();
    EquilibriumOutcome out;
    out.types = {p_.l, p_.h};
    out.weights = {1.0 - p_.mu0, p_.mu0};
    out.outcomes.resize(2);
    auto& lo = out.outcomes[0];
    auto& hi = out.outcomes[1];

    // Branch-enumerating skim play from (belief, rung) at a period, entered
    // with the given h-conditional probability.
    std::function<void(double, int, int, double)> skim = [&](double mu, int rung, int t,
                                                             double h_prob) {
      if (rung == 0) {
        if (h_prob > 0.0) hi.atoms.push_back({2.0 * p_.l, t, h_prob});
        lo.atoms.push_back({2.0 * p_.l, t, branch_l_prob_});
        return;
      }
      const double target = m_[rung - 1];
      const double acc = 1.0 - rejection_prob(mu, target);
      if (acc > 0.0) hi.atoms.push_back({ladder_[rung], t, h_prob * acc});
      const double rest = h_prob * (1.0 - acc);
      if (rung == top_rung() && capped_) {
        const double lam = cap_mix_prob();
        const double save = branch_l_prob_;
        branch_l_prob_ = save * lam;
        skim(target, rung - 1, t + 1, rest * lam);
        branch_l_prob_ = save * (1.0 - lam);
        skim(target, rung - 2, t + 1, rest * (1.0 - lam));
        branch_l_prob_ = save;
      } else {
        skim(target, rung - 1, t + 1, rest);
      }
    };

    branch_l_prob_ = 1.0;
    switch (eq.region) {
      case TwoTypeRegion::Skimming:
        skim(p_.mu0, skim_value(p_.mu0).second, 0, 1.0);
        break;
      case TwoTypeRegion::Leapfrogging:
        lo.atoms.push_back({a_delta(), 0, 1.0});
        hi.atoms.push_back({1.0, 1, 1.0});
        break;
      case TwoTypeRegion::DelayedLeapfrogging: {
        const double r0 = rejection_prob(p_.mu0, eq.mu_delta);
        hi.atoms.push_back({1.0, 0, 1.0 - r0});
        const double lam = second_period_skim_prob(1.0);
        // Leapfrog branch in the second period.
        lo.atoms.push_back({a_delta(), 1, 1.0 - lam});
        hi.atoms.push_back({1.0, 2, r0 * (1.0 - lam)});
        // Skimming branch in the second period.
        branch_l_prob_ = lam;
        skim(eq.mu_delta, skim_value(eq.mu_delta).second, 1, r0 * lam);
        break;
      }
    }
    out.proposer_payoff = out.recompute_proposer_payoff(u_, p_.delta);
    return out;
  }

 private:
  void build_ladder() {
    ladder_.push_back(2.0 * p_.l);
    const double h2 = 2.0 * p_.h;
    while (true) {
      const double next = h2 - p_.delta * (h2 - ladder_.back());
      if (next > 1.0 + kStructTol) {
        ladder_.push_back(1.0);
        capped_ = true;
        break;
      }
      ladder_.push_back(next);
      if (next >= 1.0 - kStructTol) break;  // hit 1 by indifference
    }
  }

  void build_cutoffs() {
    // m_[n] is the belief making Proposer indifferent between starting the
    // sequence with rung n and rung n-1; wcut_[n] is the value there.
    m_.assign(1, 0.0);
    wcut_.assign(1, u_(2.0 * p_.l));
    for (int n = 1; n <= top_rung(); ++n) {
      const double q = m_[n - 1];
      const double un = u_(ladder_[n]);
      // rung_value(n, mu) = rung_value(n-1, mu), both affine in mu.
      double a1, b1;  // rung n: a1 + b1 mu
      a1 = (-q * un + p_.delta * wcut_[n - 1]) / (1.0 - q);
      b1 = (un - p_.delta * wcut_[n - 1]) / (1.0 - q);
      double a0, b0;  // rung n-1
      if (n == 1) {
        a0 = u_(2.0 * p_.l);
        b0 = 0.0;
      } else {
        const double qq = m_[n - 2];
        const double um = u_(ladder_[n - 1]);
        a0 = (-qq * um + p_.delta * wcut_[n - 2]) / (1.0 - qq);
        b0 = (um - p_.delta * wcut_[n - 2]) / (1.0 - qq);
      }
      const double mu_n = (a0 - a1) / (b1 - b0);
      // Cutoffs approach 1 geometrically; rungs whose cutoff is within 1e-9
      // of 1 are unreachable for any belief of interest, so the usable list
      // stops there (the ladder itself stays complete).
      if (mu_n >= 1.0 - 1e-9) break;
      if (!(mu_n > q - kStructTol))
        throw std::runtime_error("cutoff beliefs not increasing (unexpected)");
      m_.push_back(mu_n);
      wcut_.push_back(a1 + b1 * mu_n);
    }
  }

  TwoTypeParams p_;
  ProposerUtility u_;
  std::vector<double> ladder_;
  bool capped_ = false;
  std::vector<double> m_;     // sentinel mu^0 = 0, then cutoffs
  std::vector<double> wcut_;  // value at the cutoff belief
  mutable double branch_l_prob_ = 1.0;  // scratch for outcome() branch bookkeeping
};

}  // namespace vetobar
