#pragma once

// Core primitives shared by every solver: player utilities, type
// distributions, belief truncations, grids, and the indifference-action
// kernel 2va - a^2 = w  =>  a = v + sqrt(v^2 - w).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vetobar {

// Tolerance hierarchy: algebraic identities, root finding, quadrature-backed
// payoff comparisons.
inline constexpr double kStructTol = 1e-12;
inline constexpr double kRootTol = 1e-9;
inline constexpr double kPayoffTol = 1e-6;

enum class VetoerForm { Quadratic, Linear };

// Vetoer utility with the status-quo normalization u_V(0, v) = 0.
// Quadratic: 2va - a^2 (= -(v-a)^2 + v^2).  Linear: v - |v - a|.
inline double uv_eval(double v, double a, VetoerForm form = VetoerForm::Quadratic) {
  if (form == VetoerForm::Quadratic) return 2.0 * v * a - a * a;
  return v - std::abs(v - a);
}

// Proposer utility: ideal point 1, concave, u(0) = 0, u(1) = 1.
class ProposerUtility {
 public:
  enum class Kind { LinearLoss, QuadraticLoss, Mixture };

  static ProposerUtility linear_loss() { return ProposerUtility(Kind::LinearLoss, 1.0); }
  static ProposerUtility quadratic_loss() { return ProposerUtility(Kind::QuadraticLoss, 0.0); }
  // weight w on the linear-loss part, 1-w on the quadratic-loss part.
  static ProposerUtility mixture(double w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("mixture weight outside [0,1]");
    return ProposerUtility(Kind::Mixture, w);
  }

  double operator()(double a) const {
    const double lin = 1.0 - std::abs(1.0 - a);
    const double quad = 2.0 * a - a * a;
    switch (kind_) {
      case Kind::LinearLoss: return lin;
      case Kind::QuadraticLoss: return quad;
      case Kind::Mixture: return weight_ * lin + (1.0 - weight_) * quad;
    }
    return 0.0;
  }

  // Right derivative; used for concavity-based bounds.
  double deriv(double a) const {
    const double dlin = a < 1.0 ? 1.0 : -1.0;
    const double dquad = 2.0 - 2.0 * a;
    switch (kind_) {
      case Kind::LinearLoss: return dlin;
      case Kind::QuadraticLoss: return dquad;
      case Kind::Mixture: return weight_ * dlin + (1.0 - weight_) * dquad;
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  double mixture_weight() const { return weight_; }
  std::string name() const {
    switch (kind_) {
      case Kind::LinearLoss: return "linear_loss";
      case Kind::QuadraticLoss: return "quadratic_loss";
      case Kind::Mixture: return "mixture(" + std::to_string(weight_) + ")";
    }
    return "?";
  }

 private:
  ProposerUtility(Kind k, double w) : kind_(k), weight_(w) {}
  Kind kind_;
  double weight_;
};

namespace detail {
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}
}  // namespace detail

// Prior over Vetoer ideal points: interval support, density bounded away
// from 0 and infinity.  Families: uniform, triangular(peak),
// truncated_normal(mean, sd), piecewise_linear_density(knots).
//
// The triangular family carries a positive density floor (relative knot
// weights 1 : 4 : 1 at lo/peak/hi) so the bounded-density requirement holds
// at the endpoints; a zero-floor tent would violate it.
class TypeDistribution {
 public:
  static TypeDistribution uniform(double lo, double hi) {
    return piecewise_linear({{lo, 1.0}, {hi, 1.0}});
  }

  static TypeDistribution triangular(double lo, double peak, double hi) {
    if (!(lo < peak && peak < hi)) throw std::invalid_argument("triangular: need lo < peak < hi");
    return piecewise_linear({{lo, 1.0}, {peak, 4.0}, {hi, 1.0}});
  }

  static TypeDistribution truncated_normal(double lo, double hi, double mean, double sd) {
    if (!(lo < hi) || !(sd > 0.0)) throw std::invalid_argument("truncated_normal: bad parameters");
    TypeDistribution d;
    d.lo_ = lo;
    d.hi_ = hi;
    d.normal_ = true;
    d.mean_ = mean;
    d.sd_ = sd;
    d.norm_z_ = detail::norm_cdf((hi - mean) / sd) - detail::norm_cdf((lo - mean) / sd);
    if (d.norm_z_ <= 0.0) throw std::invalid_argument("truncated_normal: empty mass");
    return d;
  }

  // knots: (x, relative density), x strictly increasing, density > 0.
  static TypeDistribution piecewise_linear(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw std::invalid_argument("piecewise_linear: need >= 2 knots");
    for (size_t i = 0; i < knots.size(); ++i) {
      if (knots[i].second <= 0.0) throw std::invalid_argument("piecewise_linear: density floor must be > 0");
      if (i > 0 && !(knots[i].first > knots[i - 1].first))
        throw std::invalid_argument("piecewise_linear: knots must strictly increase");
    }
    TypeDistribution d;
    d.lo_ = knots.front().first;
    d.hi_ = knots.back().first;
    d.knots_ = std::move(knots);
    // Normalize so the trapezoid area is exactly 1, then precompute the CDF
    // at the knots (quadratic between knots).
    double area = 0.0;
    for (size_t i = 0; i + 1 < d.knots_.size(); ++i) {
      area += 0.5 * (d.knots_[i].second + d.knots_[i + 1].second) *
              (d.knots_[i + 1].first - d.knots_[i].first);
    }
    for (auto& k : d.knots_) k.second /= area;
    d.knot_cdf_.assign(d.knots_.size(), 0.0);
    for (size_t i = 0; i + 1 < d.knots_.size(); ++i) {
      d.knot_cdf_[i + 1] = d.knot_cdf_[i] + 0.5 * (d.knots_[i].second + d.knots_[i + 1].second) *
                                                (d.knots_[i + 1].first - d.knots_[i].first);
    }
    d.knot_cdf_.back() = 1.0;
    return d;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double pdf(double v) const {
    if (v < lo_ || v > hi_) return 0.0;
    if (normal_) return detail::norm_pdf((v - mean_) / sd_) / (sd_ * norm_z_);
    const size_t i = segment(v);
    const auto& [x0, f0] = knots_[i];
    const auto& [x1, f1] = knots_[i + 1];
    const double t = (v - x0) / (x1 - x0);
    return f0 + t * (f1 - f0);
  }

  double cdf(double v) const {
    if (v <= lo_) return 0.0;
    if (v >= hi_) return 1.0;
    if (normal_) {
      return (detail::norm_cdf((v - mean_) / sd_) - detail::norm_cdf((lo_ - mean_) / sd_)) / norm_z_;
    }
    const size_t i = segment(v);
    const auto& [x0, f0] = knots_[i];
    const auto& [x1, f1] = knots_[i + 1];
    const double dx = v - x0;
    const double slope = (f1 - f0) / (x1 - x0);
    return knot_cdf_[i] + f0 * dx + 0.5 * slope * dx * dx;
  }

  // Reported density bounds (checked at knots / a fine grid for the normal).
  double density_floor() const { return density_extreme(false); }
  double density_ceiling() const { return density_extreme(true); }

  std::string family() const {
    if (normal_) return "truncated_normal";
    if (knots_.size() == 2) return "uniform";
    return knots_.size() == 3 ? "triangular" : "piecewise_linear";
  }

 private:
  TypeDistribution() = default;

  size_t segment(double v) const {
    size_t i = 0;
    while (i + 2 < knots_.size() && v > knots_[i + 1].first) ++i;
    return i;
  }

  double density_extreme(bool want_max) const {
    double val = want_max ? 0.0 : std::numeric_limits<double>::infinity();
    auto fold = [&](double f) { val = want_max ? std::max(val, f) : std::min(val, f); };
    if (normal_) {
      for (int i = 0; i <= 256; ++i) fold(pdf(lo_ + (hi_ - lo_) * i / 256.0));
    } else {
      for (const auto& k : knots_) fold(k.second);
    }
    return val;
  }

  double lo_ = 0.0, hi_ = 1.0;
  // piecewise-linear representation
  std::vector<std::pair<double, double>> knots_;
  std::vector<double> knot_cdf_;
  // truncated normal
  bool normal_ = false;
  double mean_ = 0.0, sd_ = 1.0, norm_z_ = 1.0;
};

// Posterior over types: a base distribution conditioned on either an
// interval [lo, hi] or, after a rejected offer of 0, on the union
// [base.lo, 0] u [pos_lo, base.hi].
class Belief {
 public:
  static Belief truncation(TypeDistribution base, double lo, double hi) {
    if (lo < base.lo() - kStructTol || hi > base.hi() + kStructTol || lo > hi)
      throw std::invalid_argument("truncation window outside support");
    Belief b;
    b.base_ = std::move(base);
    b.lo_ = std::max(lo, b.base_.lo());
    b.hi_ = std::min(hi, b.base_.hi());
    b.mass_ = b.base_.cdf(b.hi_) - b.base_.cdf(b.lo_);
    if (b.mass_ <= kStructTol) throw std::invalid_argument("empty belief");
    return b;
  }

  static Belief full(TypeDistribution base) {
    const double lo = base.lo(), hi = base.hi();
    return truncation(std::move(base), lo, hi);
  }

  // Conditional on [base.lo, 0] u [pos_lo, base.hi]; requires base.lo <= 0.
  static Belief union_after_zero(TypeDistribution base, double pos_lo) {
    if (base.lo() > 0.0) throw std::invalid_argument("union belief requires v_lo <= 0");
    if (pos_lo <= 0.0 || pos_lo >= base.hi()) throw std::invalid_argument("bad union cut");
    Belief b;
    b.base_ = std::move(base);
    b.lo_ = b.base_.lo();
    b.hi_ = b.base_.hi();
    b.union_ = true;
    b.pos_lo_ = pos_lo;
    b.mass_ = b.base_.cdf(0.0) + 1.0 - b.base_.cdf(pos_lo);
    if (b.mass_ <= kStructTol) throw std::invalid_argument("empty belief");
    return b;
  }

  double cdf(double v) const {
    if (v < lo_) return 0.0;
    if (v >= hi_) return 1.0;
    if (!union_) return (base_.cdf(v) - base_.cdf(lo_)) / mass_;
    if (v <= 0.0) return base_.cdf(v) / mass_;
    if (v < pos_lo_) return base_.cdf(0.0) / mass_;
    return (base_.cdf(0.0) + base_.cdf(v) - base_.cdf(pos_lo_)) / mass_;
  }

  double pdf(double v) const {
    if (union_ && v > 0.0 && v < pos_lo_) return 0.0;
    if (v < lo_ || v > hi_) return 0.0;
    return base_.pdf(v) / mass_;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool is_union() const { return union_; }
  // Lowest positive type the solvers can screen down to: max(0, lo) for an
  // interval belief, the upper cut for a union belief.
  double pos_floor() const { return union_ ? pos_lo_ : std::max(0.0, lo_); }
  bool has_negative_part() const { return lo_ < 0.0; }
  double negative_mass() const { return lo_ < 0.0 ? cdf(0.0) : 0.0; }
  const TypeDistribution& base() const { return base_; }
  double window_mass() const { return mass_; }

 private:
  TypeDistribution base_ = TypeDistribution::uniform(0.0, 1.0);
  double lo_ = 0.0, hi_ = 1.0;
  bool union_ = false;
  double pos_lo_ = 0.0;
  double mass_ = 1.0;
};

// Conditional distribution of F given v in [lo, hi].
inline Belief truncate(const TypeDistribution& F, double lo, double hi) {
  return Belief::truncation(F, lo, hi);
}

// Re-truncation of a belief; idempotent when the window repeats.
inline Belief truncate(const Belief& F, double lo, double hi) {
  if (F.is_union()) throw std::invalid_argument("cannot re-truncate a union belief");
  return Belief::truncation(F.base(), std::max(lo, F.lo()), std::min(hi, F.hi()));
}

// Largest action making type v indifferent to continuation utility w under
// quadratic loss: the larger root of 2va - a^2 = w.
inline double largest_indifferent_action(double v, double w) {
  const double cap = v * v;
  if (w > cap + kRootTol) throw std::invalid_argument("infeasible continuation value");
  return v + std::sqrt(std::max(0.0, cap - w));
}

// Vetoer's choice from a finite menu (veto option 0 always available).
// Ties broken toward higher Proposer utility, then toward the larger action.
inline double vetoer_best_in_menu(double v, std::span<const double> menu,
                                  const ProposerUtility& u) {
  double best_a = 0.0;
  double best_uv = uv_eval(v, 0.0);
  for (double a : menu) {
    const double val = uv_eval(v, a);
    if (val > best_uv + kStructTol) {
      best_a = a;
      best_uv = val;
    } else if (val > best_uv - kStructTol) {
      const double du = u(a) - u(best_a);
      if (du > kStructTol || (du > -kStructTol && a > best_a)) {
        best_a = a;
        best_uv = std::max(best_uv, val);
      }
    }
  }
  return best_a;
}

// Strictly increasing grid over [lo, hi] with the given anchors snapped in.
inline std::vector<double> linspace_with(double lo, double hi, int n,
                                         std::span<const double> anchors = {}) {
  if (!(hi > lo) || n < 2) throw std::invalid_argument("degenerate grid");
  std::vector<double> g;
  g.reserve(static_cast<size_t>(n) + anchors.size());
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  for (double a : anchors)
    if (a > lo + kStructTol && a < hi - kStructTol) g.push_back(a);
  std::sort(g.begin(), g.end());
  const double eps = (hi - lo) * 1e-13;
  std::vector<double> out;
  out.reserve(g.size());
  for (double x : g)
    if (out.empty() || x > out.back() + eps) out.push_back(x);
  out.front() = lo;
  out.back() = hi;
  return out;
}

// Type/action grid pair.  Support endpoints are grid points; 0, 2*pos_floor
// and 1 are snapped in when interior.  For a union belief the type grid has
// no points in the gap (0, pos_floor).
struct Grid {
  std::vector<double> type_grid;
  std::vector<double> action_grid;
  double dv = 0.0;
  double da = 0.0;
};

inline Grid make_grid(const Belief& F, int type_points = 2001, int action_points = 801,
                      double action_hi = 2.0) {
  Grid g;
  const double anchors[] = {0.0, 2.0 * F.pos_floor(), 1.0, F.pos_floor()};
  if (F.is_union()) {
    // Split the budget between the two support segments by length.
    const double lneg = 0.0 - F.lo(), lpos = F.hi() - F.pos_floor();
    const int nneg = std::max(2, static_cast<int>(type_points * lneg / (lneg + lpos)));
    const int npos = std::max(2, type_points - nneg);
    g.type_grid = linspace_with(F.lo(), 0.0, nneg);
    auto pos = linspace_with(F.pos_floor(), F.hi(), npos, anchors);
    g.type_grid.insert(g.type_grid.end(), pos.begin(), pos.end());
  } else {
    g.type_grid = linspace_with(F.lo(), F.hi(), type_points, anchors);
  }
  // Action domain [min(0, v_lo - 1), 2]: nothing above 2 is ever accepted in
  // preference to the status quo.
  const double alo = std::min(0.0, F.lo() - 1.0);
  g.action_grid = linspace_with(alo, std::max(1.0, action_hi), action_points, anchors);
  g.dv = (F.hi() - F.lo()) / (type_points - 1);
  g.da = (g.action_grid.back() - g.action_grid.front()) / (action_points - 1);
  return g;
}

// CDF-weighted trapezoid: integral of g dF over the grid.
inline double cdf_trapezoid(const Belief& F, std::span<const double> grid,
                            const std::function<double(double)>& g) {
  double acc = 0.0;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double m = F.cdf(grid[i + 1]) - F.cdf(grid[i]);
    if (m > 0.0) acc += 0.5 * (g(grid[i]) + g(grid[i + 1])) * m;
  }
  return acc;
}

// One agreement branch of a type's equilibrium outcome.
struct AgreementAtom {
  double action = 0.0;
  int period = 0;
  double prob = 1.0;
};

// Per-type distribution over time-stamped agreements; probability mass not
// covered by atoms means no agreement ever.
struct TypeOutcome {
  std::vector<AgreementAtom> atoms;
  double agree_prob() const {
    double p = 0.0;
    for (const auto& a : atoms) p += a.prob;
    return p;
  }
};

// Equilibrium outcome on a type grid: who agrees on what and when, plus the
// Proposer payoff implied by it.
struct EquilibriumOutcome {
  std::vector<double> types;
  std::vector<double> weights;  // belief mass per grid type, sums to 1
  std::vector<TypeOutcome> outcomes;
  double proposer_payoff = 0.0;

  double recompute_proposer_payoff(const ProposerUtility& u, double delta) const {
    double acc = 0.0;
    for (size_t i = 0; i < types.size(); ++i)
      for (const auto& a : outcomes[i].atoms)
        acc += weights[i] * a.prob * std::pow(delta, a.period) * u(a.action);
    return acc;
  }

  double vetoer_value(size_t i, double delta, VetoerForm form = VetoerForm::Quadratic) const {
    double acc = 0.0;
    for (const auto& a : outcomes[i].atoms)
      acc += a.prob * std::pow(delta, a.period) * uv_eval(types[i], a.action, form);
    return acc;
  }
};

}  // namespace vetobar
