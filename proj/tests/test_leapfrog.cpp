#include <catch2/catch_amalgamated.hpp>

#include "vetobar/leapfrog.hpp"

using namespace vetobar;

namespace {
const ProposerUtility kLin = ProposerUtility::linear_loss();
Belief triangular_prior() { return Belief::full(TypeDistribution::triangular(0.0, 0.6, 1.0)); }
}  // namespace

TEST_CASE("construction on the triangular-peak prior") {
  const auto F = triangular_prior();
  const auto eq = leapfrog_construct(F, kLin, 0.995);
  CHECK_FALSE(eq.full_delegation);
  CHECK(eq.first_offer == 0.0);
  CHECK(eq.accept_hi == Catch::Approx(0.5 * eq.c_star));
  CHECK(eq.gap_to_U < 0.03);
  CHECK(eq.gap_to_U >= -kPayoffTol);
  // Continuation culminates in c*: terminal offer equals 2 * (c*/2).
  const auto path = skim_path(eq.cont);
  CHECK(path.back().offer == Catch::Approx(eq.c_star).margin(1e-9));
  // Payoff assembly: one period of discounting on the rejected mass.
  CHECK(eq.payoff ==
        Catch::Approx(0.995 * (1.0 - eq.accepted_mass) * eq.cont.payoff).margin(1e-12));
}

TEST_CASE("full delegation degenerates to plain skimming") {
  const auto F = Belief::full(TypeDistribution::uniform(0.0, 1.0));
  const auto eq = leapfrog_construct(F, kLin, 0.99);
  CHECK(eq.full_delegation);
  CHECK(!eq.note.empty());
  CHECK(eq.payoff == Catch::Approx(eq.cont.payoff));
}

TEST_CASE("hypothesis gate") {
  // v_lo > 0 and v_hi > 1/2: neither support hypothesis holds.
  const auto F = Belief::full(TypeDistribution::uniform(0.2, 1.0));
  CHECK_THROWS_AS(leapfrog_construct(F, kLin, 0.99), std::invalid_argument);
}

TEST_CASE("first offer accepted exactly by grid types in (0, c*/2)") {
  const auto F = triangular_prior();
  const auto eq = leapfrog_construct(F, kLin, 0.99);
  const auto out = leapfrog_outcome(eq, F, kLin);
  const double cut = 0.5 * eq.c_star;
  for (size_t i = 0; i < out.types.size(); ++i) {
    const double v = out.types[i];
    const bool accepts_zero = !out.outcomes[i].atoms.empty() &&
                              out.outcomes[i].atoms[0].period == 0 &&
                              out.outcomes[i].atoms[0].action == 0.0;
    if (v > 0.0 && v < cut - 1e-9) CHECK(accepts_zero);
    if (v > cut + 1e-9) CHECK_FALSE(accepts_zero);
  }
  // Outcome payoff equals the assembled equilibrium payoff.
  CHECK(out.proposer_payoff == Catch::Approx(eq.payoff).margin(1e-9));
}

TEST_CASE("outcome shape is non-monotone: leapfrog then decreasing offers") {
  const auto F = triangular_prior();
  const auto eq = leapfrog_construct(F, kLin, 0.99);
  const auto path = skim_path(eq.cont);
  CHECK(eq.first_offer < path.front().offer);  // 0, then a high offer
  for (size_t i = 1; i < path.size(); ++i) CHECK(path[i].offer < path[i - 1].offer);
}

TEST_CASE("static image of the leapfrog outcome") {
  const auto F = triangular_prior();
  const auto eq = leapfrog_construct(F, kLin, 0.99);
  const auto out = leapfrog_outcome(eq, F, kLin);
  const auto m = mechanism_from_outcome(out, 0.99);
  const auto rep = ic_ir_check(m);
  CHECK(rep.ic_ok);
  CHECK(rep.ir_ok);
  CHECK(m.proposer_payoff(kLin) == Catch::Approx(out.proposer_payoff).margin(1e-9));
}

TEST_CASE("commitment gap sweep decreases to zero") {
  const auto F = triangular_prior();
  const double deltas[] = {0.9, 0.99, 0.999};
  const auto rows = commitment_gap_sweep(F, kLin, deltas);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].gap >= -kPayoffTol);  // commitment payoff is an upper bound
    if (i > 0) CHECK(rows[i].gap < rows[i - 1].gap);
  }
  CHECK(rows.back().gap < 0.02);
}

TEST_CASE("sandwich between full delegation and commitment") {
  const auto F = triangular_prior();
  const auto rep = optimal_interval(F, kLin);
  const auto sol = skim_solve(F, kLin, 0.999, auto_grid_points(F, 0.999));
  const auto eq = leapfrog_construct(F, kLin, 0.999);
  CHECK(rep.U_full - kPayoffTol <= sol.payoff);
  CHECK(sol.payoff <= eq.payoff + kPayoffTol);
  CHECK(eq.payoff <= rep.U + kPayoffTol);
}

TEST_CASE("conditional-optimality windows along the path") {
  // Every non-terminal path state keeps the belief inside the
  // window; the terminal belief (from which c* is offered and accepted by
  // all) necessarily dips below c*.
  const auto F = triangular_prior();
  for (double d : {0.9, 0.995}) {
    const auto eq = leapfrog_construct(F, kLin, d);
    const auto path = skim_path(eq.cont);
    REQUIRE(path.size() >= 2);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      const double c_hi = eq.cont.v[path[i].state];
      INFO("delta=" << d << " step " << i);
      CHECK(c_hi >= eq.c_star - 1e-9);
      CHECK(F.lo() <= 0.5 * eq.c_star);
    }
    CHECK(eq.cont.v[path.back().state] < eq.c_star);  // the documented exception
    CHECK(eq.cont.v[path.back().state] >= 0.5 * eq.c_star - 1e-9);
  }
}

TEST_CASE("necessity gap on the triangular prior") {
  const auto F = triangular_prior();
  const auto rep = optimal_interval(F, kLin);
  const double deltas[] = {0.9, 0.99, 0.999};
  const auto rows = necessity_gap(F, kLin, deltas);
  const double limit_gap = rep.U - rep.U_full;
  for (const auto& r : rows) CHECK(r.gap >= 0.5 * limit_gap);
  CHECK(std::abs(rows.back().gap - limit_gap) < 0.02);
}

TEST_CASE("no-gap prior: union posterior after the zero offer") {
  // v_lo < 0: rejection of the first offer leaves [v_lo, 0] u [c*/2, v_hi].
  const auto F = Belief::full(
      TypeDistribution::truncated_normal(-0.25, 1.0, 0.45, 0.35));
  const auto u = ProposerUtility::mixture(0.5);
  const auto eq = leapfrog_construct(F, u, 0.999);
  REQUIRE_FALSE(eq.full_delegation);
  CHECK(eq.posterior.is_union());
  CHECK(eq.posterior.pos_floor() == Catch::Approx(0.5 * eq.c_star));
  CHECK(eq.posterior.negative_mass() > 0.0);
  CHECK(eq.gap_to_U < 0.01);
  CHECK(eq.gap_to_U >= -kPayoffTol);
  const auto path = skim_path(eq.cont);
  CHECK(path.back().offer == Catch::Approx(eq.c_star).margin(1e-9));
  // Negative types never agree; the static image stays IC/IR.
  const auto out = leapfrog_outcome(eq, F, u);
  for (size_t i = 0; i < out.types.size(); ++i)
    if (out.types[i] < 0.0) CHECK(out.outcomes[i].atoms.empty());
  const auto mech = mechanism_from_outcome(out, 0.999);
  const auto rep = ic_ir_check(mech);
  CHECK(rep.ic_ok);
  CHECK(rep.ir_ok);
  CHECK(mech.proposer_payoff(u) == Catch::Approx(out.proposer_payoff).margin(1e-9));
  // The first-period deviation guard holds at this patience level.
  const auto fallback = skim_solve(F, u, 0.999, auto_grid_points(F, 0.999));
  const auto guard = deviation_guard(eq, fallback, F, u, linspace_with(0.0, 1.0, 201));
  CHECK(guard.pass);
}

TEST_CASE("necessity gap refuses full-delegation priors") {
  const auto F = Belief::full(TypeDistribution::uniform(0.0, 1.0));
  const double deltas[] = {0.9};
  CHECK_THROWS_AS(necessity_gap(F, kLin, deltas), std::invalid_argument);
}

TEST_CASE("first-period deviation guard") {
  const auto F = triangular_prior();
  const double d = 0.99;
  const auto eq = leapfrog_construct(F, kLin, d);
  const auto fallback = skim_solve(F, kLin, d, auto_grid_points(F, d));
  const auto probes = linspace_with(0.0, 1.0, 201);
  const auto rep = deviation_guard(eq, fallback, F, kLin, probes);
  CHECK(rep.pass);
  CHECK(rep.max_deviation_payoff <= eq.payoff + 1e-3);
  // Probing the on-path offer itself returns the equilibrium payoff.
  const std::vector<double> zero{0.0};
  const auto rep0 = deviation_guard(eq, fallback, F, kLin, zero);
  CHECK(rep0.max_deviation_payoff == Catch::Approx(eq.payoff));
  // An offer of 1 yields at most (about) the full-delegation payoff.
  const std::vector<double> one{1.0};
  const auto rep1 = deviation_guard(eq, fallback, F, kLin, one);
  CHECK(rep1.max_deviation_payoff <= fallback.payoff + 1e-6);
}
