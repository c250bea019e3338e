#include <catch2/catch_amalgamated.hpp>

#include "vetobar/profiles.hpp"
#include "vetobar/verify.hpp"

using namespace vetobar;

namespace {
const ProposerUtility kLin = ProposerUtility::linear_loss();

DeviationReport check_two_type(TwoTypeProfile::Mutation mut) {
  TwoTypeModel m({0.3, 0.55, 0.9, 0.7});
  TwoTypeProfile prof(m, mut);
  const auto offers = linspace_with(0.0, 1.0, 200);
  const std::vector<double> types{0.3, 0.55};
  const std::vector<double> prior{0.3, 0.7};
  return eps_equilibrium(prof, kLin, 0.9, offers, types, prior, 200, 1e-3);
}

DeviationReport check_skim(SkimProfile::Mutation mut, int grid = 1201) {
  const auto F = Belief::full(TypeDistribution::uniform(0.2, 1.0));
  auto sol = skim_solve(F, kLin, 0.9, grid);
  const auto [types, prior] = skim_type_sample(sol, F);
  SkimProfile prof(std::move(sol), F, kLin, mut);
  const auto offers = linspace_with(0.0, 2.0, 200);
  return eps_equilibrium(prof, kLin, 0.9, offers, types, prior, 200, 1e-3);
}
}  // namespace

TEST_CASE("leapfrogging-region profile is an eps-equilibrium") {
  TwoTypeModel m({0.3, 0.55, 0.9, 0.7});
  TwoTypeProfile prof(m);
  REQUIRE(prof.equilibrium().region == TwoTypeRegion::Leapfrogging);
  const auto offers = linspace_with(0.0, 1.0, 200);
  const std::vector<double> types{0.3, 0.55};
  const std::vector<double> prior{0.3, 0.7};
  const auto rep = eps_equilibrium(prof, kLin, 0.9, offers, types, prior, 200, 1e-3);
  CHECK(rep.pass());
  CHECK(rep.max_proposer_gain < 1e-3);
  CHECK(rep.max_vetoer_gain < 1e-3);
  // Checker consistency: simulated on-path value vs the analytic payoff.
  CHECK(rep.onpath_value ==
        Catch::Approx(prof.equilibrium().proposer_payoff).margin(rep.tail_bound + 1e-6));
  // On-path belief transitions are Bayes-consistent.
  CHECK(rep.belief_consistency < 1e-9);
  CHECK(rep.tail_bound < 1e-3 / 10.0);
}

TEST_CASE("skimming and delayed-region profiles also certify") {
  for (double mu0 : {0.3, 0.9}) {
    TwoTypeModel m({0.3, 0.55, 0.9, mu0});
    TwoTypeProfile prof(m);
    const auto offers = linspace_with(0.0, 1.0, 200);
    const std::vector<double> types{0.3, 0.55};
    const std::vector<double> prior{1.0 - mu0, mu0};
    const auto rep = eps_equilibrium(prof, kLin, 0.9, offers, types, prior, 200, 1e-3);
    INFO("mu0=" << mu0 << " worstP=" << rep.worst_proposer.state << " "
                << rep.worst_proposer.deviation << " gain " << rep.max_proposer_gain);
    CHECK(rep.pass());
    CHECK(rep.onpath_value ==
          Catch::Approx(prof.equilibrium().proposer_payoff).margin(rep.tail_bound + 1e-6));
  }
}

TEST_CASE("continuum skim profile certifies on uniform[0.2,1]") {
  const auto rep = check_skim(SkimProfile::Mutation::None);
  CHECK(rep.pass());
  CHECK(rep.max_proposer_gain < 1e-3);
  CHECK(rep.max_vetoer_gain < 1e-3);
  CHECK(rep.belief_consistency < 1e-9);
}

TEST_CASE("mutation sensitivity: all five corruptions are caught") {
  using TM = TwoTypeProfile::Mutation;
  SECTION("skipped ladder rung") {
    const auto rep = check_two_type(TM::SkipRung);
    CHECK_FALSE(rep.pass());
    CHECK(std::max(rep.max_proposer_gain, rep.max_vetoer_gain) > 1e-3);
  }
  SECTION("wrong rejection probability") {
    const auto rep = check_two_type(TM::WrongRejectProb);
    CHECK_FALSE(rep.pass());
    CHECK(std::max(rep.max_proposer_gain, rep.max_vetoer_gain) > 1e-3);
  }
  SECTION("wrong second-period randomization") {
    const auto rep = check_two_type(TM::WrongLambda);
    CHECK_FALSE(rep.pass());
    CHECK(std::max(rep.max_proposer_gain, rep.max_vetoer_gain) > 1e-3);
  }
  SECTION("flipped off-path belief") {
    const auto rep = check_two_type(TM::FlippedOffPathBelief);
    CHECK_FALSE(rep.pass());
    CHECK(std::max(rep.max_proposer_gain, rep.max_vetoer_gain) > 1e-3);
  }
  SECTION("wrong terminal offer in the skim profile") {
    const auto rep = check_skim(SkimProfile::Mutation::TerminalOffer, 601);
    CHECK_FALSE(rep.pass());
    CHECK(rep.max_vetoer_gain > 1e-3);
  }
}

TEST_CASE("horizon guard") {
  TwoTypeModel m({0.3, 0.55, 0.9, 0.7});
  TwoTypeProfile prof(m);
  const auto offers = linspace_with(0.0, 1.0, 10);
  const std::vector<double> types{0.3, 0.55};
  const std::vector<double> prior{0.3, 0.7};
  CHECK_THROWS_AS(eps_equilibrium(prof, kLin, 0.9, offers, types, prior, 10, 1e-3),
                  std::invalid_argument);
}

TEST_CASE("finite-horizon oracle") {
  const std::vector<double> types{0.3, 0.55};
  const auto offers = linspace_with(0.0, 1.0, 201);
  SECTION("T = 1 reproduces the static one-offer benchmark") {
    const auto orc = finite_horizon_oracle(types, offers, 0.9, 1, 201);
    for (int j = 0; j < 201; ++j) {
      const double mu = orc.mu_grid[j];
      const double want = std::max(0.6, mu * 1.0);  // pool at 2l or target h at 1
      CHECK(orc.V[0][j] == Catch::Approx(want).margin(1e-9));
    }
  }
  SECTION("delta = 0 collapses every horizon to the static answer") {
    const auto o1 = finite_horizon_oracle(types, offers, 0.0, 1, 101);
    const auto o10 = finite_horizon_oracle(types, offers, 0.0, 10, 101);
    for (int j = 0; j < 101; ++j) CHECK(o10.V[0][j] == Catch::Approx(o1.V[0][j]).margin(1e-12));
  }
  SECTION("value is convex and increasing in the belief") {
    const auto orc = finite_horizon_oracle(types, offers, 0.9, 10, 201);
    for (size_t t = 0; t < orc.V.size(); ++t) {
      const auto& V = orc.V[t];
      for (size_t j = 1; j < V.size(); ++j) CHECK(V[j] >= V[j - 1] - 1e-9);
      for (size_t j = 1; j + 1 < V.size(); ++j)
        CHECK(V[j + 1] - V[j] >= V[j] - V[j - 1] - 1e-6);
    }
  }
  SECTION("plausibility band against the infinite-horizon values") {
    const auto orc = finite_horizon_oracle(types, offers, 0.9, 10, 201);
    TwoTypeModel m({0.3, 0.55, 0.9, 0.5});
    for (int j = 0; j < 201; j += 20) {
      const double mu = orc.mu_grid[j];
      const double inf_val = std::max(m.skim_value(mu).first, m.leapfrog_value(mu));
      CHECK(orc.V[0][j] >= inf_val - 0.02);
    }
  }
  SECTION("three types: pure-response simplex variant") {
    const std::vector<double> three{0.2, 0.4, 0.6};
    const auto coarse = linspace_with(0.0, 1.0, 41);
    const auto o1 = finite_horizon_oracle(three, coarse, 0.0, 1);
    const auto o5 = finite_horizon_oracle(three, coarse, 0.0, 5);
    REQUIRE(o1.V[0].size() == o5.V[0].size());
    for (size_t b = 0; b < o1.V[0].size(); ++b)
      CHECK(o5.V[0][b] == Catch::Approx(o1.V[0][b]).margin(1e-12));  // delta = 0 collapse
    // Degenerate beliefs: the Proposer extracts the known type's surplus
    // bound u(min(2v, 1)) in one round.  The first simplex point puts all
    // mass on the top type (0.6), the last puts all mass on the bottom (0.2).
    const auto od = finite_horizon_oracle(three, coarse, 0.9, 3);
    CHECK(od.V[0].front() >= 1.0 - 1e-9);
    CHECK(od.V[0].back() >= 0.4 - 1e-9);
  }
  SECTION("preconditions") {
    CHECK_THROWS_AS(finite_horizon_oracle(types, offers, 0.9, 21), std::invalid_argument);
    const std::vector<double> four{0.1, 0.2, 0.4, 0.6};
    CHECK_THROWS_AS(finite_horizon_oracle(four, offers, 0.9, 5), std::invalid_argument);
  }
}
