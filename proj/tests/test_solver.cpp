#include <doctest.h>

#include <cmath>
#include <random>

#include "conetree/solver.hpp"
#include "conetree/superhedge.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace conetree;
namespace ct = conetree::testing;



TEST_CASE("deterministic log examples solve in closed form") {
  SUBCASE("unit wealth spreads evenly") {
    Scenario scn = ct::chain(2, 1.0);
    scn.x = 1.0;
    Solution sol = solve_primal(scn);
    REQUIRE(sol.status == SolveStatus::ok);
    CHECK(sol.u_primal == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(sol.y == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.cuts.size() == 1);
    for (int id = 0; id < scn.tree.num_nodes(); ++id) {
      CHECK(sol.ctilde.at(id) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(sol.gamma_star.at(id) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(evaluate_dual(sol, scn) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(sol.gap <= 1e-8);
  }

  SUBCASE("scaling the wealth shifts the value by log") {
    Scenario scn = ct::chain(2, 1.0);
    scn.x = std::exp(1.0);
    Solution sol = solve_primal(scn);
    REQUIRE(sol.status == SolveStatus::ok);
    CHECK(sol.u_primal == doctest::Approx(1.0).epsilon(1e-10));
    for (int id = 0; id < scn.tree.num_nodes(); ++id)
      CHECK(sol.ctilde.at(id) == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
  }

  SUBCASE("habit with equal rates charges the numeraire-weighted budget") {
    Scenario scn = ct::chain(2, 1.0);
    scn.habit = HabitParams::constants(scn.tree, 1.0, 1.0, 0.5);
    scn.x = 1.0;
    Solution sol = solve_primal(scn);
    REQUIRE(sol.status == SolveStatus::ok);
    // Budget b = x - zT = 0.5, dual weight G_k = 1 + (T - t_k),
    // so y = T / b = 2 and ctilde_k = 1 / (y G_k) = (1/4, 1/3).
    CHECK(sol.y == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(sol.ctilde.at(0) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(sol.ctilde.at(1) == doctest::Approx(1.0 / 3).epsilon(1e-9));
    CHECK(sol.u_primal ==
          doctest::Approx(-1.2424533248940002).epsilon(1e-10));
    ct::ReferenceOptimum oracle = ct::reference_optimum(scn);
    REQUIRE(oracle.ok);
    CHECK(sol.u_primal == doctest::Approx(oracle.value).epsilon(1e-7));
  }
}

TEST_CASE("duality scaling identity for log utility") {
  Scenario a = ct::binomial(2, 1.0, 1.2, 0.9, 0.5, 0.05, 1e-5);
  a.x = 1.0;
  Scenario b = a;
  b.x = 2.0;
  Solution sa = solve_primal(a);
  Solution sb = solve_primal(b);
  REQUIRE(sa.status == SolveStatus::ok);
  REQUIRE(sb.status == SolveStatus::ok);
  CHECK(sb.u_primal - sa.u_primal ==
        doctest::Approx(std::log(2.0)).epsilon(1e-7));
  CHECK(std::abs(sb.gap) <= 1e-8);
}

TEST_CASE("first-order report and tamper detection") {
  Scenario scn = ct::binomial(2, 1.0, 1.2, 0.9, 0.5, 0.05, 1e-5);
  scn.habit = HabitParams::constants(scn.tree, 0.4, 0.8, 0.2);
  Solution sol = solve_primal(scn);
  REQUIRE(sol.status == SolveStatus::ok);

  DualityReport clean = verify_first_order(sol, scn, 1e-8);
  CHECK(clean.pass);
  CHECK(clean.gap <= 1e-8 * (1.0 + std::abs(sol.u_primal)));
  CHECK(clean.foc_sup_norm <= 1e-8);
  CHECK(clean.pairing_residual <= 1e-8);

  SUBCASE("perturbing consumption breaks stationarity") {
    Solution bad = sol;
    bad.ctilde.at(0) *= 1.01;
    DualityReport rep = verify_first_order(bad, scn, 1e-8);
    CHECK_FALSE(rep.pass);
    CHECK(rep.foc_sup_norm > 1e-6);
  }

  SUBCASE("perturbing a multiplier breaks the pairing") {
    Solution bad = sol;
    bad.lambda[0] *= 1.01;
    bad.y = 0.0;
    for (double l : bad.lambda) bad.y += l;
    bad.r.assign(1 + scn.num_endowments(), 0.0);
    for (size_t j = 0; j < bad.cuts.size(); ++j)
      bad.r[0] += bad.lambda[j] * bad.cuts[j].p0;
    DualityReport rep = verify_first_order(bad, scn, 1e-8);
    CHECK_FALSE(rep.pass);
    CHECK(rep.pairing_residual > 1e-6);
  }
}

TEST_CASE("replicability of terminal claims") {
  SUBCASE("constants replicate everywhere") {
    Scenario scn = ct::one_period(1.2, 0.9, 0.5, 0.05, 0.0);
    std::vector<double> claim(scn.tree.leaves().size(), 2.5);
    ReplicabilityReport rep = replicability_check(scn, claim, 1e-5);
    CHECK(rep.replicable);
    CHECK(rep.width <= 1e-9);
  }

  SUBCASE("price payoff does not replicate under costs") {
    Scenario scn = ct::one_period(1.2, 0.9, 0.5, 0.05, 0.0);
    std::vector<double> claim;
    for (int leaf : scn.tree.leaves())
      claim.push_back(scn.prices.at(leaf, 0));
    ReplicabilityReport rep = replicability_check(scn, claim, 1e-5);
    CHECK_FALSE(rep.replicable);
    CHECK(rep.width > 1e-3);
  }

  SUBCASE("frictionless complete market replicates everything") {
    Scenario scn = ct::one_period(1.2, 0.9, 0.5, 0.0, 0.0);
    std::vector<double> claim{0.7, 0.1};
    ReplicabilityReport rep = replicability_check(scn, claim, 0.0);
    CHECK(rep.replicable);
  }
}

TEST_CASE("domain rejection up front") {
  Scenario scn = ct::one_period(1.2, 0.9, 0.5, 0.05, 1e-5);
  scn.habit = HabitParams::constants(scn.tree, 1.0, 1.0, 1.0);
  scn.x = 1.0;  // subsistence costs exactly zT = 1
  Solution sol = solve_primal(scn);
  CHECK(sol.status == SolveStatus::domain_boundary);

  scn.x = 0.9;
  CHECK(solve_primal(scn).status == SolveStatus::domain_outside);

  // Barely interior inputs still solve, with tiny consumption.
  scn.x = 1.0 + 1e-6;
  Solution close = solve_primal(scn);
  REQUIRE(close.status == SolveStatus::ok);
  double worst = 0.0;
  for (int id = 0; id < scn.tree.num_nodes(); ++id)
    worst = std::max(worst, close.ctilde.at(id));
  CHECK(worst <= 1e-4);
}

TEST_CASE("monotonicity and concavity of the value") {
  Scenario base = ct::binomial(2, 1.0, 1.18, 0.88, 0.5, 0.05, 1e-5);
  base.habit = HabitParams::constants(base.tree, 0.5, 0.7, 0.2);

  SUBCASE("nondecreasing in wealth, midpoint above the chord") {
    std::vector<double> xs{1.0, 1.5, 2.0};
    std::vector<double> vals;
    for (double x : xs) {
      Scenario scn = base;
      scn.x = x;
      Solution sol = solve_primal(scn);
      REQUIRE(sol.status == SolveStatus::ok);
      vals.push_back(sol.u_primal);
    }
    CHECK(vals[0] <= vals[1] + 1e-9);
    CHECK(vals[1] <= vals[2] + 1e-9);
    CHECK(vals[1] >= 0.5 * (vals[0] + vals[2]) - 1e-8);
  }

  SUBCASE("nonincreasing in the initial habit") {
    double prev = kLpInfinity;
    for (double z : {0.0, 0.2, 0.4}) {
      Scenario scn = base;
      scn.habit.z = z;
      Solution sol = solve_primal(scn);
      REQUIRE(sol.status == SolveStatus::ok);
      CHECK(sol.u_primal <= prev + 1e-9);
      prev = sol.u_primal;
    }
  }

  SUBCASE("nonincreasing in the cost level") {
    double prev = kLpInfinity;
    for (double lam : {0.0, 0.05, 0.2}) {
      Scenario scn = base;
      scn.lambda = {0.0, lam, lam, 0.0};
      scn.tolerances.eps = lam == 0.0 ? 0.0 : 1e-5;
      Solution sol = solve_primal(scn);
      REQUIRE(sol.status == SolveStatus::ok);
      CHECK(sol.u_primal <= prev + 1e-8);
      prev = sol.u_primal;
    }
  }
}

TEST_CASE("solver output satisfies the financing test and positivity") {
  std::mt19937_64 rng(19);
  int done = 0;
  while (done < 8) {
    ct::RandomScenarioOptions opt;
    opt.max_periods = 3;
    opt.random_endowment = true;
    Scenario scn = ct::random_scenario(rng, opt);
    scn.tolerances.tol = 1e-9;
    Solution sol = solve_primal(scn);
    if (sol.status == SolveStatus::domain_outside ||
        sol.status == SolveStatus::domain_boundary ||
        sol.status == SolveStatus::no_price_system)
      continue;
    REQUIRE(sol.status == SolveStatus::ok);
    CHECK(sol.gap <= 1e-6 * (1.0 + std::abs(sol.u_primal)));
    CHECK(sol.gap >= -1e-8);

    double cmin = kLpInfinity, cmax = 0.0;
    for (int id = 0; id < scn.tree.num_nodes(); ++id) {
      cmin = std::min(cmin, sol.ctilde.at(id));
      cmax = std::max(cmax, sol.ctilde.at(id));
    }
    CHECK(cmin > 0.0);
    CHECK(cmin >= 1e-12 * cmax);

    BudgetCheck bc = budget_feasible(sol.c, scn, scn.tolerances.eps, 1e-7);
    CHECK(bc.feasible);
    AdaptedProcess scaled(scn.tree.num_nodes(), 1);
    for (int id = 0; id < scn.tree.num_nodes(); ++id)
      scaled.at(id) = sol.c.at(id) * 1.001;
    CHECK_FALSE(budget_feasible(scaled, scn, scn.tolerances.eps, 1e-7).feasible);
    ++done;
  }
}

TEST_CASE("cutting-plane optimum matches the vertex-enumeration reference") {
  std::mt19937_64 rng(29);
  int done = 0;
  while (done < 10) {
    Scenario scn = done % 2 == 0 ? ct::fork_scenario(rng) : [&] {
      ct::RandomScenarioOptions opt;
      opt.max_periods = 1;
      opt.random_endowment = true;
      Scenario s = ct::random_scenario(rng, opt);
      s.tolerances.tol = 1e-9;
      return s;
    }();
    DomainReport dom = effective_domain_check(scn, scn.tolerances.eps);
    if (dom.status != LpStatus::optimal || dom.cls != DomainClass::interior)
      continue;
    Solution sol = solve_primal(scn);
    if (sol.status != SolveStatus::ok) continue;
    ct::ReferenceOptimum oracle = ct::reference_optimum(scn);
    if (!oracle.ok) continue;
    CHECK(sol.u_primal == doctest::Approx(oracle.value).epsilon(1e-5));
    // The reference is a valid upper bound as well.
    CHECK(sol.u_primal <= oracle.value + 1e-6);
    ++done;
  }
}

TEST_CASE("two risky assets end to end") {
  // One period, three branches, flat costs on every exchange pair.
  std::vector<TreeNode> nodes(4);
  nodes[0] = {0, -1, 0, 1.0, {1, 2, 3}};
  nodes[1] = {1, 0, 1, 0.3, {}};
  nodes[2] = {2, 0, 1, 0.4, {}};
  nodes[3] = {3, 0, 1, 0.3, {}};
  Scenario scn;
  scn.tree = EventTree({0.0, 1.0}, nodes);
  scn.d = 2;
  scn.prices = AdaptedProcess(4, 2);
  scn.prices.at(0, 0) = 1.0;
  scn.prices.at(0, 1) = 2.0;
  const double s1[3] = {1.3, 1.0, 0.8};
  const double s2[3] = {2.2, 2.0, 1.7};
  for (int leaf = 1; leaf <= 3; ++leaf) {
    scn.prices.at(leaf, 0) = s1[leaf - 1];
    scn.prices.at(leaf, 1) = s2[leaf - 1];
  }
  scn.lambda.assign(9, 0.05);
  for (int i = 0; i < 3; ++i) scn.lambda[static_cast<size_t>(i) * 4] = 0.0;
  scn.habit = HabitParams::constants(scn.tree, 0.5, 0.8, 0.2);
  scn.utility.kind = UtilityKind::log_utility;
  scn.x = 1.0;
  scn.tolerances.eps = 1e-5;
  scn.tolerances.tol = 1e-9;

  ScpsSearch s = find_scps(scn, 1e-5);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(verify_price_system(s.system, scn, 1e-5).all_ok());

  Solution sol = solve_primal(scn);
  REQUIRE(sol.status == SolveStatus::ok);
  CHECK(sol.gap <= 1e-6 * (1.0 + std::abs(sol.u_primal)));
  CHECK(verify_first_order(sol, scn, 1e-8).pass);
  BudgetCheck bc = budget_feasible(sol.c, scn, 1e-5);
  CHECK(bc.feasible);

  // Basket superhedge is sublinear across the two legs.
  Claim basket = Claim::cash(scn, 0.0);
  for (auto& row : basket.terminal) {
    row[1] = 1.0;
    row[2] = 0.5;
  }
  const double pb = superhedge_price(scn, basket, 1e-5).price;
  const double p1 = superhedge_price(scn, Claim::one_share(scn, 1), 1e-5).price;
  Claim half2 = Claim::cash(scn, 0.0);
  for (auto& row : half2.terminal) row[2] = 0.5;
  const double p2 = superhedge_price(scn, half2, 1e-5).price;
  CHECK(pb <= p1 + p2 + 1e-9);
  CHECK(pb > 0.0);
}

TEST_CASE("cut budget exhaustion is reported honestly") {
  Scenario scn = ct::binomial(4, 1.0, 1.2, 0.9, 0.5, 0.05, 1e-5);
  scn.habit = HabitParams::constants(scn.tree, 0.0, 0.5, 0.3);
  scn.tolerances.tol = 1e-9;
  scn.tolerances.max_cuts = 1;
  Solution sol = solve_primal(scn);
  CHECK(sol.status == SolveStatus::max_cuts_exceeded);
  CHECK(sol.max_violation > scn.tolerances.tol);
  // The partial answer is still a valid restricted solution.
  CHECK(sol.cuts.size() == 1);
  CHECK(sol.u_primal == sol.u_primal);  // finite
}

TEST_CASE("integrability diagnostic of the decayed floor") {
  Scenario scn = ct::chain(4, 1.0);
  scn.habit = HabitParams::constants(scn.tree, 1.0, 0.0, 0.0);
  // log of a floor below one is negative; the diagnostic collects exactly
  // that mass: int_0^T -log(xbar e^{-t}) dt for xbar e^{-t} < 1.
  const double direct = [&] {
    double acc = 0.0;
    for (int k = 0; k < scn.tree.num_periods(); ++k) {
      const double t = scn.tree.time_at(k);
      acc += scn.tree.dt(k) * std::max(0.0, -std::log(0.5 * std::exp(-t)));
    }
    return acc;
  }();
  CHECK(integrability_diagnostic(scn, 0.5) ==
        doctest::Approx(direct).epsilon(1e-12));
  CHECK(integrability_diagnostic(scn, 100.0) == 0.0);
  CHECK_THROWS_AS(integrability_diagnostic(scn, -1.0), std::invalid_argument);
}
