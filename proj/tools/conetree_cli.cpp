// Command-line front end: scenario files in, machine-readable result files
// out. Exit codes are part of the contract: 0 success, 1 malformed input,
// 2 domain or assumption rejection, 3 solver failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "conetree/closed_form.hpp"
#include "conetree/cps.hpp"
#include "conetree/scenario_io.hpp"
#include "conetree/solver.hpp"
#include "conetree/superhedge.hpp"

namespace {

using conetree::Scenario;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitDomain = 2;
constexpr int kExitSolver = 3;

struct CommonOpts {
  std::optional<double> eps;
  std::optional<double> tol;
  std::optional<int> max_cuts;
  std::string out;
  std::string csv_out;
  unsigned long seed = 12345;
  bool eps_ladder = false;
  bool timing = false;
};

void apply_overrides(Scenario& scn, const CommonOpts& o) {
  if (o.eps) scn.tolerances.eps = *o.eps;
  if (o.tol) scn.tolerances.tol = *o.tol;
  if (o.max_cuts) scn.tolerances.max_cuts = *o.max_cuts;
}

std::string default_out(const std::string& scenario_path,
                        const std::string& suffix) {
  std::string base = scenario_path;
  const size_t dot = base.rfind(".json");
  if (dot != std::string::npos) base = base.substr(0, dot);
  return base + suffix;
}

ordered_json command_echo(const std::string& name,
                          const std::string& scenario_path) {
  ordered_json j;
  j["command"] = name;
  j["scenario"] = scenario_path;
  return j;
}

void emit(ordered_json& j, const CommonOpts& o, const std::string& path,
          std::chrono::steady_clock::time_point started) {
  if (o.timing) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    j["timing"]["wall_ms"] = static_cast<long>(ms);
  }
  conetree::write_text_file(path, j.dump(2) + "\n");
  std::cout << path << "\n";
}

int cmd_solve(const std::string& scenario_path, const CommonOpts& o) {
  const auto started = std::chrono::steady_clock::now();
  Scenario scn = conetree::load_scenario_file(scenario_path);
  apply_overrides(scn, o);

  conetree::Solution sol = conetree::solve_primal(scn);
  ordered_json j = command_echo("solve", scenario_path);
  j["result"] = conetree::solution_to_json(sol, scn);
  if (sol.status == conetree::SolveStatus::ok) {
    conetree::DualityReport rep =
        conetree::verify_first_order(sol, scn, scn.tolerances.tol * 100);
    j["duality"] = conetree::duality_to_json(rep);
    conetree::BudgetCheck bc =
        conetree::budget_feasible(sol.c, scn, scn.tolerances.eps);
    j["budget"]["feasible"] = bc.feasible;
    j["budget"]["slack"] = bc.slack;
  } else if (sol.status == conetree::SolveStatus::domain_boundary ||
             sol.status == conetree::SolveStatus::domain_outside) {
    j["domain_certificate"] =
        conetree::process_to_json(sol.domain.certificate.z);
    const std::string path =
        o.out.empty() ? default_out(scenario_path, ".results.json") : o.out;
    ordered_json jj = j;
    emit(jj, o, path, started);
    return kExitDomain;
  } else {
    const std::string path =
        o.out.empty() ? default_out(scenario_path, ".results.json") : o.out;
    ordered_json jj = j;
    emit(jj, o, path, started);
    return kExitSolver;
  }
  if (!o.csv_out.empty()) {
    conetree::write_text_file(o.csv_out, conetree::solution_csv(sol, scn));
    j["csv"] = o.csv_out;
  }
  const std::string path =
      o.out.empty() ? default_out(scenario_path, ".results.json") : o.out;
  emit(j, o, path, started);
  return kExitOk;
}

int cmd_price(const std::string& scenario_path, const std::string& claim_spec,
              const CommonOpts& o) {
  const auto started = std::chrono::steady_clock::now();
  Scenario scn = conetree::load_scenario_file(scenario_path);
  apply_overrides(scn, o);
  nlohmann::json cj;
  try {
    cj = nlohmann::json::parse(claim_spec);
  } catch (const std::exception& e) {
    throw conetree::FileFormatError(std::string("claim: ") + e.what());
  }
  conetree::Claim claim = conetree::claim_from_json(cj, scn);

  conetree::HedgePrice hp =
      conetree::superhedge_price(scn, claim, scn.tolerances.eps);
  if (hp.status != conetree::LpStatus::optimal) return kExitSolver;

  ordered_json j = command_echo("price", scenario_path);
  j["claim"] = cj;
  j["eps"] = scn.tolerances.eps;
  j["price"] = hp.price;
  j["certificate"] = conetree::process_to_json(hp.certificate.z);
  if (!o.csv_out.empty()) {
    conetree::write_text_file(
        o.csv_out, conetree::price_system_csv(hp.certificate, scn.tree));
    j["csv"] = o.csv_out;
  }
  if (o.eps_ladder) {
    ordered_json ladder = ordered_json::array();
    for (double e : {1e-3, 1e-4, 1e-5}) {
      conetree::HedgePrice step = conetree::superhedge_price(scn, claim, e);
      ordered_json lj;
      lj["eps"] = e;
      lj["price"] = step.price;
      lj["status"] = step.status == conetree::LpStatus::optimal ? "optimal"
                                                                : "infeasible";
      ladder.push_back(lj);
    }
    j["eps_ladder"] = ladder;
  }
  const std::string path =
      o.out.empty() ? default_out(scenario_path, ".price.json") : o.out;
  emit(j, o, path, started);
  return kExitOk;
}

int cmd_verify(const std::string& scenario_path,
               const std::string& solution_path, const CommonOpts& o) {
  Scenario scn = conetree::load_scenario_file(scenario_path);
  apply_overrides(scn, o);
  std::ifstream in(solution_path);
  if (!in) throw conetree::FileFormatError("cannot open " + solution_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw conetree::FileFormatError(std::string("solution parse: ") + e.what());
  }
  const nlohmann::json& body = j.contains("result") ? j["result"] : j;
  conetree::Solution sol = conetree::solution_from_json(body, scn);

  conetree::DualityReport rep =
      conetree::verify_first_order(sol, scn, scn.tolerances.tol * 100);
  conetree::BudgetCheck bc =
      conetree::budget_feasible(sol.c, scn, scn.tolerances.eps);
  ordered_json out = command_echo("verify", scenario_path);
  out["duality"] = conetree::duality_to_json(rep);
  out["budget_feasible"] = bc.feasible;
  const bool pass = rep.pass && bc.feasible;
  out["pass"] = pass;
  std::cout << out.dump(2) << "\n";
  return pass ? kExitOk : kExitSolver;
}

int cmd_closed_form(const std::string& scenario_path, const CommonOpts& o) {
  const auto started = std::chrono::steady_clock::now();
  Scenario scn = conetree::load_scenario_file(scenario_path);
  apply_overrides(scn, o);
  if (scn.utility.kind != conetree::UtilityKind::log_utility)
    return kExitDomain;
  for (int id = 0; id < scn.tree.num_nodes(); ++id) {
    if (scn.habit.alpha.at(id) != scn.habit.alpha.at(0) ||
        scn.habit.delta.at(id) != scn.habit.delta.at(0))
      return kExitDomain;
  }

  conetree::Solution sol = conetree::solve_primal(scn);
  if (sol.status != conetree::SolveStatus::ok) return kExitSolver;

  // The policy martingale is the mixture density normalized to unit mass.
  conetree::LogPolicyInputs in;
  in.y = sol.y;
  in.r = sol.r;
  in.ystar = conetree::AdaptedProcess(scn.tree.num_nodes(), 1);
  const conetree::AdaptedProcess g =
      conetree::numeraire_path(scn.tree, scn.habit);
  for (int id = 0; id < scn.tree.num_nodes(); ++id)
    in.ystar.at(id) = sol.gamma_star.at(id) / (sol.y * g.at(id));

  conetree::LogPolicy policy = conetree::log_policy(scn, in);
  conetree::PolicyPropertyReport props =
      conetree::check_policy_properties(scn, policy, in.ystar);

  ordered_json j = command_echo("closed-form", scenario_path);
  j["initial_consumption"] = policy.c.at(scn.tree.root());
  j["formula_initial_consumption"] = conetree::initial_consumption(
      scn.habit.delta.at(0), scn.habit.alpha.at(0), scn.habit.z,
      scn.tree.horizon());
  j["properties"]["habit_monotone_violation"] = props.habit_monotone_violation;
  j["properties"]["submartingale_min_residual"] =
      props.submartingale_min_residual;
  j["properties"]["martingale_abs_residual"] = props.martingale_abs_residual;
  j["properties"]["ratcheting_ratio"] = props.ratcheting_ratio;
  j["c"] = conetree::process_to_json(policy.c);
  j["habit"] = conetree::process_to_json(policy.habit);
  j["ctilde"] = conetree::process_to_json(policy.ctilde);
  if (!o.csv_out.empty()) {
    std::ostringstream os;
    os.precision(17);
    os << "node_id,t,c,habit,c_times_y\n";
    for (int id = 0; id < scn.tree.num_nodes(); ++id) {
      os << id << ',' << scn.tree.time_at(scn.tree.node(id).time_index) << ','
         << policy.c.at(id) << ',' << policy.habit.at(id) << ','
         << policy.c.at(id) * in.ystar.at(id) << '\n';
    }
    conetree::write_text_file(o.csv_out, os.str());
    j["csv"] = o.csv_out;
  }
  const std::string path =
      o.out.empty() ? default_out(scenario_path, ".closed_form.json") : o.out;
  emit(j, o, path, started);
  return kExitOk;
}

int cmd_isomorphize(const std::string& scenario_path, const CommonOpts& o) {
  const auto started = std::chrono::steady_clock::now();
  Scenario scn = conetree::load_scenario_file(scenario_path);
  apply_overrides(scn, o);
  if (!scn.habit.drift_is_deterministic(scn.tree)) return kExitDomain;

  conetree::IsomorphicScenario iso = conetree::build_isomorphic_scenario(scn);
  const std::string transformed_path =
      o.out.empty() ? default_out(scenario_path, ".isomorphic.json") : o.out;
  conetree::save_scenario_file(iso.transformed, transformed_path);

  conetree::IsomorphismReport rep =
      conetree::verify_isomorphism(scn, std::max(scn.tolerances.tol, 1e-6));
  ordered_json j = command_echo("isomorphize", scenario_path);
  j["branch"] = conetree::to_string(iso.branch);
  j["log_offset"] = iso.log_offset;
  j["endowment_shift"] = iso.endowment_shift;
  j["transformed_scenario"] = transformed_path;
  j["back_map"]["max_consumption_diff"] = rep.max_consumption_diff;
  j["back_map"]["value_residual"] = rep.value_residual;
  j["back_map"]["pass"] = rep.pass;
  const std::string report_path =
      default_out(scenario_path, ".isomorphism_report.json");
  emit(j, o, report_path, started);
  return rep.pass ? kExitOk : kExitSolver;
}

int cmd_domain_check(const std::string& scenario_path, const CommonOpts& o) {
  const auto started = std::chrono::steady_clock::now();
  Scenario scn = conetree::load_scenario_file(scenario_path);
  apply_overrides(scn, o);
  conetree::DomainReport rep =
      conetree::effective_domain_check(scn, scn.tolerances.eps);
  ordered_json j = command_echo("domain-check", scenario_path);
  if (rep.status != conetree::LpStatus::optimal) {
    j["class"] = "no_price_system";
    const std::string path =
        o.out.empty() ? default_out(scenario_path, ".domain.json") : o.out;
    emit(j, o, path, started);
    return kExitSolver;
  }
  j["class"] = conetree::to_string(rep.cls);
  j["min_value"] = rep.min_value;
  j["certificate"] = conetree::process_to_json(rep.certificate.z);
  const std::string path =
      o.out.empty() ? default_out(scenario_path, ".domain.json") : o.out;
  emit(j, o, path, started);
  return rep.cls == conetree::DomainClass::interior ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-tree consumption optimizer under proportional "
               "transaction costs"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string scenario_path, solution_path, claim_spec;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--eps", opts.eps, "interior margin override");
    cmd->add_option("--tol", opts.tol, "solver tolerance override");
    cmd->add_option("--max-cuts", opts.max_cuts, "cut budget override");
    cmd->add_option("--out", opts.out, "output file path");
    cmd->add_option("--csv-out", opts.csv_out, "per-node CSV export path");
    cmd->add_option("--seed", opts.seed, "seed for sampled diagnostics");
    cmd->add_flag("--eps-ladder", opts.eps_ladder,
                  "evaluate at eps in {1e-3,1e-4,1e-5} and report the trend");
    cmd->add_flag("--timing", opts.timing, "include wall-clock in the output");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve a scenario");
  solve->add_option("scenario", scenario_path)->required();
  add_common(solve);

  CLI::App* price = app.add_subcommand("price", "superhedging price");
  price->add_option("scenario", scenario_path)->required();
  price->add_option("--claim", claim_spec, "claim spec (JSON)")->required();
  add_common(price);

  CLI::App* verify = app.add_subcommand("verify", "re-check a stored solution");
  verify->add_option("scenario", scenario_path)->required();
  verify->add_option("solution", solution_path)->required();
  add_common(verify);

  CLI::App* closed = app.add_subcommand("closed-form", "explicit log policy");
  closed->add_option("scenario", scenario_path)->required();
  add_common(closed);

  CLI::App* iso = app.add_subcommand("isomorphize",
                                     "emit the habit-free twin scenario");
  iso->add_option("scenario", scenario_path)->required();
  add_common(iso);

  CLI::App* dom = app.add_subcommand("domain-check", "classify (x, q, z)");
  dom->add_option("scenario", scenario_path)->required();
  add_common(dom);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(scenario_path, opts);
    if (price->parsed()) return cmd_price(scenario_path, claim_spec, opts);
    if (verify->parsed())
      return cmd_verify(scenario_path, solution_path, opts);
    if (closed->parsed()) return cmd_closed_form(scenario_path, opts);
    if (iso->parsed()) return cmd_isomorphize(scenario_path, opts);
    if (dom->parsed()) return cmd_domain_check(scenario_path, opts);
  } catch (const conetree::FileFormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitParse;
}
