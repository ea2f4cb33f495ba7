#include "conetree/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace conetree {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& msg) { throw FileFormatError(msg); }

void check_version(const json& j) {
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kFileFormatVersion)
    bad("unsupported or missing file format version");
}

std::vector<double> lambda_from_json(const json& j, int d) {
  const int n = d + 1;
  std::vector<double> lam(static_cast<size_t>(n) * n, 0.0);
  if (j.is_number()) {
    const double v = j.get<double>();
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (i != k) lam[static_cast<size_t>(i) * n + k] = v;
  } else if (j.is_array()) {
    if (static_cast<int>(j.size()) != n) bad("lambda matrix must be (1+d)^2");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(j[i].size()) != n)
        bad("lambda matrix must be (1+d)^2");
      for (int k = 0; k < n; ++k)
        lam[static_cast<size_t>(i) * n + k] = j[i][k].get<double>();
    }
  } else {
    bad("lambda must be a scalar or a matrix");
  }
  return lam;
}

AdaptedProcess rate_from_json(const json& j, const EventTree& tree) {
  if (j.is_number())
    return AdaptedProcess::constant(tree, j.get<double>());
  if (!j.is_array()) bad("habit rate must be a scalar or an array");
  std::vector<double> vals = j.get<std::vector<double>>();
  const int m = tree.num_periods();
  if (static_cast<int>(vals.size()) == tree.num_nodes() &&
      tree.num_nodes() != m + 1) {
    AdaptedProcess p(tree.num_nodes(), 1);
    for (int id = 0; id < tree.num_nodes(); ++id) p.at(id) = vals[id];
    return p;
  }
  if (static_cast<int>(vals.size()) == m ||
      static_cast<int>(vals.size()) == m + 1) {
    AdaptedProcess p(tree.num_nodes(), 1);
    for (int id = 0; id < tree.num_nodes(); ++id) {
      const size_t k = static_cast<size_t>(tree.node(id).time_index);
      p.at(id) = vals[std::min(k, vals.size() - 1)];
    }
    return p;
  }
  bad("habit rate array must have M, M+1 or num_nodes entries");
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  try {
    check_version(j);
    Scenario scn;
    std::vector<double> times = j.at("times").get<std::vector<double>>();

    std::vector<TreeNode> nodes;
    for (const auto& nj : j.at("tree").at("nodes")) {
      TreeNode n;
      n.id = nj.at("id").get<int>();
      n.parent = nj.value("parent", -1);
      n.time_index = nj.at("time_index").get<int>();
      n.prob = nj.value("prob", 1.0);
      nodes.push_back(n);
    }
    for (const TreeNode& n : nodes)
      if (n.parent >= 0) {
        if (n.parent >= static_cast<int>(nodes.size()))
          bad("node " + std::to_string(n.id) + ": parent id unresolved");
        nodes[n.parent].children.push_back(n.id);
      }
    scn.tree = EventTree(times, nodes);

    const auto& assets = j.at("assets");
    scn.d = assets.at("d").get<int>();
    const auto& prices = assets.at("prices");
    if (static_cast<int>(prices.size()) != scn.tree.num_nodes())
      bad("prices must list one row per node");
    scn.prices = AdaptedProcess(scn.tree.num_nodes(), scn.d);
    for (int id = 0; id < scn.tree.num_nodes(); ++id) {
      if (static_cast<int>(prices[id].size()) != scn.d)
        bad("price row width must equal d");
      for (int i = 0; i < scn.d; ++i)
        scn.prices.at(id, i) = prices[id][i].get<double>();
    }

    scn.lambda = lambda_from_json(j.at("lambda"), scn.d);

    const auto& hj = j.at("habit");
    scn.habit.alpha = rate_from_json(hj.at("alpha"), scn.tree);
    scn.habit.delta = rate_from_json(hj.at("delta"), scn.tree);
    scn.habit.z = hj.at("z").get<double>();

    const auto& uj = j.at("utility");
    const std::string kind = uj.at("kind").get<std::string>();
    if (kind == "log") {
      scn.utility.kind = UtilityKind::log_utility;
    } else if (kind == "power") {
      scn.utility.kind = UtilityKind::power;
      scn.utility.p = uj.at("p").get<double>();
    } else {
      bad("utility kind must be log or power");
    }
    if (uj.contains("discount"))
      scn.utility.discount = uj["discount"].get<std::vector<double>>();

    scn.x = j.at("x").get<double>();

    if (j.contains("endowments")) {
      const auto& ej = j["endowments"];
      scn.q = ej.at("q").get<std::vector<double>>();
      for (const auto& row : ej.at("payoffs"))
        scn.endowment_payoffs.push_back(row.get<std::vector<double>>());
    }

    if (j.contains("tolerances")) {
      const auto& tj = j["tolerances"];
      scn.tolerances.eps = tj.value("eps", scn.tolerances.eps);
      scn.tolerances.tol = tj.value("tol", scn.tolerances.tol);
      scn.tolerances.max_cuts = tj.value("max_cuts", scn.tolerances.max_cuts);
    }

    scn.validate();
    return scn;
  } catch (const FileFormatError&) {
    throw;
  } catch (const std::exception& e) {
    bad(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    bad(std::string("scenario parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

ordered_json scenario_to_json(const Scenario& scn) {
  ordered_json j;
  j["version"] = kFileFormatVersion;
  j["times"] = scn.tree.times();
  ordered_json nodes = ordered_json::array();
  for (int id = 0; id < scn.tree.num_nodes(); ++id) {
    const TreeNode& n = scn.tree.node(id);
    ordered_json nj;
    nj["id"] = n.id;
    nj["parent"] = n.parent;
    nj["prob"] = n.prob;
    nj["time_index"] = n.time_index;
    nodes.push_back(nj);
  }
  j["tree"]["nodes"] = nodes;
  j["assets"]["d"] = scn.d;
  ordered_json prices = ordered_json::array();
  for (int id = 0; id < scn.tree.num_nodes(); ++id) {
    ordered_json row = ordered_json::array();
    for (int i = 0; i < scn.d; ++i) row.push_back(scn.prices.at(id, i));
    prices.push_back(row);
  }
  j["assets"]["prices"] = prices;
  {
    const int n = scn.d + 1;
    ordered_json lam = ordered_json::array();
    for (int i = 0; i < n; ++i) {
      ordered_json row = ordered_json::array();
      for (int k = 0; k < n; ++k)
        row.push_back(scn.lambda[static_cast<size_t>(i) * n + k]);
      lam.push_back(row);
    }
    j["lambda"] = lam;
  }
  {
    ordered_json hj;
    ordered_json alpha = ordered_json::array(), delta = ordered_json::array();
    for (int id = 0; id < scn.tree.num_nodes(); ++id) {
      alpha.push_back(scn.habit.alpha.at(id));
      delta.push_back(scn.habit.delta.at(id));
    }
    hj["alpha"] = alpha;
    hj["delta"] = delta;
    hj["z"] = scn.habit.z;
    j["habit"] = hj;
  }
  {
    ordered_json uj;
    uj["kind"] = to_string(scn.utility.kind);
    if (scn.utility.kind == UtilityKind::power) uj["p"] = scn.utility.p;
    if (!scn.utility.discount.empty()) uj["discount"] = scn.utility.discount;
    j["utility"] = uj;
  }
  j["x"] = scn.x;
  if (!scn.q.empty()) {
    j["endowments"]["q"] = scn.q;
    j["endowments"]["payoffs"] = scn.endowment_payoffs;
  }
  j["tolerances"]["eps"] = scn.tolerances.eps;
  j["tolerances"]["tol"] = scn.tolerances.tol;
  j["tolerances"]["max_cuts"] = scn.tolerances.max_cuts;
  return j;
}

void save_scenario_file(const Scenario& scn, const std::string& path) {
  write_text_file(path, scenario_to_json(scn).dump(2) + "\n");
}

Claim claim_from_json(const json& j, const Scenario& scn) {
  if (j.contains("cash")) return Claim::cash(scn, j["cash"].get<double>());
  if (j.contains("share")) return Claim::one_share(scn, j["share"].get<int>());
  if (j.contains("call"))
    return Claim::call(scn, j["call"].value("asset", 1),
                       j["call"].at("strike").get<double>());
  if (j.contains("terminal")) {
    Claim c;
    for (const auto& row : j["terminal"])
      c.terminal.push_back(row.get<std::vector<double>>());
    if (c.terminal.size() != scn.tree.leaves().size())
      bad("claim: one terminal row per leaf required");
    for (const auto& row : c.terminal)
      if (static_cast<int>(row.size()) != scn.d + 1)
        bad("claim: terminal rows must have 1+d entries");
    return c;
  }
  bad("claim: expected cash, share, call or terminal");
}

ordered_json process_to_json(const AdaptedProcess& p) {
  ordered_json out = ordered_json::array();
  for (int id = 0; id < p.num_nodes(); ++id) {
    if (p.dim() == 1) {
      out.push_back(p.at(id));
    } else {
      ordered_json row = ordered_json::array();
      for (int i = 0; i < p.dim(); ++i) row.push_back(p.at(id, i));
      out.push_back(row);
    }
  }
  return out;
}

AdaptedProcess process_from_json(const json& j, int num_nodes, int dim) {
  if (static_cast<int>(j.size()) != num_nodes)
    bad("process: one entry per node required");
  AdaptedProcess p(num_nodes, dim);
  for (int id = 0; id < num_nodes; ++id) {
    if (dim == 1) {
      p.at(id) = j[id].get<double>();
    } else {
      for (int i = 0; i < dim; ++i) p.at(id, i) = j[id][i].get<double>();
    }
  }
  return p;
}

ordered_json solution_to_json(const Solution& sol, const Scenario& scn) {
  ordered_json j;
  j["version"] = kFileFormatVersion;
  j["status"] = to_string(sol.status);
  j["u_primal"] = sol.u_primal;
  j["v_dual"] = sol.v_dual;
  j["gap"] = sol.gap;
  j["y"] = sol.y;
  j["r"] = sol.r;
  j["lambda"] = sol.lambda;
  j["max_violation"] = sol.max_violation;
  j["cut_rounds"] = sol.cut_rounds;
  j["inner_iterations"] = sol.inner_iterations;
  j["endowment_replicable_warning"] = sol.endowment_replicable_warning;
  j["domain"]["class"] = to_string(sol.domain.cls);
  j["domain"]["min_value"] = sol.domain.min_value;
  j["ctilde"] = process_to_json(sol.ctilde);
  j["c"] = process_to_json(sol.c);
  j["habit"] = process_to_json(sol.habit);
  j["gamma_star"] = process_to_json(sol.gamma_star);
  ordered_json cuts = ordered_json::array();
  for (const Cut& c : sol.cuts) {
    ordered_json cj;
    cj["p0"] = c.p0;
    cj["p"] = c.p;
    cj["bound"] = c.bound;
    cj["gamma"] = process_to_json(c.gamma);
    cj["z"] = process_to_json(c.system.z);
    cuts.push_back(cj);
  }
  j["cuts"] = cuts;
  (void)scn;
  return j;
}

Solution solution_from_json(const json& j, const Scenario& scn) {
  try {
    check_version(j);
    Solution sol;
    sol.status = SolveStatus::ok;
    const int nn = scn.tree.num_nodes();
    sol.u_primal = j.at("u_primal").get<double>();
    sol.v_dual = j.at("v_dual").get<double>();
    sol.gap = j.at("gap").get<double>();
    sol.y = j.at("y").get<double>();
    sol.r = j.at("r").get<std::vector<double>>();
    sol.lambda = j.at("lambda").get<std::vector<double>>();
    sol.max_violation = j.value("max_violation", 0.0);
    sol.ctilde = process_from_json(j.at("ctilde"), nn, 1);
    sol.c = process_from_json(j.at("c"), nn, 1);
    sol.habit = process_from_json(j.at("habit"), nn, 1);
    sol.gamma_star = process_from_json(j.at("gamma_star"), nn, 1);
    for (const auto& cj : j.at("cuts")) {
      Cut c;
      c.p0 = cj.at("p0").get<double>();
      c.p = cj.at("p").get<std::vector<double>>();
      c.bound = cj.at("bound").get<double>();
      c.gamma = process_from_json(cj.at("gamma"), nn, 1);
      c.system.z = process_from_json(cj.at("z"), nn, scn.d + 1);
      sol.cuts.push_back(std::move(c));
    }
    return sol;
  } catch (const FileFormatError&) {
    throw;
  } catch (const std::exception& e) {
    bad(std::string("solution: ") + e.what());
  }
}

ordered_json duality_to_json(const DualityReport& rep) {
  ordered_json j;
  j["gap"] = rep.gap;
  j["foc_sup_norm"] = rep.foc_sup_norm;
  j["pairing_residual"] = rep.pairing_residual;
  j["worst_cut_violation"] = rep.worst_cut_violation;
  j["complementary_slackness"] = rep.complementary_slackness;
  j["cut_slacks"] = rep.cut_slacks;
  j["cut_cs"] = rep.cut_cs;
  j["cut_count"] = rep.cut_count;
  j["active_cuts"] = rep.active_cuts;
  j["single_cut_representation"] = rep.single_cut_representation;
  j["pass"] = rep.pass;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad("cannot write file " + path);
  out << content;
}

std::string solution_csv(const Solution& sol, const Scenario& scn) {
  std::ostringstream os;
  os.precision(17);
  os << "node_id,time_index,t,prob,ctilde,c,habit,gamma\n";
  const EventTree& tree = scn.tree;
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const TreeNode& n = tree.node(id);
    os << id << ',' << n.time_index << ',' << tree.time_at(n.time_index) << ','
       << tree.node_probability(id) << ',' << sol.ctilde.at(id) << ','
       << sol.c.at(id) << ',' << sol.habit.at(id) << ','
       << sol.gamma_star.at(id) << '\n';
  }
  return os.str();
}

std::string price_system_csv(const PriceSystem& ps, const EventTree& tree) {
  std::ostringstream os;
  os.precision(17);
  os << "node_id,time_index,t";
  for (int i = 0; i < ps.z.dim(); ++i) os << ",z" << i;
  os << '\n';
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const TreeNode& n = tree.node(id);
    os << id << ',' << n.time_index << ',' << tree.time_at(n.time_index);
    for (int i = 0; i < ps.z.dim(); ++i) os << ',' << ps.z.at(id, i);
    os << '\n';
  }
  return os.str();
}

}  // namespace conetree
