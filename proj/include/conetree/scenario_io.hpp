#pragma once

#include <string>

#include <json.hpp>

#include "conetree/scenario.hpp"
#include "conetree/solver.hpp"
#include "conetree/superhedge.hpp"

namespace conetree {

inline constexpr int kFileFormatVersion = 1;

/// Raised on malformed or version-incompatible files; the CLI maps it to a
/// dedicated exit code.
struct FileFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario_file(const std::string& path);

nlohmann::ordered_json scenario_to_json(const Scenario& scn);
void save_scenario_file(const Scenario& scn, const std::string& path);

/// Claim specs: {"cash": k}, {"share": i}, {"call": {"asset": i, "strike": K}}
/// or {"terminal": [[...1+d...] per leaf]}.
Claim claim_from_json(const nlohmann::json& j, const Scenario& scn);

nlohmann::ordered_json solution_to_json(const Solution& sol,
                                        const Scenario& scn);
Solution solution_from_json(const nlohmann::json& j, const Scenario& scn);

nlohmann::ordered_json duality_to_json(const DualityReport& rep);

nlohmann::ordered_json process_to_json(const AdaptedProcess& p);
AdaptedProcess process_from_json(const nlohmann::json& j, int num_nodes,
                                 int dim);

void write_text_file(const std::string& path, const std::string& content);

/// Per-node policy export: node id, time index, time, probability, plan
/// columns. Fixed column order, one row per node.
std::string solution_csv(const Solution& sol, const Scenario& scn);
std::string price_system_csv(const PriceSystem& ps, const EventTree& tree);

}  // namespace conetree
