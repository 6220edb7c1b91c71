#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prisoners/engine.hpp"

namespace prisoners {

struct PlanSource {
  enum class Kind { Random, File, Adversary };
  Kind kind = Kind::Random;
  /// Random: cycle lengths <= max_len, optional diameter bound.
  Index max_len = 10;
  std::optional<Index> diameter;
  /// File: plan text path.
  std::string path;
  /// Adversary: registry id and number of cycles to pull.
  std::string adversary;
  std::size_t cycles = 40;

  friend bool operator==(const PlanSource&, const PlanSource&) = default;
};

struct ScenarioConfig {
  std::string variant = "V1a";
  std::string model = "geometric";
  /// Builder id with its JSON parameters; ignored when allocation_file is set.
  std::string strategy = "baseline";
  nlohmann::json strategy_params = nlohmann::json::object();
  std::string allocation_file;
  PlanSource plan;
  /// 0 picks one from the plan: 1000 for random plans, the largest member otherwise.
  Index horizon = 0;
  std::optional<std::vector<Index>> entry_order;
  std::string output;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  /// Unknown keys or ill-typed values raise ContractViolation.
  static ScenarioConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct ScenarioResult {
  SimulationReport report;
  /// Whether a strategy pattern or adversary claim was evaluated.
  bool claimed = false;
  /// The plan as simulated, in plan text format.
  std::string plan_text;
};

/// Builds the allocation and plan, simulates, and evaluates the adversary's
/// claim (adversary plans) or the strategy's pattern.
ScenarioResult run_scenario(const ScenarioConfig& config, unsigned jobs = 1);

/// 0 when the claim is confirmed or nothing was claimed, 1 otherwise.
int exit_code(const ScenarioResult& result);

}  // namespace prisoners
