#include "prisoners/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "prisoners/adversaries.hpp"

namespace prisoners {

namespace {

void only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ContractViolation(where + " must be a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ContractViolation("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ContractViolation(std::string("key '") + key + "' has the wrong type");
  }
}

std::string_view kind_name(PlanSource::Kind k) {
  switch (k) {
    case PlanSource::Kind::Random: return "random";
    case PlanSource::Kind::File: return "file";
    case PlanSource::Kind::Adversary: return "adversary";
  }
  return "";
}

std::ifstream open(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ContractViolation(std::string("cannot open ") + what + " '" + path + "'");
  return in;
}

}  // namespace

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json p = {{"source", kind_name(plan.kind)}};
  switch (plan.kind) {
    case PlanSource::Kind::Random:
      p["max_len"] = plan.max_len;
      if (plan.diameter) p["diameter"] = *plan.diameter;
      break;
    case PlanSource::Kind::File: p["path"] = plan.path; break;
    case PlanSource::Kind::Adversary:
      p["id"] = plan.adversary;
      p["cycles"] = plan.cycles;
      break;
  }
  nlohmann::json j = {{"variant", variant}, {"model", model}, {"plan", p}, {"horizon", horizon}, {"seed", seed}};
  if (allocation_file.empty()) {
    j["strategy"] = {{"id", strategy}, {"params", strategy_params}};
  } else {
    j["allocation_file"] = allocation_file;
  }
  if (entry_order) j["entry_order"] = *entry_order;
  if (!output.empty()) j["output"] = output;
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  only_keys(j, {"variant", "model", "strategy", "allocation_file", "plan", "horizon", "entry_order", "output", "seed"},
            "scenario");
  ScenarioConfig c;
  c.variant = get(j, "variant", c.variant);
  Variant::parse(c.variant);
  c.model = get(j, "model", c.model);
  c.allocation_file = get(j, "allocation_file", std::string());
  if (j.contains("strategy")) {
    if (!c.allocation_file.empty()) throw ContractViolation("give either a strategy or an allocation file");
    const auto& s = j.at("strategy");
    only_keys(s, {"id", "params"}, "strategy");
    c.strategy = get(s, "id", c.strategy);
    c.strategy_params = get(s, "params", nlohmann::json::object());
    if (!c.strategy_params.is_object()) throw ContractViolation("strategy params must be a JSON object");
  }
  if (j.contains("plan")) {
    const auto& p = j.at("plan");
    only_keys(p, {"source", "max_len", "diameter", "path", "id", "cycles"}, "plan");
    const auto src = get(p, "source", std::string("random"));
    if (src == "random") {
      c.plan.kind = PlanSource::Kind::Random;
      c.plan.max_len = get(p, "max_len", c.plan.max_len);
      if (p.contains("diameter")) c.plan.diameter = get<Index>(p, "diameter", 0);
    } else if (src == "file") {
      c.plan.kind = PlanSource::Kind::File;
      c.plan.path = get(p, "path", std::string());
      if (c.plan.path.empty()) throw ContractViolation("file plan needs a path");
    } else if (src == "adversary") {
      c.plan.kind = PlanSource::Kind::Adversary;
      c.plan.adversary = get(p, "id", std::string());
      c.plan.cycles = get(p, "cycles", c.plan.cycles);
    } else {
      throw ContractViolation("unknown plan source '" + src + "'");
    }
  }
  c.horizon = get(j, "horizon", c.horizon);
  if (j.contains("entry_order")) c.entry_order = get(j, "entry_order", std::vector<Index>());
  c.output = get(j, "output", std::string());
  c.seed = get(j, "seed", c.seed);
  return c;
}

ScenarioResult run_scenario(const ScenarioConfig& config, unsigned jobs) {
  const Variant variant = Variant::parse(config.variant);
  const PriceModel model =
      variant.prices == PriceRegime::FixedHarmonic ? PriceModel::harmonic() : PriceModel::from_spec(config.model);
  const bool informed = config.allocation_file.empty() && config.strategy == "cycle-informed";

  std::optional<Strategy> strategy;
  std::optional<AllocationPlan> alloc;
  if (!config.allocation_file.empty()) {
    auto in = open(config.allocation_file, "allocation file");
    alloc = AllocationPlan::parse(in);
  } else if (!informed) {
    strategy = build_from_json(config.strategy, config.strategy_params, model);
    alloc = strategy->alloc;
  }

  std::optional<CyclePlan> plan;
  std::optional<ClaimKind> claim;
  Index horizon = config.horizon;
  switch (config.plan.kind) {
    case PlanSource::Kind::Random: {
      if (horizon == 0) horizon = 1000;
      const Index max_len = config.plan.max_len;
      plan = config.plan.diameter ? random_plan_bounded_diameter(horizon, *config.plan.diameter, max_len, config.seed)
                                  : random_plan(horizon, max_len, config.seed);
      break;
    }
    case PlanSource::Kind::File: {
      auto in = open(config.plan.path, "plan file");
      plan = CyclePlan::parse(in);
      if (horizon == 0) {
        horizon = plan->prefix_horizon();
        for (const auto& c : plan->cycles()) horizon = std::max(horizon, c.max());
      }
      break;
    }
    case PlanSource::Kind::Adversary: {
      if (informed) throw ContractViolation("a cycle-informed strategy needs the plan before the adversary sees it");
      Adversary adv = make_adversary(config.plan.adversary, model, *alloc);
      adv.plan.pull(config.plan.cycles);
      if (horizon == 0) {
        for (const auto& c : adv.plan.cycles()) horizon = std::max(horizon, c.max());
      }
      claim = adv.claim;
      plan = std::move(adv.plan);
      break;
    }
  }
  if (const auto problems = validate_plan(*plan, horizon); !problems.empty()) {
    throw ContractViolation("invalid plan: " + problems.front());
  }
  if (informed) {
    strategy = build_from_json(config.strategy, config.strategy_params, model, &*plan);
    alloc = strategy->alloc;
  }

  SimulateOptions opts;
  opts.jobs = jobs;
  ScenarioResult out{simulate(variant, model, *alloc, *plan, horizon, config.entry_order, opts), false,
                     plan->to_text()};
  if (claim) {
    out.claimed = true;
    evaluate_release(variant, out.report, *claim);
  } else if (strategy && strategy->descriptor.pattern.kind != PatternKind::None) {
    out.claimed = true;
    evaluate_release(variant, out.report, strategy->descriptor);
  } else {
    out.report.verdict = Verdict::Inconclusive;
    out.report.note = "no claim to evaluate";
  }
  return out;
}

int exit_code(const ScenarioResult& result) {
  if (result.report.verdict == Verdict::PatternConfirmed) return 0;
  if (result.report.verdict == Verdict::Inconclusive && !result.claimed) return 0;
  return 1;
}

}  // namespace prisoners
