#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "prisoners/scenario.hpp"

using namespace prisoners;

namespace {

std::string temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("prisoners_" + name);
  std::ofstream(path) << text;
  return path.string();
}

std::vector<Index> successes(const SimulationReport& r) {
  std::vector<Index> out;
  for (const auto& o : r.outcomes) {
    if (o.success) out.push_back(o.prisoner);
  }
  return out;
}

}  // namespace

TEST_CASE("config round trip") {
  ScenarioConfig a;
  a.variant = "V1c";
  a.model = "inverse-square";
  a.strategy = "open-boxes";
  a.strategy_params = {{"k", 3}, {"total", "1/2"}};
  a.plan.max_len = 3;
  a.plan.diameter = 2;
  a.horizon = 40;
  a.entry_order = std::vector<Index>{3, 1, 2};
  a.output = "out.json";
  a.seed = 99;
  CHECK(ScenarioConfig::from_json(a.to_json()) == a);
  CHECK(ScenarioConfig::from_json(nlohmann::json::parse(a.to_json().dump())) == a);

  ScenarioConfig b;
  b.allocation_file = "alloc.txt";
  b.plan.kind = PlanSource::Kind::Adversary;
  b.plan.adversary = "two-cycle";
  b.plan.cycles = 7;
  CHECK(ScenarioConfig::from_json(b.to_json()) == b);

  ScenarioConfig c;
  c.plan.kind = PlanSource::Kind::File;
  c.plan.path = "plan.txt";
  CHECK(ScenarioConfig::from_json(c.to_json()) == c);
  CHECK(ScenarioConfig::from_json(nlohmann::json::object()) == ScenarioConfig{});
}

TEST_CASE("malformed configs") {
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"colour", 1}}), ContractViolation);
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"horizon", "ten"}}), ContractViolation);
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"plan", {{"source", "dice"}}}}), ContractViolation);
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"plan", {{"source", "file"}}}}), ContractViolation);
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"variant", "V3"}}), Error);
  CHECK_THROWS_AS(ScenarioConfig::from_json(nlohmann::json::array()), ContractViolation);
}

TEST_CASE("baseline on a random plan confirms") {
  ScenarioConfig c;
  c.seed = 5;
  const auto r = run_scenario(c, 2);
  CHECK(r.claimed);
  CHECK(r.report.verdict == Verdict::PatternConfirmed);
  CHECK(exit_code(r) == 0);
  CHECK(r.report.horizon == 1000);
  CHECK(run_scenario(c, 1).report.to_json().dump() == r.report.to_json().dump());
}

TEST_CASE("two-cycle adversary defeats the baseline under V1b") {
  ScenarioConfig c;
  c.variant = "V1b";
  c.plan.kind = PlanSource::Kind::Adversary;
  c.plan.adversary = "two-cycle";
  c.plan.cycles = 20;
  const auto r = run_scenario(c);
  CHECK(r.report.verdict == Verdict::CounterexampleFound);
  CHECK(r.report.witnesses.size() >= 20);
  CHECK(exit_code(r) == 1);
  CHECK(r.plan_text.find("# ") != std::string::npos);
}

TEST_CASE("plan and allocation files") {
  ScenarioConfig c;
  c.plan.kind = PlanSource::Kind::File;
  c.plan.path = temp_file("plan.txt", "1\n2 3\n4 5 6\n");
  const auto r = run_scenario(c);
  CHECK(r.report.horizon == 6);
  CHECK(successes(r.report) == std::vector<Index>{2, 4});
  CHECK(r.report.verdict == Verdict::PatternConfirmed);

  c.plan.path = temp_file("bad_plan.txt", "1 x\n");
  CHECK_THROWS_AS(run_scenario(c), ContractViolation);
  c.plan.path = temp_file("dup_plan.txt", "1 2\n2 3\n");
  CHECK_THROWS_AS(run_scenario(c), ContractViolation);
  c.plan.path = "/nonexistent/plan.txt";
  CHECK_THROWS_AS(run_scenario(c), ContractViolation);

  ScenarioConfig a;
  a.allocation_file = temp_file("alloc.txt", "1 1/2\n2 1/4\ntail geometric 1/2 from 3\n");
  a.horizon = 50;
  const auto ra = run_scenario(a);
  CHECK_FALSE(ra.claimed);
  CHECK(ra.report.verdict == Verdict::Inconclusive);
  CHECK(exit_code(ra) == 0);
}

TEST_CASE("disclosed cycles and entry order") {
  ScenarioConfig d;
  d.variant = "V1d";
  d.strategy = "cycle-informed";
  d.strategy_params = {{"k", 3}};
  d.plan.max_len = 3;
  d.horizon = 200;
  CHECK(exit_code(run_scenario(d)) == 0);
  d.plan.kind = PlanSource::Kind::Adversary;
  d.plan.adversary = "v1d-chooser";
  CHECK_THROWS_AS(run_scenario(d), ContractViolation);

  ScenarioConfig v;
  v.variant = "V1c";
  v.strategy = "open-boxes";
  v.strategy_params = {{"k", 2}};
  v.plan.kind = PlanSource::Kind::File;
  v.plan.path = temp_file("v1c_plan.txt", "1\n2\n3 4\n5 6\n");
  v.entry_order = std::vector<Index>{6, 5, 4, 3, 2, 1};
  const auto r = run_scenario(v);
  CHECK(r.report.outcomes.size() == 6);
  v.variant = "V1a";
  CHECK_THROWS_AS(run_scenario(v), ContractViolation);
}
