#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "prisoners/adversaries.hpp"
#include "prisoners/analyzer.hpp"
#include "prisoners/scenario.hpp"
#include "prisoners/verify.hpp"

using namespace prisoners;

namespace {

constexpr int kUsage = 2;

struct Common {
  std::string variant, model, strategy, params, alloc, plan, out, entry, config;
  Index horizon = 0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ContractViolation("cannot write '" + path + "'");
  f << text;
}

nlohmann::json parse_json(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string(what) + ": " + e.what());
  }
}

// "random[:max_len[:diameter]]", "file:PATH" or "adversary:ID[:cycles]".
PlanSource parse_plan(const std::string& spec) {
  PlanSource p;
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon), rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used == s.size()) return static_cast<Index>(v);
    } catch (const std::exception&) {
    }
    throw ContractViolation("bad number '" + s + "' in plan spec '" + spec + "'");
  };
  if (head == "random") {
    if (!rest.empty()) {
      const auto c2 = rest.find(':');
      p.max_len = number(rest.substr(0, c2));
      if (c2 != std::string::npos) p.diameter = number(rest.substr(c2 + 1));
    }
  } else if (head == "file" && !rest.empty()) {
    p.kind = PlanSource::Kind::File;
    p.path = rest;
  } else if (head == "adversary" && !rest.empty()) {
    p.kind = PlanSource::Kind::Adversary;
    const auto c2 = rest.find(':');
    p.adversary = rest.substr(0, c2);
    if (c2 != std::string::npos) p.cycles = number(rest.substr(c2 + 1));
  } else {
    throw ContractViolation("bad plan spec '" + spec + "'");
  }
  return p;
}

std::vector<Index> parse_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw ContractViolation("bad entry order item '" + tok + "'");
    }
  }
  return out;
}

// key=value pairs; integers and booleans keep their type, JSON arrays and
// objects are parsed, anything else stays a string.
nlohmann::json parse_params(const std::vector<std::string>& items) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos || eq == 0) throw ContractViolation("parameter '" + it + "' is not key=value");
    const std::string key = it.substr(0, eq), v = it.substr(eq + 1);
    if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) {
      j[key] = std::stoull(v);
    } else if (v == "true" || v == "false") {
      j[key] = v == "true";
    } else if (!v.empty() && (v.front() == '[' || v.front() == '{')) {
      j[key] = parse_json(v, "parameter value");
    } else {
      j[key] = v;
    }
  }
  return j;
}

AllocationPlan allocation_for(const Common& c, const PriceModel& model) {
  if (!c.alloc.empty()) {
    std::ifstream in(c.alloc);
    if (!in) throw ContractViolation("cannot open allocation file '" + c.alloc + "'");
    return AllocationPlan::parse(in);
  }
  const auto params = c.params.empty() ? nlohmann::json::object() : parse_json(c.params, "--params");
  return build_from_json(c.strategy.empty() ? "baseline" : c.strategy, params, model).alloc;
}

int cmd_simulate(const Common& c, CLI::App& sub) {
  ScenarioConfig cfg;
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw ContractViolation("cannot open config '" + c.config + "'");
    cfg = ScenarioConfig::from_json(parse_json(std::string(std::istreambuf_iterator<char>(in), {}), c.config.c_str()));
  }
  if (sub.count("--variant")) cfg.variant = c.variant;
  if (sub.count("--model")) cfg.model = c.model;
  if (sub.count("--strategy")) cfg.strategy = c.strategy;
  if (sub.count("--params")) cfg.strategy_params = parse_json(c.params, "--params");
  if (sub.count("--alloc")) cfg.allocation_file = c.alloc;
  if (sub.count("--plan")) cfg.plan = parse_plan(c.plan);
  if (sub.count("--horizon")) cfg.horizon = c.horizon;
  if (sub.count("--seed")) cfg.seed = c.seed;
  if (sub.count("--entry")) cfg.entry_order = parse_list(c.entry);
  if (sub.count("--out")) cfg.output = c.out;
  ScenarioConfig::from_json(cfg.to_json());

  const auto result = run_scenario(cfg, c.jobs);
  const auto& r = result.report;
  emit(cfg.output, r.to_json().dump(2) + "\n");
  std::cerr << r.variant.name() << " " << to_string(r.verdict) << ": " << r.success_count << " of "
            << r.outcomes.size() << " prisoners succeeded";
  if (!r.witnesses.empty()) std::cerr << ", " << r.witnesses.size() << " witnesses";
  std::cerr << "\n";
  return exit_code(result);
}

int cmd_verify(const Common& c, const std::string& id, const std::vector<std::string>& items) {
  const auto params = parse_params(items);
  std::vector<std::string> ids;
  if (id == "all") {
    ids = verify_ids();
  } else {
    if (std::find(verify_ids().begin(), verify_ids().end(), id) == verify_ids().end()) {
      std::cerr << "error: unknown verification id '" << id << "'\n";
      return kUsage;
    }
    ids = {id};
  }
  nlohmann::json all = nlohmann::json::array();
  bool pass = true;
  for (const auto& i : ids) {
    const auto r = verify_theorem(i, id == "all" ? nlohmann::json::object() : params, c.seed, c.jobs);
    pass = pass && r.pass;
    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.id << ": " << r.summary << "\n";
    for (const auto& w : r.witnesses) std::cerr << "  " << w << "\n";
    all.push_back(r.to_json());
  }
  emit(c.out, (id == "all" ? all : all.front()).dump(2) + "\n");
  return pass ? 0 : 1;
}

int cmd_adversary(const Common& c, const std::string& id, std::size_t cycles) {
  const bool v2 = id.rfind("v2", 0) == 0;
  const auto model = v2 ? PriceModel::harmonic() : PriceModel::from_spec(c.model.empty() ? "geometric" : c.model);
  Common a = c;
  if (v2 && a.strategy.empty() && a.alloc.empty()) a.strategy = "v2";
  auto adv = make_adversary(id, model, allocation_for(a, model));
  int code = 0;
  try {
    adv.plan.pull(cycles);
  } catch (const HorizonError& e) {
    std::cerr << "error: " << e.what() << " (after " << adv.plan.cycles().size() << " cycles)\n";
    code = 1;
  }
  emit(c.out, adv.plan.to_text());
  return code;
}

int cmd_analyze(const Common& c, const std::string& mode, Index m, std::size_t trials) {
  const auto model = PriceModel::from_spec(c.model.empty() ? "inverse-square" : c.model);
  std::ostringstream out;
  auto trace = [&](const CheckTrace& t) {
    out << (t.pass ? "pass" : "fail") << "\tchecked " << t.checked << "\n";
    for (const auto& f : t.failures) out << "failure\t" << f << "\n";
    for (const auto& n : t.notes) out << "note\t" << n << "\n";
    return t.pass ? 0 : 1;
  };
  int code = 0;
  if (mode == "min") {
    write_tsv(out, {brute_force_min(model, m, c.jobs)});
  } else if (mode == "existence") {
    const auto v = decide_existence(model);
    out << to_string(v.value) << "\t" << v.justification << "\n";
    for (const auto& [n, s] : v.diagnostics) out << n << "\t" << s.str() << "\n";
  } else if (mode == "dominance") {
    code = trace(descending_partial_dominance(model, trials, m, c.seed));
  } else if (mode == "zero-omission") {
    code = trace(check_zero_omission(model, m));
  } else {
    std::cerr << "error: unknown analyze mode '" << mode << "'\n";
    return kUsage;
  }
  emit(c.out, out.str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinite prisoners: simulation, verification, adversaries, analysis"};
  app.require_subcommand(1);
  Common c;
  auto common = [&](CLI::App* s) {
    s->add_option("--model", c.model, "price model: geometric[:r], inverse-square, harmonic, even:<spec>, file:<path>");
    s->add_option("--strategy", c.strategy, "builder id");
    s->add_option("--params", c.params, "builder parameters as a JSON object");
    s->add_option("--alloc", c.alloc, "allocation file instead of a builder");
    s->add_option("--seed", c.seed, "seed for every random choice");
    s->add_option("--jobs", c.jobs, "worker threads (0 = hardware)");
    s->add_option("--out", c.out, "output file (default stdout)");
  };

  auto* sim = app.add_subcommand("simulate", "run a scenario and write its report JSON");
  common(sim);
  sim->add_option("--config", c.config, "scenario JSON file; flags override it");
  sim->add_option("--variant", c.variant, "V1a V1b V1c V1d V2a V2b");
  sim->add_option("--plan", c.plan, "random[:max_len[:diameter]], file:PATH or adversary:ID[:cycles]");
  sim->add_option("--horizon", c.horizon, "largest prisoner scored (0 = from the plan)");
  sim->add_option("--entry", c.entry, "V1c entry order, comma separated");

  std::string id;
  std::vector<std::string> items;
  auto* ver = app.add_subcommand("verify", "check a registered result, or all of them");
  common(ver);
  ver->add_option("id", id, "registry id or 'all'")->required();
  ver->add_option("settings", items, "key=value parameters");

  std::size_t cycles = 10;
  auto* adv = app.add_subcommand("adversary", "emit an adversary's cycles as plan text");
  common(adv);
  adv->add_option("id", id, "good-index, v1b-ceiling, two-cycle, v1d-chooser, v2a-block, v2b-block")->required();
  adv->add_option("--cycles", cycles, "number of cycles");

  std::string mode;
  Index m = 6;
  std::size_t trials = 1000;
  auto* ana = app.add_subcommand("analyze", "rearrangement analysis of a price model");
  common(ana);
  ana->add_option("mode", mode, "min, existence, dominance or zero-omission")->required();
  ana->add_option("--m", m, "prefix length");
  ana->add_option("--trials", trials, "random orders for dominance past the exhaustive limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*sim) return cmd_simulate(c, *sim);
    if (*ver) return cmd_verify(c, id, items);
    if (*adv) return cmd_adversary(c, id, cycles);
    return cmd_analyze(c, mode, m, trials);
  } catch (const HorizonError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
