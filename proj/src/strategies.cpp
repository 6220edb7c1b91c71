#include "prisoners/strategies.hpp"

#include <istream>

namespace prisoners {

Rat json_rat(const nlohmann::json& params, const char* key, const Rat& fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (v.is_string()) return Rat::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rat(v.get<long long>());
  throw DomainError(std::string("parameter '") + key + "' must be a rational string");
}

Index json_index(const nlohmann::json& params, const char* key, Index fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw DomainError(std::string("parameter '") + key + "' must be a nonnegative integer");
  }
  return v.get<Index>();
}

namespace {

// Least m >= lo with k * tail(m) certified below total.
Index least_funded_cutoff(const PriceModel& model, const Rat& k, const Rat& total, Index lo) {
  if (!model.tail(1)) {
    throw CapabilityError("model '" + model.name() + "' has no finite tail bound");
  }
  for (Index m = lo; m <= kDefaultSearchHorizon; ++m) {
    const auto t = model.tail(m);
    const Comparison c = compare_certified(t->times(k), total);
    if (c == Comparison::Less) return m;
    if (c == Comparison::Undecided) {
      throw CapabilityError("cannot certify k*tail(" + std::to_string(m) + ") against " + total.str());
    }
  }
  throw HorizonError("no cutoff found below the search horizon");
}

// Least m >= lo with TT(m) < total, exactly.
Index least_tail_of_tails_cutoff(const PriceModel& model, const Rat& total, Index lo) {
  if (!model.tail_of_tails(lo)) {
    throw CapabilityError("model '" + model.name() + "' has no exact tail-of-tails sum");
  }
  for (Index m = lo; m <= kDefaultSearchHorizon; ++m) {
    if (*model.tail_of_tails(m) < total) return m;
  }
  throw HorizonError("no cutoff found below the search horizon");
}

void require_summable_weights(const PriceModel& model) {
  if (model.weighted_sum() != WeightedSumCertificate::ConvergesUnderSomeRearrangement) {
    throw CapabilityError("model '" + model.name() + "' lacks a convergence certificate for sum n*p_n");
  }
}

Rat exact_tail(const PriceModel& model, Index n) {
  const auto t = model.tail(n);
  if (!t || !t->is_exact()) throw CapabilityError("model '" + model.name() + "' has no exact tails");
  return *t->exact_value();
}

TailStructure structure_from_model(const PriceModel& model, Index m) {
  if (auto z = model.zero_beyond()) return {TailShape::ZeroBeyond, std::max(*z, m)};
  if (!model.has_infinitely_many_zeros()) {
    if (auto f = model.positive_nonincreasing_from()) return {TailShape::NonIncreasingBeyond, std::max(*f, m)};
  }
  return {};
}

// Allocation built in rearranged coordinates, read back in original ones.
AllocationPlan to_original(AllocationPlan rearranged, const Relabeling& delta) {
  if (delta.is_identity()) return rearranged;
  return rearranged.relabeled(delta.inverse());
}

}  // namespace

std::string_view to_string(PatternKind k) {
  switch (k) {
    case PatternKind::None: return "none";
    case PatternKind::LeastMemberFrom: return "least-member-from";
    case PatternKind::MaxPriceMemberAvoidingPrefix: return "max-price-member-avoiding-prefix";
    case PatternKind::AllAbove: return "all-above";
    case PatternKind::AllMembersWhollyAbove: return "all-members-wholly-above";
    case PatternKind::LastMemberFrom: return "last-member-from";
  }
  return "?";
}

// ------------------------------------------------------------ AllocationPlan

AllocationPlan::AllocationPlan(AmountFn amount, AllocationTotal total, TailStructure tail, std::string name)
    : amount_(std::move(amount)), total_(std::move(total)), tail_(tail), name_(std::move(name)) {}

AllocationPlan AllocationPlan::custom(std::vector<std::pair<Index, Rat>> prefix, TailRule tail, std::string name) {
  if (tail.from == 0) throw DomainError("tail rule must start at index >= 1");
  auto table = std::make_shared<std::vector<Rat>>(tail.from - 1);
  Rat sum;
  for (const auto& [i, v] : prefix) {
    if (i == 0 || i >= tail.from) throw DomainError("prefix index " + std::to_string(i) + " outside [1, tail start)");
    if (v.sign() < 0) throw DomainError("negative amount at index " + std::to_string(i));
    sum += v - (*table)[i - 1];
    (*table)[i - 1] = v;
  }
  if (tail.scale.sign() < 0) throw DomainError("negative tail scale");

  AllocationTotal total;
  TailStructure structure;
  const bool zero_tail = tail.kind == TailRule::Kind::Zero || tail.scale.is_zero();
  switch (zero_tail ? TailRule::Kind::Zero : tail.kind) {
    case TailRule::Kind::Zero:
      total = {AllocTotalKind::ExactTotal, sum};
      structure = {TailShape::ZeroBeyond, tail.from};
      break;
    case TailRule::Kind::Geometric:
      if (!(tail.ratio.is_positive() && tail.ratio < Rat(1))) throw DomainError("geometric ratio must be in (0,1)");
      total = {AllocTotalKind::ExactTotal, sum + tail.scale * geometric_tail(tail.ratio, tail.from)};
      structure = {TailShape::NonIncreasingBeyond, tail.from};
      break;
    case TailRule::Kind::InversePower:
      if (tail.exponent < 2) throw DomainError("inverse-power allocation tails need exponent >= 2");
      total = {AllocTotalKind::AtMost,
               sum + tail.scale * power_tail_bounds(tail.exponent, tail.from, Rat::pow2_inverse(20)).hi};
      structure = {TailShape::NonIncreasingBeyond, tail.from};
      break;
  }
  auto fn = [table, tail](Index n) -> Rat {
    if (n < tail.from) return (*table)[n - 1];
    switch (tail.kind) {
      case TailRule::Kind::Zero: return Rat();
      case TailRule::Kind::Geometric: return tail.scale * tail.ratio.pow(static_cast<unsigned>(n));
      case TailRule::Kind::InversePower: {
        BigInt d;
        mpz_ui_pow_ui(d.get_mpz_t(), n, tail.exponent);
        return tail.scale * Rat(BigInt(1), d);
      }
    }
    return Rat();
  };
  return AllocationPlan(std::move(fn), std::move(total), structure, std::move(name));
}

AllocationPlan AllocationPlan::harmonic(HarmonicForm form, std::string name) {
  if (form.start == 0) throw DomainError("harmonic form start must be >= 1");
  auto fn = [form](Index n) -> Rat {
    if (n < form.start) return Rat();
    return form.coef * harmonic_sum(form.start, n) + form.offset;
  };
  TailStructure tail;
  if (form.coef.is_zero() && form.offset.is_positive()) tail = {TailShape::NonIncreasingBeyond, form.start};
  AllocationPlan plan(std::move(fn), {}, tail, std::move(name));
  plan.harmonic_ = form;
  return plan;
}

AllocationPlan AllocationPlan::from_model(const PriceModel& model, std::string name) {
  AllocationTotal total;
  const TotalCertificate cert = model.total();
  if (cert.kind == TotalKind::ExactTotal) {
    total = {AllocTotalKind::ExactTotal, cert.exact};
  } else if (cert.kind == TotalKind::FiniteBracketed) {
    total = {AllocTotalKind::AtMost, model.tail(1)->bounds(20).hi};
  }
  auto fn = [model](Index n) { return model.term(n); };
  return AllocationPlan(std::move(fn), std::move(total), structure_from_model(model, 1), std::move(name));
}

AllocationPlan AllocationPlan::parse(std::istream& in) { return from_model(PriceModel::parse_custom(in), "file"); }

AllocationPlan AllocationPlan::scaled(const Rat& factor) const {
  if (factor.sign() < 0) throw DomainError("negative scale factor");
  auto fn = [inner = amount_, factor](Index n) { return factor * inner(n); };
  AllocationTotal total = total_;
  if (total.value) total.value = *total.value * factor;
  TailStructure tail = tail_;
  if (factor.is_zero()) tail = {TailShape::ZeroBeyond, 1};
  AllocationPlan out(std::move(fn), std::move(total), tail, name_ + "*" + factor.str());
  if (harmonic_ && factor.is_positive()) {
    out.harmonic_ = HarmonicForm{harmonic_->coef * factor, harmonic_->start, harmonic_->offset * factor};
  }
  return out;
}

AllocationPlan AllocationPlan::relabeled(const Relabeling& delta) const {
  if (delta.is_identity()) return *this;
  auto fn = [inner = amount_, delta](Index n) { return inner(delta(n)); };
  TailStructure tail = tail_;
  if (tail.shape != TailShape::Unstructured) tail.from = std::max(tail.from, delta.support() + 1);
  return AllocationPlan(std::move(fn), total_, tail, name_ + "@relabeled");
}

Rat AllocationPlan::prefix_sum(Index n) const {
  Rat s;
  for (Index i = 1; i <= n; ++i) s += amount_(i);
  return s;
}

nlohmann::json StrategyDescriptor::to_json() const {
  nlohmann::json j;
  j["builder"] = builder;
  j["params"] = params;
  j["m"] = m;
  nlohmann::json p;
  p["kind"] = std::string(to_string(pattern.kind));
  p["threshold"] = pattern.threshold;
  if (pattern.max_length) p["max_length"] = *pattern.max_length;
  if (pattern.max_diameter) p["max_diameter"] = *pattern.max_diameter;
  j["pattern"] = p;
  if (!delta.is_identity()) j["delta"] = delta.prefix(delta.support());
  return j;
}

// ------------------------------------------------------------------ builders

Strategy build_baseline_geometric() {
  TailRule tail;
  tail.kind = TailRule::Kind::Geometric;
  tail.ratio = Rat(1, 2);
  tail.scale = Rat(2);
  tail.from = 2;
  Strategy s{AllocationPlan::custom({{1, Rat()}}, tail, "baseline"), {}};
  s.descriptor.builder = "baseline";
  s.descriptor.m = 2;
  s.descriptor.pattern = {PatternKind::LeastMemberFrom, 2, {}, {}};
  return s;
}

Strategy build_tail_sum_strategy(const PriceModel& model, const Relabeling& delta, const Rat& total) {
  if (!total.is_positive()) throw DomainError("total must be positive");
  const PriceModel q = delta.is_identity() ? model : model.relabeled(delta);
  require_summable_weights(q);
  const Index m = least_tail_of_tails_cutoff(q, total, 2);
  const Rat first = total - *q.tail_of_tails(m);
  auto fn = [q, m, first](Index n) -> Rat {
    if (n == 1) return first;
    if (n < m) return Rat();
    return exact_tail(q, n);
  };
  (void)exact_tail(q, m);
  AllocationPlan rearranged(std::move(fn), {AllocTotalKind::ExactTotal, total}, structure_from_model(q, m),
                            "tail-sum");
  Strategy s{to_original(std::move(rearranged), delta), {}};
  s.descriptor.builder = "tail-sum";
  s.descriptor.params = {{"total", total.str()}};
  s.descriptor.m = m;
  s.descriptor.delta = delta;
  s.descriptor.pattern = {PatternKind::LeastMemberFrom, m, {}, {}};
  return s;
}

Strategy build_bounded_length_strategy(const PriceModel& model, Index k, const Rat& total) {
  if (k == 0) throw DomainError("length bound k must be >= 1");
  if (!total.is_positive()) throw DomainError("total must be positive");
  const Index m = least_funded_cutoff(model, Rat(k), total, 1);
  const Rat kr(k);
  auto fn = [model, m, kr](Index n) -> Rat { return n < m ? Rat() : kr * model.term(n); };
  const auto t = model.tail(m);
  AllocationTotal tot = t->is_exact() ? AllocationTotal{AllocTotalKind::ExactTotal, kr * *t->exact_value()}
                                      : AllocationTotal{AllocTotalKind::AtMost, total};
  Strategy s{AllocationPlan(std::move(fn), std::move(tot), structure_from_model(model, m), "bounded-length"), {}};
  s.descriptor.builder = "bounded-length";
  s.descriptor.params = {{"k", k}, {"total", total.str()}};
  s.descriptor.m = m;
  s.descriptor.pattern = {PatternKind::MaxPriceMemberAvoidingPrefix, m, k, {}};
  return s;
}

Strategy build_open_boxes_strategy(const PriceModel& model, Index k, const Rat& total) {
  if (model.positive_nonincreasing_from() != Index{1} || model.zero_beyond() || model.has_infinitely_many_zeros()) {
    throw CapabilityError("open-boxes strategy needs positive non-increasing prices from index 1; rearrange first");
  }
  Strategy s = build_bounded_length_strategy(model, k, total);
  s.descriptor.builder = "open-boxes";
  s.descriptor.pattern.kind = PatternKind::AllMembersWhollyAbove;
  return s;
}

Strategy build_bounded_diameter_strategy(const PriceModel& model, Index d, const Relabeling& delta,
                                         const Rat& total) {
  if (!total.is_positive()) throw DomainError("total must be positive");
  const PriceModel q = delta.is_identity() ? model : model.relabeled(delta);
  require_summable_weights(q);
  const Index m = least_tail_of_tails_cutoff(q, total, 1);
  const Index zeros = m + d;
  auto fn = [q, m, zeros](Index n) -> Rat {
    if (n <= zeros) return Rat();
    return exact_tail(q, m + (n - zeros));
  };
  (void)exact_tail(q, m);
  TailStructure tail = structure_from_model(q, zeros + 1);
  if (auto z = q.zero_beyond()) tail = {TailShape::ZeroBeyond, std::max(zeros + 1, *z + d)};
  AllocationPlan rearranged(std::move(fn), {AllocTotalKind::ExactTotal, *q.tail_of_tails(m + 1)}, tail,
                            "bounded-diameter");
  Strategy s{to_original(std::move(rearranged), delta), {}};
  s.descriptor.builder = "bounded-diameter";
  s.descriptor.params = {{"d", d}, {"total", total.str()}};
  s.descriptor.m = m;
  s.descriptor.delta = delta;
  s.descriptor.pattern = {PatternKind::AllAbove, zeros, {}, d};
  return s;
}

Strategy build_cycle_informed_strategy(const PriceModel& model, const CyclePlan& plan, Index k, const Rat& total) {
  if (k == 0) throw DomainError("length bound k must be >= 1");
  if (!total.is_positive()) throw DomainError("total must be positive");
  for (const auto& c : plan.cycles()) {
    if (c.length() > k) {
      throw ContractViolation("cycle (" + c.str() + ") is longer than the disclosed bound " + std::to_string(k));
    }
  }
  const Index m = least_funded_cutoff(model, Rat(k), total, 1);
  auto shared = std::make_shared<const CyclePlan>(plan.snapshot());
  auto fn = [model, m, shared](Index n) -> Rat {
    if (n < m || !shared->covers(n)) return Rat();
    const Cycle c = shared->cycle_of(n);
    return c.min() >= m ? c.price(model) : Rat();
  };
  Strategy s{AllocationPlan(std::move(fn), {AllocTotalKind::AtMost, total}, {}, "cycle-informed"), {}};
  s.descriptor.builder = "cycle-informed";
  s.descriptor.params = {{"k", k}, {"total", total.str()}};
  s.descriptor.m = m;
  s.descriptor.pattern = {PatternKind::AllMembersWhollyAbove, m, k, {}};
  return s;
}

Index log_shift_start(const Rat& K) {
  const Rat target = K + Rat(1);
  Index s = 1;
  while (harmonic_number(s - 1) < target) {
    if (++s > kDefaultSearchHorizon) throw HorizonError("log-shift start beyond the search horizon");
  }
  return s;
}

Strategy build_v2_strategy(const V2Kind& kind) {
  Strategy s{AllocationPlan::harmonic({}, ""), {}};
  s.descriptor.builder = "v2";
  switch (kind.tag) {
    case V2Kind::Tag::Constant1:
      s.alloc = AllocationPlan::harmonic({Rat(), 1, Rat(1)}, "constant1");
      s.descriptor.params = {{"kind", "constant1"}};
      break;
    case V2Kind::Tag::HarmonicPrefix:
      s.alloc = AllocationPlan::harmonic({Rat(1), 1, Rat()}, "harmonic-prefix");
      s.descriptor.params = {{"kind", "harmonic-prefix"}};
      s.descriptor.m = 1;
      s.descriptor.pattern = {PatternKind::LastMemberFrom, 1, {}, {}};
      break;
    case V2Kind::Tag::ShiftedHarmonic:
    case V2Kind::Tag::LogShift: {
      const Index k = kind.tag == V2Kind::Tag::LogShift ? log_shift_start(kind.K) : kind.k;
      if (k == 0) throw DomainError("shift k must be >= 1");
      s.alloc = AllocationPlan::harmonic({Rat(1), k, Rat()}, "shifted-harmonic(" + std::to_string(k) + ")");
      s.descriptor.params = {{"kind", "shifted"}, {"k", k}};
      if (kind.tag == V2Kind::Tag::LogShift) s.descriptor.params = {{"kind", "log-shift"}, {"K", kind.K.str()}};
      s.descriptor.m = k;
      s.descriptor.pattern = {PatternKind::LastMemberFrom, k, {}, {}};
      break;
    }
    case V2Kind::Tag::Scaled:
      if (!(kind.c.is_positive() && kind.c < Rat(1))) {
        throw DomainError("scaled harmonic strategy needs 0 < c < 1, got " + kind.c.str());
      }
      s.alloc = AllocationPlan::harmonic({kind.c, 1, Rat()}, "scaled(" + kind.c.str() + ")");
      s.descriptor.params = {{"kind", "scaled"}, {"c", kind.c.str()}};
      break;
  }
  return s;
}

Strategy build_from_json(const std::string& id, const nlohmann::json& raw, const PriceModel& model,
                         const CyclePlan* plan) {
  const nlohmann::json params = raw.is_null() ? nlohmann::json::object() : raw;
  if (!params.is_object()) throw DomainError("strategy parameters must be a JSON object");
  const Rat total = json_rat(params, "total", Rat(1));
  Relabeling delta;
  if (params.contains("delta")) {
    delta = Relabeling::from_prefix_images(params.at("delta").get<std::vector<Index>>());
  } else if (params.value("descending", false)) {
    delta = descending_rearrangement(model, json_index(params, "horizon", 1000));
  }
  if (id == "baseline") return build_baseline_geometric();
  if (id == "tail-sum") return build_tail_sum_strategy(model, delta, total);
  if (id == "bounded-length") return build_bounded_length_strategy(model, json_index(params, "k", 1), total);
  if (id == "open-boxes") return build_open_boxes_strategy(model, json_index(params, "k", 1), total);
  if (id == "bounded-diameter") {
    return build_bounded_diameter_strategy(model, json_index(params, "d", 0), delta, total);
  }
  if (id == "cycle-informed") {
    if (!plan) throw DomainError("cycle-informed strategy needs the disclosed plan");
    return build_cycle_informed_strategy(model, *plan, json_index(params, "k", 1), total);
  }
  if (id == "v2") {
    const std::string kind = params.value("kind", "constant1");
    if (kind == "constant1") return build_v2_strategy(V2Kind::constant1());
    if (kind == "harmonic-prefix") return build_v2_strategy(V2Kind::harmonic_prefix());
    if (kind == "shifted") return build_v2_strategy(V2Kind::shifted(json_index(params, "k", 1)));
    if (kind == "log-shift") return build_v2_strategy(V2Kind::log_shift(json_rat(params, "K", Rat())));
    if (kind == "scaled") return build_v2_strategy(V2Kind::scaled(json_rat(params, "c", Rat(1, 2))));
    throw DomainError("unknown v2 strategy kind '" + kind + "'");
  }
  throw DomainError("unknown strategy builder '" + id + "'");
}

}  // namespace prisoners
