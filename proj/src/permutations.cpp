#include "prisoners/permutations.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <sstream>

namespace prisoners {

Cycle::Cycle(std::vector<Index> members) : members_(std::move(members)) {
  if (members_.empty()) throw ContractViolation("empty cycle");
  std::vector<Index> sorted = members_;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == 0) throw ContractViolation("cycle member 0; indices start at 1");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ContractViolation("cycle (" + str() + ") repeats a member");
  }
}

Index Cycle::min() const { return *std::min_element(members_.begin(), members_.end()); }
Index Cycle::max() const { return *std::max_element(members_.begin(), members_.end()); }

bool Cycle::contains(Index n) const {
  return std::find(members_.begin(), members_.end(), n) != members_.end();
}

Rat Cycle::price(const PriceModel& model) const {
  Rat p;
  for (Index m : members_) p += model.term(m);
  return p;
}

Cycle Cycle::rotated(std::size_t k) const {
  std::vector<Index> r = members_;
  std::rotate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k % r.size()), r.end());
  return Cycle(std::move(r));
}

Cycle Cycle::mapped(const Relabeling& delta) const {
  std::vector<Index> r;
  r.reserve(members_.size());
  for (Index m : members_) r.push_back(delta(m));
  return Cycle(std::move(r));
}

std::string Cycle::str() const {
  std::string s;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(members_[i]);
  }
  return s;
}

// ----------------------------------------------------------------- CyclePlan

CyclePlan CyclePlan::prefix(std::vector<Cycle> cycles, Index horizon) {
  auto violations = validate_cycles(cycles, horizon, horizon);
  for (const auto& c : cycles) {
    if (c.max() > horizon) {
      violations.push_back("cycle (" + c.str() + ") reaches past the prefix " + std::to_string(horizon));
      break;
    }
  }
  if (!violations.empty()) throw ContractViolation("invalid plan: " + violations.front());
  CyclePlan plan;
  plan.coverage_ = Coverage::PrefixThenIdentity;
  plan.horizon_ = horizon;
  for (auto& c : cycles) plan.append(std::move(c), {});
  return plan;
}

CyclePlan CyclePlan::materialized(std::vector<Cycle> cycles, std::vector<std::string> witnesses) {
  Index top = 0;
  for (const auto& c : cycles) top = std::max(top, c.max());
  auto violations = validate_cycles(cycles, std::nullopt, top);
  if (!violations.empty()) throw ContractViolation("invalid plan: " + violations.front());
  CyclePlan plan;
  witnesses.resize(cycles.size());
  for (std::size_t i = 0; i < cycles.size(); ++i) plan.append(std::move(cycles[i]), std::move(witnesses[i]));
  return plan;
}

CyclePlan CyclePlan::lazy(std::unique_ptr<CycleSource> source) {
  CyclePlan plan;
  plan.source_ = std::move(source);
  return plan;
}

void CyclePlan::append(Cycle c, std::string witness) {
  const auto id = static_cast<std::uint32_t>(cycles_.size());
  for (std::size_t i = 0; i < c.length(); ++i) {
    const Index m = c.members()[i];
    if (coverage_ == Coverage::PrefixThenIdentity && m > horizon_) {
      throw ContractViolation("cycle member " + std::to_string(m) + " beyond prefix plan horizon");
    }
    if (!where_.emplace(m, std::make_pair(id, static_cast<std::uint32_t>(i))).second) {
      throw ContractViolation("index " + std::to_string(m) + " emitted twice");
    }
  }
  cycles_.push_back(std::move(c));
  witnesses_.push_back(std::move(witness));
}

bool CyclePlan::covers(Index n) const {
  if (where_.contains(n)) return true;
  return coverage_ == Coverage::PrefixThenIdentity && n > horizon_;
}

Index CyclePlan::sigma(Index n) const {
  auto it = where_.find(n);
  if (it == where_.end()) {
    if (coverage_ == Coverage::PrefixThenIdentity && n > horizon_) return n;
    throw NotMaterialized("index " + std::to_string(n) + " is not covered by any materialized cycle");
  }
  const auto& members = cycles_[it->second.first].members();
  return members[(it->second.second + 1) % members.size()];
}

Index CyclePlan::sigma_inverse(Index n) const {
  auto it = where_.find(n);
  if (it == where_.end()) {
    if (coverage_ == Coverage::PrefixThenIdentity && n > horizon_) return n;
    throw NotMaterialized("index " + std::to_string(n) + " is not covered by any materialized cycle");
  }
  const auto& members = cycles_[it->second.first].members();
  return members[(it->second.second + members.size() - 1) % members.size()];
}

Cycle CyclePlan::cycle_of(Index n) const {
  auto it = where_.find(n);
  if (it == where_.end()) {
    if (coverage_ == Coverage::PrefixThenIdentity && n > horizon_) return Cycle({n});
    throw NotMaterialized("index " + std::to_string(n) + " is not covered by any materialized cycle");
  }
  return cycles_[it->second.first];
}

std::optional<std::size_t> CyclePlan::cycle_index_of(Index n) const {
  auto it = where_.find(n);
  if (it == where_.end()) {
    if (coverage_ == Coverage::PrefixThenIdentity && n > horizon_) return std::nullopt;
    throw NotMaterialized("index " + std::to_string(n) + " is not covered by any materialized cycle");
  }
  return it->second.first;
}

std::size_t CyclePlan::pull(std::size_t count) {
  while (source_ && cycles_.size() < count) {
    auto next = source_->next();
    if (!next) {
      source_.reset();
      break;
    }
    append(std::move(next->cycle), std::move(next->witness));
  }
  return cycles_.size();
}

CyclePlan CyclePlan::snapshot() const {
  CyclePlan plan;
  plan.coverage_ = coverage_;
  plan.horizon_ = horizon_;
  plan.cycles_ = cycles_;
  plan.witnesses_ = witnesses_;
  plan.where_ = where_;
  return plan;
}

std::string CyclePlan::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < cycles_.size(); ++i) {
    out += cycles_[i].str();
    out += '\n';
    if (!witnesses_[i].empty()) out += "# " + witnesses_[i] + "\n";
  }
  if (coverage_ == Coverage::PrefixThenIdentity) {
    out += "identity-from " + std::to_string(horizon_ + 1) + "\n";
  }
  return out;
}

CyclePlan CyclePlan::parse(std::istream& in) {
  std::vector<Cycle> cycles;
  std::vector<std::string> witnesses;
  std::optional<Index> identity_from;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (!cycles.empty() && witnesses.size() == cycles.size()) {
        auto text = line.substr(first + 1);
        if (!text.empty() && text.front() == ' ') text.erase(0, 1);
        witnesses.back() = text;
      }
      continue;
    }
    if (identity_from) {
      throw ContractViolation("plan line " + std::to_string(lineno) + ": content after identity-from");
    }
    std::istringstream ls(line);
    std::string tok;
    std::vector<Index> members;
    while (ls >> tok) {
      if (tok == "identity-from") {
        Index h = 0;
        if (!members.empty() || !(ls >> h) || h == 0) {
          throw ContractViolation("plan line " + std::to_string(lineno) + ": bad identity-from line");
        }
        identity_from = h;
        break;
      }
      if (tok.find_first_not_of("0123456789") != std::string::npos) {
        throw ContractViolation("plan line " + std::to_string(lineno) + ": bad member '" + tok + "'");
      }
      members.push_back(std::stoull(tok));
    }
    if (identity_from) continue;
    try {
      cycles.emplace_back(std::move(members));
    } catch (const ContractViolation& e) {
      throw ContractViolation("plan line " + std::to_string(lineno) + ": " + e.what());
    }
    witnesses.emplace_back();
  }
  if (identity_from) {
    CyclePlan plan = prefix(std::move(cycles), *identity_from - 1);
    for (std::size_t i = 0; i < witnesses.size(); ++i) plan.witnesses_[i] = witnesses[i];
    return plan;
  }
  return materialized(std::move(cycles), std::move(witnesses));
}

// ---------------------------------------------------------------- validation

std::vector<std::string> validate_cycles(std::span<const Cycle> cycles, std::optional<Index> prefix_cover,
                                         Index horizon) {
  std::vector<std::string> out;
  std::set<Index> seen;
  std::set<Index> reported;
  for (const auto& c : cycles) {
    for (Index m : c.members()) {
      if (m > horizon) continue;
      if (!seen.insert(m).second && reported.insert(m).second) {
        out.push_back("index " + std::to_string(m) + " repeated");
      }
    }
  }
  if (prefix_cover) {
    const Index top = std::min(*prefix_cover, horizon);
    for (Index i = 1; i <= top; ++i) {
      if (!seen.contains(i)) out.push_back("index " + std::to_string(i) + " uncovered");
    }
  }
  return out;
}

std::vector<std::string> validate_plan(const CyclePlan& plan, Index horizon) {
  std::optional<Index> cover;
  if (plan.coverage() == Coverage::PrefixThenIdentity) cover = plan.prefix_horizon();
  return validate_cycles(plan.cycles(), cover, horizon);
}

CyclePlan conjugate(const CyclePlan& plan, const Relabeling& delta) {
  std::vector<Cycle> mapped;
  mapped.reserve(plan.cycles().size());
  for (const auto& c : plan.cycles()) mapped.push_back(c.mapped(delta));
  if (plan.coverage() == Coverage::PrefixThenIdentity) {
    const Index h = std::max(plan.prefix_horizon(), delta.support());
    // Fixed points of the identity tail that delta moves into the prefix.
    for (Index i = plan.prefix_horizon() + 1; i <= h; ++i) mapped.emplace_back(std::vector<Index>{delta(i)});
    return CyclePlan::prefix(std::move(mapped), h);
  }
  return CyclePlan::materialized(std::move(mapped), plan.witnesses());
}

// -------------------------------------------------------------------- random

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Index uniform_below(std::mt19937_64& rng, Index n) {
  if (n == 0) throw DomainError("uniform_below(0)");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

CyclePlan random_plan(Index horizon, Index max_len, std::uint64_t seed) {
  if (max_len == 0) throw DomainError("random_plan: max_len must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Index> order(horizon);
  for (Index i = 0; i < horizon; ++i) order[i] = i + 1;
  for (Index i = horizon; i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
  std::vector<Cycle> cycles;
  for (Index pos = 0; pos < horizon;) {
    const Index len = std::min<Index>(1 + uniform_below(rng, max_len), horizon - pos);
    cycles.emplace_back(std::vector<Index>(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                           order.begin() + static_cast<std::ptrdiff_t>(pos + len)));
    pos += len;
  }
  return CyclePlan::prefix(std::move(cycles), horizon);
}

CyclePlan random_plan_bounded_diameter(Index horizon, Index d, Index max_len, std::uint64_t seed) {
  if (max_len == 0) throw DomainError("max_len must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<bool> used(horizon + 1, false);
  std::vector<Cycle> cycles;
  for (Index i = 1; i <= horizon; ++i) {
    if (used[i]) continue;
    std::vector<Index> pool;
    for (Index j = i + 1; j <= std::min(horizon, i + d); ++j) {
      if (!used[j]) pool.push_back(j);
    }
    for (Index k = pool.size(); k > 1; --k) std::swap(pool[k - 1], pool[uniform_below(rng, k)]);
    const Index extra = uniform_below(rng, std::min<Index>(pool.size(), max_len - 1) + 1);
    std::vector<Index> members{i};
    members.insert(members.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(extra));
    for (Index k = members.size(); k > 1; --k) std::swap(members[k - 1], members[uniform_below(rng, k)]);
    for (Index m : members) used[m] = true;
    cycles.emplace_back(std::move(members));
  }
  return CyclePlan::prefix(std::move(cycles), horizon);
}

}  // namespace prisoners
