#include "prisoners/sequences.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace prisoners {

// ---------------------------------------------------------------- Relabeling

Relabeling Relabeling::from_table(std::vector<Index> images) {
  const Index n = images.size();
  std::vector<Index> inv(n, 0);
  for (Index i = 0; i < n; ++i) {
    const Index v = images[i];
    if (v == 0 || v > n) throw DomainError("relabeling table is not a permutation of [1..N]");
    if (inv[v - 1] != 0) throw DomainError("relabeling table is not injective");
    inv[v - 1] = i + 1;
  }
  // Trim a trailing identity segment so equality is structural.
  while (!images.empty() && images.back() == images.size()) {
    images.pop_back();
    inv.pop_back();
  }
  Relabeling r;
  r.table_ = std::move(images);
  r.inverse_ = std::move(inv);
  return r;
}

Relabeling Relabeling::from_prefix_images(std::span<const Index> images) {
  Index top = images.size();
  std::set<Index> used;
  for (Index v : images) {
    if (v == 0) throw DomainError("relabeling images start at 1");
    if (!used.insert(v).second) throw DomainError("relabeling prefix is not injective");
    top = std::max(top, v);
  }
  std::vector<Index> table(images.begin(), images.end());
  table.reserve(top);
  for (Index v = 1; table.size() < top; ++v) {
    if (!used.contains(v)) table.push_back(v);
  }
  return from_table(std::move(table));
}

Relabeling Relabeling::swap(Index a, Index b) {
  if (a == 0 || b == 0) throw DomainError("relabeling indices start at 1");
  std::vector<Index> table(std::max(a, b));
  for (Index i = 0; i < table.size(); ++i) table[i] = i + 1;
  std::swap(table[a - 1], table[b - 1]);
  return from_table(std::move(table));
}

Index Relabeling::operator()(Index n) const {
  if (n == 0) throw DomainError("relabeling indices start at 1");
  return n <= table_.size() ? table_[n - 1] : n;
}

Index Relabeling::inverse_of(Index n) const {
  if (n == 0) throw DomainError("relabeling indices start at 1");
  return n <= inverse_.size() ? inverse_[n - 1] : n;
}

Relabeling Relabeling::inverse() const {
  Relabeling r;
  r.table_ = inverse_;
  r.inverse_ = table_;
  return r;
}

Relabeling Relabeling::compose(const Relabeling& other) const {
  const Index n = std::max(support(), other.support());
  std::vector<Index> table(n);
  for (Index i = 1; i <= n; ++i) table[i - 1] = (*this)(other(i));
  return from_table(std::move(table));
}

std::vector<Index> Relabeling::prefix(Index m) const {
  std::vector<Index> out(m);
  for (Index i = 1; i <= m; ++i) out[i - 1] = (*this)(i);
  return out;
}

bool Relabeling::is_identity() const { return table_.empty(); }

bool operator==(const Relabeling& a, const Relabeling& b) { return a.table_ == b.table_; }

// -------------------------------------------------------------- certificates

std::string_view to_string(TotalKind k) {
  switch (k) {
    case TotalKind::ExactTotal: return "ExactTotal";
    case TotalKind::FiniteBracketed: return "FiniteBracketed";
    case TotalKind::DivergesToInfinity: return "DivergesToInfinity";
    case TotalKind::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(WeightedSumCertificate c) {
  switch (c) {
    case WeightedSumCertificate::ConvergesUnderSomeRearrangement:
      return "ConvergesUnderSomeRearrangement";
    case WeightedSumCertificate::DivergesUnderAllRearrangements:
      return "DivergesUnderAllRearrangements";
    case WeightedSumCertificate::Unknown: return "Unknown";
  }
  return "?";
}

// -------------------------------------------------------------- model impls

namespace detail {

class ModelImpl {
 public:
  virtual ~ModelImpl() = default;
  virtual Rat term(Index n) const = 0;
  virtual std::optional<CertifiedReal> tail(Index n) const = 0;
  virtual std::optional<Rat> tail_of_tails(Index) const { return std::nullopt; }
  virtual TotalCertificate total() const = 0;
  virtual WeightedSumCertificate weighted_sum() const = 0;
  virtual std::optional<Index> positive_nonincreasing_from() const { return std::nullopt; }
  virtual std::optional<Index> zero_beyond() const { return std::nullopt; }
  virtual bool infinitely_many_zeros() const { return zero_beyond().has_value(); }
  virtual PriceModel::Kind kind() const = 0;
  virtual std::string name() const = 0;

  std::vector<Index> positive_indices(Index count, Index limit) const {
    std::lock_guard lock(mu_);
    const auto zb = zero_beyond();
    while (positives_.size() < count && scanned_ < limit) {
      const Index i = scanned_ + 1;
      if (zb && i >= *zb) break;
      if (term(i).is_positive()) positives_.push_back(i);
      scanned_ = i;
    }
    std::vector<Index> out;
    for (Index i : positives_) {
      if (out.size() == count || i > limit) break;
      out.push_back(i);
    }
    return out;
  }

 private:
  mutable std::mutex mu_;
  mutable std::vector<Index> positives_;
  mutable Index scanned_ = 0;
};

}  // namespace detail

namespace {

using detail::ModelImpl;

TotalCertificate exact_total(Rat v) { return {TotalKind::ExactTotal, std::move(v)}; }

class GeometricModel final : public ModelImpl {
 public:
  explicit GeometricModel(Rat r) : r_(std::move(r)) {
    if (!r_.is_positive() || !(r_ < Rat(1))) throw DomainError("geometric ratio must lie in (0,1)");
  }
  Rat term(Index n) const override { return r_.pow(static_cast<unsigned>(n)); }
  std::optional<CertifiedReal> tail(Index n) const override {
    return CertifiedReal::exact(geometric_tail(r_, n));
  }
  std::optional<Rat> tail_of_tails(Index m) const override {
    const Rat q = Rat(1) - r_;
    return r_.pow(static_cast<unsigned>(m)) / (q * q);
  }
  TotalCertificate total() const override { return exact_total(geometric_tail(r_, 1)); }
  WeightedSumCertificate weighted_sum() const override {
    return WeightedSumCertificate::ConvergesUnderSomeRearrangement;
  }
  std::optional<Index> positive_nonincreasing_from() const override { return 1; }
  PriceModel::Kind kind() const override { return PriceModel::Kind::Geometric; }
  std::string name() const override { return "geometric:" + r_.str(); }

 private:
  Rat r_;
};

class InversePowerTail {
 public:
  static CertifiedReal make(unsigned e, Index n, const Rat& scale) {
    // Cache brackets per level; tails at n = 1 are queried repeatedly.
    auto cache = std::make_shared<std::pair<std::mutex, std::map<unsigned, RatInterval>>>();
    CertifiedReal base([e, n, cache](unsigned level) {
      std::lock_guard lock(cache->first);
      auto it = cache->second.find(level);
      if (it != cache->second.end()) return it->second;
      RatInterval iv = power_tail_bounds(e, n, Rat::pow2_inverse(level));
      cache->second.emplace(level, iv);
      return iv;
    });
    return scale == Rat(1) ? base : base.times(scale);
  }
};

class InverseSquareModel final : public ModelImpl {
 public:
  Rat term(Index n) const override {
    return Rat(BigInt(1), BigInt(static_cast<unsigned long>(n)) * static_cast<unsigned long>(n));
  }
  std::optional<CertifiedReal> tail(Index n) const override {
    std::lock_guard lock(mu_);
    auto it = tails_.find(n);
    if (it == tails_.end()) it = tails_.emplace(n, InversePowerTail::make(2, n, Rat(1))).first;
    return it->second;
  }
  TotalCertificate total() const override { return {TotalKind::FiniteBracketed, std::nullopt}; }
  WeightedSumCertificate weighted_sum() const override {
    return WeightedSumCertificate::DivergesUnderAllRearrangements;
  }
  std::optional<Index> positive_nonincreasing_from() const override { return 1; }
  PriceModel::Kind kind() const override { return PriceModel::Kind::InverseSquare; }
  std::string name() const override { return "inverse-square"; }

 private:
  mutable std::mutex mu_;
  mutable std::map<Index, CertifiedReal> tails_;
};

class HarmonicModel final : public ModelImpl {
 public:
  Rat term(Index n) const override { return Rat(BigInt(1), BigInt(static_cast<unsigned long>(n))); }
  std::optional<CertifiedReal> tail(Index) const override { return std::nullopt; }
  TotalCertificate total() const override { return {TotalKind::DivergesToInfinity, std::nullopt}; }
  WeightedSumCertificate weighted_sum() const override {
    return WeightedSumCertificate::DivergesUnderAllRearrangements;
  }
  std::optional<Index> positive_nonincreasing_from() const override { return 1; }
  PriceModel::Kind kind() const override { return PriceModel::Kind::Harmonic; }
  std::string name() const override { return "harmonic"; }
};

class CustomModel final : public ModelImpl {
 public:
  CustomModel(std::vector<std::pair<Index, Rat>> prefix, TailRule tail,
              std::optional<WeightedSumCertificate> declared)
      : tail_(std::move(tail)) {
    if (tail_.from == 0) throw DomainError("tail rule must start at index >= 1");
    prefix_.assign(tail_.from - 1, Rat(0));
    std::vector<bool> seen(prefix_.size(), false);
    for (auto& [i, v] : prefix) {
      if (i == 0 || i >= tail_.from) {
        throw ContractViolation("prefix index " + std::to_string(i) + " not below tail start");
      }
      if (seen[i - 1]) throw ContractViolation("duplicate prefix index " + std::to_string(i));
      if (v.sign() < 0) throw ContractViolation("negative price at index " + std::to_string(i));
      seen[i - 1] = true;
      prefix_[i - 1] = v;
    }
    if (tail_.scale.sign() <= 0) throw ContractViolation("tail scale must be positive");
    switch (tail_.kind) {
      case TailRule::Kind::Zero: break;
      case TailRule::Kind::Geometric:
        if (!tail_.ratio.is_positive() || !(tail_.ratio < Rat(1))) {
          throw ContractViolation("geometric tail ratio must lie in (0,1)");
        }
        break;
      case TailRule::Kind::InversePower:
        if (tail_.exponent < 2) throw ContractViolation("inverse-power tail needs exponent >= 2");
        break;
    }
    derived_ = (tail_.kind == TailRule::Kind::InversePower && tail_.exponent == 2)
                   ? WeightedSumCertificate::DivergesUnderAllRearrangements
                   : WeightedSumCertificate::ConvergesUnderSomeRearrangement;
    certificate_ = derived_;
    if (declared) {
      if (*declared != WeightedSumCertificate::Unknown && *declared != derived_) {
        throw ContractViolation(std::string("declared certificate ") +
                                std::string(to_string(*declared)) +
                                " contradicts the tail rule, which implies " +
                                std::string(to_string(derived_)));
      }
      certificate_ = *declared;
    }
  }

  Rat term(Index n) const override {
    if (n == 0) throw DomainError("indices start at 1");
    if (n < tail_.from) return prefix_[n - 1];
    return rule_term(n);
  }
  std::optional<CertifiedReal> tail(Index n) const override {
    Rat head;
    for (Index i = n; i < tail_.from; ++i) head += prefix_[i - 1];
    const Index j = std::max(n, tail_.from);
    switch (tail_.kind) {
      case TailRule::Kind::Zero: return CertifiedReal::exact(head);
      case TailRule::Kind::Geometric:
        return CertifiedReal::exact(head + tail_.scale * geometric_tail(tail_.ratio, j));
      case TailRule::Kind::InversePower:
        return InversePowerTail::make(tail_.exponent, j, tail_.scale).plus(head);
    }
    return std::nullopt;
  }
  std::optional<Rat> tail_of_tails(Index m) const override {
    if (tail_.kind == TailRule::Kind::InversePower) return std::nullopt;
    Rat acc;
    for (Index n = m; n < tail_.from; ++n) acc += *tail(n)->exact_value();
    const Index j = std::max(m, tail_.from);
    if (tail_.kind == TailRule::Kind::Geometric) {
      const Rat q = Rat(1) - tail_.ratio;
      acc += tail_.scale * tail_.ratio.pow(static_cast<unsigned>(j)) / (q * q);
    }
    return acc;
  }
  TotalCertificate total() const override {
    if (tail_.kind == TailRule::Kind::InversePower) return {TotalKind::FiniteBracketed, std::nullopt};
    return exact_total(*tail(1)->exact_value());
  }
  WeightedSumCertificate weighted_sum() const override { return certificate_; }
  std::optional<Index> positive_nonincreasing_from() const override { return tail_.from; }
  std::optional<Index> zero_beyond() const override {
    if (tail_.kind == TailRule::Kind::Zero) return tail_.from;
    return std::nullopt;
  }
  PriceModel::Kind kind() const override { return PriceModel::Kind::Custom; }
  std::string name() const override { return "custom"; }

 private:
  Rat rule_term(Index n) const {
    switch (tail_.kind) {
      case TailRule::Kind::Zero: return Rat(0);
      case TailRule::Kind::Geometric: return tail_.scale * tail_.ratio.pow(static_cast<unsigned>(n));
      case TailRule::Kind::InversePower: {
        BigInt d;
        mpz_ui_pow_ui(d.get_mpz_t(), static_cast<unsigned long>(n), tail_.exponent);
        return tail_.scale / Rat(d, BigInt(1));
      }
    }
    return Rat(0);
  }

  std::vector<Rat> prefix_;
  TailRule tail_;
  WeightedSumCertificate derived_{};
  WeightedSumCertificate certificate_{};
};

class EvenEmbeddingModel final : public ModelImpl {
 public:
  explicit EvenEmbeddingModel(PriceModel base) : base_(std::move(base)) {}
  Rat term(Index n) const override { return n % 2 == 0 ? base_.term(n / 2) : Rat(0); }
  std::optional<CertifiedReal> tail(Index n) const override { return base_.tail((n + 1) / 2); }
  std::optional<Rat> tail_of_tails(Index m) const override {
    const Index c = (m + 1) / 2;
    auto tt = base_.tail_of_tails(c);
    auto t = base_.tail(c);
    if (!tt || !t || !t->is_exact()) return std::nullopt;
    const Rat tc = *t->exact_value();
    return Rat(2) * (*tt + Rat(c - 1) * tc) - Rat(m - 1) * tc;
  }
  TotalCertificate total() const override { return base_.total(); }
  WeightedSumCertificate weighted_sum() const override { return base_.weighted_sum(); }
  std::optional<Index> positive_nonincreasing_from() const override {
    auto f = base_.positive_nonincreasing_from();
    if (!f) return std::nullopt;
    return 2 * *f;
  }
  std::optional<Index> zero_beyond() const override {
    auto z = base_.zero_beyond();
    if (!z) return std::nullopt;
    return 2 * *z - 1;
  }
  bool infinitely_many_zeros() const override { return true; }
  PriceModel::Kind kind() const override { return PriceModel::Kind::EvenEmbedding; }
  std::string name() const override { return "even:" + base_.name(); }

 private:
  PriceModel base_;
};

class ScaledModel final : public ModelImpl {
 public:
  ScaledModel(PriceModel base, Rat c) : base_(std::move(base)), c_(std::move(c)) {
    if (!c_.is_positive()) throw DomainError("scale factor must be positive");
  }
  Rat term(Index n) const override { return c_ * base_.term(n); }
  std::optional<CertifiedReal> tail(Index n) const override {
    auto t = base_.tail(n);
    if (!t) return std::nullopt;
    return t->times(c_);
  }
  std::optional<Rat> tail_of_tails(Index m) const override {
    auto t = base_.tail_of_tails(m);
    if (!t) return std::nullopt;
    return c_ * *t;
  }
  TotalCertificate total() const override {
    auto t = base_.total();
    if (t.exact) t.exact = c_ * *t.exact;
    return t;
  }
  WeightedSumCertificate weighted_sum() const override { return base_.weighted_sum(); }
  std::optional<Index> positive_nonincreasing_from() const override {
    return base_.positive_nonincreasing_from();
  }
  std::optional<Index> zero_beyond() const override { return base_.zero_beyond(); }
  bool infinitely_many_zeros() const override { return base_.has_infinitely_many_zeros(); }
  PriceModel::Kind kind() const override { return PriceModel::Kind::Scaled; }
  std::string name() const override { return "scaled:" + c_.str() + ":" + base_.name(); }

 private:
  PriceModel base_;
  Rat c_;
};

class RelabeledModel final : public ModelImpl {
 public:
  RelabeledModel(PriceModel base, Relabeling delta) : base_(std::move(base)), delta_(std::move(delta)) {}
  Rat term(Index n) const override { return base_.term(delta_(n)); }
  std::optional<CertifiedReal> tail(Index n) const override {
    const Index N = delta_.support();
    if (n > N) return base_.tail(n);
    auto rest = base_.tail(N + 1);
    if (!rest) return std::nullopt;
    Rat head;
    for (Index i = n; i <= N; ++i) head += term(i);
    return rest->plus(head);
  }
  std::optional<Rat> tail_of_tails(Index m) const override {
    const Index N = delta_.support();
    if (m > N) return base_.tail_of_tails(m);
    auto rest = base_.tail_of_tails(N + 1);
    if (!rest) return std::nullopt;
    // Sum of tail(n) for n in [m..N] = sum over i in [m..N] of (i-m+1) term(i)
    // plus (N-m+1) * base tail(N+1).
    auto base_tail = base_.tail(N + 1);
    if (!base_tail || !base_tail->is_exact()) return std::nullopt;
    Rat acc = *rest + Rat(N - m + 1) * *base_tail->exact_value();
    for (Index i = m; i <= N; ++i) acc += Rat(i - m + 1) * term(i);
    return acc;
  }
  TotalCertificate total() const override { return base_.total(); }
  WeightedSumCertificate weighted_sum() const override { return base_.weighted_sum(); }
  std::optional<Index> positive_nonincreasing_from() const override {
    auto f = base_.positive_nonincreasing_from();
    if (!f) return std::nullopt;
    return std::max(*f, delta_.support() + 1);
  }
  std::optional<Index> zero_beyond() const override {
    auto z = base_.zero_beyond();
    if (!z) return std::nullopt;
    return std::max(*z, delta_.support() + 1);
  }
  bool infinitely_many_zeros() const override { return base_.has_infinitely_many_zeros(); }
  PriceModel::Kind kind() const override { return PriceModel::Kind::Relabeled; }
  std::string name() const override { return "relabeled:" + base_.name(); }

 private:
  PriceModel base_;
  Relabeling delta_;
};

class ZeroOmittedModel final : public ModelImpl {
 public:
  explicit ZeroOmittedModel(PriceModel base) : base_(std::move(base)) {}
  Rat term(Index k) const override {
    auto idx = source_index(k);
    return idx ? base_.term(*idx) : Rat(0);
  }
  std::optional<CertifiedReal> tail(Index k) const override {
    auto idx = source_index(k);
    if (!idx) return CertifiedReal::exact(Rat(0));
    return base_.tail(*idx);
  }
  TotalCertificate total() const override { return base_.total(); }
  WeightedSumCertificate weighted_sum() const override { return base_.weighted_sum(); }
  std::optional<Index> positive_nonincreasing_from() const override {
    auto f = base_.positive_nonincreasing_from();
    if (!f) return std::nullopt;
    return base_.positive_indices(*f, *f - 1).size() + 1;
  }
  std::optional<Index> zero_beyond() const override {
    if (!base_.zero_beyond()) return std::nullopt;
    const Index z = *base_.zero_beyond();
    return base_.positive_indices(z, z - 1).size() + 1;
  }
  bool infinitely_many_zeros() const override { return zero_beyond().has_value(); }
  PriceModel::Kind kind() const override { return PriceModel::Kind::ZeroOmitted; }
  std::string name() const override { return "omit-zeros:" + base_.name(); }

 private:
  // Index of the k-th positive term, or empty when the base has fewer.
  std::optional<Index> source_index(Index k) const {
    auto idx = base_.positive_indices(k);
    if (idx.size() == k) return idx.back();
    if (!base_.zero_beyond()) {
      throw HorizonError("fewer than " + std::to_string(k) +
                         " positive terms found within the search horizon");
    }
    return std::nullopt;
  }

  PriceModel base_;
};

class BlackBoxModel final : public ModelImpl {
 public:
  BlackBoxModel(std::function<Rat(Index)> f, std::string name) : f_(std::move(f)), name_(std::move(name)) {}
  Rat term(Index n) const override { return f_(n); }
  std::optional<CertifiedReal> tail(Index) const override { return std::nullopt; }
  TotalCertificate total() const override { return {}; }
  WeightedSumCertificate weighted_sum() const override { return WeightedSumCertificate::Unknown; }
  bool infinitely_many_zeros() const override { return false; }
  PriceModel::Kind kind() const override { return PriceModel::Kind::BlackBox; }
  std::string name() const override { return name_; }

 private:
  std::function<Rat(Index)> f_;
  std::string name_;
};

}  // namespace

// ---------------------------------------------------------------- PriceModel

PriceModel PriceModel::geometric(const Rat& ratio) {
  return PriceModel(std::make_shared<GeometricModel>(ratio));
}
PriceModel PriceModel::inverse_square() { return PriceModel(std::make_shared<InverseSquareModel>()); }
PriceModel PriceModel::harmonic() { return PriceModel(std::make_shared<HarmonicModel>()); }
PriceModel PriceModel::custom(std::vector<std::pair<Index, Rat>> prefix, TailRule tail,
                              std::optional<WeightedSumCertificate> declared) {
  return PriceModel(std::make_shared<CustomModel>(std::move(prefix), std::move(tail), declared));
}
PriceModel PriceModel::black_box(std::function<Rat(Index)> term, std::string name) {
  return PriceModel(std::make_shared<BlackBoxModel>(std::move(term), std::move(name)));
}
PriceModel PriceModel::even_embedding() const {
  return PriceModel(std::make_shared<EvenEmbeddingModel>(*this));
}
PriceModel PriceModel::scaled(const Rat& factor) const {
  return PriceModel(std::make_shared<ScaledModel>(*this, factor));
}
PriceModel PriceModel::relabeled(const Relabeling& delta) const {
  if (delta.is_identity()) return *this;
  return PriceModel(std::make_shared<RelabeledModel>(*this, delta));
}

Rat PriceModel::term(Index n) const {
  if (n == 0) throw DomainError("indices start at 1");
  return impl_->term(n);
}
std::optional<CertifiedReal> PriceModel::tail(Index n) const {
  if (n == 0) throw DomainError("indices start at 1");
  return impl_->tail(n);
}
std::optional<Rat> PriceModel::tail_of_tails(Index m) const {
  if (m == 0) throw DomainError("indices start at 1");
  return impl_->tail_of_tails(m);
}
TotalCertificate PriceModel::total() const { return impl_->total(); }
WeightedSumCertificate PriceModel::weighted_sum() const { return impl_->weighted_sum(); }
std::optional<Index> PriceModel::positive_nonincreasing_from() const {
  return impl_->positive_nonincreasing_from();
}
std::optional<Index> PriceModel::zero_beyond() const { return impl_->zero_beyond(); }
bool PriceModel::has_infinitely_many_zeros() const { return impl_->infinitely_many_zeros(); }
PriceModel::Kind PriceModel::kind() const { return impl_->kind(); }
std::string PriceModel::name() const { return impl_->name(); }
std::vector<Index> PriceModel::positive_indices(Index count, Index limit) const {
  return impl_->positive_indices(count, limit);
}

PriceModel PriceModel::parse_custom(std::istream& in) {
  std::vector<std::pair<Index, Rat>> prefix;
  std::optional<TailRule> tail;
  std::optional<WeightedSumCertificate> declared;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ContractViolation("model line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (tail) fail("content after the tail line");
    if (head == "tail") {
      std::string kind;
      TailRule rule;
      ls >> kind;
      if (kind == "zero") {
        rule.kind = TailRule::Kind::Zero;
      } else if (kind == "geometric") {
        std::string r;
        if (!(ls >> r)) fail("missing geometric ratio");
        rule.kind = TailRule::Kind::Geometric;
        rule.ratio = Rat::parse(r);
      } else if (kind == "inverse-power") {
        rule.kind = TailRule::Kind::InversePower;
        if (!(ls >> rule.exponent)) fail("missing exponent");
      } else {
        fail("unknown tail kind '" + kind + "'");
      }
      std::string from;
      if (!(ls >> from) || from != "from" || !(ls >> rule.from)) fail("expected 'from <index>'");
      std::string word;
      if (ls >> word) {
        std::string s;
        if (word != "scale" || !(ls >> s)) fail("expected 'scale <rational>'");
        rule.scale = Rat::parse(s);
      }
      tail = rule;
    } else if (head == "certificate") {
      std::string c;
      ls >> c;
      if (c == "converges") {
        declared = WeightedSumCertificate::ConvergesUnderSomeRearrangement;
      } else if (c == "diverges") {
        declared = WeightedSumCertificate::DivergesUnderAllRearrangements;
      } else if (c == "unknown") {
        declared = WeightedSumCertificate::Unknown;
      } else {
        fail("unknown certificate '" + c + "'");
      }
    } else {
      std::string value;
      if (!(ls >> value)) fail("expected 'index value'");
      Index idx = 0;
      try {
        idx = std::stoull(head);
      } catch (const std::exception&) {
        fail("bad index '" + head + "'");
      }
      try {
        prefix.emplace_back(idx, Rat::parse(value));
      } catch (const DomainError& e) {
        fail(e.what());
      }
    }
  }
  if (!tail) throw ContractViolation("model file lacks a tail line");
  return custom(std::move(prefix), *tail, declared);
}

PriceModel PriceModel::from_spec(const std::string& spec) {
  if (spec == "geometric") return geometric(Rat(BigInt(1), BigInt(2)));
  if (spec.rfind("geometric:", 0) == 0) return geometric(Rat::parse(spec.substr(10)));
  if (spec == "inverse-square") return inverse_square();
  if (spec == "harmonic") return harmonic();
  if (spec.rfind("even:", 0) == 0) return from_spec(spec.substr(5)).even_embedding();
  if (spec.rfind("file:", 0) == 0) {
    std::ifstream in(spec.substr(5));
    if (!in) throw ContractViolation("cannot open model file '" + spec.substr(5) + "'");
    return parse_custom(in);
  }
  throw ContractViolation("unknown model spec '" + spec + "'");
}

// ------------------------------------------------------------ rearrangements

namespace {

// Up to horizon positive indices in non-increasing term order (ties by index).
std::vector<Index> sorted_positive_prefix(const PriceModel& model, Index horizon) {
  auto from = model.positive_nonincreasing_from();
  const auto zero = model.zero_beyond();
  if (!from && zero) from = zero;
  if (!from) {
    throw CapabilityError("model '" + model.name() + "' declares no tail structure to sort by");
  }
  struct Entry {
    Rat value;
    Index index;
  };
  std::vector<Entry> entries;
  for (Index i = 1; i < *from; ++i) {
    Rat v = model.term(i);
    if (v.is_positive()) entries.push_back({std::move(v), i});
  }
  Index found = 0;
  for (Index i = *from; found < horizon; ++i) {
    if (zero && i >= *zero) break;
    if (i - *from > kDefaultSearchHorizon) {
      throw HorizonError("positive terms too sparse to sort within the search horizon");
    }
    Rat v = model.term(i);
    if (v.is_positive()) {
      entries.push_back({std::move(v), i});
      ++found;
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return b.value < a.value;
    return a.index < b.index;
  });
  if (entries.size() > horizon) entries.resize(horizon);
  std::vector<Index> out;
  out.reserve(horizon);
  for (auto& e : entries) out.push_back(e.index);
  return out;
}

Relabeling arrange(const PriceModel& model, Index horizon) {
  std::vector<Index> images = sorted_positive_prefix(model, horizon);
  if (images.size() < horizon) {
    std::set<Index> used(images.begin(), images.end());
    for (Index i = 1; images.size() < horizon; ++i) {
      if (!used.contains(i) && model.term(i).is_zero()) images.push_back(i);
    }
  }
  return Relabeling::from_prefix_images(images);
}

}  // namespace

Relabeling descending_rearrangement(const PriceModel& model, Index horizon) {
  if (model.has_infinitely_many_zeros() && !model.zero_beyond()) {
    throw CapabilityError("model '" + model.name() +
                          "' interleaves infinitely many zeros with positive terms; no "
                          "descending arrangement exists (use the quasi-descending one)");
  }
  return arrange(model, horizon);
}

Relabeling quasi_descending_rearrangement(const PriceModel& model, Index horizon) {
  return arrange(model, horizon);
}

ZeroOmission omit_zeros(const PriceModel& model, Index horizon) {
  ZeroOmission out{PriceModel(std::make_shared<ZeroOmittedModel>(model)), {}};
  Index k = 0;
  for (Index i = 1; i <= horizon; ++i) {
    if (model.term(i).is_positive()) out.alpha.emplace_back(i, ++k);
  }
  return out;
}

Rat weighted_partial_sum(const PriceModel& model, std::span<const Index> images) {
  std::set<Index> seen;
  Rat sum;
  Index n = 0;
  for (Index v : images) {
    ++n;
    if (!seen.insert(v).second) {
      throw DomainError("weighted_partial_sum: arrangement repeats index " + std::to_string(v));
    }
    sum += Rat(n) * model.term(v);
  }
  return sum;
}

Rat weighted_partial_sum(const PriceModel& model, const Relabeling& delta, Index m) {
  Rat sum;
  for (Index n = 1; n <= m; ++n) sum += Rat(n) * model.term(delta(n));
  return sum;
}

}  // namespace prisoners
