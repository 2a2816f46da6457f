#include "thermoshift/shift.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>

#include "thermoshift/error.hpp"

namespace thermoshift {

TransitionModel::TransitionModel(std::string name, Rule rule, Symbol first_symbol,
                                 std::optional<Symbol> last_symbol)
    : name_(std::move(name)), rule_(std::move(rule)), first_(first_symbol), last_(last_symbol) {
  if (!rule_) throw DomainError("transition model '" + name_ + "' has no rule");
  if (last_ && *last_ < first_) throw DomainError("transition model '" + name_ + "' is empty");
}

TransitionModel TransitionModel::full_shift(std::optional<Symbol> size) {
  if (size && *size < 1) throw DomainError("full shift size must be >= 1");
  return {"full", [](Symbol, Symbol) { return true; }, 1, size};
}

TransitionModel TransitionModel::golden_mean() {
  return {"golden_mean", [](Symbol i, Symbol j) { return !(i == 2 && j == 2); }, 1, 2};
}

TransitionModel TransitionModel::example2_x() {
  return {"example2_X", [](Symbol i, Symbol j) { return i == 0 || j == 0; }, 0, std::nullopt};
}

TransitionModel TransitionModel::example2_y() {
  return {"example2_Y", [](Symbol i, Symbol j) { return i == 1 || j == 1; }, 1, std::nullopt};
}

TransitionModel TransitionModel::renewal() {
  return {"renewal", [](Symbol i, Symbol j) { return i == 1 || j == i - 1; }, 1, std::nullopt};
}

TransitionModel TransitionModel::from_arcs(std::vector<std::pair<Symbol, Symbol>> arcs) {
  if (arcs.empty()) throw DomainError("arc list is empty");
  auto set = std::make_shared<const std::set<std::pair<Symbol, Symbol>>>(arcs.begin(), arcs.end());
  Symbol lo = arcs.front().first;
  Symbol hi = lo;
  for (const auto& [i, j] : arcs) {
    lo = std::min({lo, i, j});
    hi = std::max({hi, i, j});
  }
  return {"arcs", [set](Symbol i, Symbol j) { return set->contains({i, j}); }, lo, hi};
}

TransitionModel TransitionModel::named(const std::string& name, std::optional<Symbol> size) {
  if (name == "full") return full_shift(size);
  if (name == "golden_mean") return golden_mean();
  if (name == "example2_X") return example2_x();
  if (name == "example2_Y") return example2_y();
  if (name == "renewal") return renewal();
  throw DomainError("unknown transition rule '" + name + "'");
}

bool TransitionModel::in_domain(Symbol s) const noexcept {
  return s >= first_ && (!last_ || s <= *last_);
}

bool TransitionModel::allows(Symbol from, Symbol to) const {
  if (!in_domain(from) || !in_domain(to)) {
    throw DomainError("symbol outside the alphabet of '" + name_ + "': (" +
                      std::to_string(from) + "," + std::to_string(to) + ")");
  }
  return rule_(from, to);
}

FiniteSubshift::FiniteSubshift(std::vector<Symbol> symbols, std::vector<std::uint8_t> adjacency,
                               std::vector<Symbol> dropped)
    : symbols_(std::move(symbols)), adjacency_(std::move(adjacency)), dropped_(std::move(dropped)) {
  const std::size_t m = symbols_.size();
  if (m == 0) throw DegenerateTruncation("degenerate truncation: no symbols survive");
  if (adjacency_.size() != m * m) throw DomainError("adjacency size does not match symbol count");
  if (!std::is_sorted(symbols_.begin(), symbols_.end()) ||
      std::adjacent_find(symbols_.begin(), symbols_.end()) != symbols_.end()) {
    throw DomainError("subshift symbols must be strictly increasing");
  }
  successors_.resize(m);
  predecessors_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (adjacency_[i * m + j] != 0) {
        adjacency_[i * m + j] = 1;
        successors_[i].push_back(j);
        predecessors_[j].push_back(i);
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (successors_[i].empty() || predecessors_[i].empty()) {
      throw DomainError("symbol " + std::to_string(symbols_[i]) +
                        " has an all-zero row or column");
    }
  }
}

std::optional<std::size_t> FiniteSubshift::index_of(Symbol s) const noexcept {
  auto it = std::lower_bound(symbols_.begin(), symbols_.end(), s);
  if (it == symbols_.end() || *it != s) return std::nullopt;
  return static_cast<std::size_t>(it - symbols_.begin());
}

bool FiniteSubshift::allows(Symbol from, Symbol to) const noexcept {
  auto i = index_of(from);
  auto j = index_of(to);
  return i && j && allows_index(*i, *j);
}

std::size_t FiniteSubshift::arc_count() const noexcept {
  return static_cast<std::size_t>(std::count(adjacency_.begin(), adjacency_.end(), 1));
}

namespace {

using BoolMatrix = std::vector<std::uint8_t>;

BoolMatrix bool_multiply(const BoolMatrix& a, const BoolMatrix& b, std::size_t m) {
  BoolMatrix c(m * m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k)
      if (a[i * m + k])
        for (std::size_t j = 0; j < m; ++j) c[i * m + j] |= b[k * m + j];
  return c;
}

BoolMatrix adjacency_of(const FiniteSubshift& sub) {
  const std::size_t m = sub.size();
  BoolMatrix a(m * m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j : sub.successors(i)) a[i * m + j] = 1;
  return a;
}

bool all_positive(const BoolMatrix& a) {
  return std::all_of(a.begin(), a.end(), [](std::uint8_t v) { return v != 0; });
}

}  // namespace

FiniteSubshift FiniteSubshift::with_mixing_certificate(int exponent) const {
  if (exponent < 1) throw DomainError("mixing exponent must be >= 1");
  const std::size_t m = size();
  const BoolMatrix base = adjacency_of(*this);
  BoolMatrix power = base;
  for (int k = 1; k < exponent; ++k) power = bool_multiply(power, base, m);
  if (!all_positive(power)) {
    throw NotMixing("matrix^" + std::to_string(exponent) + " is not entrywise positive");
  }
  FiniteSubshift copy = *this;
  copy.mixing_ = exponent;
  return copy;
}

bool is_admissible(WordView word, const TransitionModel& model) {
  if (word.empty()) throw DomainError("empty word");
  for (Symbol s : word) {
    if (!model.in_domain(s)) throw DomainError("symbol " + std::to_string(s) + " outside alphabet");
  }
  for (std::size_t k = 0; k + 1 < word.size(); ++k) {
    if (!model.allows(word[k], word[k + 1])) return false;
  }
  return true;
}

bool is_admissible(WordView word, const FiniteSubshift& sub) {
  if (word.empty()) throw DomainError("empty word");
  for (Symbol s : word) {
    if (!sub.contains(s)) return false;
  }
  for (std::size_t k = 0; k + 1 < word.size(); ++k) {
    if (!sub.allows(word[k], word[k + 1])) return false;
  }
  return true;
}

FiniteSubshift truncate(const TransitionModel& model, Symbol m) {
  if (m < 1) throw DomainError("truncation level must be >= 1");
  Symbol last = model.first_symbol() + m - 1;
  if (model.last_symbol()) last = std::min(last, *model.last_symbol());

  std::vector<Symbol> alive;
  for (Symbol s = model.first_symbol(); s <= last; ++s) alive.push_back(s);
  std::vector<Symbol> dropped;

  // Drop symbols with empty rows/columns until the restriction is stable.
  for (;;) {
    const std::size_t n = alive.size();
    std::vector<bool> keep(n, true);
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      bool row = false;
      bool col = false;
      for (std::size_t j = 0; j < n && !(row && col); ++j) {
        row = row || model.allows(alive[i], alive[j]);
        col = col || model.allows(alive[j], alive[i]);
      }
      if (!row || !col) {
        keep[i] = false;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Symbol> next;
    for (std::size_t i = 0; i < n; ++i) {
      (keep[i] ? next : dropped).push_back(alive[i]);
    }
    alive = std::move(next);
    if (alive.empty()) throw DegenerateTruncation("degenerate truncation at m=" + std::to_string(m));
  }

  const std::size_t n = alive.size();
  std::vector<std::uint8_t> adjacency(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) adjacency[i * n + j] = model.allows(alive[i], alive[j]) ? 1 : 0;
  std::sort(dropped.begin(), dropped.end());
  return FiniteSubshift(std::move(alive), std::move(adjacency), std::move(dropped));
}

namespace {

// Irreducible with period 1, via BFS levels from symbol 0.
bool is_primitive(const FiniteSubshift& sub) {
  const std::size_t m = sub.size();
  std::vector<long> level(m, -1);
  std::vector<std::size_t> queue{0};
  level[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (std::size_t j : sub.successors(queue[head])) {
      if (level[j] < 0) {
        level[j] = level[queue[head]] + 1;
        queue.push_back(j);
      }
    }
  }
  if (queue.size() != m) return false;
  std::vector<bool> seen(m, false);
  std::vector<std::size_t> back{0};
  seen[0] = true;
  for (std::size_t head = 0; head < back.size(); ++head) {
    for (std::size_t j : sub.predecessors(back[head])) {
      if (!seen[j]) {
        seen[j] = true;
        back.push_back(j);
      }
    }
  }
  if (back.size() != m) return false;
  long period = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j : sub.successors(i)) period = std::gcd(period, std::labs(level[i] + 1 - level[j]));
  return period == 1;
}

}  // namespace

std::optional<int> check_mixing(const FiniteSubshift& sub, int max_exponent) {
  const std::size_t m = sub.size();
  if (!is_primitive(sub)) return std::nullopt;
  const BoolMatrix base = adjacency_of(sub);
  BoolMatrix power = base;
  for (int k = 1; k <= max_exponent; ++k) {
    if (all_positive(power)) return k;
    power = bool_multiply(power, base, m);
  }
  return std::nullopt;
}

namespace {

struct Saturating {
  std::uint64_t value = 0;
  bool saturated = false;

  void add_product(const Saturating& a, std::uint64_t weight) {
    if (a.saturated) {
      saturated = saturated || weight != 0;
      return;
    }
    std::uint64_t prod = 0;
    if (__builtin_mul_overflow(a.value, weight, &prod) ||
        __builtin_add_overflow(value, prod, &value)) {
      saturated = true;
      value = UINT64_MAX;
    }
  }
};

std::vector<Saturating> step(const FiniteSubshift& sub, const std::vector<Saturating>& v) {
  std::vector<Saturating> next(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) {
    if (v[i].value == 0 && !v[i].saturated) continue;
    for (std::size_t j : sub.successors(i)) next[j].add_product(v[i], 1);
  }
  return next;
}

}  // namespace

PeriodicCount count_periodic(const FiniteSubshift& sub, int n, Symbol a) {
  auto start = sub.index_of(a);
  if (!start) throw DomainError("symbol " + std::to_string(a) + " not in subshift");
  if (n < 1) throw DomainError("period must be >= 1");
  std::vector<Saturating> v(sub.size());
  v[*start].value = 1;
  for (int k = 0; k < n; ++k) v = step(sub, v);
  return {v[*start].value, v[*start].saturated};
}

PeriodicCount count_words(const FiniteSubshift& sub, int n) {
  if (n < 1) throw DomainError("word length must be >= 1");
  std::vector<Saturating> v(sub.size());
  for (auto& s : v) s.value = 1;
  for (int k = 1; k < n; ++k) v = step(sub, v);
  Saturating total;
  for (const auto& s : v) total.add_product(s, 1);
  return {total.value, total.saturated};
}

std::vector<Word> enumerate_periodic_words(const FiniteSubshift& sub, int n, Symbol a) {
  std::vector<Word> out;
  visit_periodic_words(sub, n, a, [&](WordView w) { out.emplace_back(w.begin(), w.end()); });
  return out;
}

BipReport check_bip(const TransitionModel& model, const std::vector<Symbol>& witness_set,
                    Symbol up_to) {
  if (witness_set.empty()) throw DomainError("BIP witness set is empty");
  if (up_to < *std::max_element(witness_set.begin(), witness_set.end())) {
    throw DomainError("BIP bound must cover the witness set");
  }
  Symbol last = up_to;
  if (model.last_symbol()) last = std::min(last, *model.last_symbol());
  for (Symbol a = model.first_symbol(); a <= last; ++a) {
    bool image = false;
    bool preimage = false;
    for (Symbol b : witness_set) {
      preimage = preimage || model.allows(b, a);
      image = image || model.allows(a, b);
    }
    if (!image || !preimage) return {std::nullopt, a};
  }
  return {BipCertificate{witness_set, last}, std::nullopt};
}

}  // namespace thermoshift
