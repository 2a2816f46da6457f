#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace thermoshift {

using Symbol = std::int64_t;
using Word = std::vector<Symbol>;
using WordView = std::span<const Symbol>;

/// A 0/1 transition rule over a (possibly countable) alphabet of consecutive
/// integer symbols starting at `first_symbol()`. Countable alphabets are
/// pure predicates; nothing infinite is ever materialized.
class TransitionModel {
 public:
  using Rule = std::function<bool(Symbol, Symbol)>;

  TransitionModel(std::string name, Rule rule, Symbol first_symbol,
                  std::optional<Symbol> last_symbol);

  /// Full shift on {1..size}, or on all positive integers when size is empty.
  static TransitionModel full_shift(std::optional<Symbol> size = std::nullopt);
  /// t11 = t12 = t21 = 1, t22 = 0.
  static TransitionModel golden_mean();
  /// Symbols 0,1,2,...; a_{i0} = a_{0j} = 1, all other entries 0.
  static TransitionModel example2_x();
  /// Symbols 1,2,...; b_{i1} = b_{1j} = 1, all other entries 0.
  static TransitionModel example2_y();
  /// Renewal shift: 1 -> n for every n, n -> n-1 for n >= 2.
  static TransitionModel renewal();
  /// Finite model whose allowed pairs are exactly `arcs`.
  static TransitionModel from_arcs(std::vector<std::pair<Symbol, Symbol>> arcs);
  /// Registry lookup: full | golden_mean | example2_X | example2_Y | renewal.
  static TransitionModel named(const std::string& name,
                               std::optional<Symbol> size = std::nullopt);

  /// Rule value; throws DomainError for symbols outside the alphabet.
  bool allows(Symbol from, Symbol to) const;
  bool in_domain(Symbol s) const noexcept;

  Symbol first_symbol() const noexcept { return first_; }
  std::optional<Symbol> last_symbol() const noexcept { return last_; }
  bool is_finite() const noexcept { return last_.has_value(); }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  Rule rule_;
  Symbol first_;
  std::optional<Symbol> last_;
};

/// A finite state Markov shift over an ordered set of retained symbols.
class FiniteSubshift {
 public:
  /// `adjacency` is row-major, symbols.size() squared entries of 0/1.
  FiniteSubshift(std::vector<Symbol> symbols, std::vector<std::uint8_t> adjacency,
                 std::vector<Symbol> dropped = {});

  std::size_t size() const noexcept { return symbols_.size(); }
  std::span<const Symbol> symbols() const noexcept { return symbols_; }
  Symbol symbol(std::size_t index) const { return symbols_[index]; }
  /// Symbols removed during truncation because their row or column emptied.
  std::span<const Symbol> dropped() const noexcept { return dropped_; }

  std::optional<std::size_t> index_of(Symbol s) const noexcept;
  bool contains(Symbol s) const noexcept { return index_of(s).has_value(); }

  bool allows_index(std::size_t i, std::size_t j) const noexcept {
    return adjacency_[i * symbols_.size() + j] != 0;
  }
  /// False when either symbol is not retained.
  bool allows(Symbol from, Symbol to) const noexcept;

  std::span<const std::size_t> successors(std::size_t i) const noexcept {
    return successors_[i];
  }
  std::span<const std::size_t> predecessors(std::size_t i) const noexcept {
    return predecessors_[i];
  }
  std::size_t arc_count() const noexcept;

  /// Primitivity exponent N (matrix^N > 0), once attached.
  std::optional<int> mixing_certificate() const noexcept { return mixing_; }
  /// Attaches N after verifying matrix^N is entrywise positive.
  FiniteSubshift with_mixing_certificate(int exponent) const;

 private:
  std::vector<Symbol> symbols_;
  std::vector<std::uint8_t> adjacency_;
  std::vector<Symbol> dropped_;
  std::vector<std::vector<std::size_t>> successors_;
  std::vector<std::vector<std::size_t>> predecessors_;
  std::optional<int> mixing_;
};

/// Every consecutive pair allowed by the model (no wrap-around pair).
bool is_admissible(WordView word, const TransitionModel& model);
bool is_admissible(WordView word, const FiniteSubshift& sub);

/// Restriction to the first m symbols of the alphabet, with symbols whose row
/// or column becomes all-zero removed repeatedly until none remain.
FiniteSubshift truncate(const TransitionModel& model, Symbol m);

/// Smallest N <= max_exponent with matrix^N entrywise positive.
std::optional<int> check_mixing(const FiniteSubshift& sub, int max_exponent);

/// Saturating count. `saturated` means the true value exceeds `value`.
struct PeriodicCount {
  std::uint64_t value = 0;
  bool saturated = false;
};

/// (matrix^n)_{aa}, the number of period-n words starting at a.
PeriodicCount count_periodic(const FiniteSubshift& sub, int n, Symbol a);
/// Number of admissible words of length n (no wrap-around condition).
PeriodicCount count_words(const FiniteSubshift& sub, int n);

namespace detail {

template <class Visitor>
void visit_words_from(const FiniteSubshift& sub, Word& buffer, std::vector<std::size_t>& idx,
                      std::size_t depth, std::size_t n, std::size_t wrap_to, bool periodic,
                      Visitor& visit) {
  if (depth == n) {
    if (!periodic || sub.allows_index(idx[n - 1], wrap_to)) visit(WordView(buffer));
    return;
  }
  for (std::size_t next : sub.successors(idx[depth - 1])) {
    idx[depth] = next;
    buffer[depth] = sub.symbol(next);
    visit_words_from(sub, buffer, idx, depth + 1, n, wrap_to, periodic, visit);
  }
}

}  // namespace detail

/// Visits, depth-first lexicographically by symbol index, every word w of
/// length n with w_0 = a, admissible consecutive pairs, and allowed wrap pair
/// (w_{n-1}, w_0). When `second` is set only words with w_1 = second are
/// visited (prefix splitting for parallel reductions; requires n >= 2).
template <class Visitor>
void visit_periodic_words(const FiniteSubshift& sub, int n, Symbol a, Visitor&& visit,
                          std::optional<Symbol> second = std::nullopt) {
  auto start = sub.index_of(a);
  if (!start || n < 1) return;
  const auto len = static_cast<std::size_t>(n);
  Word buffer(len);
  std::vector<std::size_t> idx(len);
  buffer[0] = a;
  idx[0] = *start;
  if (second) {
    auto s = sub.index_of(*second);
    if (!s || len < 2 || !sub.allows_index(*start, *s)) return;
    buffer[1] = *second;
    idx[1] = *s;
    detail::visit_words_from(sub, buffer, idx, 2, len, *start, true, visit);
    return;
  }
  detail::visit_words_from(sub, buffer, idx, 1, len, *start, true, visit);
}

/// Visits every admissible word of length n, lexicographically by index.
template <class Visitor>
void visit_words(const FiniteSubshift& sub, int n, Visitor&& visit) {
  if (n < 1) return;
  const auto len = static_cast<std::size_t>(n);
  Word buffer(len);
  std::vector<std::size_t> idx(len);
  for (std::size_t i = 0; i < sub.size(); ++i) {
    buffer[0] = sub.symbol(i);
    idx[0] = i;
    detail::visit_words_from(sub, buffer, idx, 1, len, 0, false, visit);
  }
}

/// Materialized form of visit_periodic_words.
std::vector<Word> enumerate_periodic_words(const FiniteSubshift& sub, int n, Symbol a);

/// Witness set verified to provide big images and preimages up to a bound.
struct BipCertificate {
  std::vector<Symbol> witness_set;
  Symbol verified_up_to = 0;
};

struct BipReport {
  std::optional<BipCertificate> certificate;
  /// First symbol lacking an image or a preimage in the witness set.
  std::optional<Symbol> first_failure;

  bool ok() const noexcept { return certificate.has_value(); }
};

BipReport check_bip(const TransitionModel& model, const std::vector<Symbol>& witness_set,
                    Symbol up_to);

}  // namespace thermoshift
