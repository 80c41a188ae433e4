#include "marx/qm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <unordered_set>

#include "marx/error.hpp"

namespace marx {
namespace {

constexpr const char* kModule = "explainer";

std::uint64_t full_mask(int numVars) {
  return numVars >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << numVars) - 1;
}

struct PairHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept {
    return std::hash<std::uint64_t>{}(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
  }
};

/// Fixed-width bitset, used both over minterms and over primes.
class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : words_((n + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const { return ((words_[i / 64] >> (i % 64)) & 1U) != 0; }
  bool any() const {
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
  }
  int count() const {
    int c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }
  bool intersects(const Bits& o) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if ((words_[k] & o.words_[k]) != 0) return true;
    }
    return false;
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if ((words_[k] & ~o.words_[k]) != 0) return false;
    }
    return true;
  }
  Bits operator&(const Bits& o) const {
    Bits r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= o.words_[k];
    return r;
  }
  Bits& operator|=(const Bits& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
    return *this;
  }
  Bits minus(const Bits& o) const {
    Bits r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= ~o.words_[k];
    return r;
  }
  std::size_t first() const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (words_[k] != 0) return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
    }
    return static_cast<std::size_t>(-1);
  }
  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      for (std::uint64_t w = words_[k]; w != 0; w &= w - 1) {
        f(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
      }
    }
  }
  friend bool operator==(const Bits&, const Bits&) = default;

 private:
  std::vector<std::uint64_t> words_;
};

/// Exact unate covering of rows (minterms) by columns (primes):
/// branch and bound over the cyclic core left by essential-column,
/// row-dominance and column-dominance reductions.
class CoverSolver {
 public:
  CoverSolver(std::vector<Bits> columnRows, std::size_t numRows)
      : cols_(std::move(columnRows)), rowCols_(numRows, Bits(cols_.size())) {
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      cols_[c].for_each([&](std::size_t r) { rowCols_[r].set(c); });
    }
  }

  std::size_t num_columns() const { return cols_.size(); }

  /// Smallest number of allowed columns covering `rows`, or nullopt when
  /// none exists with at most `budget` columns.
  std::optional<int> min_cover(const Bits& rows, const Bits& allowed, int budget) {
    best_ = budget + 1;
    budget_ = budget;
    stopAtFirst_ = false;
    search(rows, allowed, 0);
    if (best_ > budget) return std::nullopt;
    return best_;
  }

  bool coverable(const Bits& rows, const Bits& allowed, int budget) {
    best_ = budget + 1;
    budget_ = budget;
    stopAtFirst_ = true;
    search(rows, allowed, 0);
    return best_ <= budget;
  }

 private:
  bool done() const { return stopAtFirst_ && best_ <= budget_; }

  /// Returns false when the node cannot lead to a cover better than best_.
  bool reduce(Bits& rows, Bits& allowed, int& used) {
    for (bool changed = true; changed;) {
      changed = false;
      if (!rows.any()) return true;
      if (used + 1 >= best_) return false;

      bool dead = false;
      rows.for_each([&](std::size_t r) {
        if (dead || !rows.test(r)) return;
        Bits avail = rowCols_[r] & allowed;
        int n = avail.count();
        if (n == 0) {
          dead = true;
        } else if (n == 1) {
          std::size_t c = avail.first();
          rows = rows.minus(cols_[c]);
          allowed.reset(c);
          ++used;
          changed = true;
        }
      });
      if (dead) return false;
      if (changed) continue;

      std::vector<std::size_t> live;
      std::vector<Bits> reach;
      allowed.for_each([&](std::size_t c) {
        Bits r = cols_[c] & rows;
        if (r.any()) {
          live.push_back(c);
          reach.push_back(std::move(r));
        } else {
          allowed.reset(c);
        }
      });
      for (std::size_t i = 0; i < live.size(); ++i) {
        for (std::size_t k = 0; k < live.size(); ++k) {
          if (i == k || !allowed.test(live[k])) continue;
          if (reach[i].subset_of(reach[k]) && (reach[i] != reach[k] || live[k] < live[i])) {
            allowed.reset(live[i]);
            changed = true;
            break;
          }
        }
      }
      if (changed) continue;

      std::vector<std::size_t> active;
      std::vector<Bits> avail;
      rows.for_each([&](std::size_t r) {
        active.push_back(r);
        avail.push_back(rowCols_[r] & allowed);
      });
      for (std::size_t i = 0; i < active.size(); ++i) {
        for (std::size_t k = 0; k < active.size(); ++k) {
          if (i == k || !rows.test(active[k])) continue;
          // Covering row k's options covers row i too.
          if (avail[k].subset_of(avail[i]) && (avail[k] != avail[i] || active[k] < active[i])) {
            rows.reset(active[i]);
            changed = true;
            break;
          }
        }
      }
    }
    return true;
  }

  void search(Bits rows, Bits allowed, int used) {
    if (!reduce(rows, allowed, used)) return;
    if (!rows.any()) {
      best_ = std::min(best_, used);
      return;
    }

    std::vector<std::pair<int, std::size_t>> order;
    rows.for_each([&](std::size_t r) { order.emplace_back((rowCols_[r] & allowed).count(), r); });
    std::sort(order.begin(), order.end());
    Bits taken(cols_.size());
    int bound = 0;
    for (const auto& [n, r] : order) {
      Bits avail = rowCols_[r] & allowed;
      if (avail.intersects(taken)) continue;
      ++bound;
      taken |= avail;
    }
    if (used + bound >= best_) return;

    // Fractional dual: row r may carry 1 / (largest column through r).
    std::vector<int> reach(cols_.size(), 0);
    allowed.for_each([&](std::size_t c) { reach[c] = (cols_[c] & rows).count(); });
    double dual = 0.0;
    for (const auto& [n, r] : order) {
      int widest = 0;
      (rowCols_[r] & allowed).for_each([&](std::size_t c) { widest = std::max(widest, reach[c]); });
      dual += 1.0 / widest;
    }
    if (used + static_cast<int>(std::ceil(dual - 1e-9)) >= best_) return;

    std::size_t pick = order.front().second;
    std::vector<std::pair<int, std::size_t>> options;
    (rowCols_[pick] & allowed).for_each([&](std::size_t c) {
      options.emplace_back(-reach[c], c);
    });
    std::sort(options.begin(), options.end());
    for (const auto& [neg, c] : options) {
      Bits without = allowed;
      without.reset(c);
      search(rows.minus(cols_[c]), without, used + 1);
      if (done()) return;
      allowed.reset(c);
    }
  }

  std::vector<Bits> cols_;
  std::vector<Bits> rowCols_;
  int best_ = 0;
  int budget_ = 0;
  bool stopAtFirst_ = false;
};

}  // namespace

Literal Implicant::at(int v) const {
  std::uint64_t bit = std::uint64_t{1} << v;
  if ((care & bit) == 0) return Literal::Free;
  return (value & bit) != 0 ? Literal::Positive : Literal::Negative;
}

int Implicant::num_literals() const { return std::popcount(care); }

std::vector<int> Implicant::positives() const {
  std::vector<int> out;
  for (std::uint64_t m = care & value; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

std::string Implicant::encode() const {
  std::string s(static_cast<std::size_t>(numVars), '-');
  for (int v = 0; v < numVars; ++v) {
    Literal l = at(v);
    if (l != Literal::Free) s[static_cast<std::size_t>(v)] = l == Literal::Positive ? '1' : '0';
  }
  return s;
}

Implicant Implicant::parse(const std::string& encoded) {
  if (encoded.size() > 64) throw Error(ErrorCode::InvalidArgument, kModule, "implicant wider than 64 variables");
  Implicant t;
  t.numVars = static_cast<int>(encoded.size());
  for (std::size_t v = 0; v < encoded.size(); ++v) {
    std::uint64_t bit = std::uint64_t{1} << v;
    switch (encoded[v]) {
      case '1': t.care |= bit; t.value |= bit; break;
      case '0': t.care |= bit; break;
      case '-': break;
      default: throw Error(ErrorCode::InvalidArgument, kModule, "bad implicant character '" + std::string(1, encoded[v]) + "'");
    }
  }
  return t;
}

std::vector<Implicant> prime_implicants(const std::vector<BitAssignment>& onSet, int numVars) {
  using Term = std::pair<std::uint64_t, std::uint64_t>;  // (care, value)
  const std::uint64_t all = full_mask(numVars);
  std::unordered_set<Term, PairHash> level;
  for (BitAssignment x : onSet) level.insert({all, x & all});

  std::vector<Implicant> primes;
  while (!level.empty()) {
    std::unordered_set<Term, PairHash> next;
    std::unordered_set<Term, PairHash> merged;
    for (const Term& t : level) {
      for (std::uint64_t m = t.first & ~t.second; m != 0; m &= m - 1) {
        std::uint64_t bit = m & (~m + 1);
        Term partner{t.first, t.second | bit};
        if (level.count(partner) == 0) continue;
        merged.insert(t);
        merged.insert(partner);
        next.insert({t.first & ~bit, t.second});
      }
    }
    for (const Term& t : level) {
      if (merged.count(t) == 0) primes.push_back(Implicant{t.first, t.second, numVars});
    }
    level = std::move(next);
  }
  std::vector<std::pair<std::string, Implicant>> keyed;
  keyed.reserve(primes.size());
  for (const Implicant& p : primes) keyed.emplace_back(p.encode(), p);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Implicant> out;
  out.reserve(keyed.size());
  for (auto& [k, p] : keyed) out.push_back(p);
  return out;
}

std::vector<Implicant> minimal_dnf(const std::vector<BitAssignment>& onSetIn, int numVars,
                                   const QmOptions& options) {
  if (numVars > options.variableCap) {
    throw Error(ErrorCode::TooManyVariables, kModule,
                std::to_string(numVars) + " variables exceed the configured cap of " + std::to_string(options.variableCap));
  }
  if (numVars < 0 || numVars > 64) throw Error(ErrorCode::InvalidArgument, kModule, "variable count must lie in 0..64");
  if (onSetIn.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "ON-set is empty");
  const std::uint64_t all = full_mask(numVars);
  for (BitAssignment x : onSetIn) {
    if ((x & ~all) != 0) throw Error(ErrorCode::InvalidArgument, kModule, "assignment uses variables beyond numVars");
  }
  std::vector<BitAssignment> onSet(onSetIn);
  std::sort(onSet.begin(), onSet.end());
  onSet.erase(std::unique(onSet.begin(), onSet.end()), onSet.end());

  std::vector<Implicant> primes = prime_implicants(onSet, numVars);
  const std::size_t rows = onSet.size();
  std::vector<Bits> colRows(primes.size(), Bits(rows));
  std::vector<int> coverCount(rows, 0);
  std::vector<std::size_t> soleCover(rows, 0);
  for (std::size_t c = 0; c < primes.size(); ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      if (primes[c].covers(onSet[r])) {
        colRows[c].set(r);
        ++coverCount[r];
        soleCover[r] = c;
      }
    }
  }

  std::vector<bool> chosen(primes.size(), false);
  Bits uncovered(rows);
  for (std::size_t r = 0; r < rows; ++r) uncovered.set(r);
  for (std::size_t r = 0; r < rows; ++r) {
    if (coverCount[r] == 1) chosen[soleCover[r]] = true;
  }
  for (std::size_t c = 0; c < primes.size(); ++c) {
    if (chosen[c]) uncovered = uncovered.minus(colRows[c]);
  }

  if (uncovered.any()) {
    CoverSolver solver(colRows, rows);
    Bits allowed(primes.size());
    for (std::size_t c = 0; c < primes.size(); ++c) {
      if (!chosen[c] && colRows[c].intersects(uncovered)) allowed.set(c);
    }
    int upper = static_cast<int>(primes.size());
    auto k = solver.min_cover(uncovered, allowed, upper);
    if (!k) throw Error(ErrorCode::InvalidArgument, kModule, "no prime cover found");

    // Lexicographic pass: fix the smallest feasible next column at each step.
    int remaining = *k;
    std::size_t from = 0;
    while (remaining > 0) {
      bool placed = false;
      for (std::size_t c = from; c < primes.size(); ++c) {
        if (!allowed.test(c) || !colRows[c].intersects(uncovered)) continue;
        Bits rest = uncovered.minus(colRows[c]);
        Bits later = allowed;
        for (std::size_t d = 0; d <= c; ++d) later.reset(d);
        if (!rest.any() ? remaining == 1 : solver.coverable(rest, later, remaining - 1)) {
          chosen[c] = true;
          uncovered = rest;
          from = c + 1;
          --remaining;
          placed = true;
          break;
        }
      }
      if (!placed) throw Error(ErrorCode::InvalidArgument, kModule, "cover reconstruction failed");
    }
  }

  std::vector<Implicant> out;
  for (std::size_t c = 0; c < primes.size(); ++c) {
    if (chosen[c]) out.push_back(primes[c]);
  }
  return out;
}

}  // namespace marx
