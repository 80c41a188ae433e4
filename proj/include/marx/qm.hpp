#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace marx {

/// Assignment to up to 64 Boolean variables; bit v holds variable v.
using BitAssignment = std::uint64_t;

enum class Literal { Negative, Positive, Free };

/// Product term over `numVars` variables. Variables outside `care` are Free;
/// cared-for variables take the polarity in `value`.
struct Implicant {
  std::uint64_t care = 0;
  std::uint64_t value = 0;
  int numVars = 0;

  Literal at(int v) const;
  bool covers(BitAssignment x) const { return (x & care) == value; }
  int num_literals() const;
  /// Indices of Positive literals, ascending.
  std::vector<int> positives() const;
  /// One character per variable in index order: '1', '0' or '-'.
  std::string encode() const;
  static Implicant parse(const std::string& encoded);

  friend bool operator==(const Implicant&, const Implicant&) = default;
};

struct QmOptions {
  int variableCap = 24;
};

/// All prime implicants of the function whose ON-set is `onSet` and whose
/// OFF-set is everything else, sorted by encoding.
std::vector<Implicant> prime_implicants(const std::vector<BitAssignment>& onSet, int numVars);

/// Minimum-cardinality cover of `onSet` by prime implicants. Among minimum
/// covers, returns the one whose sorted encodings are lexicographically
/// smallest. Errors: InvalidArgument (empty ON-set, value out of range),
/// TooManyVariables (numVars above options.variableCap).
std::vector<Implicant> minimal_dnf(const std::vector<BitAssignment>& onSet, int numVars,
                                   const QmOptions& options = {});

}  // namespace marx
