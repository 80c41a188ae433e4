#include "marx/core.hpp"

#include <array>
#include <utility>

#include "marx/error.hpp"

namespace marx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidAction: return "InvalidAction";
    case ErrorCode::IncompatibleState: return "IncompatibleState";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::NoCompletePath: return "NoCompletePath";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::EmptySampleMap: return "EmptySampleMap";
    case ErrorCode::TooManyVariables: return "TooManyVariables";
    case ErrorCode::RepairDiverged: return "RepairDiverged";
    case ErrorCode::Busy: return "Busy";
  }
  return "Unknown";
}

std::string roman_numeral(int value) {
  static constexpr std::array<std::pair<int, const char*>, 13> kTable{{
      {1000, "M"}, {900, "CM"}, {500, "D"}, {400, "CD"}, {100, "C"}, {90, "XC"},
      {50, "L"}, {40, "XL"}, {10, "X"}, {9, "IX"}, {5, "V"}, {4, "IV"}, {1, "I"},
  }};
  std::string out;
  for (const auto& [v, s] : kTable) {
    while (value >= v) {
      out += s;
      value -= v;
    }
  }
  return out;
}

}  // namespace marx
