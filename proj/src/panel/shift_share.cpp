#include "creditvote/panel/shift_share.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <set>

#include "creditvote/errors.hpp"

namespace creditvote::panel {

std::map<std::string, ShiftShareValue> build_shift_share(const ShiftShareInputs& inputs) {
  std::set<std::string> missing;
  for (const auto& [region, shares] : inputs.industry_shares) {
    double total = 0.0;
    for (const auto& [industry, share] : shares) {
      total += share;
      if (!inputs.us_import_growth.contains(industry) || !inputs.other_import_growth.contains(industry))
        missing.insert(industry);
    }
    if (total > 1.0 + 1e-9)
      throw DataError(fmt::format("industry shares of region {} sum to {} > 1", region, total));
  }
  if (!missing.empty())
    throw DataError(fmt::format("missing import growth series for industries: {}", fmt::join(missing, ", ")));

  std::map<std::string, ShiftShareValue> out;
  for (const auto& [region, shares] : inputs.industry_shares) {
    ShiftShareValue v;
    for (const auto& [industry, share] : shares) {
      v.exposure += share * inputs.us_import_growth.at(industry);
      v.instrument += share * inputs.other_import_growth.at(industry);
    }
    out.emplace(region, v);
  }
  return out;
}

}  // namespace creditvote::panel
