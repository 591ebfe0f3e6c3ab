#pragma once

#include <map>
#include <string>

namespace creditvote::panel {

// Base-period industry employment shares per region and import growth per
// industry, for the US and for the comparison countries.
struct ShiftShareInputs {
  std::map<std::string, std::map<std::string, double>> industry_shares;  // region -> industry -> share
  std::map<std::string, double> us_import_growth;                        // industry -> growth
  std::map<std::string, double> other_import_growth;                     // industry -> growth
};

struct ShiftShareValue {
  double exposure = 0.0;    // sum_j share_rj * US growth_j
  double instrument = 0.0;  // sum_j share_rj * comparison growth_j
};

// Throws DataError listing industry codes that lack a growth series, or
// regions whose shares exceed one.
std::map<std::string, ShiftShareValue> build_shift_share(const ShiftShareInputs& inputs);

}  // namespace creditvote::panel
