#pragma once

#include <cstdint>
#include <string>

namespace creditvote {

inline constexpr int kMinCreditScore = 300;
inline constexpr int kMaxCreditScore = 850;

// One person-year observation from the credit panel.
struct CreditRecord {
  std::uint64_t person_id = 0;
  int year = 0;
  int credit_score = 0;
  double total_credit_limit = 0.0;  // USD
  std::string zcta;
  std::string county_fips;
  std::string commuting_zone;

  bool valid() const {
    return credit_score >= kMinCreditScore && credit_score <= kMaxCreditScore &&
           total_credit_limit >= 0.0 && !zcta.empty() && !county_fips.empty() &&
           !commuting_zone.empty();
  }

  friend bool operator==(const CreditRecord&, const CreditRecord&) = default;
};

}  // namespace creditvote
