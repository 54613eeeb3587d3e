#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace examforge {

// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}

  // Strict ISO-8601 "YYYY-MM-DD"; throws Error(kInvalidArgument) otherwise.
  static Date parse(std::string_view text);

  std::string to_string() const;
  std::chrono::sys_days sys_days() const { return days_; }

  // Signed number of days from `earlier` to this date.
  long days_since(const Date& earlier) const {
    return static_cast<long>((days_ - earlier.days_).count());
  }

  Date plus_days(long n) const { return Date(days_ + std::chrono::days(n)); }

  friend constexpr bool operator==(const Date&, const Date&) = default;
  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace examforge
