#include "doctest.h"
#include "examforge/date.hpp"
#include "examforge/error.hpp"

using examforge::Date;

TEST_CASE("date parse and format round-trip") {
  for (const char* s : {"2024-01-15", "2000-02-29", "1999-12-31", "2024-06-01"}) {
    CHECK(Date::parse(s).to_string() == s);
  }
}

TEST_CASE("date arithmetic") {
  const auto a = Date::parse("2024-01-15");
  CHECK(a.days_since(Date::parse("2024-01-01")) == 14);
  CHECK(Date::parse("2023-01-01").days_since(a) < 0);
  CHECK(a.plus_days(17).to_string() == "2024-02-01");
  CHECK(Date::parse("2022-01-15") < a);
}

TEST_CASE("date rejects malformed text") {
  for (const char* s : {"", "2024-1-15", "2024/01/15", "2023-02-29", "2024-13-01", "2024-01-15x",
                        "24-01-15", "2024-00-10"}) {
    CHECK_THROWS_AS(Date::parse(s), examforge::Error);
  }
}
