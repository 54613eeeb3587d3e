#include <random>

#include "doctest.h"
#include "examforge/error.hpp"
#include "examforge/selector.hpp"
#include "oracle/brute_force.hpp"

using examforge::BigCount;
using examforge::count_completions;

TEST_CASE("oracle agrees with the frozen hand-derived counts") {
  const std::vector<std::vector<int>> ab = {{5, 10}, {5, 10}};
  CHECK(oracle::count_exact_sums(ab, 15) == 2);
  CHECK(oracle::count_exact_sums(ab, 7) == 0);
  CHECK(oracle::count_exact_sums({}, 0) == 1);
  CHECK(oracle::count_exact_sums({}, 5) == 0);
}

TEST_CASE("count_completions examples") {
  CHECK(count_completions({}, 0).total() == 1);
  CHECK(count_completions({}, 5).total() == 0);
  CHECK(count_completions({{5, 10}, {5, 10}}, 15).total() == 2);
  CHECK(count_completions({{5, 10}, {5, 10}}, 7).total() == 0);
}

TEST_CASE("count_completions rejects a negative budget") {
  try {
    count_completions({{1}}, -1);
    FAIL("expected an error");
  } catch (const examforge::Error& e) {
    CHECK(e.code() == examforge::ErrorCode::kPinsExceedTarget);
  }
}

TEST_CASE("table rows count every suffix") {
  const std::vector<std::vector<int>> lists = {{1, 2, 2}, {3}, {1, 4}};
  const auto table = count_completions(lists, 8);
  for (std::size_t j = 0; j <= lists.size(); ++j) {
    const std::vector<std::vector<int>> suffix(lists.begin() + static_cast<long>(j), lists.end());
    for (int p = 0; p <= 8; ++p) {
      CHECK(table.at(j, p) == BigCount(oracle::count_exact_sums(suffix, p)));
    }
  }
}

TEST_CASE("count_completions matches brute force on random instances") {
  std::mt19937_64 rng(20240115);
  for (int instance = 0; instance < 300; ++instance) {
    const int slots = std::uniform_int_distribution<int>(0, 6)(rng);
    std::vector<std::vector<int>> lists(static_cast<std::size_t>(slots));
    for (auto& l : lists) {
      const int n = std::uniform_int_distribution<int>(0, 8)(rng);
      for (int i = 0; i < n; ++i) l.push_back(std::uniform_int_distribution<int>(1, 10)(rng));
    }
    const int target = std::uniform_int_distribution<int>(0, slots * 10)(rng);
    CAPTURE(instance);
    CHECK(count_completions(lists, target).total() == BigCount(oracle::count_exact_sums(lists, target)));
  }
}

TEST_CASE("counts beyond 64 bits are exact") {
  // 30 slots of {1, 2}: completions summing to 45 = C(30, 15).
  const std::vector<std::vector<int>> lists(30, std::vector<int>{1, 2});
  CHECK(count_completions(lists, 45).total() == BigCount("155117520"));
  // 100 slots of 10 values each, every sum permitted: 10^100 at the middle row sum.
  const std::vector<std::vector<int>> wide(70, std::vector<int>{1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  CHECK(count_completions(wide, 70).total() == boost::multiprecision::pow(BigCount(10), 70));
}
