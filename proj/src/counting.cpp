#include <map>

#include "examforge/selector.hpp"

namespace examforge {

namespace {

// Keeps the table (and its arbitrary-precision cells) to a sane size.
constexpr std::size_t kMaxTableCells = 50'000'000;

}  // namespace

CountTable::CountTable(std::size_t slots, int remaining_points)
    : slots_(slots),
      remaining_(remaining_points),
      stride_(static_cast<std::size_t>(remaining_points) + 1),
      cells_((slots + 1) * stride_) {}

CountTable count_completions(const std::vector<std::vector<int>>& candidate_points,
                             int remaining_points) {
  if (remaining_points < 0) {
    throw Error(ErrorCode::kPinsExceedTarget,
                "pinned problems exceed the point target by " + std::to_string(-remaining_points));
  }
  const std::size_t k = candidate_points.size();
  if ((k + 1) * (static_cast<std::size_t>(remaining_points) + 1) > kMaxTableCells) {
    throw Error(ErrorCode::kInvalidBlueprint, "point target too large for the counting table");
  }

  CountTable table(k, remaining_points);
  table.at(k, 0) = 1;
  for (std::size_t j = k; j-- > 0;) {
    // Candidates with equal points contribute identically; group them.
    std::map<int, unsigned> multiplicity;
    for (int v : candidate_points[j]) {
      if (v < 0) throw Error(ErrorCode::kInvalidArgument, "negative candidate points");
      if (v <= remaining_points) ++multiplicity[v];
    }
    for (int p = 0; p <= remaining_points; ++p) {
      BigCount sum = 0;
      for (const auto& [v, m] : multiplicity) {
        if (v > p) break;
        const BigCount& next = table.at(j + 1, p - v);
        if (!next.is_zero()) sum += next * m;
      }
      table.at(j, p) = std::move(sum);
    }
  }
  return table;
}

}  // namespace examforge
