#pragma once

#include <cstdint>
#include <vector>

#include "reflow/layout.hpp"

namespace reflow {

/// Synthetic desktop page: header row, one Placeholder per threshold (wide
/// alternative needs at least that width), a content table, footer row.
struct BenchmarkShape {
  std::int64_t min_width = 1000;
  std::int64_t max_width = 2000;
  std::vector<std::int64_t> thresholds{1800, 1600, 1400, 1200};
  std::int64_t narrow_kids = 4;
  std::int64_t header_kids = 10;
  std::int64_t footer_kids = 8;
  std::int64_t grid_columns = 4;
  std::int64_t grid_rows = 5;
};

/// The default shape has 101 widgets, 4 Placeholders and 8 softs.
LayoutSpec benchmark_spec(const BenchmarkShape& shape = {});

}  // namespace reflow
