#include "reflow/bench.hpp"

#include <algorithm>
#include <optional>
#include <string>

namespace reflow {

namespace {

Widget leaf(std::string id, std::optional<std::int64_t> width, std::int64_t height) {
  Widget w;
  w.id = std::move(id);
  w.width = width;
  w.height = height;
  return w;
}

Widget container(std::string id, ContainerKind kind) {
  Widget w;
  w.id = std::move(id);
  w.kind = kind;
  return w;
}

}  // namespace

LayoutSpec benchmark_spec(const BenchmarkShape& shape) {
  constexpr std::int64_t unit = 200;
  LayoutSpec spec;
  spec.root = "screen";
  spec.min_width = shape.min_width;
  spec.max_width = shape.max_width;

  Widget screen = container("screen", ContainerKind::column);
  auto row_of = [&](const std::string& id, std::int64_t n, std::optional<std::int64_t> width) {
    Widget row = container(id, ContainerKind::row);
    for (std::int64_t i = 1; i <= n; ++i) {
      row.kids.push_back(id + "_" + std::to_string(i));
      spec.widgets.push_back(leaf(row.kids.back(), width, 40));
    }
    return row;
  };

  spec.widgets.push_back(leaf("banner", std::nullopt, 120));
  screen.kids.push_back("banner");
  spec.widgets.push_back(row_of("header", shape.header_kids, std::nullopt));
  screen.kids.push_back("header");

  for (std::size_t p = 0; p < shape.thresholds.size(); ++p) {
    const std::string n = std::to_string(p + 1);
    const std::int64_t t = shape.thresholds[p];
    Widget holder = container("section_" + n, ContainerKind::placeholder);
    // wide: fixed-width items summing to the threshold
    Widget wide = container("wide_" + n, ContainerKind::row);
    for (std::int64_t used = 0, i = 1; used < t; ++i) {
      const std::int64_t width = std::min(unit, t - used);
      used += width;
      wide.kids.push_back(wide.id + "_" + std::to_string(i));
      spec.widgets.push_back(leaf(wide.kids.back(), width, 40));
    }
    spec.widgets.push_back(wide);
    spec.widgets.push_back(row_of("narrow_" + n, shape.narrow_kids, unit));
    holder.kids = {"wide_" + n, "narrow_" + n};
    spec.widgets.push_back(holder);
    screen.kids.push_back(holder.id);
  }

  Widget grid = container("grid", ContainerKind::table);
  grid.columns = shape.grid_columns;
  grid.rows = shape.grid_rows;
  for (std::int64_t i = 1; i <= shape.grid_columns * shape.grid_rows; ++i) {
    grid.kids.push_back("cell_" + std::to_string(i));
    spec.widgets.push_back(leaf(grid.kids.back(), std::nullopt, 60));
  }
  spec.widgets.push_back(grid);
  screen.kids.push_back("grid");

  spec.widgets.push_back(row_of("footer", shape.footer_kids, std::nullopt));
  screen.kids.push_back("footer");
  spec.widgets.insert(spec.widgets.begin(), screen);
  return spec;
}

}  // namespace reflow
