#include <doctest.h>

#include <filesystem>

#include "../support/fixtures.hpp"
#include "reflow/runtime.hpp"

using namespace reflow;
using namespace reflow::testing;

namespace {

bool shown(const Geometry& g, const std::string& id) { return g.find(id) != nullptr; }

/// Hard clauses of the compiled fixture violated by the drawn geometry.
std::size_t violations(const std::string& name, const RuntimeSession& s, const Geometry& g) {
  CompiledLayout L = compile_layout(fixture(name));
  Model m = geometry_model(s.bundle(), g, s.model());
  return violated_clauses(L.formula, m).size();
}

}  // namespace

TEST_CASE("storefront shows the wide or the thin alternatives") {
  RuntimeSession s(bundle_of("storefront"));
  Geometry wide = s.solve_at_width(1800);
  CHECK(wide.screen_width == 1800);
  CHECK(shown(wide, "wide_bar"));
  CHECK(shown(wide, "3_col_table"));
  CHECK_FALSE(shown(wide, "thin_bar"));
  CHECK_FALSE(shown(wide, "2_col_table"));
  for (int i = 1; i <= 6; ++i) CHECK(shown(wide, "Card_" + std::to_string(i)));
  Geometry thin = s.solve_at_width(1200);
  CHECK(shown(thin, "thin_bar"));
  CHECK(shown(thin, "2_col_table"));
  CHECK_FALSE(shown(thin, "wide_bar"));
  CHECK(violations("storefront", s, thin) == 0);
}

TEST_CASE("widths outside the table are refused") {
  RuntimeSession s(bundle_of("storefront"));
  CHECK(s.min_width() == 1000);
  CHECK(s.max_width() == 2000);
  try {
    s.solve_at_width(999);
    FAIL("expected a range error");
  } catch (const RangeError& e) {
    CHECK(e.lo() == 1000);
    CHECK(e.hi() == 2000);
  }
  CHECK_THROWS_AS(s.incremental_update(2001), RangeError);
}

TEST_CASE("updates inside a row reuse the reasoning") {
  RuntimeSession s(bundle_of("storefront"));
  SolveStats st;
  s.incremental_update(1800, &st);
  CHECK_FALSE(st.reasoning_reused);
  s.incremental_update(1799, &st);
  CHECK(st.reasoning_reused);
  CHECK(s.current_row() == 0u);
  s.incremental_update(1799, &st);
  CHECK(st.steps == 0);
  s.incremental_update(1500, &st);
  CHECK(st.reasoning_reused);
  Geometry g = s.incremental_update(1499, &st);
  CHECK_FALSE(st.reasoning_reused);
  CHECK(st.row == 1);
  CHECK(shown(g, "thin_bar"));
  CHECK_FALSE(shown(g, "wide_bar"));
  const auto runs = s.reasoning_runs();
  s.incremental_update(1600, &st);
  CHECK(st.reasoning_reused);
  CHECK(s.reasoning_runs() == runs);
}

TEST_CASE("extracted widgets are placed where the outer layer puts them") {
  RuntimeSession s(bundle_of("storefront"));
  for (std::int64_t w : {1000, 1333, 1499, 1500, 1777, 2000}) {
    CAPTURE(w);
    Geometry g = s.incremental_update(w);
    CHECK(violations("storefront", s, g) == 0);
    for (int i = 1; i <= 6; ++i) {
      const std::string card = "Card_" + std::to_string(i);
      const auto* c = g.find(card);
      const auto* cap = g.find(card + "_cap");
      REQUIRE(c);
      REQUIRE(cap);
      CHECK(cap->x == c->x);
      CHECK(cap->y == c->y);
      CHECK(cap->width == c->width);
    }
    const auto* bar = g.find(w >= 1500 ? "wide_bar" : "thin_bar");
    REQUIRE(bar);
    const auto* first = g.find(w >= 1500 ? "wide_btn_1" : "thin_btn_1");
    REQUIRE(first);
    CHECK(first->x >= bar->x);
    CHECK(first->y >= bar->y);
  }
}

TEST_CASE("solving is deterministic and survives a reload") {
  const DeployBundle& b = bundle_of("storefront");
  const auto path = (std::filesystem::temp_directory_path() / "reflow_runtime_test.bundle").string();
  save_bundle_file(b, path);
  RuntimeSession a(b);
  RuntimeSession c = RuntimeSession::load(path);
  for (std::int64_t w : {1900, 1650, 1200, 1499, 1500, 1000}) {
    CHECK(a.incremental_update(w) == c.incremental_update(w));
  }
  std::filesystem::remove(path);
}

TEST_CASE("every fixture bundle solves to a hard-satisfying layout") {
  for (const char* name : {"row_column", "flow_wrap", "flow_nowrap", "flow_varying", "waterfall", "table", "card", "flex",
                           "gap", "storefront_split"}) {
    CAPTURE(name);
    RuntimeSession s(bundle_of(name));
    const std::int64_t step = std::max<std::int64_t>(1, (s.max_width() - s.min_width()) / 9);
    for (std::int64_t w = s.max_width(); w >= s.min_width(); w -= step) {
      CAPTURE(w);
      Geometry g = s.incremental_update(w);
      CHECK(violations(name, s, g) == 0);
    }
  }
}

TEST_CASE("a monolithic bundle agrees on visibility") {
  RuntimeSession two(bundle_of("storefront_split"));
  RuntimeSession mono(bundle_of("storefront_split", false));
  CHECK(bundle_of("storefront_split", false).slices.empty());
  for (std::int64_t w : {2000, 1750, 1500}) {
    Geometry a = two.solve_at_width(w), b = mono.solve_at_width(w);
    for (const char* id : {"wide_bar", "thin_bar", "3_col_table", "2_col_table"}) CHECK(shown(a, id) == shown(b, id));
    CHECK(violations("storefront_split", mono, b) == 0);
  }
}
