#include <doctest.h>

#include <algorithm>

#include "../support/fixtures.hpp"
#include "reflow/text.hpp"

using namespace reflow;
using namespace reflow::testing;

namespace {

const char* kFixtures[] = {"storefront",         "storefront_split",      "row_column", "flow_wrap", "flow_nowrap", "flow_varying",
                           "waterfall",    "table",     "card",       "flex",      "gap",         "conflict"};

std::string minimal(const std::string& widgets, const std::string& extra = "") {
  return R"({"format": "reflow-layout", "version": 1,
             "screen": {"root": "s", "min_width": 100, "max_width": 200},
             "widgets": )" +
         widgets + extra + "}";
}

bool has_message(const std::vector<Diagnostic>& ds, const std::string& widget, const std::string& needle) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) {
    return d.widget == widget && d.message.find(needle) != std::string::npos;
  });
}

std::vector<Diagnostic> diagnose(const std::string& text) { return validate_spec(parse_spec(text)); }

}  // namespace

TEST_CASE("layout documents round-trip") {
  for (const char* name : kFixtures) {
    CAPTURE(name);
    LayoutSpec a = fixture(name);
    std::string once = spec_to_json(a);
    CHECK(spec_to_json(parse_spec(once)) == once);
  }
}

TEST_CASE("unknown fields are rejected") {
  CHECK_THROWS_WITH_AS(parse_spec(minimal(R"([{"id": "s", "colour": 3}])")), doctest::Contains("colour"), SpecError);
  CHECK_THROWS_AS(parse_spec(minimal("[]", R"(, "theme": 1)")), SpecError);
  CHECK_THROWS_AS(parse_spec(minimal(R"([{"id": "s", "kind": "grid"}])")), SpecError);
}

TEST_CASE("validation names the offending widgets") {
  auto ds = diagnose(minimal(R"([{"id": "s", "kind": "column", "kids": ["a"]},
                                 {"id": "a", "kind": "row", "kids": ["b"]},
                                 {"id": "b", "kind": "row", "kids": ["a"]}])"));
  CHECK(has_errors(ds));
  CHECK(std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.message.find("cycle") != std::string::npos; }));

  ds = diagnose(minimal(R"([{"id": "s", "kind": "column", "kids": ["c"]},
                            {"id": "c", "kind": "card", "kids": ["x", "y"]}, {"id": "x"}, {"id": "y"}])"));
  CHECK(has_message(ds, "c", "Card requires exactly 3 kids"));

  ds = diagnose(minimal(R"([{"id": "s", "kind": "column", "kids": ["t"]},
                            {"id": "t", "kind": "table", "rows": 2, "columns": 2, "kids": ["x", "y", "z"],
                             "col_width": {"3": 40}},
                            {"id": "x"}, {"id": "y"}, {"id": "z"}])"));
  CHECK(has_message(ds, "t", "rows*columns"));
  CHECK(has_message(ds, "t", "set_width on nonexistent column 3"));

  ds = diagnose(minimal(R"([{"id": "s", "kind": "column", "kids": ["p"]},
                            {"id": "p", "kind": "placeholder", "kids": ["x"]}, {"id": "x"}])"));
  CHECK(has_message(ds, "p", "at least 2 kids"));

  ds = diagnose(minimal(R"([{"id": "s", "kind": "column", "kids": ["x"]}, {"id": "x"}, {"id": "lost"}])",
                        R"(, "constraints": [{"id": "c1", "expr": "ghost.x = x.x"}])"));
  CHECK(has_message(ds, "lost", "no parent"));
  CHECK(std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.message.find("ghost") != std::string::npos; }));

  CHECK_THROWS_AS(compile_layout(parse_spec(minimal(R"([{"id": "s", "kind": "card", "kids": []}])"))), SpecError);
}

TEST_CASE("comparisons parse against compiled variables") {
  CompiledLayout L = compile_layout(fixture("row_column"));
  LitOrConst c = parse_comparison("2*logo.x + logo.w - 3 <= menu.x", L);
  REQUIRE(std::holds_alternative<Literal>(c));
  Model m(L.formula.vars.arith_count(), L.formula.vars.bool_count());
  complete_model(m, L.formula.vars);
  m.set(L.formula.vars.arith_by_name("logo.x"), 10);
  m.set(L.formula.vars.arith_by_name("logo.w"), 80);
  m.set(L.formula.vars.arith_by_name("menu.x"), 97);
  CHECK(std::get<Literal>(c).evaluate(m));
  m.set(L.formula.vars.arith_by_name("menu.x"), 96);
  CHECK_FALSE(std::get<Literal>(c).evaluate(m));
  auto ids = comparison_widgets("1/2*a.w + b.h >= 3");
  CHECK(ids == std::vector<std::string>{"a", "b"});
  CHECK_THROWS(parse_comparison("logo.z <= 1", L));
}

TEST_CASE("compilation is deterministic") {
  for (const char* name : kFixtures) {
    CAPTURE(name);
    CHECK(dump_formula(compile_layout(fixture(name)).formula) == dump_formula(compile_layout(fixture(name)).formula));
  }
}

TEST_CASE("container and attribute clauses are guarded by the widget's visibility") {
  for (const char* name : kFixtures) {
    CAPTURE(name);
    CompiledLayout L = compile_layout(fixture(name));
    for (const auto& c : L.formula.hard) {
      auto colon = c.origin.find(':');
      if (colon == std::string::npos) continue;
      const std::string kind = c.origin.substr(0, colon), id = c.origin.substr(colon + 1);
      if (kind != "attr" && !parse_kind(kind)) continue;
      const BoolId v = L.formula.vars.bool_by_name(id + ".v");
      CAPTURE(c.origin);
      CHECK(std::any_of(c.literals.begin(), c.literals.end(),
                        [&](const Literal& l) { return l.is_bool() && l.bool_var() == v && !l.positive(); }));
    }
  }
}

TEST_CASE("placeholder shows exactly one alternative") {
  CompiledLayout L = compile_layout(fixture("storefront"));
  for (std::int64_t w = 1000; w <= 2000; w += 125) {
    CAPTURE(w);
    auto m = solve_layout(L, w);
    REQUIRE(m);
    CHECK(vis(*m, L, "wide_bar") + vis(*m, L, "thin_bar") == 1);
    CHECK(vis(*m, L, "3_col_table") + vis(*m, L, "2_col_table") == 1);
    if (w < 1500) CHECK_FALSE(vis(*m, L, "wide_bar"));
    CHECK(violated_clauses(L.formula, *m).empty());
  }
}

TEST_CASE("flow without wrap hides exactly the overflowing kids") {
  CompiledLayout L = compile_layout(fixture("flow_nowrap"));
  for (std::int64_t w : {500, 640, 777, 1050, 1400}) {
    CAPTURE(w);
    auto m = solve_layout(L, w);
    REQUIRE(m);
    const std::int64_t end = val(*m, L, "tabs.x") + val(*m, L, "tabs.w");
    bool hidden = false;
    for (int i = 1; i <= 8; ++i) {
      const std::string t = "tab_" + std::to_string(i);
      const bool fits = val(*m, L, t + ".x") + val(*m, L, t + ".w") <= end;
      CHECK(vis(*m, L, t) == fits);
      if (!fits) hidden = true;
      if (hidden) CHECK_FALSE(vis(*m, L, t));
    }
  }
}

TEST_CASE("wrapping flow starts a new row only when the kid does not fit") {
  for (const char* name : {"flow_wrap", "flow_varying"}) {
    CAPTURE(name);
    CompiledLayout L = compile_layout(fixture(name));
    const std::string box = std::string(name) == "flow_wrap" ? "gallery" : "tags";
    const std::string kid = std::string(name) == "flow_wrap" ? "photo_" : "tag_";
    const int n = std::string(name) == "flow_wrap" ? 8 : 7;
    for (std::int64_t w : {400, 555, 700, 1000}) {
      CAPTURE(w);
      auto m = solve_layout(L, w);
      REQUIRE(m);
      const std::int64_t x0 = val(*m, L, box + ".x"), end = x0 + val(*m, L, box + ".w");
      for (int i = 2; i <= n; ++i) {
        const std::string prev = kid + std::to_string(i - 1), cur = kid + std::to_string(i);
        const std::int64_t prev_end = val(*m, L, prev + ".x") + val(*m, L, prev + ".w");
        const bool wraps = prev_end + val(*m, L, cur + ".w") > end;
        if (wraps) {
          CHECK(val(*m, L, cur + ".x") == x0);
          CHECK(val(*m, L, cur + ".y") >= val(*m, L, prev + ".y") + (name == std::string("flow_wrap") ? val(*m, L, prev + ".h") : 0));
        } else {
          CHECK(val(*m, L, cur + ".x") == prev_end);
        }
      }
    }
  }
}

TEST_CASE("varying-height flow closes each row at its tallest kid") {
  CompiledLayout L = compile_layout(fixture("flow_varying"));
  auto m = solve_layout(L, 700);
  REQUIRE(m);
  // group kids by row start, then check the next row begins below the tallest
  std::vector<std::vector<int>> rows;
  for (int i = 1; i <= 7; ++i) {
    const std::int64_t x = val(*m, L, "tag_" + std::to_string(i) + ".x");
    if (rows.empty() || x == val(*m, L, "tags.x")) rows.emplace_back();
    rows.back().push_back(i);
  }
  REQUIRE(rows.size() >= 2);
  for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
    std::int64_t bottom = 0;
    for (int i : rows[r]) {
      const std::string t = "tag_" + std::to_string(i);
      bottom = std::max(bottom, val(*m, L, t + ".y") + val(*m, L, t + ".h"));
    }
    for (int i : rows[r + 1]) CHECK(val(*m, L, "tag_" + std::to_string(i) + ".y") >= bottom);
  }
}

TEST_CASE("waterfall puts each item under the lowest column") {
  CompiledLayout L = compile_layout(fixture("waterfall"));
  for (std::int64_t w : {600, 901, 1200}) {
    CAPTURE(w);
    auto m = solve_layout(L, w);
    REQUIRE(m);
    const std::int64_t x0 = val(*m, L, "feed.x"), y0 = val(*m, L, "feed.y");
    const std::int64_t cw = val(*m, L, "post_1.w");
    std::vector<std::int64_t> bottom(3, y0);
    for (int i = 1; i <= 9; ++i) {
      const std::string p = "post_" + std::to_string(i);
      // lowest bottom, ties to the leftmost column
      const std::size_t col = std::min_element(bottom.begin(), bottom.end()) - bottom.begin();
      CHECK(val(*m, L, p + ".w") == cw);
      CHECK(val(*m, L, p + ".x") == x0 + static_cast<std::int64_t>(col) * cw);
      CHECK(val(*m, L, p + ".y") == bottom[col]);
      bottom[col] += val(*m, L, p + ".h");
    }
  }
}

TEST_CASE("table overrides fix one column and one row, the rest stay equal") {
  CompiledLayout L = compile_layout(fixture("table"));
  auto m = solve_layout(L, 1000);
  REQUIRE(m);
  CHECK(val(*m, L, "cell_1.w") == 120);
  CHECK(val(*m, L, "cell_4.h") == 90);
  CHECK(val(*m, L, "cell_2.w") == val(*m, L, "cell_3.w"));
  CHECK(val(*m, L, "cell_1.h") == val(*m, L, "cell_7.h"));
  CHECK(val(*m, L, "cell_9.x") + val(*m, L, "cell_9.w") == val(*m, L, "grid.x") + val(*m, L, "grid.w"));
}

TEST_CASE("card stacks caption, body and description") {
  CompiledLayout L = compile_layout(fixture("card"));
  auto m = solve_layout(L, 900);
  REQUIRE(m);
  for (int i = 1; i <= 3; ++i) {
    const std::string c = "card_" + std::to_string(i);
    CHECK(val(*m, L, c + "_body.h") * 2 == val(*m, L, c + ".h"));
    CHECK(val(*m, L, c + "_cap.y") == val(*m, L, c + ".y"));
    CHECK(val(*m, L, c + "_dis.y") + val(*m, L, c + "_dis.h") == val(*m, L, c + ".y") + val(*m, L, c + ".h"));
    CHECK(val(*m, L, c + "_cap.y") + 40 <= val(*m, L, c + "_body.y"));
  }
}

TEST_CASE("flex grow and shrink take floored shares, the last kid absorbs the rest") {
  CompiledLayout L = compile_layout(fixture("flex"));
  auto m = solve_layout(L, 1001);
  REQUIRE(m);
  // spare 201 over grow 1:2:1
  CHECK(val(*m, L, "nav.w") == 200 + 50);
  CHECK(val(*m, L, "search.w") == 400 + 100);
  CHECK(val(*m, L, "account.w") == 1001 - 250 - 500);
  m = solve_layout(L, 600);
  REQUIRE(m);
  // overflow 200 over shrink 1:1:1/2, i.e. 2:2:1
  CHECK(val(*m, L, "nav.w") == 200 - 80);
  CHECK(val(*m, L, "search.w") == 400 - 80);
  CHECK(val(*m, L, "account.w") == 600 - 120 - 320);
  CHECK(val(*m, L, "nav.h") == 48);
}
