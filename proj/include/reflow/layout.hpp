#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reflow/formula.hpp"

namespace reflow {

enum class ContainerKind : std::uint8_t {
  leaf,
  row,
  column,
  flow_wrap,      ///< wrapping flow, equal heights
  flow_nowrap,    ///< kids past the edge become invisible
  flow_varying,   ///< wrapping flow, varying heights
  waterfall,
  table,
  card,
  flex,
  placeholder,
};

std::string_view kind_name(ContainerKind k);
std::optional<ContainerKind> parse_kind(std::string_view s);

struct Spacing {
  std::int64_t value = 0;
  bool equal = false;
};

enum class FlexMain : std::uint8_t { none, space_around, space_between };
enum class FlexCross : std::uint8_t { none, stretch, start, end };

struct FlexItem {
  std::int64_t basis = 0;
  Rational grow = 0;
  Rational shrink = 0;
};

struct Widget {
  std::string id;
  ContainerKind kind = ContainerKind::leaf;
  std::vector<std::string> kids;
  bool vertical = false;  ///< flow and flex main axis

  std::optional<std::int64_t> width, height;
  std::optional<std::int64_t> min_width, max_width, min_height, max_height;
  std::map<std::string, std::int64_t> kid_width, kid_height;

  std::optional<Spacing> margin, padding;                   // row, column, flex
  std::int64_t columns = 1;                                 // waterfall, table
  std::int64_t rows = 1;                                    // table
  std::map<std::int64_t, std::int64_t> col_width, row_height;  // table, 1-based
  std::map<std::int64_t, Rational> proportion;              // card, 1-based kid index
  FlexMain main = FlexMain::none;
  FlexCross cross = FlexCross::none;
  bool grow = false;
  std::vector<FlexItem> items;
  std::vector<std::int64_t> weights;  // placeholder alternative weights
};

/// Hard constraint written against widget properties, e.g. "a.x + a.w <= b.x".
struct UserConstraint {
  std::string id;
  std::vector<std::string> any;  ///< disjunction of comparisons
  /// Widgets whose visibility guards the constraint; defaults to the widgets
  /// the comparisons mention.
  std::optional<std::vector<std::string>> guard;
};

struct Preference {
  std::string id;
  std::int64_t weight = 1;
  std::vector<std::string> all;  ///< conjunction of comparisons
};

struct LayoutConfig {
  std::int64_t coordinate_max = 10000;
  std::size_t threshold = 300;
};

struct LayoutSpec {
  std::string root;
  std::int64_t min_width = 0;
  std::int64_t max_width = 0;
  std::optional<std::int64_t> screen_height;
  std::vector<Widget> widgets;
  std::vector<UserConstraint> constraints;
  std::vector<Preference> preferences;
  LayoutConfig config;

  const Widget* find(std::string_view id) const;
};

/// Parses the JSON layout document; unknown fields are rejected.
LayoutSpec parse_spec(std::string_view json_text);
LayoutSpec load_spec(const std::string& path);
std::string spec_to_json(const LayoutSpec& spec);

struct Diagnostic {
  enum class Level : std::uint8_t { error, warning };
  Level level = Level::error;
  std::string widget;
  std::string message;
};

std::vector<Diagnostic> validate_spec(const LayoutSpec& spec);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

struct WidgetVars {
  ArithId x, y, w, h;
  BoolId v;
};

struct HierarchyNode {
  std::vector<std::int32_t> parents;
  std::vector<std::int32_t> kids;
  std::vector<std::int32_t> sub;  ///< transitive kids, sorted
};

struct CompiledLayout {
  Formula formula;
  std::vector<std::string> ids;  ///< widget index → id
  std::vector<ContainerKind> kinds;
  std::vector<WidgetVars> vars;
  std::vector<HierarchyNode> nodes;
  std::int32_t root = 0;
  ArithId screen_width;

  std::int32_t index_of(std::string_view id) const;
};

/// Hierarchy, container, user and preference constraints. Throws SpecError
/// with the validation diagnostics when the spec is invalid.
CompiledLayout compile_layout(const LayoutSpec& spec);

/// Parses "2*a.x + a.w - 3 <= b.x" against the compiled variables.
LitOrConst parse_comparison(std::string_view text, const CompiledLayout& layout);

/// Widget ids mentioned by a comparison.
std::vector<std::string> comparison_widgets(std::string_view text);

}  // namespace reflow
