#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "reflow/layout.hpp"

namespace reflow::detail {

enum class CmpOp : std::uint8_t { le, lt, eq, ge, gt, ne };

struct PropTerm {
  Rational coef;
  std::string widget;
  char prop = 'x';  ///< x, y, w or h
};

/// Σ terms + constant  op  0
struct ParsedComparison {
  std::vector<PropTerm> terms;
  Rational constant;
  CmpOp op = CmpOp::le;
};

/// Throws SpecError describing the first syntax problem.
ParsedComparison parse_comparison_text(std::string_view text);

bool valid_widget_id(std::string_view id);

struct Ctx {
  CompiledLayout& layout;
  const Widget& widget;
  std::int32_t index;
  std::vector<std::int32_t> kids;
  std::int64_t coordinate_max;

  ArithId pos(std::int32_t w, int axis) const {
    return axis == 0 ? layout.vars[w].x : layout.vars[w].y;
  }
  ArithId size(std::int32_t w, int axis) const {
    return axis == 0 ? layout.vars[w].w : layout.vars[w].h;
  }
  BoolId vis(std::int32_t w) const { return layout.vars[w].v; }

  /// Adds ¬[w]_v ∨ literals.
  void guarded(std::vector<LitOrConst> literals, const std::string& origin) const {
    literals.push_back(lit(vis(index), false));
    layout.formula.add(literals, origin);
  }
  ArithId aux(const std::string& suffix, Axis axis, VarRole role) const {
    return layout.formula.vars.add_arith(
        {widget.id + "." + suffix, 0, coordinate_max, axis, role, index});
  }
  std::string origin() const { return std::string(kind_name(widget.kind)) + ":" + widget.id; }
  std::string attr_origin() const { return "attr:" + widget.id; }
};

void emit_container(const Ctx& ctx);

}  // namespace reflow::detail
