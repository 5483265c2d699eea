#include <algorithm>
#include <functional>
#include <set>

#include "internal.hpp"

namespace reflow {

std::int32_t CompiledLayout::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return static_cast<std::int32_t>(i);
  }
  throw SpecError("unknown widget '" + std::string(id) + "'");
}

namespace {

LitOrConst to_literal(const detail::ParsedComparison& p, const CompiledLayout& layout) {
  LinearExpr lhs(p.constant);
  for (const auto& t : p.terms) {
    const auto& v = layout.vars[layout.index_of(t.widget)];
    ArithId id = t.prop == 'x' ? v.x : t.prop == 'y' ? v.y : t.prop == 'w' ? v.w : v.h;
    lhs += LinearExpr(id) * t.coef;
  }
  switch (p.op) {
    case detail::CmpOp::le: return le(lhs, 0);
    case detail::CmpOp::lt: return lt(lhs, 0);
    case detail::CmpOp::eq: return eq(lhs, 0);
    case detail::CmpOp::ge: return ge(lhs, 0);
    case detail::CmpOp::gt: return gt(lhs, 0);
    case detail::CmpOp::ne: return ne(lhs, 0);
  }
  return false;
}

void emit_attributes(const detail::Ctx& c) {
  const Widget& w = c.widget;
  const std::string origin = c.attr_origin();
  auto fix = [&](ArithId v, const std::optional<std::int64_t>& val, Cmp cmp) {
    if (val) c.guarded({compare(v, cmp, *val)}, origin);
  };
  const auto& me = c.layout.vars[c.index];
  fix(me.w, w.width, Cmp::eq);
  fix(me.h, w.height, Cmp::eq);
  fix(me.w, w.min_width, Cmp::ge);
  fix(me.w, w.max_width, Cmp::le);
  fix(me.h, w.min_height, Cmp::ge);
  fix(me.h, w.max_height, Cmp::le);
  for (const auto& [kid, v] : w.kid_width) c.guarded({eq(c.layout.vars[c.layout.index_of(kid)].w, v)}, origin);
  for (const auto& [kid, v] : w.kid_height) c.guarded({eq(c.layout.vars[c.layout.index_of(kid)].h, v)}, origin);
}

void emit_hierarchy(CompiledLayout& L, const LayoutSpec& spec) {
  const auto n = static_cast<std::int32_t>(L.ids.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const auto& parents = L.nodes[i].parents;
    if (i == L.root) continue;
    const std::string origin = "hierarchy:" + L.ids[i];
    const BoolId v = L.vars[i].v;
    std::vector<LitOrConst> any{lit(v, false)};
    for (auto p : parents) any.push_back(lit(L.vars[p].v));
    L.formula.add(any, origin);
    for (std::size_t a = 0; a < parents.size(); ++a) {
      for (std::size_t b = a + 1; b < parents.size(); ++b) {
        L.formula.add({lit(v, false), lit(L.vars[parents[a]].v, false), lit(L.vars[parents[b]].v, false)}, origin);
      }
    }
  }
  for (std::int32_t i = 0; i < n; ++i) {
    const ContainerKind kind = L.kinds[i];
    const auto& kids = L.nodes[i].kids;
    if (kind == ContainerKind::leaf || kids.empty()) continue;
    const std::string origin = "hierarchy:" + L.ids[i];
    const BoolId v = L.vars[i].v;
    if (kind == ContainerKind::placeholder) {
      std::vector<LitOrConst> one{lit(v, false)};
      for (auto k : kids) one.push_back(lit(L.vars[k].v));
      L.formula.add(one, origin);
      for (std::size_t a = 0; a < kids.size(); ++a) {
        for (std::size_t b = a + 1; b < kids.size(); ++b) {
          L.formula.add({lit(v, false), lit(L.vars[kids[a]].v, false), lit(L.vars[kids[b]].v, false)}, origin);
        }
      }
      // alternative-visibility softs; default weight favours earlier kids
      const Widget* w = spec.find(L.ids[i]);
      for (std::size_t k = 0; k < kids.size(); ++k) {
        std::int64_t weight = w->weights.empty() ? static_cast<std::int64_t>(kids.size() - k) : w->weights[k];
        L.formula.soft.push_back({L.vars[kids[k]].v, true, weight});
      }
    } else if (kind != ContainerKind::flow_nowrap) {
      for (auto k : kids) L.formula.add({lit(v, false), lit(L.vars[k].v)}, origin);
    }
  }
}

}  // namespace

LitOrConst parse_comparison(std::string_view text, const CompiledLayout& layout) {
  return to_literal(detail::parse_comparison_text(text), layout);
}

CompiledLayout compile_layout(const LayoutSpec& spec) {
  auto diagnostics = validate_spec(spec);
  if (has_errors(diagnostics)) {
    std::string msg = "invalid layout:";
    for (const auto& d : diagnostics) {
      if (d.level == Diagnostic::Level::error) msg += "\n  " + d.widget + ": " + d.message;
    }
    throw SpecError(msg);
  }

  CompiledLayout L;
  const std::int64_t cmax = spec.config.coordinate_max;
  const auto n = static_cast<std::int32_t>(spec.widgets.size());
  L.vars.resize(n);
  L.nodes.resize(n);
  for (std::int32_t i = 0; i < n; ++i) {
    const Widget& w = spec.widgets[i];
    L.ids.push_back(w.id);
    L.kinds.push_back(w.kind);
    auto& reg = L.formula.vars;
    const bool root = w.id == spec.root;
    WidgetVars& v = L.vars[i];
    v.x = reg.add_arith({w.id + ".x", 0, cmax, Axis::horizontal, VarRole::position, i});
    v.y = reg.add_arith({w.id + ".y", 0, cmax, Axis::vertical, VarRole::position, i});
    v.w = reg.add_arith({w.id + ".w", root ? spec.min_width : 0, root ? spec.max_width : cmax, Axis::horizontal,
                         VarRole::size, i});
    v.h = reg.add_arith({w.id + ".h", 0, cmax, Axis::vertical, VarRole::size, i});
    v.v = reg.add_bool({w.id + ".v", i});
    if (root) {
      L.root = i;
      L.screen_width = v.w;
    }
  }
  for (std::int32_t i = 0; i < n; ++i) {
    for (const auto& k : spec.widgets[i].kids) {
      auto ki = L.index_of(k);
      L.nodes[i].kids.push_back(ki);
      L.nodes[ki].parents.push_back(i);
    }
  }
  std::vector<int> done(n, 0);
  std::function<void(std::int32_t)> closure = [&](std::int32_t i) {
    if (done[i]) return;
    done[i] = 1;
    std::set<std::int32_t> sub;
    for (auto k : L.nodes[i].kids) {
      closure(k);
      sub.insert(k);
      sub.insert(L.nodes[k].sub.begin(), L.nodes[k].sub.end());
    }
    L.nodes[i].sub.assign(sub.begin(), sub.end());
  };
  for (std::int32_t i = 0; i < n; ++i) closure(i);

  const auto& root = L.vars[L.root];
  L.formula.add_unit(lit(root.v), "screen");
  L.formula.add_unit(eq(root.x, 0), "screen");
  L.formula.add_unit(eq(root.y, 0), "screen");
  if (spec.screen_height) L.formula.add_unit(eq(root.h, *spec.screen_height), "screen");

  emit_hierarchy(L, spec);

  for (std::int32_t i = 0; i < n; ++i) {
    detail::Ctx ctx{L, spec.widgets[i], i, L.nodes[i].kids, cmax};
    emit_attributes(ctx);
    if (spec.widgets[i].kind != ContainerKind::leaf) detail::emit_container(ctx);
  }

  for (const auto& c : spec.constraints) {
    std::vector<LitOrConst> lits;
    std::vector<std::string> guard;
    for (const auto& t : c.any) {
      auto parsed = detail::parse_comparison_text(t);
      lits.push_back(to_literal(parsed, L));
      for (const auto& term : parsed.terms) {
        if (std::find(guard.begin(), guard.end(), term.widget) == guard.end()) guard.push_back(term.widget);
      }
    }
    if (c.guard) guard = *c.guard;
    for (const auto& g : guard) lits.push_back(lit(L.vars[L.index_of(g)].v, false));
    L.formula.add(lits, "user:" + c.id);
  }

  for (const auto& p : spec.preferences) {
    BoolId s = L.formula.vars.add_bool({"pref." + p.id});
    for (const auto& t : p.all) L.formula.add({lit(s, false), parse_comparison(t, L)}, "pref:" + p.id);
    L.formula.soft.push_back({s, true, p.weight});
  }
  return L;
}

}  // namespace reflow
