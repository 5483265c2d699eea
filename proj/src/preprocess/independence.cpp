#include <algorithm>
#include <numeric>
#include <set>

#include "reflow/preprocess.hpp"

namespace reflow {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

/// Which variables belong to the subtree of w (auxiliaries of w included,
/// w's own five properties excluded).
struct Membership {
  const CompiledLayout& L;
  std::int32_t w;
  std::vector<char> in_sub;

  Membership(const CompiledLayout& layout, std::int32_t widget) : L(layout), w(widget), in_sub(layout.ids.size(), 0) {
    for (auto s : L.nodes[w].sub) in_sub[s] = 1;
  }
  bool own(ArithId v) const {
    const auto& p = L.vars[w];
    return v == p.x || v == p.y || v == p.w || v == p.h;
  }
  bool inside(ArithId v) const {
    auto owner = L.formula.vars.arith(v).owner;
    if (owner == no_owner) return false;
    return in_sub[owner] || (owner == w && !own(v));
  }
  bool inside(BoolId v) const {
    auto owner = L.formula.vars.boolean(v).owner;
    return owner != no_owner && in_sub[owner];
  }
  bool allowed(ArithId v) const { return inside(v) || own(v); }
  bool allowed(BoolId v) const { return inside(v) || v == L.vars[w].v; }
};

template <class Fn>
void for_each_var(const Clause& c, Fn fn) {
  for (const auto& l : c.literals) {
    if (l.is_bool()) {
      fn(l.bool_var());
    } else {
      for (const auto& t : l.atom().terms()) fn(t.var);
    }
  }
}

bool touches(const Clause& c, const Membership& m) {
  bool hit = false;
  for_each_var(c, [&](auto v) { hit = hit || m.inside(v); });
  return hit;
}

bool translation_invariant(const Clause& c, const VarRegistry& vars) {
  for (const auto& l : c.literals) {
    if (l.is_bool()) continue;
    Rational h = 0, v = 0;
    for (const auto& t : l.atom().terms()) {
      const auto& var = vars.arith(t.var);
      if (var.role != VarRole::position) continue;
      (var.axis == Axis::vertical ? v : h) += t.coef;
    }
    if (h != 0 || v != 0) return false;
  }
  return true;
}

/// Slice formula: F_sub, visibility of w and the origin anchor.
Formula slice_formula(const Formula& f, const CompiledLayout& L, std::int32_t w, const std::vector<std::size_t>& idx) {
  Formula s;
  s.vars = f.vars;
  for (auto i : idx) s.hard.push_back(f.hard[i]);
  const std::string origin = "slice:" + L.ids[w];
  s.add_unit(lit(L.vars[w].v), origin);
  s.add_unit(eq(L.vars[w].x, 0), origin);
  s.add_unit(eq(L.vars[w].y, 0), origin);
  Membership m(L, w);
  for (const auto& soft : f.soft) {
    if (m.inside(soft.var)) s.soft.push_back(soft);
  }
  return s;
}

enum : int { kNone = 0, kHorizontal = 1, kVertical = 2 };

/// Axis components of the slice after Boolean propagation. Returns false when
/// some component mixes axes or the slice is unsat. `width`/`height` receive
/// the softs attached to each axis.
bool split_axes(const Formula& slice, std::vector<SoftLiteral>& width, std::vector<SoftLiteral>& height,
                bool& attributed) {
  SimplifyResult r;
  try {
    r = boolean_simplify(slice, {}, false);
  } catch (const ConflictError&) {
    return false;
  }
  const auto& vars = slice.vars;
  const std::size_t na = vars.arith_count();
  UnionFind uf(na + vars.bool_count());
  std::vector<char> used(na + vars.bool_count(), 0);
  for (const auto& c : r.residual.hard) {
    std::optional<std::size_t> first;
    for_each_var(c, [&](auto v) {
      std::size_t node;
      if constexpr (std::is_same_v<decltype(v), BoolId>) node = na + v.index;
      else node = v.index;
      used[node] = 1;
      if (first) uf.unite(*first, node);
      else first = node;
    });
  }
  std::vector<int> axes(na + vars.bool_count(), kNone);
  for (std::uint32_t i = 0; i < na; ++i) {
    if (!used[i]) continue;
    Axis a = vars.arith(ArithId{i}).axis;
    axes[uf.find(i)] |= a == Axis::horizontal ? kHorizontal : a == Axis::vertical ? kVertical : kNone;
  }
  for (int a : axes) {
    if (a == (kHorizontal | kVertical)) return false;
  }
  attributed = true;
  for (const auto& s : slice.soft) {
    if (r.values[s.var.index]) continue;  // fixed by propagation
    const std::size_t node = na + s.var.index;
    const int a = used[node] ? axes[uf.find(node)] : kNone;
    if (a == kHorizontal) width.push_back(s);
    else if (a == kVertical) height.push_back(s);
    else attributed = false;
  }
  return true;
}

struct Evaluation {
  IndependenceReport report;
  std::vector<std::size_t> clauses;
  std::vector<SoftLiteral> width_softs, height_softs;
};

Evaluation evaluate(const Formula& f, const CompiledLayout& L, std::int32_t w, std::size_t threshold) {
  Evaluation e;
  e.report.widget = L.ids[w];
  Membership m(L, w);
  e.clauses = sub_clauses(f, L, w);
  e.report.clauses = e.clauses.size();
  e.report.within_threshold = e.clauses.size() <= threshold;
  e.report.closed = true;
  e.report.translation_invariant = true;
  for (auto i : e.clauses) {
    for_each_var(f.hard[i], [&](auto v) { e.report.closed = e.report.closed && m.allowed(v); });
    e.report.translation_invariant = e.report.translation_invariant && translation_invariant(f.hard[i], f.vars);
  }
  if (!e.report.closed || !e.report.within_threshold) return e;
  Formula slice = slice_formula(f, L, w, e.clauses);
  e.report.axis_separated = split_axes(slice, e.width_softs, e.height_softs, e.report.softs_attributed);
  return e;
}

}  // namespace

std::vector<std::size_t> sub_clauses(const Formula& f, const CompiledLayout& layout, std::int32_t w) {
  Membership m(layout, w);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.hard.size(); ++i) {
    if (touches(f.hard[i], m)) out.push_back(i);
  }
  return out;
}

std::vector<IndependenceReport> independence_reports(const Formula& f, const CompiledLayout& layout,
                                                     std::size_t threshold) {
  std::vector<IndependenceReport> out;
  for (std::int32_t w = 0; w < static_cast<std::int32_t>(layout.ids.size()); ++w) {
    if (w == layout.root || layout.nodes[w].sub.empty()) continue;
    out.push_back(evaluate(f, layout, w, threshold).report);
  }
  return out;
}

std::vector<std::string> detect_independent_widgets(const Formula& f, const CompiledLayout& layout,
                                                     std::size_t threshold, const std::set<std::string>& exclude) {
  std::set<std::int32_t> qualifying;
  for (const auto& r : independence_reports(f, layout, threshold)) {
    if (r.qualifies() && !exclude.count(r.widget)) qualifying.insert(layout.index_of(r.widget));
  }
  std::vector<std::string> out;
  for (auto w : qualifying) {
    bool nested = false;
    for (auto outer : qualifying) {
      const auto& sub = layout.nodes[outer].sub;
      nested = nested || std::binary_search(sub.begin(), sub.end(), w);
    }
    if (!nested) out.push_back(layout.ids[w]);
  }
  return out;
}

Formula IndependentSlice::inner() const {
  Formula g;
  g.vars = formula.vars;
  g.hard = formula.hard;
  for (const auto* t : {&width, &height}) {
    auto rel = t->relation(formula.vars);
    g.hard.insert(g.hard.end(), rel.begin(), rel.end());
  }
  return g;
}

Extraction extract_independent_widgets(const Formula& f, const CompiledLayout& layout, Backend& backend,
                                       std::size_t threshold, const std::set<std::string>& exclude,
                                       const std::map<std::string, IndependentSlice>& reuse) {
  Extraction out;
  std::vector<char> removed(f.hard.size(), 0);
  std::set<std::uint32_t> inner_softs;
  Formula hard_only;
  hard_only.vars = f.vars;
  hard_only.hard = f.hard;
  for (const auto& id : detect_independent_widgets(f, layout, threshold, exclude)) {
    const std::int32_t w = layout.index_of(id);
    Evaluation e = evaluate(f, layout, w, threshold);
    if (auto it = reuse.find(id); it != reuse.end()) {
      for (auto i : e.clauses) removed[i] = 1;
      for (const auto& soft : it->second.formula.soft) inner_softs.insert(soft.var.index);
      out.slices.push_back(it->second);
      continue;
    }
    IndependentSlice s;
    s.widget = id;
    s.index = w;
    s.clause_count = e.clauses.size();
    s.formula = slice_formula(f, layout, w, e.clauses);
    // sizes the whole layout can give w; the slice alone is often looser
    Formula slice_hard;
    slice_hard.vars = s.formula.vars;
    slice_hard.hard = s.formula.hard;
    for (ArithId p : {layout.vars[w].w, layout.vars[w].h}) {
      for (Direction d : {Direction::minimize, Direction::maximize}) {
        const bool min = d == Direction::minimize;
        SolverRequest req;
        req.formula = &slice_hard;
        req.objective = Objective{p, d};
        SolverResult local = backend.solve(req);
        if (local.status == Status::unknown) throw SolverError("size bound of " + id + ": backend returned unknown");
        if (local.status != Status::sat) continue;  // hardening reports it
        // the whole formula reaches the slice's own bound: nothing to add
        req.formula = &hard_only;
        req.assumptions = {Literal::boolean(layout.vars[w].v)};
        req.objective.reset();
        req.extra = {*make_clause({min ? le(p, *local.optimum) : ge(p, *local.optimum)}, "probe")};
        SolverResult reach = backend.solve(req);
        if (reach.status == Status::unknown) throw SolverError("size bound of " + id + ": backend returned unknown");
        if (reach.status == Status::sat) continue;
        req.extra.clear();
        req.objective = Objective{p, d};
        SolverResult r = backend.solve(req);
        if (r.status == Status::unknown) throw SolverError("size bound of " + id + ": backend returned unknown");
        if (r.status != Status::sat || !r.optimum) continue;  // w never visible; the slice tables decide
        s.formula.add_unit(min ? ge(p, *r.optimum) : le(p, *r.optimum), "range:" + id);
      }
    }
    s.width = soft_constraints_hardening(s.formula, layout.vars[w].w, backend, {.related = e.width_softs, .extra = {}});
    s.height = soft_constraints_hardening(s.formula, layout.vars[w].h, backend, {.related = e.height_softs, .extra = {}});
    for (auto i : e.clauses) removed[i] = 1;
    for (const auto& soft : s.formula.soft) inner_softs.insert(soft.var.index);
    out.slices.push_back(std::move(s));
  }
  out.outer.vars = f.vars;
  for (std::size_t i = 0; i < f.hard.size(); ++i) {
    if (!removed[i]) out.outer.hard.push_back(f.hard[i]);
  }
  // the outer layer sees each slice as a box whose sizes range over its tables
  for (const auto& s : out.slices) {
    const auto& v = layout.vars[s.index];
    const std::string origin = "range:" + s.widget;
    out.outer.add({lit(v.v, false), ge(v.w, s.width.min_val)}, origin);
    out.outer.add({lit(v.v, false), le(v.w, s.width.max_val)}, origin);
    out.outer.add({lit(v.v, false), ge(v.h, s.height.min_val)}, origin);
    out.outer.add({lit(v.v, false), le(v.h, s.height.max_val)}, origin);
  }
  for (const auto& soft : f.soft) {
    if (!inner_softs.count(soft.var.index)) out.outer.soft.push_back(soft);
  }
  return out;
}

}  // namespace reflow
