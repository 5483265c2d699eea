#include <numeric>

#include "internal.hpp"

namespace reflow::detail {

namespace {

using E = LinearExpr;

/// Main-axis / cross-axis view of a container for sequence-style kinds.
struct Axes {
  const Ctx& c;
  int a;  ///< main axis: 0 horizontal, 1 vertical
  int b() const { return 1 - a; }
  E pos(std::int32_t w) const { return c.pos(w, a); }
  E size(std::int32_t w) const { return c.size(w, a); }
  E end(std::int32_t w) const { return pos(w) + size(w); }
  E xpos(std::int32_t w) const { return c.pos(w, b()); }
  E xsize(std::int32_t w) const { return c.size(w, b()); }
  E xend(std::int32_t w) const { return xpos(w) + xsize(w); }
};

Axis axis_of(int a) { return a == 0 ? Axis::horizontal : Axis::vertical; }

void sequence(const Ctx& c, int a) {
  Axes ax{c, a};
  const auto& k = c.kids;
  const auto w = c.index;
  const std::string o = c.origin();
  for (std::size_t i = 0; i + 1 < k.size(); ++i) c.guarded({le(ax.end(k[i]), ax.pos(k[i + 1]))}, o);
  c.guarded({ge(ax.pos(k.front()), ax.pos(w))}, o);
  c.guarded({le(ax.end(k.back()), ax.end(w))}, o);
  for (auto kid : k) {
    c.guarded({ge(ax.xpos(kid), ax.xpos(w))}, o);
    c.guarded({le(ax.xend(kid), ax.xend(w))}, o);
  }
  const std::string attr = c.attr_origin();
  auto rel = [](const Spacing& s, const E& lhs) { return s.equal ? eq(lhs, s.value) : ge(lhs, s.value); };
  if (const auto& m = c.widget.margin) {
    for (std::size_t i = 1; i < k.size(); ++i) c.guarded({rel(*m, ax.pos(k[i]) - ax.end(k[i - 1]))}, attr);
  }
  if (const auto& p = c.widget.padding) {
    c.guarded({rel(*p, ax.pos(k.front()) - ax.pos(w))}, attr);
    c.guarded({rel(*p, ax.end(w) - ax.end(k.back()))}, attr);
    for (auto kid : k) {
      c.guarded({rel(*p, ax.xpos(kid) - ax.xpos(w))}, attr);
      c.guarded({rel(*p, ax.xend(w) - ax.xend(kid))}, attr);
    }
  }
}

void flow_wrap(const Ctx& c, int a) {
  Axes ax{c, a};
  const auto& k = c.kids;
  const auto w = c.index;
  const std::string o = c.origin();
  for (std::size_t i = 1; i < k.size(); ++i) c.guarded({eq(ax.xsize(k[i]), ax.xsize(k[0]))}, o);
  c.guarded({eq(ax.pos(k[0]), ax.pos(w))}, o);
  c.guarded({eq(ax.xpos(k[0]), ax.xpos(w))}, o);
  c.guarded({le(ax.end(k.back()), ax.end(w))}, o);
  c.guarded({le(ax.xend(k.back()), ax.xend(w))}, o);
  for (std::size_t i = 1; i < k.size(); ++i) {
    // e: the kid does not fit after its predecessor and wraps
    E reach = ax.size(k[i]) + ax.end(k[i - 1]);
    LitOrConst no_wrap = le(reach, ax.end(w));
    LitOrConst wrap = gt(reach, ax.end(w));
    c.guarded({no_wrap, eq(ax.pos(k[i]), ax.pos(w))}, o);
    c.guarded({no_wrap, eq(ax.xpos(k[i]), ax.xpos(k[i - 1]) + ax.xsize(k[0]))}, o);
    c.guarded({wrap, eq(ax.pos(k[i]), ax.end(k[i - 1]))}, o);
    c.guarded({wrap, eq(ax.xpos(k[i]), ax.xpos(k[i - 1]))}, o);
  }
}

void flow_nowrap(const Ctx& c, int a) {
  Axes ax{c, a};
  const auto& k = c.kids;
  const auto w = c.index;
  const std::string o = c.origin();
  for (std::size_t i = 1; i < k.size(); ++i) c.guarded({eq(ax.xsize(k[i]), ax.xsize(k[0]))}, o);
  c.guarded({eq(ax.pos(k[0]), ax.pos(w))}, o);
  c.guarded({eq(ax.xpos(k[0]), ax.xpos(w))}, o);
  for (std::size_t i = 1; i < k.size(); ++i) {
    c.guarded({eq(ax.pos(k[i]), ax.end(k[i - 1]))}, o);
    c.guarded({eq(ax.xpos(k[i]), ax.xpos(k[i - 1]))}, o);
  }
  for (auto kid : k) {
    c.guarded({gt(ax.end(kid), ax.end(w)), lit(c.vis(kid))}, o);
    c.guarded({le(ax.end(kid), ax.end(w)), lit(c.vis(kid), false)}, o);
    c.guarded({lit(c.vis(kid), false), le(ax.xend(kid), ax.xend(w))}, o);
  }
}

void flow_varying(const Ctx& c, int a) {
  Axes ax{c, a};
  const auto& k = c.kids;
  const auto w = c.index;
  const std::string o = c.origin();
  const Axis cross = axis_of(ax.b());
  std::vector<ArithId> top, tall;
  for (std::size_t i = 0; i < k.size(); ++i) {
    top.push_back(c.aux("top_" + std::to_string(i + 1), cross, VarRole::position));
    tall.push_back(c.aux("max_height_" + std::to_string(i + 1), cross, VarRole::size));
  }
  c.guarded({eq(top[0], ax.xpos(w))}, o);
  c.guarded({eq(tall[0], ax.xsize(k[0]))}, o);
  c.guarded({eq(ax.pos(k[0]), ax.pos(w))}, o);
  for (std::size_t i = 1; i < k.size(); ++i) {
    E reach = ax.size(k[i]) + ax.end(k[i - 1]);
    LitOrConst no_wrap = le(reach, ax.end(w));
    LitOrConst wrap = gt(reach, ax.end(w));
    // wrap: the finished row closes at its tallest kid; the new row starts below it
    c.guarded({no_wrap, eq(ax.pos(k[i]), ax.pos(w))}, o);
    c.guarded({no_wrap, eq(ax.xend(k[i - 1]), E(top[i - 1]) + tall[i - 1])}, o);
    c.guarded({no_wrap, eq(top[i], ax.xend(k[i - 1]))}, o);
    c.guarded({no_wrap, eq(tall[i], ax.xsize(k[i]))}, o);
    // same row: bottoms aligned, running maximum
    c.guarded({wrap, eq(ax.pos(k[i]), ax.end(k[i - 1]))}, o);
    c.guarded({wrap, eq(ax.xend(k[i]), ax.xend(k[i - 1]))}, o);
    c.guarded({wrap, eq(top[i], top[i - 1])}, o);
    c.guarded({wrap, le(ax.xsize(k[i]), tall[i - 1]), eq(tall[i], ax.xsize(k[i]))}, o);
    c.guarded({wrap, gt(ax.xsize(k[i]), tall[i - 1]), eq(tall[i], tall[i - 1])}, o);
  }
  const std::size_t n = k.size() - 1;
  c.guarded({eq(ax.xend(k[n]), E(top[n]) + tall[n])}, o);
  c.guarded({le(ax.end(k[n]), ax.end(w))}, o);
  c.guarded({le(ax.xend(k[n]), ax.xend(w))}, o);
}

void waterfall(const Ctx& c) {
  const auto& k = c.kids;
  const auto w = c.index;
  const std::string o = c.origin();
  const auto cols = static_cast<std::size_t>(c.widget.columns);
  auto X = [&](std::int32_t i) { return E(c.pos(i, 0)); };
  auto Y = [&](std::int32_t i) { return E(c.pos(i, 1)); };
  auto W = [&](std::int32_t i) { return E(c.size(i, 0)); };
  auto H = [&](std::int32_t i) { return E(c.size(i, 1)); };
  for (auto kid : k) c.guarded({eq(W(kid) * Rational(static_cast<long>(cols)), W(w))}, o);
  const std::size_t first = std::min(cols, k.size());
  std::vector<E> bottom;
  for (std::size_t y = 0; y < first; ++y) {
    c.guarded({eq(Y(k[y]), Y(w))}, o);
    c.guarded({eq(X(k[y]), X(w) + W(k[0]) * Rational(static_cast<long>(y)))}, o);
    bottom.push_back(Y(k[y]) + H(k[y]));
  }
  for (std::size_t i = cols; i < k.size(); ++i) {
    std::vector<ArithId> next;
    for (std::size_t y = 0; y < cols; ++y) {
      next.push_back(c.aux("bottom_" + std::to_string(i + 1) + "_" + std::to_string(y + 1), Axis::vertical,
                           VarRole::position));
    }
    for (std::size_t y = 0; y < cols; ++y) {
      // not lowest: some column left is at most as high, or some column right is strictly higher
      std::vector<LitOrConst> not_lowest;
      for (std::size_t z = 0; z < cols; ++z) {
        if (z < y) not_lowest.push_back(ge(bottom[y], bottom[z]));
        if (z > y) not_lowest.push_back(gt(bottom[y], bottom[z]));
      }
      auto when = [&](LitOrConst l) {
        auto lits = not_lowest;
        lits.push_back(std::move(l));
        c.guarded(lits, o);
      };
      when(eq(X(k[i]), X(k[y])));
      when(eq(Y(k[i]), bottom[y]));
      for (std::size_t z = 0; z < cols; ++z) {
        when(eq(next[z], z == y ? bottom[y] + H(k[i]) : bottom[z]));
      }
    }
    bottom.assign(next.begin(), next.end());
  }
  for (const auto& b : bottom) c.guarded({le(b, Y(w) + H(w))}, o);
}

void table(const Ctx& c) {
  const auto& k = c.kids;
  const auto w = c.index;
  const std::string o = c.origin();
  const auto R = static_cast<std::size_t>(c.widget.rows);
  const auto C = static_cast<std::size_t>(c.widget.columns);
  auto at = [&](std::size_t r, std::size_t col) { return k[r * C + col]; };
  auto X = [&](std::int32_t i) { return E(c.pos(i, 0)); };
  auto Y = [&](std::int32_t i) { return E(c.pos(i, 1)); };
  auto W = [&](std::int32_t i) { return E(c.size(i, 0)); };
  auto H = [&](std::int32_t i) { return E(c.size(i, 1)); };
  c.guarded({eq(X(at(0, 0)), X(w))}, o);
  c.guarded({eq(Y(at(0, 0)), Y(w))}, o);
  c.guarded({eq(X(at(R - 1, C - 1)) + W(at(R - 1, C - 1)), X(w) + W(w))}, o);
  c.guarded({eq(Y(at(R - 1, C - 1)) + H(at(R - 1, C - 1)), Y(w) + H(w))}, o);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t col = 1; col < C; ++col) {
      c.guarded({eq(Y(at(r, 0)), Y(at(r, col)))}, o);
      c.guarded({eq(H(at(r, 0)), H(at(r, col)))}, o);
    }
  }
  for (std::size_t col = 0; col < C; ++col) {
    for (std::size_t r = 1; r < R; ++r) {
      c.guarded({eq(X(at(0, col)), X(at(r, col)))}, o);
      c.guarded({eq(W(at(0, col)), W(at(r, col)))}, o);
    }
  }
  for (std::size_t col = 0; col + 1 < C; ++col) c.guarded({eq(X(at(0, col)) + W(at(0, col)), X(at(0, col + 1)))}, o);
  for (std::size_t r = 0; r + 1 < R; ++r) c.guarded({eq(Y(at(r, 0)) + H(at(r, 0)), Y(at(r + 1, 0)))}, o);

  // overridden columns/rows get their size; the rest stay mutually equal
  const std::string attr = c.attr_origin();
  std::optional<std::size_t> free_col, free_row;
  for (std::size_t col = 0; col < C; ++col) {
    auto it = c.widget.col_width.find(static_cast<std::int64_t>(col + 1));
    if (it != c.widget.col_width.end()) {
      c.guarded({eq(W(at(0, col)), it->second)}, attr);
    } else if (!free_col) {
      free_col = col;
    } else {
      c.guarded({eq(W(at(0, col)), W(at(0, *free_col)))}, o);
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    auto it = c.widget.row_height.find(static_cast<std::int64_t>(r + 1));
    if (it != c.widget.row_height.end()) {
      c.guarded({eq(H(at(r, 0)), it->second)}, attr);
    } else if (!free_row) {
      free_row = r;
    } else {
      c.guarded({eq(H(at(r, 0)), H(at(*free_row, 0)))}, o);
    }
  }
}

void card(const Ctx& c) {
  const auto& k = c.kids;
  const auto w = c.index;
  const std::string o = c.origin();
  auto X = [&](std::int32_t i) { return E(c.pos(i, 0)); };
  auto Y = [&](std::int32_t i) { return E(c.pos(i, 1)); };
  auto W = [&](std::int32_t i) { return E(c.size(i, 0)); };
  auto H = [&](std::int32_t i) { return E(c.size(i, 1)); };
  for (auto kid : k) {
    c.guarded({eq(X(kid), X(w))}, o);
    c.guarded({eq(W(kid), W(w))}, o);
  }
  const auto cap = k[0], body = k[1], dis = k[2];
  c.guarded({eq(Y(cap), Y(w))}, o);
  c.guarded({eq(Y(dis) + H(dis), Y(w) + H(w))}, o);
  c.guarded({le(Y(cap) + H(cap), Y(body))}, o);
  c.guarded({le(Y(body) + H(body), Y(dis))}, o);
  for (const auto& [idx, p] : c.widget.proportion) {
    c.guarded({eq(H(k[static_cast<std::size_t>(idx - 1)]), H(w) * p)}, c.attr_origin());
  }
}

/// Integer scale making every value integral.
Rational common_scale(const std::vector<Rational>& values) {
  mpz_class l = 1;
  for (const auto& v : values) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den().get_mpz_t());
  return Rational(l);
}

void flex(const Ctx& c) {
  const int a = c.widget.vertical ? 1 : 0;
  sequence(c, a);
  Axes ax{c, a};
  const auto& k = c.kids;
  const auto w = c.index;
  const std::string o = c.origin();
  const std::size_t n = k.size();

  switch (c.widget.main) {
    case FlexMain::space_around: {
      E lead = ax.pos(k[0]) - ax.pos(w);
      c.guarded({eq(lead, ax.end(w) - ax.end(k[n - 1]))}, o);
      for (std::size_t i = 1; i < n; ++i) c.guarded({eq(lead * 2, ax.pos(k[i]) - ax.end(k[i - 1]))}, o);
      break;
    }
    case FlexMain::space_between:
      c.guarded({eq(ax.pos(k[0]), ax.pos(w))}, o);
      c.guarded({eq(ax.end(k[n - 1]), ax.end(w))}, o);
      for (std::size_t i = 2; i < n; ++i) {
        c.guarded({eq(ax.pos(k[i]) - ax.end(k[i - 1]), ax.pos(k[1]) - ax.end(k[0]))}, o);
      }
      break;
    case FlexMain::none:
      break;
  }
  for (auto kid : k) {
    switch (c.widget.cross) {
      case FlexCross::stretch:
        c.guarded({eq(ax.xpos(kid), ax.xpos(w))}, o);
        c.guarded({eq(ax.xsize(kid), ax.xsize(w))}, o);
        break;
      case FlexCross::start:
        c.guarded({eq(ax.xpos(kid), ax.xpos(w))}, o);
        break;
      case FlexCross::end:
        c.guarded({eq(ax.xend(kid), ax.xend(w))}, o);
        break;
      case FlexCross::none:
        break;
    }
  }
  if (!c.widget.grow) return;

  // r: room to spare, distributed by flex_grow; l: overflow, taken by flex_shrink.
  // Each share is floored and the last kid absorbs the remainder.
  std::int64_t basis_sum = 0;
  std::vector<Rational> grow, shrink;
  for (const auto& it : c.widget.items) {
    basis_sum += it.basis;
    grow.push_back(it.grow);
    shrink.push_back(it.shrink);
  }
  auto distribute = [&](const std::vector<Rational>& factors, bool growing) {
    const Rational scale = common_scale(factors);
    Rational total = 0;
    for (const auto& f : factors) total += f * scale;
    if (total == 0) return;
    LitOrConst outside = growing ? lt(ax.size(w), basis_sum) : ge(ax.size(w), basis_sum);
    E spare = growing ? ax.size(w) - basis_sum : E(basis_sum) - ax.size(w);
    E used;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& it = c.widget.items[i];
      E delta = growing ? ax.size(k[i]) - it.basis : E(it.basis) - ax.size(k[i]);
      const Rational g = factors[i] * scale;
      if (i + 1 < n) {
        // total·delta ≤ g·spare < total·delta + total
        c.guarded({outside, le(delta * total, spare * g)}, o);
        c.guarded({outside, lt(spare * g, delta * total + total)}, o);
      }
      used += ax.size(k[i]);
    }
    c.guarded({outside, eq(used, ax.size(w))}, o);
  };
  distribute(grow, true);
  distribute(shrink, false);
}

void placeholder(const Ctx& c) {
  const auto w = c.index;
  const std::string o = c.origin();
  for (auto kid : c.kids) {
    for (int axis = 0; axis < 2; ++axis) {
      c.guarded({lit(c.vis(kid), false), eq(c.pos(kid, axis), c.pos(w, axis))}, o);
      c.guarded({lit(c.vis(kid), false), eq(c.size(kid, axis), c.size(w, axis))}, o);
    }
  }
}

}  // namespace

void emit_container(const Ctx& c) {
  if (c.kids.empty()) return;
  const int main = c.widget.vertical ? 1 : 0;
  switch (c.widget.kind) {
    case ContainerKind::leaf: break;
    case ContainerKind::row: sequence(c, 0); break;
    case ContainerKind::column: sequence(c, 1); break;
    case ContainerKind::flow_wrap: flow_wrap(c, main); break;
    case ContainerKind::flow_nowrap: flow_nowrap(c, main); break;
    case ContainerKind::flow_varying: flow_varying(c, main); break;
    case ContainerKind::waterfall: waterfall(c); break;
    case ContainerKind::table: table(c); break;
    case ContainerKind::card: card(c); break;
    case ContainerKind::flex: flex(c); break;
    case ContainerKind::placeholder: placeholder(c); break;
  }
}

}  // namespace reflow::detail
