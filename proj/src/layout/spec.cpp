#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "internal.hpp"

namespace reflow {

using nlohmann::json;

namespace {

constexpr std::pair<ContainerKind, std::string_view> kKinds[] = {
    {ContainerKind::leaf, "leaf"},
    {ContainerKind::row, "row"},
    {ContainerKind::column, "column"},
    {ContainerKind::flow_wrap, "flow_wrap"},
    {ContainerKind::flow_nowrap, "flow_nowrap"},
    {ContainerKind::flow_varying, "flow_varying"},
    {ContainerKind::waterfall, "waterfall"},
    {ContainerKind::table, "table"},
    {ContainerKind::card, "card"},
    {ContainerKind::flex, "flex"},
    {ContainerKind::placeholder, "placeholder"},
};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SpecError(where + ": " + what);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [k, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail(where, "unknown field '" + k + "'");
  }
}

std::int64_t get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

Rational get_rational(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(static_cast<long>(j.get<std::int64_t>()));
  if (j.is_string()) {
    try {
      Rational r(j.get<std::string>());
      r.canonicalize();
      return r;
    } catch (const std::invalid_argument&) {
    }
  }
  fail(where, "expected an integer or a \"p/q\" string");
}

std::string rational_text(const Rational& r) { return r.get_str(); }

json rational_json(const Rational& r) {
  if (r.get_den() == 1 && r.get_num().fits_slong_p()) return json(r.get_num().get_si());
  return json(rational_text(r));
}

Spacing get_spacing(const json& j, const std::string& where) {
  check_keys(j, where, {"value", "equal"});
  Spacing s;
  if (j.contains("value")) s.value = get_int(j["value"], where + ".value");
  if (j.contains("equal")) {
    if (!j["equal"].is_boolean()) fail(where + ".equal", "expected a boolean");
    s.equal = j["equal"].get<bool>();
  }
  return s;
}

std::vector<std::string> get_strings(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) fail(where, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<std::string> comparisons(const json& j, const std::string& where, const char* list_key) {
  if (j.contains("expr")) {
    if (j.contains(list_key)) fail(where, std::string("use either 'expr' or '") + list_key + "'");
    if (!j["expr"].is_string()) fail(where + ".expr", "expected a string");
    return {j["expr"].get<std::string>()};
  }
  if (!j.contains(list_key)) fail(where, std::string("missing 'expr' or '") + list_key + "'");
  return get_strings(j[list_key], where + "." + list_key);
}

template <class V, class Fn>
std::map<std::int64_t, V> index_map(const json& j, const std::string& where, Fn value) {
  if (!j.is_object()) fail(where, "expected an object keyed by 1-based index");
  std::map<std::int64_t, V> out;
  for (const auto& [k, v] : j.items()) {
    std::int64_t idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoll(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      fail(where, "key '" + k + "' is not an integer index");
    }
    out[idx] = value(v, where + "." + k);
  }
  return out;
}

Widget parse_widget(const json& j, std::size_t n) {
  std::string where = "widgets[" + std::to_string(n) + "]";
  check_keys(j, where,
             {"id", "kind", "kids", "axis", "width", "height", "min_width", "max_width", "min_height",
              "max_height", "kid_width", "kid_height", "margin", "padding", "columns", "rows", "col_width",
              "row_height", "proportion", "main", "cross", "grow", "items", "weights"});
  Widget w;
  if (!j.contains("id") || !j["id"].is_string()) fail(where, "missing string 'id'");
  w.id = j["id"].get<std::string>();
  where = "widget '" + w.id + "'";
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) fail(where + ".kind", "expected a string");
    auto k = parse_kind(j["kind"].get<std::string>());
    if (!k) fail(where + ".kind", "unknown kind '" + j["kind"].get<std::string>() + "'");
    w.kind = *k;
  }
  if (j.contains("kids")) w.kids = get_strings(j["kids"], where + ".kids");
  if (j.contains("axis")) {
    std::string a = j["axis"].is_string() ? j["axis"].get<std::string>() : "";
    if (a != "horizontal" && a != "vertical") fail(where + ".axis", "expected \"horizontal\" or \"vertical\"");
    w.vertical = a == "vertical";
  }
  auto opt_int = [&](const char* key, std::optional<std::int64_t>& out) {
    if (j.contains(key)) out = get_int(j[key], where + "." + key);
  };
  opt_int("width", w.width);
  opt_int("height", w.height);
  opt_int("min_width", w.min_width);
  opt_int("max_width", w.max_width);
  opt_int("min_height", w.min_height);
  opt_int("max_height", w.max_height);
  for (const char* key : {"kid_width", "kid_height"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_object()) fail(where + "." + key, "expected an object keyed by kid id");
    auto& out = std::string_view(key) == "kid_width" ? w.kid_width : w.kid_height;
    for (const auto& [k, v] : j[key].items()) out[k] = get_int(v, where + "." + key + "." + k);
  }
  if (j.contains("margin")) w.margin = get_spacing(j["margin"], where + ".margin");
  if (j.contains("padding")) w.padding = get_spacing(j["padding"], where + ".padding");
  if (j.contains("columns")) w.columns = get_int(j["columns"], where + ".columns");
  if (j.contains("rows")) w.rows = get_int(j["rows"], where + ".rows");
  auto ints = [](const json& v, const std::string& at) { return get_int(v, at); };
  if (j.contains("col_width")) w.col_width = index_map<std::int64_t>(j["col_width"], where + ".col_width", ints);
  if (j.contains("row_height")) w.row_height = index_map<std::int64_t>(j["row_height"], where + ".row_height", ints);
  if (j.contains("proportion")) {
    w.proportion = index_map<Rational>(j["proportion"], where + ".proportion",
                                       [](const json& v, const std::string& at) { return get_rational(v, at); });
  }
  if (j.contains("main")) {
    std::string m = j["main"].is_string() ? j["main"].get<std::string>() : "";
    if (m == "space_around") w.main = FlexMain::space_around;
    else if (m == "space_between") w.main = FlexMain::space_between;
    else if (m == "none") w.main = FlexMain::none;
    else fail(where + ".main", "expected none, space_around or space_between");
  }
  if (j.contains("cross")) {
    std::string c = j["cross"].is_string() ? j["cross"].get<std::string>() : "";
    if (c == "stretch") w.cross = FlexCross::stretch;
    else if (c == "flex_start") w.cross = FlexCross::start;
    else if (c == "flex_end") w.cross = FlexCross::end;
    else if (c == "none") w.cross = FlexCross::none;
    else fail(where + ".cross", "expected none, stretch, flex_start or flex_end");
  }
  if (j.contains("grow")) {
    if (!j["grow"].is_boolean()) fail(where + ".grow", "expected a boolean");
    w.grow = j["grow"].get<bool>();
  }
  if (j.contains("items")) {
    if (!j["items"].is_array()) fail(where + ".items", "expected an array");
    std::size_t i = 0;
    for (const auto& it : j["items"]) {
      std::string at = where + ".items[" + std::to_string(i++) + "]";
      check_keys(it, at, {"basis", "grow", "shrink"});
      FlexItem item;
      if (it.contains("basis")) item.basis = get_int(it["basis"], at + ".basis");
      if (it.contains("grow")) item.grow = get_rational(it["grow"], at + ".grow");
      if (it.contains("shrink")) item.shrink = get_rational(it["shrink"], at + ".shrink");
      w.items.push_back(item);
    }
  }
  if (j.contains("weights")) {
    if (!j["weights"].is_array()) fail(where + ".weights", "expected an array");
    for (const auto& v : j["weights"]) w.weights.push_back(get_int(v, where + ".weights"));
  }
  return w;
}

}  // namespace

std::string_view kind_name(ContainerKind k) {
  for (auto [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "leaf";
}

std::optional<ContainerKind> parse_kind(std::string_view s) {
  for (auto [kind, name] : kKinds) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

const Widget* LayoutSpec::find(std::string_view id) const {
  for (const auto& w : widgets) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

LayoutSpec parse_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("layout is not valid JSON: ") + e.what());
  }
  check_keys(j, "layout", {"format", "version", "screen", "widgets", "constraints", "preferences", "config"});
  if (j.contains("format") && j["format"] != "reflow-layout") fail("layout.format", "expected \"reflow-layout\"");
  if (j.contains("version") && j["version"] != 1) fail("layout.version", "unsupported version");
  LayoutSpec spec;
  if (!j.contains("screen")) fail("layout", "missing 'screen'");
  const json& s = j["screen"];
  check_keys(s, "screen", {"root", "min_width", "max_width", "height"});
  if (!s.contains("root") || !s["root"].is_string()) fail("screen", "missing string 'root'");
  spec.root = s["root"].get<std::string>();
  if (!s.contains("min_width") || !s.contains("max_width")) fail("screen", "missing width range");
  spec.min_width = get_int(s["min_width"], "screen.min_width");
  spec.max_width = get_int(s["max_width"], "screen.max_width");
  if (s.contains("height") && !s["height"].is_null()) spec.screen_height = get_int(s["height"], "screen.height");

  if (!j.contains("widgets") || !j["widgets"].is_array()) fail("layout", "missing 'widgets' array");
  for (std::size_t i = 0; i < j["widgets"].size(); ++i) spec.widgets.push_back(parse_widget(j["widgets"][i], i));

  if (j.contains("constraints")) {
    if (!j["constraints"].is_array()) fail("constraints", "expected an array");
    for (std::size_t i = 0; i < j["constraints"].size(); ++i) {
      const json& c = j["constraints"][i];
      std::string where = "constraints[" + std::to_string(i) + "]";
      check_keys(c, where, {"id", "expr", "any", "guard"});
      UserConstraint uc;
      if (!c.contains("id") || !c["id"].is_string()) fail(where, "missing string 'id'");
      uc.id = c["id"].get<std::string>();
      uc.any = comparisons(c, where, "any");
      if (c.contains("guard")) uc.guard = get_strings(c["guard"], where + ".guard");
      spec.constraints.push_back(std::move(uc));
    }
  }
  if (j.contains("preferences")) {
    if (!j["preferences"].is_array()) fail("preferences", "expected an array");
    for (std::size_t i = 0; i < j["preferences"].size(); ++i) {
      const json& p = j["preferences"][i];
      std::string where = "preferences[" + std::to_string(i) + "]";
      check_keys(p, where, {"id", "weight", "expr", "all"});
      Preference pref;
      if (!p.contains("id") || !p["id"].is_string()) fail(where, "missing string 'id'");
      pref.id = p["id"].get<std::string>();
      if (p.contains("weight")) pref.weight = get_int(p["weight"], where + ".weight");
      pref.all = comparisons(p, where, "all");
      spec.preferences.push_back(std::move(pref));
    }
  }
  if (j.contains("config")) {
    const json& c = j["config"];
    check_keys(c, "config", {"coordinate_max", "threshold"});
    if (c.contains("coordinate_max")) spec.config.coordinate_max = get_int(c["coordinate_max"], "config.coordinate_max");
    if (c.contains("threshold")) {
      auto t = get_int(c["threshold"], "config.threshold");
      if (t < 0) fail("config.threshold", "must be non-negative");
      spec.config.threshold = static_cast<std::size_t>(t);
    }
  }
  return spec;
}

LayoutSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read layout file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string spec_to_json(const LayoutSpec& spec) {
  json j;
  j["format"] = "reflow-layout";
  j["version"] = 1;
  json s{{"root", spec.root}, {"min_width", spec.min_width}, {"max_width", spec.max_width}};
  if (spec.screen_height) s["height"] = *spec.screen_height;
  j["screen"] = s;
  json widgets = json::array();
  for (const auto& w : spec.widgets) {
    json o{{"id", w.id}};
    if (w.kind != ContainerKind::leaf) o["kind"] = kind_name(w.kind);
    if (!w.kids.empty()) o["kids"] = w.kids;
    if (w.vertical) o["axis"] = "vertical";
    auto put = [&](const char* key, const std::optional<std::int64_t>& v) {
      if (v) o[key] = *v;
    };
    put("width", w.width);
    put("height", w.height);
    put("min_width", w.min_width);
    put("max_width", w.max_width);
    put("min_height", w.min_height);
    put("max_height", w.max_height);
    if (!w.kid_width.empty()) o["kid_width"] = w.kid_width;
    if (!w.kid_height.empty()) o["kid_height"] = w.kid_height;
    if (w.margin) o["margin"] = {{"value", w.margin->value}, {"equal", w.margin->equal}};
    if (w.padding) o["padding"] = {{"value", w.padding->value}, {"equal", w.padding->equal}};
    if (w.kind == ContainerKind::waterfall || w.kind == ContainerKind::table) o["columns"] = w.columns;
    if (w.kind == ContainerKind::table) o["rows"] = w.rows;
    auto put_index = [&](const char* key, const auto& m, auto conv) {
      if (m.empty()) return;
      json x = json::object();
      for (const auto& [k, v] : m) x[std::to_string(k)] = conv(v);
      o[key] = x;
    };
    auto same = [](std::int64_t v) { return json(v); };
    put_index("col_width", w.col_width, same);
    put_index("row_height", w.row_height, same);
    put_index("proportion", w.proportion, rational_json);
    if (w.main == FlexMain::space_around) o["main"] = "space_around";
    if (w.main == FlexMain::space_between) o["main"] = "space_between";
    if (w.cross == FlexCross::stretch) o["cross"] = "stretch";
    if (w.cross == FlexCross::start) o["cross"] = "flex_start";
    if (w.cross == FlexCross::end) o["cross"] = "flex_end";
    if (w.grow) o["grow"] = true;
    if (!w.items.empty()) {
      json items = json::array();
      for (const auto& it : w.items) {
        items.push_back({{"basis", it.basis}, {"grow", rational_json(it.grow)}, {"shrink", rational_json(it.shrink)}});
      }
      o["items"] = items;
    }
    if (!w.weights.empty()) o["weights"] = w.weights;
    widgets.push_back(o);
  }
  j["widgets"] = widgets;
  if (!spec.constraints.empty()) {
    json cs = json::array();
    for (const auto& c : spec.constraints) {
      json o{{"id", c.id}, {"any", c.any}};
      if (c.guard) o["guard"] = *c.guard;
      cs.push_back(o);
    }
    j["constraints"] = cs;
  }
  if (!spec.preferences.empty()) {
    json ps = json::array();
    for (const auto& p : spec.preferences) ps.push_back({{"id", p.id}, {"weight", p.weight}, {"all", p.all}});
    j["preferences"] = ps;
  }
  j["config"] = {{"coordinate_max", spec.config.coordinate_max}, {"threshold", spec.config.threshold}};
  return j.dump(2) + "\n";
}

// ---- comparison expressions ----

namespace detail {

bool valid_widget_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

namespace {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : s_(text) {}

  ParsedComparison parse() {
    ParsedComparison out;
    side(out, 1);
    skip();
    out.op = cmp();
    side(out, -1);
    skip();
    if (i_ != s_.size()) error("unexpected '" + std::string(1, s_[i_]) + "'");
    return out;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    throw SpecError("comparison '" + std::string(s_) + "': " + what);
  }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool accept(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  CmpOp cmp() {
    auto two = [&](std::string_view op) {
      if (s_.substr(i_, op.size()) == op) {
        i_ += op.size();
        return true;
      }
      return false;
    };
    if (two("<=")) return CmpOp::le;
    if (two(">=")) return CmpOp::ge;
    if (two("==")) return CmpOp::eq;
    if (two("!=")) return CmpOp::ne;
    if (two("<")) return CmpOp::lt;
    if (two(">")) return CmpOp::gt;
    if (two("=")) return CmpOp::eq;
    error("expected a comparison operator");
  }
  std::string word() {
    skip();
    std::size_t b = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    return std::string(s_.substr(b, i_ - b));
  }
  static bool all_digits(const std::string& w) {
    return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); });
  }
  Rational number_after(const std::string& w) {
    Rational r(w);
    if (accept('/')) {
      std::string d = word();
      if (!all_digits(d) || d.find_first_not_of('0') == std::string::npos) error("bad denominator");
      r /= Rational(d);
    }
    return r;
  }
  void reference(const std::string& id, PropTerm& t) {
    if (!accept('.')) error("expected '.' after '" + id + "'");
    std::string p = word();
    if (p == "x" || p == "y" || p == "w" || p == "h") t.prop = p[0];
    else if (p == "width") t.prop = 'w';
    else if (p == "height") t.prop = 'h';
    else error("unknown property '" + p + "'");
    t.widget = id;
  }
  void term(ParsedComparison& out, int sign) {
    std::string w = word();
    if (w.empty()) error("expected a number or a widget property");
    skip();
    bool is_ref = i_ < s_.size() && s_[i_] == '.';
    if (!is_ref && all_digits(w)) {
      Rational k = number_after(w);
      if (accept('*')) {
        PropTerm t;
        reference(word(), t);
        t.coef = k * sign;
        out.terms.push_back(t);
      } else {
        out.constant += k * sign;
      }
      return;
    }
    PropTerm t;
    reference(w, t);
    t.coef = sign;
    if (accept('*')) {
      std::string n = word();
      if (!all_digits(n)) error("expected a number after '*'");
      t.coef *= number_after(n);
    }
    out.terms.push_back(t);
  }
  void side(ParsedComparison& out, int sign) {
    int s = accept('-') ? -1 : (accept('+'), 1);
    term(out, s * sign);
    for (;;) {
      if (accept('+')) term(out, sign);
      else if (accept('-')) term(out, -sign);
      else break;
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

ParsedComparison parse_comparison_text(std::string_view text) { return ExprParser(text).parse(); }

}  // namespace detail

std::vector<std::string> comparison_widgets(std::string_view text) {
  auto parsed = detail::parse_comparison_text(text);
  std::vector<std::string> out;
  for (const auto& t : parsed.terms) {
    if (std::find(out.begin(), out.end(), t.widget) == out.end()) out.push_back(t.widget);
  }
  return out;
}

// ---- validation ----

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.level == Diagnostic::Level::error; });
}

std::vector<Diagnostic> validate_spec(const LayoutSpec& spec) {
  std::vector<Diagnostic> out;
  auto error = [&](const std::string& w, std::string msg) {
    out.push_back({Diagnostic::Level::error, w, std::move(msg)});
  };
  auto warn = [&](const std::string& w, std::string msg) {
    out.push_back({Diagnostic::Level::warning, w, std::move(msg)});
  };

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < spec.widgets.size(); ++i) {
    const auto& w = spec.widgets[i];
    if (!detail::valid_widget_id(w.id)) error(w.id, "widget id must be non-empty [A-Za-z0-9_]");
    if (!index.emplace(w.id, i).second) error(w.id, "duplicate widget id");
  }
  if (spec.min_width < 0 || spec.min_width > spec.max_width) error(spec.root, "screen width range is empty or negative");
  if (spec.max_width > spec.config.coordinate_max) error(spec.root, "screen max_width exceeds coordinate_max");
  if (spec.screen_height && *spec.screen_height < 0) error(spec.root, "screen height is negative");
  if (!index.count(spec.root)) error(spec.root, "root widget is not declared");

  std::map<std::string, std::vector<std::string>> parents;
  std::map<std::string, std::set<ContainerKind>> parent_kinds;
  for (const auto& w : spec.widgets) {
    std::set<std::string> seen;
    for (const auto& k : w.kids) {
      if (!index.count(k)) error(w.id, "kid '" + k + "' is not declared");
      if (!seen.insert(k).second) error(w.id, "kid '" + k + "' listed twice");
      parents[k].push_back(w.id);
      parent_kinds[k].insert(w.kind);
    }
  }
  for (const auto& w : spec.widgets) {
    if (w.id == spec.root) {
      if (parents.count(w.id)) error(w.id, "root widget must not have parents");
    } else if (!parents.count(w.id)) {
      error(w.id, "widget has no parent");
    }
    auto kinds = parent_kinds[w.id];
    if (kinds.count(ContainerKind::placeholder) && kinds.size() > 1) {
      warn(w.id, "widget is a kid of both a Placeholder and another container");
    }
  }

  // cycles
  std::map<std::string, int> state;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> dfs = [&](const std::string& id) {
    state[id] = 1;
    stack.push_back(id);
    if (const Widget* w = spec.find(id)) {
      for (const auto& k : w->kids) {
        if (!index.count(k)) continue;
        if (state[k] == 1) {
          auto it = std::find(stack.begin(), stack.end(), k);
          std::string cycle;
          for (; it != stack.end(); ++it) cycle += *it + " -> ";
          error(k, "hierarchy cycle " + cycle + k);
        } else if (state[k] == 0) {
          dfs(k);
        }
      }
    }
    stack.pop_back();
    state[id] = 2;
  };
  for (const auto& w : spec.widgets) {
    if (state[w.id] == 0) dfs(w.id);
  }

  for (const auto& w : spec.widgets) {
    const auto n = static_cast<std::int64_t>(w.kids.size());
    const std::string& id = w.id;
    auto nonneg = [&](const char* name, const std::optional<std::int64_t>& v) {
      if (v && *v < 0) error(id, std::string(name) + " is negative");
    };
    nonneg("width", w.width);
    nonneg("height", w.height);
    nonneg("min_width", w.min_width);
    nonneg("max_width", w.max_width);
    nonneg("min_height", w.min_height);
    nonneg("max_height", w.max_height);
    if (w.min_width && w.max_width && *w.min_width > *w.max_width) error(id, "min_width exceeds max_width");
    if (w.min_height && w.max_height && *w.min_height > *w.max_height) error(id, "min_height exceeds max_height");
    for (const auto* m : {&w.kid_width, &w.kid_height}) {
      for (const auto& [k, v] : *m) {
        if (std::find(w.kids.begin(), w.kids.end(), k) == w.kids.end()) error(id, "'" + k + "' is not a kid");
        if (v < 0) error(id, "kid size for '" + k + "' is negative");
      }
    }
    const bool spaced = w.kind == ContainerKind::row || w.kind == ContainerKind::column || w.kind == ContainerKind::flex;
    if ((w.margin || w.padding) && !spaced) error(id, "margin/padding apply to Row, Column and Flex only");
    for (const auto* s : {&w.margin, &w.padding}) {
      if (*s && (*s)->value < 0) error(id, "margin/padding is negative");
    }
    if (w.kind != ContainerKind::table && (!w.col_width.empty() || !w.row_height.empty())) {
      error(id, "col_width/row_height apply to Table only");
    }
    if (w.kind != ContainerKind::card && !w.proportion.empty()) error(id, "proportion applies to Card only");
    if (w.kind != ContainerKind::flex && (w.grow || !w.items.empty() || w.main != FlexMain::none || w.cross != FlexCross::none)) {
      error(id, "flex attributes apply to Flex only");
    }
    if (w.kind != ContainerKind::placeholder && !w.weights.empty()) error(id, "weights apply to Placeholder only");

    switch (w.kind) {
      case ContainerKind::leaf:
        if (n) error(id, "leaf widget cannot have kids");
        break;
      case ContainerKind::card:
        if (n != 3) error(id, "Card requires exactly 3 kids");
        for (const auto& [k, p] : w.proportion) {
          if (k < 1 || k > 3) error(id, "proportion index " + std::to_string(k) + " out of range");
          if (p <= 0) error(id, "proportion must be positive");
        }
        break;
      case ContainerKind::placeholder:
        if (n < 2) error(id, "Placeholder requires at least 2 kids");
        if (!w.weights.empty() && static_cast<std::int64_t>(w.weights.size()) != n) {
          error(id, "Placeholder weights must match the number of kids");
        }
        for (auto wt : w.weights) {
          if (wt < 1) error(id, "Placeholder weights must be at least 1");
        }
        break;
      case ContainerKind::table:
        if (w.rows < 1 || w.columns < 1) error(id, "Table rows and columns must be positive");
        else if (w.rows * w.columns != n) error(id, "Table requires rows*columns kids");
        for (const auto& [k, v] : w.col_width) {
          if (k < 1 || k > w.columns) error(id, "set_width on nonexistent column " + std::to_string(k));
          if (v < 0) error(id, "column width is negative");
        }
        for (const auto& [k, v] : w.row_height) {
          if (k < 1 || k > w.rows) error(id, "set_height on nonexistent row " + std::to_string(k));
          if (v < 0) error(id, "row height is negative");
        }
        break;
      case ContainerKind::waterfall:
        if (w.columns < 1) error(id, "Waterfall requires at least 1 column");
        if (n < 1) error(id, "container requires at least 1 kid");
        break;
      case ContainerKind::flex: {
        if (n < 1) error(id, "container requires at least 1 kid");
        if (!w.items.empty() && static_cast<std::int64_t>(w.items.size()) != n) {
          error(id, "Flex items must match the number of kids");
        }
        bool any_grow = false;
        for (const auto& it : w.items) {
          if (it.basis < 0 || it.grow < 0 || it.shrink < 0) error(id, "flex basis/grow/shrink must be non-negative");
          any_grow |= it.grow > 0;
        }
        if (w.grow && !any_grow) error(id, "Flex grow mode needs a kid with flex_grow > 0");
        break;
      }
      default:
        if (n < 1) error(id, "container requires at least 1 kid");
        break;
    }
  }

  auto check_comparison = [&](const std::string& owner, const std::string& text) {
    try {
      for (const auto& wid : comparison_widgets(text)) {
        if (!index.count(wid)) error(owner, "comparison mentions unknown widget '" + wid + "'");
      }
    } catch (const SpecError& e) {
      error(owner, e.what());
    }
  };
  std::set<std::string> ids;
  for (const auto& c : spec.constraints) {
    if (!ids.insert("user:" + c.id).second) error(c.id, "duplicate constraint id");
    if (c.any.empty()) error(c.id, "constraint has no comparisons");
    for (const auto& t : c.any) check_comparison(c.id, t);
    if (c.guard) {
      for (const auto& g : *c.guard) {
        if (!index.count(g)) error(c.id, "guard names unknown widget '" + g + "'");
      }
    }
  }
  for (const auto& p : spec.preferences) {
    if (!detail::valid_widget_id(p.id)) error(p.id, "preference id must be non-empty [A-Za-z0-9_]");
    if (!ids.insert("pref:" + p.id).second) error(p.id, "duplicate preference id");
    if (p.weight < 1) error(p.id, "preference weight must be at least 1");
    if (p.all.empty()) error(p.id, "preference has no comparisons");
    for (const auto& t : p.all) check_comparison(p.id, t);
  }
  return out;
}

}  // namespace reflow
