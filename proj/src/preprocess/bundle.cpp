#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "reflow/preprocess.hpp"
#include "reflow/text.hpp"

namespace reflow {

using nlohmann::json;

namespace {

[[noreturn]] void broken(const std::string& section, const std::string& what) {
  throw BundleError("bundle section '" + section + "': " + what);
}

json bound_json(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

json table_json(const IntervalTable& t, const VarRegistry& vars) {
  json related = json::array();
  for (const auto& s : t.related) related.push_back({vars.boolean(s.var).name, s.positive, s.weight});
  json rows = json::array();
  for (const auto& r : t.rows) {
    json a = json::array();
    for (const auto& [b, v] : r.assignment) a.push_back({vars.boolean(b).name, v});
    rows.push_back({{"lo", r.lo}, {"hi", r.hi}, {"weight", r.weight}, {"assignment", a}});
  }
  return {{"property", vars.arith(t.property).name},
          {"min", t.min_val},
          {"max", t.max_val},
          {"related", related},
          {"rows", rows}};
}

json clauses_json(const std::vector<Clause>& clauses, const VarRegistry& vars) {
  json out = json::array();
  for (const auto& c : clauses) out.push_back({c.origin, format_clause(c, vars)});
  return out;
}

template <class T>
T field(const json& j, const char* key, const std::string& section) {
  if (!j.is_object() || !j.contains(key)) broken(section, std::string("missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    broken(section, std::string("bad '") + key + "'");
  }
}

ArithId arith_named(const VarRegistry& vars, const std::string& name, const std::string& section) {
  auto id = vars.find_arith(name);
  if (!id) broken(section, "unknown variable '" + name + "'");
  return *id;
}

BoolId bool_named(const VarRegistry& vars, const std::string& name, const std::string& section) {
  auto id = vars.find_bool(name);
  if (!id) broken(section, "unknown variable '" + name + "'");
  return *id;
}

IntervalTable parse_table(const json& j, const VarRegistry& vars, const std::string& section) {
  IntervalTable t;
  t.property = arith_named(vars, field<std::string>(j, "property", section), section);
  t.min_val = field<std::int64_t>(j, "min", section);
  t.max_val = field<std::int64_t>(j, "max", section);
  for (const auto& s : field<json>(j, "related", section)) {
    if (!s.is_array() || s.size() != 3) broken(section, "bad related soft");
    t.related.push_back({bool_named(vars, s[0].get<std::string>(), section), s[1].get<bool>(), s[2].get<std::int64_t>()});
  }
  for (const auto& r : field<json>(j, "rows", section)) {
    IntervalRow row;
    row.lo = field<std::int64_t>(r, "lo", section);
    row.hi = field<std::int64_t>(r, "hi", section);
    row.weight = field<std::int64_t>(r, "weight", section);
    for (const auto& a : field<json>(r, "assignment", section)) {
      if (!a.is_array() || a.size() != 2) broken(section, "bad assignment");
      row.assignment[bool_named(vars, a[0].get<std::string>(), section)] = a[1].get<bool>();
    }
    t.rows.push_back(std::move(row));
  }
  if (!t.tiles()) broken(section, "interval rows do not tile [min, max]");
  return t;
}

std::vector<Clause> parse_clauses(const json& j, const VarRegistry& vars, const std::string& section) {
  if (!j.is_array()) broken(section, "expected a clause list");
  std::vector<Clause> out;
  for (const auto& c : j) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_string()) broken(section, "bad clause entry");
    try {
      out.push_back(parse_clause(c[1].get<std::string>(), vars, c[0].get<std::string>()));
    } catch (const Error& e) {
      broken(section, e.what());
    }
  }
  return out;
}

void check_refs(const std::vector<Clause>& clauses, const VarRegistry& vars, const std::string& where) {
  for (const auto& c : clauses) {
    for (const auto& l : c.literals) {
      if (l.is_bool()) {
        if (l.bool_var().index >= vars.bool_count()) throw BundleError(where + ": dangling Boolean in " + c.origin);
      } else {
        for (const auto& t : l.atom().terms()) {
          if (t.var.index >= vars.arith_count()) throw BundleError(where + ": dangling variable in " + c.origin);
        }
      }
    }
  }
}

void check_table(const IntervalTable& t, const VarRegistry& vars, const std::string& where) {
  if (t.property.index >= vars.arith_count()) throw BundleError(where + ": dangling table property");
  for (const auto& r : t.rows) {
    for (const auto& [b, _] : r.assignment) {
      if (b.index >= vars.bool_count()) throw BundleError(where + ": dangling soft in table");
    }
  }
  if (!t.tiles()) throw BundleError(where + ": interval rows do not tile the range");
}

}  // namespace

std::int32_t DeployBundle::widget_index(std::string_view id) const {
  for (std::size_t i = 0; i < widgets.size(); ++i) {
    if (widgets[i].id == id) return static_cast<std::int32_t>(i);
  }
  throw BundleError("unknown widget '" + std::string(id) + "'");
}

std::string config_hash(const LayoutSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : spec_to_json(spec)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

DeployBundle build_bundle(const BundleInputs& in) {
  if (!in.layout || !in.outer || !in.table) throw BundleError("build_bundle: missing inputs");
  const CompiledLayout& L = *in.layout;
  DeployBundle b;
  b.tool_version = REFLOW_VERSION;
  b.config_hash = in.spec ? config_hash(*in.spec) : "";
  b.vars = in.outer->vars;
  b.root = L.ids[L.root];
  b.screen_width = L.screen_width;
  b.outer = in.outer->hard;
  b.table = *in.table;
  check_refs(b.outer, b.vars, "outer");
  check_table(b.table, b.vars, "outer table");
  std::vector<std::optional<std::int32_t>> slice_of(L.ids.size());
  for (std::size_t s = 0; s < in.slices.size(); ++s) {
    const auto& slice = in.slices[s];
    BundleSlice bs;
    bs.widget = slice.widget;
    bs.hard = slice.formula.hard;
    bs.width = slice.width;
    bs.height = slice.height;
    bs.clause_count = slice.clause_count;
    check_refs(bs.hard, b.vars, "slice " + slice.widget);
    check_table(bs.width, b.vars, "slice " + slice.widget + " width");
    check_table(bs.height, b.vars, "slice " + slice.widget + " height");
    for (auto k : L.nodes[slice.index].sub) slice_of[k] = static_cast<std::int32_t>(s);
    b.slices.push_back(std::move(bs));
  }
  for (std::size_t i = 0; i < L.ids.size(); ++i) {
    BundleWidget w;
    w.id = L.ids[i];
    w.kind = L.kinds[i];
    for (auto k : L.nodes[i].kids) w.kids.push_back(L.ids[k]);
    w.slice = slice_of[i];
    b.widgets.push_back(std::move(w));
  }
  return b;
}

std::string serialize_bundle(const DeployBundle& b) {
  json vars_int = json::array(), vars_bool = json::array();
  for (std::uint32_t i = 0; i < b.vars.arith_count(); ++i) {
    const auto& v = b.vars.arith(ArithId{i});
    vars_int.push_back({v.name, bound_json(v.lower), bound_json(v.upper), std::string(axis_name(v.axis)),
                        std::string(role_name(v.role)), v.owner});
  }
  for (std::uint32_t i = 0; i < b.vars.bool_count(); ++i) {
    const auto& v = b.vars.boolean(BoolId{i});
    vars_bool.push_back({v.name, v.owner});
  }
  json widgets = json::array();
  for (const auto& w : b.widgets) {
    widgets.push_back({{"id", w.id},
                       {"kind", std::string(kind_name(w.kind))},
                       {"kids", w.kids},
                       {"slice", w.slice ? json(*w.slice) : json(nullptr)}});
  }
  json slices = json::array();
  for (const auto& s : b.slices) {
    slices.push_back({{"widget", s.widget},
                      {"clause_count", s.clause_count},
                      {"clauses", clauses_json(s.hard, b.vars)},
                      {"width", table_json(s.width, b.vars)},
                      {"height", table_json(s.height, b.vars)}});
  }
  json j{{"format", "reflow-bundle"},
         {"version", DeployBundle::format_version},
         {"tool", b.tool_version},
         {"config_hash", b.config_hash},
         {"root", b.root},
         {"screen_width", b.vars.arith(b.screen_width).name},
         {"vars", {{"int", vars_int}, {"bool", vars_bool}}},
         {"widgets", widgets},
         {"outer", {{"clauses", clauses_json(b.outer, b.vars)}, {"table", table_json(b.table, b.vars)}}},
         {"slices", slices}};
  return j.dump(1) + "\n";
}

DeployBundle parse_bundle(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw BundleError(std::string("bundle is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "reflow-bundle") broken("format", "not a reflow bundle");
  if (field<int>(j, "version", "version") != DeployBundle::format_version) {
    broken("version", "unsupported format version " + j["version"].dump());
  }
  DeployBundle b;
  b.tool_version = field<std::string>(j, "tool", "tool");
  b.config_hash = field<std::string>(j, "config_hash", "config_hash");
  b.root = field<std::string>(j, "root", "root");
  const json& vars = field<json>(j, "vars", "vars");
  try {
    for (const auto& v : field<json>(vars, "int", "vars")) {
      ArithVar a;
      a.name = v.at(0).get<std::string>();
      if (!v.at(1).is_null()) a.lower = v.at(1).get<std::int64_t>();
      if (!v.at(2).is_null()) a.upper = v.at(2).get<std::int64_t>();
      a.axis = parse_axis(v.at(3).get<std::string>());
      a.role = parse_role(v.at(4).get<std::string>());
      a.owner = v.at(5).get<std::int32_t>();
      b.vars.add_arith(std::move(a));
    }
    for (const auto& v : field<json>(vars, "bool", "vars")) {
      b.vars.add_bool({v.at(0).get<std::string>(), v.at(1).get<std::int32_t>()});
    }
  } catch (const json::exception& e) {
    broken("vars", e.what());
  } catch (const SpecError& e) {
    broken("vars", e.what());
  }
  b.screen_width = arith_named(b.vars, field<std::string>(j, "screen_width", "screen_width"), "screen_width");
  for (const auto& w : field<json>(j, "widgets", "widgets")) {
    BundleWidget bw;
    bw.id = field<std::string>(w, "id", "widgets");
    auto kind = parse_kind(field<std::string>(w, "kind", "widgets"));
    if (!kind) broken("widgets", "unknown kind for '" + bw.id + "'");
    bw.kind = *kind;
    bw.kids = field<std::vector<std::string>>(w, "kids", "widgets");
    if (!w.contains("slice")) broken("widgets", "missing 'slice'");
    if (!w["slice"].is_null()) bw.slice = w["slice"].get<std::int32_t>();
    b.widgets.push_back(std::move(bw));
  }
  const json& outer = field<json>(j, "outer", "outer");
  b.outer = parse_clauses(field<json>(outer, "clauses", "outer"), b.vars, "outer");
  b.table = parse_table(field<json>(outer, "table", "outer.table"), b.vars, "outer.table");
  for (const auto& s : field<json>(j, "slices", "slices")) {
    BundleSlice bs;
    bs.widget = field<std::string>(s, "widget", "slices");
    const std::string section = "slices." + bs.widget;
    bs.clause_count = field<std::size_t>(s, "clause_count", section);
    bs.hard = parse_clauses(field<json>(s, "clauses", section), b.vars, section);
    bs.width = parse_table(field<json>(s, "width", section), b.vars, section + ".width");
    bs.height = parse_table(field<json>(s, "height", section), b.vars, section + ".height");
    b.slices.push_back(std::move(bs));
  }
  bool root_found = false;
  for (const auto& w : b.widgets) {
    root_found = root_found || w.id == b.root;
    if (w.slice && (*w.slice < 0 || *w.slice >= static_cast<std::int32_t>(b.slices.size()))) {
      broken("widgets", "slice index out of range for '" + w.id + "'");
    }
  }
  if (!root_found) broken("root", "root widget missing from widget list");
  for (const auto& s : b.slices) {
    bool found = false;
    for (const auto& w : b.widgets) found = found || w.id == s.widget;
    if (!found) broken("slices", "slice widget '" + s.widget + "' missing from widget list");
  }
  return b;
}

DeployBundle load_bundle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BundleError("cannot read bundle '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bundle(ss.str());
}

void save_bundle_file(const DeployBundle& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw BundleError("cannot write bundle '" + path + "'");
  out << serialize_bundle(b);
}

}  // namespace reflow
