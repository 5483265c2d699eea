#include "reflow/text.hpp"

#include <charconv>
#include <sstream>

namespace reflow {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    std::string_view piece = s.substr(start, end - start);
    if (!piece.empty()) out.push_back(piece);
    start = end + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

Rational parse_rational(std::string_view s) {
  Rational q;
  std::string text(s);
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  if (q.set_str(text, 10) != 0) throw Error("bad rational '" + std::string(s) + "'");
  q.canonicalize();
  return q;
}

std::optional<std::int64_t> parse_bound(std::string_view s) {
  if (s == "-") return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("bad bound '" + std::string(s) + "'");
  return v;
}

std::int32_t parse_owner(std::string_view s) {
  std::int32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("bad owner '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::horizontal: return "h";
    case Axis::vertical: return "v";
    default: return "-";
  }
}

std::string_view role_name(VarRole r) {
  switch (r) {
    case VarRole::position: return "pos";
    case VarRole::size: return "size";
    default: return "-";
  }
}

Axis parse_axis(std::string_view s) {
  if (s == "h") return Axis::horizontal;
  if (s == "v") return Axis::vertical;
  if (s == "-") return Axis::none;
  throw Error("bad axis '" + std::string(s) + "'");
}

VarRole parse_role(std::string_view s) {
  if (s == "pos") return VarRole::position;
  if (s == "size") return VarRole::size;
  if (s == "-") return VarRole::other;
  throw Error("bad role '" + std::string(s) + "'");
}

std::string format_literal(const Literal& l, const VarRegistry& vars) {
  std::string out = l.positive() ? "" : "!";
  if (l.is_bool()) return out + vars.boolean(l.bool_var()).name;
  const LinearAtom& a = l.atom();
  out += '[';
  bool first = true;
  for (const auto& t : a.terms()) {
    if (!first) out += ' ';
    first = false;
    out += t.coef.get_str();
    out += '*';
    out += vars.arith(t.var).name;
  }
  out += a.relation() == Relation::le ? " <= " : " = ";
  out += a.constant().get_str();
  out += ']';
  return out;
}

std::string format_clause(const Clause& c, const VarRegistry& vars) {
  std::string out;
  for (std::size_t i = 0; i < c.literals.size(); ++i) {
    if (i) out += " | ";
    out += format_literal(c.literals[i], vars);
  }
  return out;
}

Literal parse_literal(std::string_view text, const VarRegistry& vars) {
  text = trim(text);
  bool positive = true;
  if (!text.empty() && text.front() == '!') {
    positive = false;
    text.remove_prefix(1);
  }
  if (text.empty()) throw Error("empty literal");
  if (text.front() != '[') return Literal::boolean(vars.bool_by_name(text), positive);
  if (text.back() != ']') throw Error("unterminated atom '" + std::string(text) + "'");
  auto tokens = split(text.substr(1, text.size() - 2), ' ');
  if (tokens.size() < 3) throw Error("malformed atom '" + std::string(text) + "'");
  std::string_view rel = tokens[tokens.size() - 2];
  Cmp cmp;
  if (rel == "<=") {
    cmp = Cmp::le;
  } else if (rel == "=") {
    cmp = Cmp::eq;
  } else {
    throw Error("bad relation '" + std::string(rel) + "'");
  }
  std::vector<Term> terms;
  for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
    auto star = tokens[i].find('*');
    if (star == std::string_view::npos) throw Error("malformed term '" + std::string(tokens[i]) + "'");
    terms.push_back(Term{parse_rational(tokens[i].substr(0, star)),
                         vars.arith_by_name(tokens[i].substr(star + 1))});
  }
  auto made = LinearAtom::make(std::move(terms), cmp, parse_rational(tokens.back()));
  if (std::holds_alternative<bool>(made)) throw Error("atom folds to a constant: '" + std::string(text) + "'");
  return Literal::atom(std::get<LinearAtom>(std::move(made)), positive);
}

Clause parse_clause(std::string_view text, const VarRegistry& vars, std::string origin) {
  Clause c;
  c.origin = std::move(origin);
  for (auto piece : split(text, '|')) {
    if (!trim(piece).empty()) c.literals.push_back(parse_literal(piece, vars));
  }
  if (c.literals.empty()) throw Error("empty clause");
  return c;
}

std::string dump_formula(const Formula& f) {
  std::ostringstream out;
  out << "reflow-formula 1\n";
  for (std::uint32_t i = 0; i < f.vars.arith_count(); ++i) {
    const auto& v = f.vars.arith(ArithId{i});
    out << "int " << v.name << ' ' << (v.lower ? std::to_string(*v.lower) : "-") << ' '
        << (v.upper ? std::to_string(*v.upper) : "-") << ' ' << axis_name(v.axis) << ' '
        << role_name(v.role) << ' ' << v.owner << '\n';
  }
  for (std::uint32_t i = 0; i < f.vars.bool_count(); ++i) {
    const auto& v = f.vars.boolean(BoolId{i});
    out << "bool " << v.name << ' ' << v.owner << '\n';
  }
  for (const auto& c : f.hard) out << "hard " << c.origin << " : " << format_clause(c, f.vars) << '\n';
  for (const auto& s : f.soft) {
    out << "soft " << s.weight << ' ' << (s.positive ? "" : "!") << f.vars.boolean(s.var).name << '\n';
  }
  return out.str();
}

Formula parse_formula(std::string_view text) {
  Formula f;
  auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != "reflow-formula 1") throw Error("missing formula header");
  for (std::size_t n = 1; n < lines.size(); ++n) {
    std::string_view line = trim(lines[n]);
    if (line.empty()) continue;
    auto space = line.find(' ');
    std::string_view kind = line.substr(0, space);
    std::string_view rest = space == std::string_view::npos ? "" : line.substr(space + 1);
    if (kind == "int") {
      auto f6 = split(rest, ' ');
      if (f6.size() != 6) throw Error("line " + std::to_string(n + 1) + ": bad int declaration");
      f.vars.add_arith(ArithVar{std::string(f6[0]), parse_bound(f6[1]), parse_bound(f6[2]),
                                parse_axis(f6[3]), parse_role(f6[4]), parse_owner(f6[5])});
    } else if (kind == "bool") {
      auto f2 = split(rest, ' ');
      if (f2.size() != 2) throw Error("line " + std::to_string(n + 1) + ": bad bool declaration");
      f.vars.add_bool(BoolVar{std::string(f2[0]), parse_owner(f2[1])});
    } else if (kind == "hard") {
      auto sep = rest.find(" : ");
      if (sep == std::string_view::npos) throw Error("line " + std::to_string(n + 1) + ": missing origin");
      f.hard.push_back(parse_clause(rest.substr(sep + 3), f.vars, std::string(rest.substr(0, sep))));
    } else if (kind == "soft") {
      auto f2 = split(rest, ' ');
      if (f2.size() != 2) throw Error("line " + std::to_string(n + 1) + ": bad soft");
      Literal l = parse_literal(f2[1], f.vars);
      if (!l.is_bool()) throw Error("line " + std::to_string(n + 1) + ": soft must be boolean");
      f.soft.push_back(SoftLiteral{l.bool_var(), l.positive(), *parse_bound(f2[0])});
    } else {
      throw Error("line " + std::to_string(n + 1) + ": unknown record '" + std::string(kind) + "'");
    }
  }
  return f;
}

}  // namespace reflow
