#include "reflow/smtlib.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace reflow {

namespace {

std::string smt_int(const mpz_class& z) {
  if (z < 0) return "(- " + mpz_class(-z).get_str() + ")";
  return z.get_str();
}

std::string atom_text(const LinearAtom& a, const VarRegistry& vars) {
  // Canonical atoms already carry integer coefficients; scale defensively.
  mpz_class scale = 1;
  for (const auto& t : a.terms()) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), t.coef.get_den_mpz_t());
  mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), a.constant().get_den_mpz_t());
  std::vector<std::string> parts;
  for (const auto& t : a.terms()) {
    Rational c = t.coef * Rational(scale);
    std::string sym = smt_symbol(vars.arith(t.var).name);
    if (c == 1) {
      parts.push_back(sym);
    } else {
      parts.push_back("(* " + smt_int(c.get_num()) + " " + sym + ")");
    }
  }
  std::string lhs = parts.size() == 1 ? parts.front() : "(+";
  if (parts.size() > 1) {
    for (const auto& p : parts) lhs += " " + p;
    lhs += ")";
  }
  Rational k = a.constant() * Rational(scale);
  return std::string("(") + (a.relation() == Relation::le ? "<=" : "=") + " " + lhs + " " + smt_int(k.get_num()) + ")";
}

std::string literal_text(const Literal& l, const VarRegistry& vars) {
  std::string inner = l.is_bool() ? smt_symbol(vars.boolean(l.bool_var()).name) : atom_text(l.atom(), vars);
  return l.positive() ? inner : "(not " + inner + ")";
}

std::string clause_text(const Clause& c, const VarRegistry& vars) {
  if (c.literals.size() == 1) return literal_text(c.literals.front(), vars);
  std::string out = "(or";
  for (const auto& l : c.literals) out += " " + literal_text(l, vars);
  return out + ")";
}

}  // namespace

std::string smt_symbol(const std::string& name) {
  if (name.find_first_of("|\\") != std::string::npos) throw Error("name cannot be quoted: " + name);
  return "|" + name + "|";
}

std::string origin_of_assertion(const std::string& name) {
  auto hash = name.rfind('#');
  return hash == std::string::npos ? name : name.substr(0, hash);
}

SmtScript emit_check_script(const Formula& f, const std::vector<Clause>& extra,
                            const std::vector<Literal>& assumptions, bool want_core) {
  SmtScript script;
  std::set<std::uint32_t> ints;
  std::set<std::uint32_t> bools;
  auto note = [&](const Literal& l) {
    if (l.is_bool()) {
      bools.insert(l.bool_var().index);
    } else {
      for (const auto& t : l.atom().terms()) ints.insert(t.var.index);
    }
  };
  for (const auto& c : f.hard) std::for_each(c.literals.begin(), c.literals.end(), note);
  for (const auto& c : extra) std::for_each(c.literals.begin(), c.literals.end(), note);
  for (const auto& l : assumptions) note(l);

  std::ostringstream out;
  out << "(set-option :produce-models true)\n";
  if (want_core) out << "(set-option :produce-unsat-cores true)\n";
  out << "(set-logic QF_LIA)\n";
  for (auto i : ints) {
    script.arith_decls.push_back(ArithId{i});
    out << "(declare-fun " << smt_symbol(f.vars.arith(ArithId{i}).name) << " () Int)\n";
  }
  for (auto i : bools) {
    script.bool_decls.push_back(BoolId{i});
    out << "(declare-fun " << smt_symbol(f.vars.boolean(BoolId{i}).name) << " () Bool)\n";
  }
  for (auto i : ints) {
    const auto& v = f.vars.arith(ArithId{i});
    std::string sym = smt_symbol(v.name);
    std::vector<std::string> parts;
    if (v.lower) parts.push_back("(>= " + sym + " " + smt_int(mpz_class(static_cast<long>(*v.lower))) + ")");
    if (v.upper) parts.push_back("(<= " + sym + " " + smt_int(mpz_class(static_cast<long>(*v.upper))) + ")");
    if (parts.empty()) continue;
    std::string body = parts.size() == 1 ? parts[0] : "(and " + parts[0] + " " + parts[1] + ")";
    out << "(assert (! " << body << " :named " << smt_symbol("bound:" + v.name) << "))\n";
  }
  std::size_t counter = 0;
  auto emit = [&](const Clause& c) {
    std::string name = c.origin + "#" + std::to_string(counter++);
    script.names.push_back(name);
    out << "(assert (! " << clause_text(c, f.vars) << " :named " << smt_symbol(name) << "))\n";
  };
  for (const auto& c : f.hard) emit(c);
  for (const auto& c : extra) emit(c);
  if (assumptions.empty()) {
    out << "(check-sat)\n";
  } else {
    out << "(check-sat-assuming (";
    for (std::size_t i = 0; i < assumptions.size(); ++i) {
      if (!assumptions[i].is_bool()) throw Error("assumptions must be boolean literals");
      out << (i ? " " : "") << literal_text(assumptions[i], f.vars);
    }
    out << "))\n";
  }
  script.text = out.str();
  return script;
}

std::string emit_smtlib(const SolverRequest& req) {
  if (!req.formula) throw Error("solver request without formula");
  std::string header;
  if (req.objective) {
    header += std::string("; objective ") +
              (req.objective->direction == Direction::minimize ? "minimize " : "maximize ") +
              smt_symbol(req.formula->vars.arith(req.objective->var).name) + "\n";
  }
  if (req.maxsmt) {
    for (const auto& s : req.formula->soft) {
      header += "; soft " + std::to_string(s.weight) + " " + (s.positive ? "" : "!") +
                smt_symbol(req.formula->vars.boolean(s.var).name) + "\n";
    }
  }
  return header + emit_check_script(*req.formula, req.extra, req.assumptions, req.want_core).text;
}

}  // namespace reflow
