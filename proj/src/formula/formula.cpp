#include "reflow/formula.hpp"

#include <algorithm>

namespace reflow {

ArithId VarRegistry::add_arith(ArithVar var) {
  if (var.lower && var.upper && *var.lower > *var.upper) {
    throw SpecError("variable '" + var.name + "' has lower bound above upper bound");
  }
  auto [it, inserted] = arith_index_.emplace(var.name, static_cast<std::uint32_t>(arith_.size()));
  if (!inserted) throw SpecError("duplicate variable '" + var.name + "'");
  arith_.push_back(std::move(var));
  return ArithId{it->second};
}

BoolId VarRegistry::add_bool(BoolVar var) {
  auto [it, inserted] = bool_index_.emplace(var.name, static_cast<std::uint32_t>(bools_.size()));
  if (!inserted) throw SpecError("duplicate variable '" + var.name + "'");
  bools_.push_back(std::move(var));
  return BoolId{it->second};
}

std::optional<ArithId> VarRegistry::find_arith(std::string_view name) const {
  auto it = arith_index_.find(std::string(name));
  if (it == arith_index_.end()) return std::nullopt;
  return ArithId{it->second};
}

std::optional<BoolId> VarRegistry::find_bool(std::string_view name) const {
  auto it = bool_index_.find(std::string(name));
  if (it == bool_index_.end()) return std::nullopt;
  return BoolId{it->second};
}

ArithId VarRegistry::arith_by_name(std::string_view name) const {
  auto id = find_arith(name);
  if (!id) throw Error("unknown integer variable '" + std::string(name) + "'");
  return *id;
}

BoolId VarRegistry::bool_by_name(std::string_view name) const {
  auto id = find_bool(name);
  if (!id) throw Error("unknown boolean variable '" + std::string(name) + "'");
  return *id;
}

std::int64_t to_int64(const mpz_class& z) {
  if (!z.fits_slong_p()) throw Error("integer overflow: " + z.get_str());
  return z.get_si();
}

namespace {

mpz_class floor_of(const Rational& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

mpz_class ceil_of(const Rational& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

bool compare_const(const Rational& c, Cmp cmp) {
  // 0 cmp c
  switch (cmp) {
    case Cmp::le: return 0 <= c;
    case Cmp::lt: return 0 < c;
    case Cmp::eq: return c == 0;
    case Cmp::ge: return 0 >= c;
    case Cmp::gt: return 0 > c;
  }
  return false;
}

std::string var_name(ArithId v, const VarRegistry* names) {
  if (names && v.index < names->arith_count()) return names->arith(v).name;
  return "x" + std::to_string(v.index);
}

}  // namespace

std::variant<bool, LinearAtom> LinearAtom::make(std::vector<Term> terms, Cmp cmp, Rational constant) {
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0; });

  if (cmp == Cmp::ge || cmp == Cmp::gt) {
    for (auto& t : merged) t.coef = -t.coef;
    constant = -constant;
    cmp = cmp == Cmp::ge ? Cmp::le : Cmp::lt;
  }
  if (merged.empty()) return compare_const(constant, cmp);

  mpz_class lcm_den = 1;
  for (const auto& t : merged) mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), t.coef.get_den_mpz_t());
  mpz_class g = 0;
  for (const auto& t : merged) {
    mpz_class n = t.coef.get_num() * (lcm_den / t.coef.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
  }
  Rational factor(lcm_den, g);
  factor.canonicalize();
  for (auto& t : merged) t.coef *= factor;
  constant *= factor;

  LinearAtom atom;
  switch (cmp) {
    case Cmp::le:
      atom.rel_ = Relation::le;
      constant = Rational(floor_of(constant));
      break;
    case Cmp::lt:
      atom.rel_ = Relation::le;
      constant = Rational(ceil_of(constant) - 1);
      break;
    case Cmp::eq:
      if (constant.get_den() != 1) return false;
      atom.rel_ = Relation::eq;
      if (merged.front().coef < 0) {
        for (auto& t : merged) t.coef = -t.coef;
        constant = -constant;
      }
      break;
    default: break;
  }
  atom.terms_ = std::move(merged);
  atom.constant_ = std::move(constant);
  return atom;
}

Rational LinearAtom::lhs(const Model& m, const VarRegistry* names) const {
  Rational sum = 0;
  for (const auto& t : terms_) {
    auto v = m.get(t.var);
    if (!v) throw EvalError(var_name(t.var, names));
    sum += t.coef * Rational(static_cast<long>(*v));
  }
  return sum;
}

bool LinearAtom::evaluate(const Model& m, const VarRegistry* names) const {
  Rational sum = lhs(m, names);
  return rel_ == Relation::le ? sum <= constant_ : sum == constant_;
}

bool LinearAtom::mentions(ArithId v) const {
  return std::any_of(terms_.begin(), terms_.end(), [&](const Term& t) { return t.var == v; });
}

bool Literal::evaluate(const Model& m, const VarRegistry* names) const {
  bool value;
  if (is_bool()) {
    auto b = m.get(bool_var());
    if (!b) {
      throw EvalError(names && bool_var().index < names->bool_count()
                          ? names->boolean(bool_var()).name
                          : "b" + std::to_string(bool_var().index));
    }
    value = *b;
  } else {
    value = atom().evaluate(m, names);
  }
  return value == positive_;
}

LitOrConst negate(const LitOrConst& l) {
  if (const bool* b = std::get_if<bool>(&l)) return !*b;
  return ~std::get<Literal>(l);
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& o) {
  for (const auto& [v, c] : o.coefs_) {
    auto& slot = coefs_[v];
    slot += c;
    if (slot == 0) coefs_.erase(v);
  }
  constant_ += o.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& o) {
  for (const auto& [v, c] : o.coefs_) {
    auto& slot = coefs_[v];
    slot -= c;
    if (slot == 0) coefs_.erase(v);
  }
  constant_ -= o.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator*=(const Rational& k) {
  if (k == 0) {
    coefs_.clear();
    constant_ = 0;
    return *this;
  }
  for (auto& [v, c] : coefs_) c *= k;
  constant_ *= k;
  return *this;
}

LitOrConst compare(const LinearExpr& lhs, Cmp cmp, const LinearExpr& rhs) {
  LinearExpr diff = lhs - rhs;
  std::vector<Term> terms;
  terms.reserve(diff.coefs().size());
  for (const auto& [v, c] : diff.coefs()) terms.push_back(Term{c, ArithId{v}});
  auto made = LinearAtom::make(std::move(terms), cmp, -diff.constant());
  if (const bool* b = std::get_if<bool>(&made)) return *b;
  return Literal::atom(std::get<LinearAtom>(std::move(made)));
}

std::optional<Clause> make_clause(const std::vector<LitOrConst>& literals, std::string origin) {
  Clause clause;
  clause.origin = std::move(origin);
  for (const auto& l : literals) {
    if (const bool* b = std::get_if<bool>(&l)) {
      if (*b) return std::nullopt;
      continue;
    }
    const Literal& literal = std::get<Literal>(l);
    Literal negated = ~literal;
    bool duplicate = false;
    for (const auto& existing : clause.literals) {
      if (existing == negated) return std::nullopt;
      if (existing == literal) duplicate = true;
    }
    if (!duplicate) clause.literals.push_back(literal);
  }
  if (clause.literals.empty()) {
    throw SpecError("constraint '" + clause.origin + "' is unsatisfiable by construction");
  }
  return clause;
}

void Formula::add(const std::vector<LitOrConst>& literals, const std::string& origin) {
  if (auto c = make_clause(literals, origin)) hard.push_back(std::move(*c));
}

bool eval_clause(const Clause& c, const Model& m, const VarRegistry* names) {
  for (const auto& l : c.literals) {
    if (l.evaluate(m, names)) return true;
  }
  return false;
}

std::vector<std::size_t> violated_clauses(const Formula& f, const Model& m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.hard.size(); ++i) {
    if (!eval_clause(f.hard[i], m, &f.vars)) out.push_back(i);
  }
  return out;
}

void complete_model(Model& m, const VarRegistry& vars) {
  m.resize(std::max(m.arith_size(), vars.arith_count()), std::max(m.bool_size(), vars.bool_count()));
  for (std::uint32_t i = 0; i < vars.arith_count(); ++i) {
    ArithId id{i};
    if (m.get(id)) continue;
    const auto& v = vars.arith(id);
    std::int64_t value = 0;
    if (v.lower && value < *v.lower) value = *v.lower;
    if (v.upper && value > *v.upper) value = *v.upper;
    m.set(id, value);
  }
  for (std::uint32_t i = 0; i < vars.bool_count(); ++i) {
    if (!m.get(BoolId{i})) m.set(BoolId{i}, false);
  }
}

}  // namespace reflow
