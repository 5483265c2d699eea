#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "reflow/errors.hpp"

namespace reflow {

using Rational = mpq_class;

struct ArithId {
  std::uint32_t index = 0;
  friend auto operator<=>(ArithId, ArithId) = default;
};

struct BoolId {
  std::uint32_t index = 0;
  friend auto operator<=>(BoolId, BoolId) = default;
};

enum class Axis : std::uint8_t { none, horizontal, vertical };
enum class VarRole : std::uint8_t { other, position, size };

inline constexpr std::int32_t no_owner = -1;

struct ArithVar {
  std::string name;
  std::optional<std::int64_t> lower;
  std::optional<std::int64_t> upper;
  Axis axis = Axis::none;
  VarRole role = VarRole::other;
  std::int32_t owner = no_owner;  ///< widget index, or no_owner
};

struct BoolVar {
  std::string name;
  std::int32_t owner = no_owner;
};

class VarRegistry {
 public:
  ArithId add_arith(ArithVar var);
  BoolId add_bool(BoolVar var);

  const ArithVar& arith(ArithId id) const { return arith_.at(id.index); }
  ArithVar& arith(ArithId id) { return arith_.at(id.index); }
  const BoolVar& boolean(BoolId id) const { return bools_.at(id.index); }

  std::size_t arith_count() const { return arith_.size(); }
  std::size_t bool_count() const { return bools_.size(); }

  std::optional<ArithId> find_arith(std::string_view name) const;
  std::optional<BoolId> find_bool(std::string_view name) const;
  ArithId arith_by_name(std::string_view name) const;
  BoolId bool_by_name(std::string_view name) const;

 private:
  std::vector<ArithVar> arith_;
  std::vector<BoolVar> bools_;
  std::unordered_map<std::string, std::uint32_t> arith_index_;
  std::unordered_map<std::string, std::uint32_t> bool_index_;
};

class Model {
 public:
  Model() = default;
  Model(std::size_t arith_count, std::size_t bool_count)
      : arith_(arith_count), bools_(bool_count) {}

  void resize(std::size_t arith_count, std::size_t bool_count) {
    arith_.resize(arith_count);
    bools_.resize(bool_count);
  }
  void set(ArithId v, std::int64_t value) { arith_.at(v.index) = value; }
  void set(BoolId v, bool value) { bools_.at(v.index) = value; }
  void clear(ArithId v) { arith_.at(v.index).reset(); }
  void clear(BoolId v) { bools_.at(v.index).reset(); }
  std::optional<std::int64_t> get(ArithId v) const {
    return v.index < arith_.size() ? arith_[v.index] : std::nullopt;
  }
  std::optional<bool> get(BoolId v) const {
    return v.index < bools_.size() ? bools_[v.index] : std::nullopt;
  }
  std::size_t arith_size() const { return arith_.size(); }
  std::size_t bool_size() const { return bools_.size(); }

  friend bool operator==(const Model&, const Model&) = default;

 private:
  std::vector<std::optional<std::int64_t>> arith_;
  std::vector<std::optional<bool>> bools_;
};

enum class Relation : std::uint8_t { le, eq };
enum class Cmp : std::uint8_t { le, lt, eq, ge, gt };

struct Term {
  Rational coef;
  ArithId var;
  friend bool operator==(const Term&, const Term&) = default;
};

/// Σ coef·var (≤ | =) constant, kept in canonical form: terms sorted by
/// variable, coprime integer coefficients, floored constant for ≤, and a
/// positive leading coefficient for =.
class LinearAtom {
 public:
  /// Builds the canonical atom, or a constant when no variable survives.
  static std::variant<bool, LinearAtom> make(std::vector<Term> terms, Cmp cmp, Rational constant);

  const std::vector<Term>& terms() const { return terms_; }
  Relation relation() const { return rel_; }
  const Rational& constant() const { return constant_; }

  Rational lhs(const Model& m, const VarRegistry* names = nullptr) const;
  bool evaluate(const Model& m, const VarRegistry* names = nullptr) const;
  bool mentions(ArithId v) const;

  friend bool operator==(const LinearAtom&, const LinearAtom&) = default;

 private:
  LinearAtom() = default;
  std::vector<Term> terms_;
  Relation rel_ = Relation::le;
  Rational constant_;
};

class Literal {
 public:
  static Literal boolean(BoolId v, bool positive = true) { return Literal(v, positive); }
  static Literal atom(LinearAtom a, bool positive = true) { return Literal(std::move(a), positive); }

  bool is_bool() const { return std::holds_alternative<BoolId>(payload_); }
  BoolId bool_var() const { return std::get<BoolId>(payload_); }
  const LinearAtom& atom() const { return std::get<LinearAtom>(payload_); }
  bool positive() const { return positive_; }

  Literal operator~() const {
    Literal out = *this;
    out.positive_ = !positive_;
    return out;
  }

  bool evaluate(const Model& m, const VarRegistry* names = nullptr) const;

  friend bool operator==(const Literal&, const Literal&) = default;

 private:
  Literal(BoolId v, bool positive) : payload_(v), positive_(positive) {}
  Literal(LinearAtom a, bool positive) : payload_(std::move(a)), positive_(positive) {}
  std::variant<BoolId, LinearAtom> payload_;
  bool positive_ = true;
};

/// Either a literal or the constant it folded to.
using LitOrConst = std::variant<bool, Literal>;

LitOrConst negate(const LitOrConst& l);

/// Affine expression builder: Σ coef·var + constant.
class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(ArithId v) { coefs_[v.index] = 1; }                // NOLINT
  LinearExpr(std::int64_t c) : constant_(static_cast<long>(c)) {}  // NOLINT
  LinearExpr(int c) : constant_(c) {}                           // NOLINT
  LinearExpr(Rational c) : constant_(std::move(c)) {}           // NOLINT

  LinearExpr& operator+=(const LinearExpr& o);
  LinearExpr& operator-=(const LinearExpr& o);
  LinearExpr& operator*=(const Rational& k);
  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
  friend LinearExpr operator*(LinearExpr a, const Rational& k) { return a *= k; }
  friend LinearExpr operator*(const Rational& k, LinearExpr a) { return a *= k; }
  LinearExpr operator-() const { return *this * Rational(-1); }

  const std::map<std::uint32_t, Rational>& coefs() const { return coefs_; }
  const Rational& constant() const { return constant_; }

 private:
  std::map<std::uint32_t, Rational> coefs_;
  Rational constant_;
};

LitOrConst compare(const LinearExpr& lhs, Cmp cmp, const LinearExpr& rhs);
inline LitOrConst le(const LinearExpr& a, const LinearExpr& b) { return compare(a, Cmp::le, b); }
inline LitOrConst lt(const LinearExpr& a, const LinearExpr& b) { return compare(a, Cmp::lt, b); }
inline LitOrConst ge(const LinearExpr& a, const LinearExpr& b) { return compare(a, Cmp::ge, b); }
inline LitOrConst gt(const LinearExpr& a, const LinearExpr& b) { return compare(a, Cmp::gt, b); }
inline LitOrConst eq(const LinearExpr& a, const LinearExpr& b) { return compare(a, Cmp::eq, b); }
inline LitOrConst ne(const LinearExpr& a, const LinearExpr& b) { return negate(compare(a, Cmp::eq, b)); }
inline LitOrConst lit(BoolId v, bool positive = true) { return Literal::boolean(v, positive); }

struct Clause {
  std::vector<Literal> literals;
  std::string origin;

  bool is_unit() const { return literals.size() == 1; }
  friend bool operator==(const Clause&, const Clause&) = default;
};

/// Folds constants and duplicate literals. Returns nullopt when the clause is
/// trivially true; throws SpecError when every literal folded to false.
std::optional<Clause> make_clause(const std::vector<LitOrConst>& literals, std::string origin);

struct SoftLiteral {
  BoolId var;
  bool positive = true;
  std::int64_t weight = 1;
  friend bool operator==(const SoftLiteral&, const SoftLiteral&) = default;
};

struct Formula {
  VarRegistry vars;
  std::vector<Clause> hard;
  std::vector<SoftLiteral> soft;

  /// Adds the clause unless it is trivially true.
  void add(const std::vector<LitOrConst>& literals, const std::string& origin);
  void add_unit(const LitOrConst& literal, const std::string& origin) { add({literal}, origin); }
};

bool eval_clause(const Clause& c, const Model& m, const VarRegistry* names = nullptr);

/// Indices of the hard clauses `m` falsifies.
std::vector<std::size_t> violated_clauses(const Formula& f, const Model& m);

/// Fills every unassigned variable with its clamped lower bound / false.
void complete_model(Model& m, const VarRegistry& vars);

std::int64_t to_int64(const mpz_class& z);

}  // namespace reflow
