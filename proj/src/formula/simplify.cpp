#include "reflow/simplify.hpp"

#include <deque>

namespace reflow {

BoolAssignment SimplifyResult::inferred() const {
  BoolAssignment out;
  for (std::uint32_t i = 0; i < values.size(); ++i) {
    if (values[i]) out.emplace(BoolId{i}, *values[i]);
  }
  return out;
}

namespace {

struct Occurrence {
  std::uint32_t clause;
  bool positive;
};

class Propagator {
 public:
  explicit Propagator(const Formula& f)
      : f_(f),
        values_(f.vars.bool_count()),
        chosen_(f.vars.bool_count(), false),
        occurrences_(f.vars.bool_count()),
        satisfied_(f.hard.size(), false),
        remaining_(f.hard.size(), 0) {
    for (std::uint32_t i = 0; i < f.hard.size(); ++i) {
      const auto& c = f.hard[i];
      remaining_[i] = static_cast<std::uint32_t>(c.literals.size());
      for (const auto& l : c.literals) {
        if (l.is_bool()) occurrences_[l.bool_var().index].push_back({i, l.positive()});
      }
    }
  }

  void assign(BoolId v, bool value, bool chosen) {
    auto& slot = values_[v.index];
    if (slot) {
      if (*slot != value) {
        throw ConflictError("boolean assignment contradicts " + f_.vars.boolean(v).name,
                            {f_.vars.boolean(v).name});
      }
      return;
    }
    slot = value;
    chosen_[v.index] = chosen;
    queue_.push_back(v);
  }

  void propagate() {
    // Clauses that start as units.
    if (!seeded_) {
      seeded_ = true;
      for (std::uint32_t i = 0; i < f_.hard.size(); ++i) check_unit(i);
    }
    while (!queue_.empty()) {
      BoolId v = queue_.front();
      queue_.pop_front();
      bool value = *values_[v.index];
      for (const auto& occ : occurrences_[v.index]) {
        if (satisfied_[occ.clause]) continue;
        if (occ.positive == value) {
          satisfied_[occ.clause] = true;
          continue;
        }
        if (--remaining_[occ.clause] == 0) {
          const auto& c = f_.hard[occ.clause];
          throw ConflictError("hard clause '" + c.origin + "' falsified by boolean assignment", {c.origin});
        }
        check_unit(occ.clause);
      }
    }
  }

  /// Returns true when some pure literal was assigned.
  bool eliminate_pure(const std::vector<bool>& protected_vars) {
    std::vector<std::uint8_t> polarity(values_.size(), 0);
    for (std::uint32_t i = 0; i < f_.hard.size(); ++i) {
      if (satisfied_[i]) continue;
      for (const auto& l : f_.hard[i].literals) {
        if (!l.is_bool() || values_[l.bool_var().index]) continue;
        polarity[l.bool_var().index] |= l.positive() ? 1 : 2;
      }
    }
    bool any = false;
    for (std::uint32_t v = 0; v < values_.size(); ++v) {
      if (protected_vars[v] || values_[v] || (polarity[v] != 1 && polarity[v] != 2)) continue;
      assign(BoolId{v}, polarity[v] == 1, true);
      any = true;
    }
    propagate();
    return any;
  }

  SimplifyResult result() const {
    SimplifyResult out;
    out.residual.vars = f_.vars;
    out.values = values_;
    out.chosen = chosen_;
    for (std::uint32_t i = 0; i < f_.hard.size(); ++i) {
      if (satisfied_[i]) continue;
      Clause c;
      c.origin = f_.hard[i].origin;
      for (const auto& l : f_.hard[i].literals) {
        if (l.is_bool() && values_[l.bool_var().index]) continue;
        c.literals.push_back(l);
      }
      out.residual.hard.push_back(std::move(c));
    }
    for (const auto& s : f_.soft) {
      if (!values_[s.var.index]) out.residual.soft.push_back(s);
    }
    for (const auto& v : values_) out.propagated += v.has_value();
    return out;
  }

 private:
  void check_unit(std::uint32_t i) {
    if (satisfied_[i] || remaining_[i] != 1) return;
    for (const auto& l : f_.hard[i].literals) {
      if (!l.is_bool()) return;  // the survivor is arithmetic
      if (!values_[l.bool_var().index]) {
        assign(l.bool_var(), l.positive(), false);
        return;
      }
    }
  }

  const Formula& f_;
  std::vector<std::optional<bool>> values_;
  std::vector<bool> chosen_;
  std::vector<std::vector<Occurrence>> occurrences_;
  std::vector<bool> satisfied_;
  std::vector<std::uint32_t> remaining_;
  std::deque<BoolId> queue_;
  bool seeded_ = false;
};

}  // namespace

SimplifyResult boolean_simplify(const Formula& f, const BoolAssignment& fixed, bool pure_literals) {
  Propagator p(f);
  for (const auto& [v, value] : fixed) {
    if (v.index >= f.vars.bool_count()) throw Error("fixed assignment names an unregistered variable");
    p.assign(v, value, false);
  }
  p.propagate();
  if (pure_literals) {
    std::vector<bool> protected_vars(f.vars.bool_count(), false);
    for (const auto& s : f.soft) protected_vars[s.var.index] = true;
    while (p.eliminate_pure(protected_vars)) {
    }
  }
  return p.result();
}

std::vector<LinearAtom> collect_unit_equations(const Formula& f) {
  std::vector<LinearAtom> out;
  for (const auto& c : f.hard) {
    if (!c.is_unit()) continue;
    const Literal& l = c.literals.front();
    if (!l.is_bool() && l.positive() && l.atom().relation() == Relation::eq) out.push_back(l.atom());
  }
  return out;
}

}  // namespace reflow
