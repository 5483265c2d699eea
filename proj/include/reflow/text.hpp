#pragma once

#include <string>
#include <string_view>

#include "reflow/formula.hpp"

namespace reflow {

/// Literal syntax: `name`, `!name`, `[2*a.x -1*b.w <= 3/2]`, `![...]`.
std::string format_literal(const Literal& l, const VarRegistry& vars);
std::string format_clause(const Clause& c, const VarRegistry& vars);  ///< `lit | lit`
Literal parse_literal(std::string_view text, const VarRegistry& vars);
/// Parses `lit | lit`; the origin is supplied by the caller.
Clause parse_clause(std::string_view text, const VarRegistry& vars, std::string origin);

/// Deterministic canonical dump: header, registries in id order, hard
/// clauses in insertion order, then softs.
std::string dump_formula(const Formula& f);
Formula parse_formula(std::string_view text);

std::string_view axis_name(Axis a);
std::string_view role_name(VarRole r);
Axis parse_axis(std::string_view s);
VarRole parse_role(std::string_view s);

}  // namespace reflow
