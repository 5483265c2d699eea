#pragma once

#include <string>
#include <vector>

#include "reflow/formula.hpp"
#include "reflow/solvers.hpp"

namespace reflow {

struct SmtScript {
  std::string text;                       ///< ends with check-sat / check-sat-assuming
  std::vector<std::string> names;         ///< assertion name per hard/extra clause
  std::vector<ArithId> arith_decls;
  std::vector<BoolId> bool_decls;
};

/// `|name|` quoting; rejects names that cannot be quoted.
std::string smt_symbol(const std::string& name);

SmtScript emit_check_script(const Formula& f, const std::vector<Clause>& extra,
                            const std::vector<Literal>& assumptions, bool want_core);

/// Script for the request's satisfiability part. Objectives and softs are not
/// native SMT-LIB2; they appear as comments and are driven by the client.
std::string emit_smtlib(const SolverRequest& req);

/// Strips the `#n` suffix of an assertion name back to its origin tag.
std::string origin_of_assertion(const std::string& name);

}  // namespace reflow
