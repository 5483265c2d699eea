#include <sys/stat.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "process.hpp"
#include "reflow/smtlib.hpp"
#include "reflow/solvers.hpp"

namespace reflow {

namespace {

const char* const done_marker = "@@reflow-done";

struct SExpr {
  std::string atom;  ///< empty for lists
  std::vector<SExpr> items;
  bool is_list = false;
};

class SExprParser {
 public:
  explicit SExprParser(const std::string& text) : text_(text) {}

  std::vector<SExpr> parse_all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(parse());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  SExpr parse() {
    skip();
    if (pos_ >= text_.size()) throw SolverError("unexpected end of solver output");
    SExpr e;
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      e.is_list = true;
      skip();
      while (pos_ < text_.size() && text_[pos_] != ')') {
        e.items.push_back(parse());
        skip();
      }
      if (pos_ >= text_.size()) throw SolverError("unbalanced solver output");
      ++pos_;
      return e;
    }
    if (c == ')') throw SolverError("unexpected ')' in solver output");
    if (c == '|') {
      auto end = text_.find('|', pos_ + 1);
      if (end == std::string::npos) throw SolverError("unterminated symbol in solver output");
      e.atom = text_.substr(pos_ + 1, end - pos_ - 1);
      pos_ = end + 1;
      return e;
    }
    if (c == '"') {
      auto end = text_.find('"', pos_ + 1);
      if (end == std::string::npos) throw SolverError("unterminated string in solver output");
      e.atom = text_.substr(pos_ + 1, end - pos_ - 1);
      pos_ = end + 1;
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    e.atom = text_.substr(start, pos_ - start);
    return e;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

std::int64_t integer_value(const SExpr& e) {
  if (!e.is_list) return std::stoll(e.atom);
  if (e.items.size() == 2 && !e.items[0].is_list && e.items[0].atom == "-") return -integer_value(e.items[1]);
  throw SolverError("non-integer value in model");
}

std::string joined(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string first_error(const std::vector<std::string>& lines) {
  for (const auto& l : lines) {
    if (l.rfind("(error", 0) == 0) return l;
  }
  return {};
}

bool executable(const std::string& path) { return !path.empty() && ::access(path.c_str(), X_OK) == 0; }

}  // namespace

ExternalBackend::ExternalBackend(ExternalConfig config) : config_(std::move(config)) {}
ExternalBackend::~ExternalBackend() = default;

std::string ExternalBackend::locate(const ExternalConfig& config) {
  if (!config.executable.empty()) return executable(config.executable) ? config.executable : std::string();
  if (const char* env = std::getenv("REFLOW_SOLVER"); env && *env) return executable(env) ? env : std::string();
  const char* path = std::getenv("PATH");
  if (!path) return {};
  std::string p(path);
  std::size_t start = 0;
  while (start <= p.size()) {
    std::size_t end = p.find(':', start);
    if (end == std::string::npos) end = p.size();
    std::string candidate = p.substr(start, end - start) + "/z3";
    if (executable(candidate)) return candidate;
    start = end + 1;
  }
  return {};
}

bool ExternalBackend::available(const ExternalConfig& config) { return !locate(config).empty(); }

SolverResult ExternalBackend::check(const Formula& f, const std::vector<Clause>& extra,
                                    const std::vector<Literal>& assumptions, bool want_core) {
  SolverResult r;
  r.stats.calls = 1;
  SmtScript script = emit_check_script(f, extra, assumptions, want_core);
  if (!config_.dump_dir.empty()) {
    std::filesystem::create_directories(config_.dump_dir);
    char name[32];
    std::snprintf(name, sizeof name, "%06llu.smt2", static_cast<unsigned long long>(script_counter_));
    std::ofstream(std::filesystem::path(config_.dump_dir) / name) << script.text;
  }
  ++script_counter_;
  const auto deadline = std::chrono::steady_clock::now() + config_.timeout;
  const std::string echo = std::string("(echo \"") + done_marker + "\")\n";
  try {
    if (!process_ || !process_->running()) {
      std::string exe = locate(config_);
      if (exe.empty()) throw SolverError("no SMT-LIB2 solver executable found (set REFLOW_SOLVER or --solver-exe)");
      process_ = std::make_unique<SolverProcess>(exe, config_.args);
    }
    process_->write("(reset)\n" + script.text + echo);
    auto lines = process_->read_until(done_marker, deadline);
    if (auto err = first_error(lines); !err.empty()) {
      r.diagnostic = err;
      return r;
    }
    std::string status;
    for (const auto& l : lines) {
      if (!l.empty()) {
        status = l;
        break;
      }
    }
    if (status == "sat") {
      r.status = Status::sat;
      Model m(f.vars.arith_count(), f.vars.bool_count());
      if (!script.arith_decls.empty() || !script.bool_decls.empty()) {
        std::string query = "(get-value (";
        for (auto v : script.arith_decls) query += smt_symbol(f.vars.arith(v).name) + " ";
        for (auto v : script.bool_decls) query += smt_symbol(f.vars.boolean(v).name) + " ";
        query += "))\n";
        process_->write(query + echo);
        auto out = process_->read_until(done_marker, deadline);
        if (auto err = first_error(out); !err.empty()) throw SolverError(err);
        auto exprs = SExprParser(joined(out)).parse_all();
        if (exprs.size() != 1 || !exprs[0].is_list) throw SolverError("malformed get-value response");
        for (const auto& pair : exprs[0].items) {
          if (!pair.is_list || pair.items.size() != 2 || pair.items[0].is_list) {
            throw SolverError("malformed get-value entry");
          }
          const std::string& sym = pair.items[0].atom;
          if (auto a = f.vars.find_arith(sym)) {
            m.set(*a, integer_value(pair.items[1]));
          } else if (auto b = f.vars.find_bool(sym)) {
            m.set(*b, pair.items[1].atom == "true");
          }
        }
      }
      complete_model(m, f.vars);
      r.model = std::move(m);
    } else if (status == "unsat") {
      r.status = Status::unsat;
      if (want_core) {
        process_->write("(get-unsat-core)\n" + echo);
        auto out = process_->read_until(done_marker, deadline);
        if (auto err = first_error(out); !err.empty()) throw SolverError(err);
        auto exprs = SExprParser(joined(out)).parse_all();
        if (exprs.size() != 1 || !exprs[0].is_list) throw SolverError("malformed unsat core");
        std::map<std::string, bool> named;
        for (const auto& n : script.names) named[n] = true;
        for (const auto& item : exprs[0].items) {
          std::string tag;
          if (item.is_list) {
            if (item.items.size() == 2 && item.items[0].atom == "not") tag = "assume:!" + item.items[1].atom;
          } else if (named.count(item.atom)) {
            tag = origin_of_assertion(item.atom);
          } else if (item.atom.rfind("bound:", 0) == 0) {
            tag = item.atom;
          } else {
            tag = "assume:" + item.atom;
          }
          if (!tag.empty() && std::find(r.core.begin(), r.core.end(), tag) == r.core.end()) r.core.push_back(tag);
        }
      }
    } else {
      r.diagnostic = status.empty() ? "solver returned no status" : "solver returned '" + status + "'";
    }
  } catch (const SolverError& e) {
    process_.reset();
    r.status = Status::unknown;
    r.model.reset();
    r.diagnostic = e.what();
  }
  return r;
}

}  // namespace reflow
