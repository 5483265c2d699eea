#include <chrono>

#include "reflow/runtime.hpp"

namespace reflow {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Props {
  ArithId x, y, w, h;
  BoolId v;
};

struct CachedSolver {
  std::unique_ptr<ParametricSolver> solver;  ///< null when reasoning proved the key unsat
};

struct SliceState {
  std::int32_t widget = 0;
  Formula formula;
  std::map<std::pair<std::size_t, std::size_t>, CachedSolver> cache;
  std::optional<Model> last;
  std::int64_t last_w = -1, last_h = -1;
};

}  // namespace

const GeometryEntry* Geometry::find(std::string_view id) const {
  for (const auto& e : widgets) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

struct RuntimeSession::Impl {
  DeployBundle bundle;
  RuntimeOptions options;
  std::vector<Props> props;
  Formula outer;
  std::map<std::size_t, CachedSolver> outer_cache;
  std::optional<Model> outer_last;
  std::vector<SliceState> slices;
  std::unique_ptr<Backend> complete;
  Model composed;
  std::optional<std::size_t> row;
  std::uint64_t reasoning = 0;

  Impl(DeployBundle b, RuntimeOptions o) : bundle(std::move(b)), options(std::move(o)) {
    const auto& vars = bundle.vars;
    for (const auto& w : bundle.widgets) {
      props.push_back({vars.arith_by_name(w.id + ".x"), vars.arith_by_name(w.id + ".y"),
                       vars.arith_by_name(w.id + ".w"), vars.arith_by_name(w.id + ".h"),
                       vars.bool_by_name(w.id + ".v")});
    }
    outer.vars = vars;
    outer.hard = bundle.outer;
    for (const auto& s : bundle.slices) {
      SliceState st;
      st.widget = bundle.widget_index(s.widget);
      st.formula.vars = vars;
      st.formula.hard = s.hard;
      slices.push_back(std::move(st));
    }
    if (options.backend != "local" && options.backend != "external" && options.backend != "oracle") {
      throw Error("unknown backend '" + options.backend + "'");
    }
  }

  Backend& complete_backend() {
    if (!complete) {
      std::string name = options.backend == "local" ? (ExternalBackend::available(options.external) ? "external" : "oracle")
                                                    : options.backend;
      complete = make_backend(name, options.external);
    }
    return *complete;
  }

  ParametricSolver* cached(CachedSolver& slot, bool& fresh, const Formula& f, const BoolAssignment& alpha,
                           std::vector<ArithId> params) {
    fresh = false;
    if (!slot.solver) {
      fresh = true;
      ++reasoning;
      try {
        slot.solver = std::make_unique<ParametricSolver>(f, alpha, std::move(params));
      } catch (const ConflictError&) {
        return nullptr;
      }
    }
    return slot.solver.get();
  }

  /// Complete check of f ∧ alpha ∧ fixed values.
  Model complete_solve(const Formula& f, const BoolAssignment& alpha,
                       const std::vector<std::pair<ArithId, std::int64_t>>& values, const std::string& what) {
    SolverRequest req;
    req.formula = &f;
    for (const auto& [b, v] : alpha) req.assumptions.push_back(Literal::boolean(b, v));
    for (const auto& [p, v] : values) req.extra.push_back(*make_clause({eq(p, v)}, "probe"));
    SolverResult r = complete_backend().solve(req);
    if (r.status != Status::sat) {
      throw SolverError(what + ": " + std::string(status_name(r.status)) +
                        (r.diagnostic.empty() ? "" : " (" + r.diagnostic + ")"));
    }
    Model m = *r.model;
    complete_model(m, f.vars);
    return m;
  }

  /// Local search on the cached instance, then the complete backend.
  Model solve(CachedSolver& slot, const Formula& f, const BoolAssignment& alpha,
              const std::vector<std::pair<ArithId, std::int64_t>>& values, const Model* warm, SolveStats& stats,
              bool& reused, std::uint64_t& steps, const std::string& what) {
    if (options.backend != "local") {
      reused = false;
      stats.fallback = true;
      return complete_solve(f, alpha, values, what);
    }
    std::vector<ArithId> params;
    for (const auto& [p, _] : values) params.push_back(p);
    bool fresh = false;
    ParametricSolver* solver = cached(slot, fresh, f, alpha, params);
    reused = !fresh;
    if (solver) {
      SearchResult s = solver->solve(values, warm, options.search);
      steps += s.steps;
      if (s.status == Status::sat) return std::move(s.model);
    }
    stats.fallback = true;
    return complete_solve(f, alpha, values, what);
  }

  Geometry run(std::int64_t width, bool warm, SolveStats* out_stats) {
    const auto t0 = Clock::now();
    const IntervalTable& table = bundle.table;
    if (width < table.min_val || width > table.max_val) throw RangeError(width, table.min_val, table.max_val);
    SolveStats stats;
    stats.backend = options.backend;
    const std::size_t r = *table.row_of(width);
    stats.row = r;
    const ArithId sw = bundle.screen_width;

    // abstraction
    bool reused = false;
    Model outer_model = solve(outer_cache[r], outer, table.rows[r].assignment, {{sw, width}},
                              warm && outer_last ? &*outer_last : nullptr, stats, reused, stats.outer_steps,
                              "outer layer at width " + std::to_string(width));
    stats.reasoning_reused = reused;
    stats.steps = stats.outer_steps;
    stats.outer_millis = ms_since(t0);
    outer_last = outer_model;
    row = r;

    // refinement
    const auto t1 = Clock::now();
    Model full = outer_model;
    for (std::size_t s = 0; s < slices.size(); ++s) {
      SliceState& st = slices[s];
      const BundleSlice& bs = bundle.slices[s];
      const Props& p = props[st.widget];
      if (!full.get(p.v).value_or(false)) {
        clear_slice(full, s);
        continue;
      }
      const std::int64_t w = *outer_model.get(p.w), h = *outer_model.get(p.h);
      Model local;
      if (st.last && st.last_w == w && st.last_h == h) {
        local = *st.last;
        ++stats.slices_reused;
      } else {
        auto rw = bs.width.row_of(w), rh = bs.height.row_of(h);
        if (!rw || !rh) {
          throw SolverError("slice " + bs.widget + ": size (" + std::to_string(w) + ", " + std::to_string(h) +
                            ") outside its interval tables");
        }
        BoolAssignment alpha = bs.width.rows[*rw].assignment;
        for (const auto& [b, v] : bs.height.rows[*rh].assignment) alpha[b] = v;
        bool slice_reused = false;
        local = solve(st.cache[{*rw, *rh}], st.formula, alpha, {{p.w, w}, {p.h, h}},
                      warm && st.last ? &*st.last : nullptr, stats, slice_reused, stats.steps,
                      "slice " + bs.widget + " at (" + std::to_string(w) + ", " + std::to_string(h) + ")");
        st.last = local;
        st.last_w = w;
        st.last_h = h;
        ++stats.slices_solved;
      }
      merge_slice(full, local, s, *outer_model.get(p.x), *outer_model.get(p.y));
    }
    stats.refine_millis = ms_since(t1);
    composed = std::move(full);
    stats.millis = ms_since(t0);
    if (out_stats) *out_stats = stats;
    return realize_geometry(bundle, composed, width);
  }

  bool in_slice(std::size_t s, std::int32_t owner, ArithId v) const {
    if (owner == no_owner) return false;
    if (bundle.widgets[owner].slice == static_cast<std::int32_t>(s)) return true;
    if (owner != slices[s].widget) return false;
    const Props& p = props[owner];
    return v != p.x && v != p.y && v != p.w && v != p.h;
  }

  void merge_slice(Model& full, const Model& local, std::size_t s, std::int64_t dx, std::int64_t dy) const {
    const auto& vars = bundle.vars;
    for (std::uint32_t i = 0; i < vars.arith_count(); ++i) {
      const ArithId id{i};
      const auto& var = vars.arith(id);
      if (!in_slice(s, var.owner, id)) continue;
      std::int64_t value = local.get(id).value_or(0);
      if (var.role == VarRole::position) value += var.axis == Axis::vertical ? dy : dx;
      full.set(id, value);
    }
    for (std::uint32_t i = 0; i < vars.bool_count(); ++i) {
      const auto owner = vars.boolean(BoolId{i}).owner;
      if (owner != no_owner && bundle.widgets[owner].slice == static_cast<std::int32_t>(s)) {
        full.set(BoolId{i}, local.get(BoolId{i}).value_or(false));
      }
    }
  }

  /// An invisible slice widget hides its whole subtree.
  void clear_slice(Model& full, std::size_t s) const {
    const auto& vars = bundle.vars;
    for (std::uint32_t i = 0; i < vars.arith_count(); ++i) {
      const ArithId id{i};
      const auto& var = vars.arith(id);
      if (in_slice(s, var.owner, id)) full.set(id, var.lower.value_or(0));
    }
    for (std::uint32_t i = 0; i < vars.bool_count(); ++i) {
      const auto owner = vars.boolean(BoolId{i}).owner;
      if (owner != no_owner && bundle.widgets[owner].slice == static_cast<std::int32_t>(s)) full.set(BoolId{i}, false);
    }
  }
};

RuntimeSession::RuntimeSession(DeployBundle bundle, RuntimeOptions options)
    : impl_(std::make_unique<Impl>(std::move(bundle), std::move(options))) {}
RuntimeSession::~RuntimeSession() = default;
RuntimeSession::RuntimeSession(RuntimeSession&&) noexcept = default;
RuntimeSession& RuntimeSession::operator=(RuntimeSession&&) noexcept = default;

RuntimeSession RuntimeSession::load(const std::string& path, RuntimeOptions options) {
  return RuntimeSession(load_bundle_file(path), std::move(options));
}

Geometry RuntimeSession::solve_at_width(std::int64_t width, SolveStats* stats) {
  return impl_->run(width, false, stats);
}

Geometry RuntimeSession::incremental_update(std::int64_t width, SolveStats* stats) {
  return impl_->run(width, true, stats);
}

const DeployBundle& RuntimeSession::bundle() const { return impl_->bundle; }
const Model& RuntimeSession::model() const { return impl_->composed; }
std::int64_t RuntimeSession::min_width() const { return impl_->bundle.table.min_val; }
std::int64_t RuntimeSession::max_width() const { return impl_->bundle.table.max_val; }
std::optional<std::size_t> RuntimeSession::current_row() const { return impl_->row; }
std::uint64_t RuntimeSession::reasoning_runs() const { return impl_->reasoning; }

Geometry realize_geometry(const DeployBundle& bundle, const Model& model, std::int64_t screen_width) {
  Geometry g;
  g.screen_width = screen_width;
  const auto& vars = bundle.vars;
  for (const auto& w : bundle.widgets) {
    if (!model.get(vars.bool_by_name(w.id + ".v")).value_or(false)) continue;
    auto value = [&](const char* suffix) {
      auto v = model.get(vars.arith_by_name(w.id + suffix));
      if (!v) throw Error("model misses " + w.id + suffix);
      return *v;
    };
    g.widgets.push_back({w.id, true, value(".x"), value(".y"), value(".w"), value(".h")});
  }
  return g;
}

Model geometry_model(const DeployBundle& bundle, const Geometry& g, const Model& aux) {
  Model m = aux;
  m.resize(bundle.vars.arith_count(), bundle.vars.bool_count());
  const auto& vars = bundle.vars;
  for (const auto& w : bundle.widgets) m.set(vars.bool_by_name(w.id + ".v"), false);
  for (const auto& e : g.widgets) {
    m.set(vars.bool_by_name(e.id + ".v"), e.visible);
    m.set(vars.arith_by_name(e.id + ".x"), e.x);
    m.set(vars.arith_by_name(e.id + ".y"), e.y);
    m.set(vars.arith_by_name(e.id + ".w"), e.width);
    m.set(vars.arith_by_name(e.id + ".h"), e.height);
  }
  m.set(bundle.screen_width, g.screen_width);
  return m;
}

}  // namespace reflow
