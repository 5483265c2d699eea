#include "reflow/service.hpp"

#include <httplib.h>

#include <condition_variable>
#include <deque>
#include <json.hpp>
#include <list>
#include <mutex>
#include <thread>

namespace reflow {

using json = nlohmann::json;

namespace {

json geometry_value(const Geometry& g) {
  json list = json::array();
  for (const auto& e : g.widgets) {
    list.push_back({{"id", e.id}, {"visible", e.visible}, {"x", e.x}, {"y", e.y}, {"width", e.width}, {"height", e.height}});
  }
  return list;
}

json stats_value(const SolveStats& s) {
  return {{"millis", s.millis},
          {"outer_millis", s.outer_millis},
          {"refine_millis", s.refine_millis},
          {"steps", s.steps},
          {"outer_steps", s.outer_steps},
          {"backend", s.backend},
          {"reasoning_reused", s.reasoning_reused},
          {"fallback", s.fallback},
          {"row", s.row},
          {"slices_solved", s.slices_solved},
          {"slices_reused", s.slices_reused}};
}

json range_value(const IntervalTable& t) { return json::array({t.min_val, t.max_val}); }

std::string strip_visibility(const std::string& name) {
  if (name.size() > 2 && name.ends_with(".v")) return name.substr(0, name.size() - 2);
  return name;
}

}  // namespace

std::string geometry_json(const Geometry& g) { return json{{"width", g.screen_width}, {"geometry", geometry_value(g)}}.dump(); }

std::string stats_json(const SolveStats& s) { return stats_value(s).dump(); }

std::string bundle_summary_json(const DeployBundle& b) {
  json rows = json::array();
  for (const auto& row : b.table.rows) {
    json alts = json::array(), assignment = json::object();
    for (const auto& [var, value] : row.assignment) {
      const std::string& name = b.vars.boolean(var).name;
      assignment[name] = value;
      if (value) alts.push_back(strip_visibility(name));
    }
    rows.push_back({{"lo", row.lo}, {"hi", row.hi}, {"weight", row.weight}, {"alternatives", alts},
                    {"assignment", assignment}});
  }
  json widgets = json::array();
  for (const auto& w : b.widgets) {
    json entry = {{"id", w.id}, {"kind", std::string(kind_name(w.kind))}, {"kids", w.kids}};
    entry["slice"] = w.slice ? json(b.slices[*w.slice].widget) : json(nullptr);
    widgets.push_back(std::move(entry));
  }
  json slices = json::array();
  for (const auto& s : b.slices) {
    slices.push_back({{"widget", s.widget}, {"clauses", s.clause_count}, {"width", range_value(s.width)},
                      {"height", range_value(s.height)}, {"width_rows", s.width.rows.size()},
                      {"height_rows", s.height.rows.size()}});
  }
  return json{{"format_version", DeployBundle::format_version},
              {"tool_version", b.tool_version},
              {"config_hash", b.config_hash},
              {"root", b.root},
              {"min_width", b.table.min_val},
              {"max_width", b.table.max_val},
              {"rows", rows},
              {"widgets", widgets},
              {"slices", slices}}
      .dump();
}

struct Service::Impl {
  struct Outcome {
    int status = 0;
    json body;
    bool done = false;
  };
  struct Waiter {
    std::int64_t width = 0;
    std::shared_ptr<Outcome> out;
  };
  struct Subscriber {
    std::deque<std::pair<std::uint64_t, std::string>> buffer;
    std::uint64_t dropped = 0;
  };

  RuntimeSession session;
  ServiceOptions options;
  httplib::Server server;
  int bound_port = -1;

  std::mutex mu;
  std::condition_variable work_cv, done_cv, event_cv;
  std::optional<Waiter> slot;
  std::vector<Waiter> superseded;
  std::list<std::shared_ptr<Subscriber>> subscribers;
  std::uint64_t solve_count = 0, event_seq = 0, dropped = 0;
  bool stopping = false;

  std::thread worker, listener;

  Impl(RuntimeSession s, ServiceOptions o) : session(std::move(s)), options(std::move(o)) { routes(); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}, {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mu);
      res.set_content(json{{"status", "ok"}, {"solves", solve_count}, {"dropped_events", dropped}}.dump(),
                      "application/json");
    });
    server.Get("/bundle", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(bundle_summary_json(session.bundle()), "application/json");
    });
    server.Post("/solve", [this](const httplib::Request& req, httplib::Response& res) { solve(req, res); });
    server.Get("/events", [this](const httplib::Request&, httplib::Response& res) { events(res); });
  }

  static void error(httplib::Response& res, int status, json body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void solve(const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("width") || !body["width"].is_number_integer()) {
      return error(res, 400, {{"error", "shape"}, {"message", "expected {\"width\": <integer>}"}});
    }
    Waiter w{body["width"].get<std::int64_t>(), std::make_shared<Outcome>()};
    std::unique_lock lock(mu);
    if (stopping) return error(res, 503, {{"error", "stopping"}});
    if (slot) superseded.push_back(std::move(*slot));
    slot = w;
    work_cv.notify_one();
    done_cv.wait(lock, [&] { return w.out->done || stopping; });
    if (!w.out->done) return error(res, 503, {{"error", "stopping"}});
    res.status = w.out->status;
    res.set_content(w.out->body.dump(), "application/json");
  }

  void run_worker() {
    std::unique_lock lock(mu);
    for (;;) {
      work_cv.wait(lock, [&] { return slot.has_value() || stopping; });
      if (stopping) return;
      Waiter job = std::move(*slot);
      slot.reset();
      std::vector<Waiter> older = std::move(superseded);
      superseded.clear();
      lock.unlock();

      int status = 200;
      json body;
      std::optional<std::string> event;
      try {
        SolveStats stats;
        Geometry g = session.solve_at_width(job.width, &stats);
        body = {{"width", job.width}, {"row", stats.row}, {"geometry", geometry_value(g)}, {"stats", stats_value(stats)}};
        event = body.dump();
      } catch (const RangeError& e) {
        status = 400;
        body = {{"error", "range"}, {"message", e.what()}, {"min_width", e.lo()}, {"max_width", e.hi()}};
      } catch (const std::exception& e) {
        status = 500;
        body = {{"error", "solver"}, {"message", e.what()}};
      }

      lock.lock();
      if (status == 200) {
        ++solve_count;
        publish(*event);
      }
      auto finish = [&](Waiter& w, bool coalesced) {
        w.out->status = status;
        w.out->body = body;
        w.out->body["requested"] = w.width;
        w.out->body["coalesced"] = coalesced;
        w.out->done = true;
      };
      finish(job, false);
      for (auto& w : older) finish(w, true);
      done_cv.notify_all();
    }
  }

  void publish(const std::string& data) {
    const std::uint64_t id = ++event_seq;
    for (auto& sub : subscribers) {
      if (sub->buffer.size() >= options.event_buffer) {
        sub->buffer.pop_front();
        ++sub->dropped;
        ++dropped;
      }
      sub->buffer.emplace_back(id, data);
    }
    event_cv.notify_all();
  }

  void events(httplib::Response& res) {
    auto sub = std::make_shared<Subscriber>();
    {
      std::lock_guard lock(mu);
      subscribers.push_back(sub);
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, sub](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(mu);
          event_cv.wait_for(lock, std::chrono::milliseconds(500), [&] { return !sub->buffer.empty() || stopping; });
          if (stopping) return false;
          if (sub->buffer.empty()) {
            lock.unlock();
            const std::string ping = ": ping\n\n";
            return sink.write(ping.data(), ping.size());
          }
          std::string out;
          for (auto& [id, data] : sub->buffer) {
            json payload = json::parse(data);
            payload["dropped"] = sub->dropped;
            out += "id: " + std::to_string(id) + "\nevent: solve\ndata: " + payload.dump() + "\n\n";
          }
          sub->buffer.clear();
          lock.unlock();
          return sink.write(out.data(), out.size());
        },
        [this, sub](bool) {
          std::lock_guard lock(mu);
          subscribers.remove(sub);
        });
  }
};

Service::Service(RuntimeSession session, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), std::move(options))) {}

Service::~Service() { stop(); }

void Service::start() {
  auto& I = *impl_;
  if (I.listener.joinable()) throw Error("service already started");
  if (I.options.port < 0 || I.options.port > 65535) throw Error("invalid port " + std::to_string(I.options.port));
  // no SO_REUSEPORT: a second service on a taken port must fail
  I.server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  if (I.options.port == 0) {
    I.bound_port = I.server.bind_to_any_port(I.options.host);
    if (I.bound_port < 0) throw Error("cannot bind " + I.options.host);
  } else {
    if (!I.server.bind_to_port(I.options.host, I.options.port)) {
      throw Error("cannot bind " + I.options.host + ":" + std::to_string(I.options.port));
    }
    I.bound_port = I.options.port;
  }
  I.worker = std::thread([&I] { I.run_worker(); });
  I.listener = std::thread([&I] { I.server.listen_after_bind(); });
  I.server.wait_until_ready();
}

void Service::wait() {
  if (impl_->listener.joinable()) impl_->listener.join();
}

void Service::stop() {
  auto& I = *impl_;
  {
    std::lock_guard lock(I.mu);
    I.stopping = true;
  }
  I.work_cv.notify_all();
  I.done_cv.notify_all();
  I.event_cv.notify_all();
  I.server.stop();
  if (I.listener.joinable() && I.listener.get_id() != std::this_thread::get_id()) I.listener.join();
  if (I.worker.joinable()) I.worker.join();
}

int Service::port() const { return impl_->bound_port; }

std::uint64_t Service::solves() const {
  std::lock_guard lock(impl_->mu);
  return impl_->solve_count;
}

std::uint64_t Service::dropped_events() const {
  std::lock_guard lock(impl_->mu);
  return impl_->dropped;
}

}  // namespace reflow
