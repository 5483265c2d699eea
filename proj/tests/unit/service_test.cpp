#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

#include "../support/fixtures.hpp"
#include "reflow/service.hpp"

using namespace reflow;
using namespace reflow::testing;
using nlohmann::json;

namespace {

struct Running {
  Service service;
  std::unique_ptr<httplib::Client> client;
  explicit Running(const std::string& fixture_name, ServiceOptions o = {})
      : service(RuntimeSession(bundle_of(fixture_name)), [&] {
          o.port = 0;
          return o;
        }()) {
    service.start();
    client = std::make_unique<httplib::Client>("127.0.0.1", service.port());
    client->set_read_timeout(30, 0);
  }
  ~Running() { service.stop(); }

  std::pair<int, json> post(const std::string& body) {
    auto r = client->Post("/solve", body, "application/json");
    REQUIRE(r);
    return {r->status, json::parse(r->body)};
  }
  std::pair<int, json> solve(std::int64_t width) { return post(json{{"width", width}}.dump()); }
};

bool shown(const json& geometry, const std::string& id) {
  for (const auto& e : geometry) {
    if (e["id"] == id) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("service answers health and bundle queries") {
  Running s("storefront");
  CHECK(s.service.port() > 0);
  auto h = s.client->Get("/health");
  REQUIRE(h);
  CHECK(h->status == 200);
  CHECK(json::parse(h->body)["status"] == "ok");
  CHECK(h->get_header_value("Access-Control-Allow-Origin") == "*");

  auto b = s.client->Get("/bundle");
  REQUIRE(b);
  CHECK(b->status == 200);
  json j = json::parse(b->body);
  CHECK(j == json::parse(bundle_summary_json(bundle_of("storefront"))));
  CHECK(j["min_width"] == 1000);
  CHECK(j["max_width"] == 2000);
  REQUIRE(j["rows"].size() == 2);
  CHECK(j["rows"][0]["lo"] == 1500);
  CHECK(j["rows"][0]["alternatives"] == json::array({"wide_bar", "3_col_table"}));
  bool sliced = false;
  for (const auto& w : j["widgets"]) sliced = sliced || (w["id"] == "wide_btn_1" && w["slice"] == "wide_bar");
  CHECK(sliced);
  CHECK_FALSE(j["slices"].empty());
}

TEST_CASE("solve returns the same layout as the session") {
  Running s("storefront");
  RuntimeSession direct(bundle_of("storefront"));
  for (std::int64_t w : {1800, 1799, 1400}) {
    auto [status, body] = s.solve(w);
    REQUIRE(status == 200);
    CHECK(body["width"] == w);
    CHECK(body["requested"] == w);
    CHECK(body["coalesced"] == false);
    Geometry g = direct.solve_at_width(w);
    CHECK(body["geometry"] == json::parse(geometry_json(g))["geometry"]);
    CHECK(body["stats"].contains("reasoning_reused"));
  }
  auto [status, body] = s.solve(1800);
  CHECK(shown(body["geometry"], "wide_bar"));
  CHECK(body["row"] == 0);
}

TEST_CASE("bad requests are rejected with a reason") {
  Running s("storefront");
  auto [status, body] = s.solve(999);
  CHECK(status == 400);
  CHECK(body["error"] == "range");
  CHECK(body["min_width"] == 1000);
  CHECK(body["max_width"] == 2000);
  for (const char* bad : {"{}", "[1]", "{\"width\": \"wide\"}", "{\"width\": 1.5}", "not json"}) {
    CAPTURE(bad);
    auto [st, b] = s.post(bad);
    CHECK(st == 400);
    CHECK(b["error"] == "shape");
  }
}

TEST_CASE("a burst of requests settles on the last width") {
  Running s("storefront");
  std::atomic<int> ok{0}, coalesced{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 50; ++i) {
    threads.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", s.service.port());
      c.set_read_timeout(60, 0);
      const std::int64_t w = 1000 + 20 * i;
      auto r = c.Post("/solve", json{{"width", w}}.dump(), "application/json");
      if (!r || r->status != 200) {
        MESSAGE("burst request for " << w << " failed: " << (r ? std::to_string(r->status) + " " + r->body : httplib::to_string(r.error())));
        return;
      }
      json j = json::parse(r->body);
      if (j["requested"] == w) ++ok;
      if (j["coalesced"] == true) ++coalesced;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 50);
  CHECK(s.service.solves() <= 50);
  auto [status, body] = s.solve(1234);
  REQUIRE(status == 200);
  CHECK(body["width"] == 1234);
  CHECK(body["coalesced"] == false);
  RuntimeSession direct(bundle_of("storefront"));
  Geometry g = direct.solve_at_width(1234);
  CHECK(shown(body["geometry"], "thin_bar"));
  CHECK(body["geometry"] == json::parse(geometry_json(g))["geometry"]);
}

TEST_CASE("events stream every applied solve") {
  Running s("storefront");
  std::vector<json> events;
  std::atomic<bool> subscribed{false};
  std::thread reader([&] {
    httplib::Client c("127.0.0.1", s.service.port());
    c.set_read_timeout(30, 0);
    std::string buffer;
    c.Get("/events", [&](const char* data, std::size_t n) {
      subscribed = true;
      buffer.append(data, n);
      for (auto end = buffer.find("\n\n"); end != std::string::npos; end = buffer.find("\n\n")) {
        std::string frame = buffer.substr(0, end);
        buffer.erase(0, end + 2);
        auto at = frame.find("data: ");
        if (frame.find("event: solve") != std::string::npos && at != std::string::npos) {
          events.push_back(json::parse(frame.substr(at + 6)));
        }
      }
      return events.size() < 2;
    });
  });
  for (int i = 0; i < 100 && !subscribed; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  REQUIRE(subscribed);
  s.solve(1600);
  s.solve(1400);
  reader.join();
  REQUIRE(events.size() == 2);
  CHECK(events[0]["width"] == 1600);
  CHECK(events[1]["width"] == 1400);
  CHECK(events[0]["row"] != events[1]["row"]);
  CHECK(events[1]["dropped"] == 0);
  CHECK(s.service.dropped_events() == 0);
}

TEST_CASE("unusable ports fail loudly") {
  Running first("storefront");
  ServiceOptions taken;
  taken.port = first.service.port();
  Service clash(RuntimeSession(bundle_of("storefront")), taken);
  CHECK_THROWS_AS(clash.start(), Error);
  ServiceOptions bad;
  bad.port = 70000;
  Service invalid(RuntimeSession(bundle_of("storefront")), bad);
  CHECK_THROWS_AS(invalid.start(), Error);
}
