#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "fixture.hpp"
#include "golden.hpp"

using namespace divex;
using namespace divex::testing;
using nlohmann::json;

namespace {

const Api& api() {
  static const auto instance = fixture_api(scratch_dir("service"));
  return *instance;
}

json body_of(const std::string& target) { return json::parse(api().handle_target(target).body); }

}  // namespace

TEST_CASE("bind addresses") {
  auto b = parse_bind_address("127.0.0.1:8080");
  CHECK(b.host == "127.0.0.1");
  CHECK(b.port == 8080);
  b = parse_bind_address(":0");
  CHECK(b.host == "0.0.0.0");
  CHECK(b.port == 0);
  b = parse_bind_address("[::1]:9000");
  CHECK(b.host == "::1");
  CHECK(b.port == 9000);
  for (const auto* bad : {"", "localhost", "host:", "host:abc", "host:70000", "host:-1"}) {
    CHECK_MESSAGE(code_of([&] { parse_bind_address(bad); }) == ErrorCode::InvalidArgument, bad);
  }
}

TEST_CASE("config validation") {
  ServiceConfig c;
  c.catalogDir = "/nonexistent/catalog";
  CHECK(code_of([&] { open_api(c); }) == ErrorCode::Io);
  c.thumbMaxEdge = 0;
  CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);
  c = {};
  c.defaultTau = 2;
  CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("engine errors map onto the closed code set") {
  const std::vector<std::pair<ErrorCode, std::pair<int, std::string>>> table{
      {ErrorCode::InvalidArgument, {400, "invalid_parameter"}},
      {ErrorCode::InvalidCriteria, {400, "invalid_criteria"}},
      {ErrorCode::InvalidItemKey, {400, "invalid_item_key"}},
      {ErrorCode::UnknownVideo, {404, "unknown_video"}},
      {ErrorCode::OrdinalOutOfRange, {404, "ordinal_out_of_range"}},
      {ErrorCode::NoSuchConcept, {404, "no_such_concept"}},
      {ErrorCode::UnknownSource, {404, "unknown_source"}},
      {ErrorCode::MissingFeature, {409, "missing_feature"}},
      {ErrorCode::Io, {500, "internal_error"}},
      {ErrorCode::Internal, {500, "internal_error"}},
  };
  for (const auto& [code, expected] : table) {
    const auto e = to_api_error(Error(code, "m"));
    CHECK(e.httpStatus == expected.first);
    CHECK(e.code == expected.second);
  }
  // internal details stay on the server
  CHECK(to_api_error(Error(ErrorCode::Io, "/secret/path")).message.find("/secret") == std::string::npos);

  const auto j = json::parse(ApiError{404, "unknown_video", "gone", R"({"x":1})"}.body());
  CHECK(j["code"] == "unknown_video");
  CHECK(j["status"] == 404);
  CHECK(j["detail"]["x"] == 1);
}

TEST_CASE("fixture queries") {
  auto r = api().handle_target("/search/concepts?q=car&threshold=0.5");
  CHECK(r.status == 200);
  auto j = json::parse(r.body);
  REQUIRE(j["hits"].size() == 1);
  CHECK(j["hits"][0]["item"] == "v:v1/s:0");
  CHECK(j["hits"][0]["score"] == 0.9);

  r = api().handle_target("/similar/v:zz/f:0");
  CHECK(r.status == 404);
  CHECK(json::parse(r.body)["code"] == "unknown_video");

  r = api().handle_target("/featuremaps?concept=zebra");
  CHECK(r.status == 200);
  CHECK(json::parse(r.body)["maps"].empty());

  j = body_of("/status");
  CHECK(j["videos"] == 3);
  CHECK(j["shots"] == 5);
  CHECK(j["frames"] == 11);
  CHECK(j["sources"] == json::array({"netA", "netB"}));
}

TEST_CASE("errors name the offending parameter") {
  for (const auto* target : {"/search/concepts?q=car&k=0", "/search/concepts?q=car&k=abc", "/similar/v:v1/s:0?granularity=scene",
                             "/filter?tau=-1", "/filter?segmentSec=0", "/featuremaps/car/netA?organization=spiral"}) {
    const auto r = api().handle_target(target);
    CHECK_MESSAGE(r.status == 400, target);
    const auto j = json::parse(r.body);
    CHECK_MESSAGE(j["code"] == "invalid_parameter", target);
    CHECK_MESSAGE(j["detail"].contains("parameter"), target);
  }
}

TEST_CASE("list endpoints respect k and repeat identically") {
  for (int k = 1; k <= 6; ++k) {
    const auto ks = std::to_string(k);
    CHECK(body_of("/videos?k=" + ks)["videos"].size() <= static_cast<std::size_t>(k));
    CHECK(body_of("/search/concepts?q=car&k=" + ks)["hits"].size() <= static_cast<std::size_t>(k));
    CHECK(body_of("/similar/v:v2/f:3?measure=motion&k=" + ks)["hits"].size() <= static_cast<std::size_t>(k));
    CHECK(body_of("/search/metadata?q=e&k=" + ks)["videos"].size() <= static_cast<std::size_t>(k));
    CHECK(body_of("/filter?k=" + ks)["results"].size() <= static_cast<std::size_t>(k));
  }
  for (const auto& g : golden_requests()) {
    CHECK(api().handle_target(g.target).body == api().handle_target(g.target).body);
  }
}

TEST_CASE("thumbnails fit the configured edge") {
  const auto r = api().handle_target("/thumbs/v1/0.ppm");
  CHECK(r.status == 200);
  CHECK(r.contentType == "image/x-portable-pixmap");
  // 32x24 scaled to a 16 px longest edge
  CHECK(r.body.rfind("P6\n16 12\n255\n", 0) == 0);
  CHECK(r.body.size() == 13 + 16 * 12 * 3);
  CHECK(api().handle_target("/thumbs/zz/0.ppm").status == 404);
  CHECK(api().handle_target("/thumbs/v1/x.ppm").status == 400);
}

TEST_CASE("responses match the golden files") {
  for (const auto& g : golden_requests()) {
    const auto r = api().handle_target(g.target);
    const auto reason = check_golden(DIVEX_GOLDEN_DIR, g, r.status, r.body);
    CHECK_MESSAGE(reason.empty(), g.name << ": " << reason);
    if (!g.binary && r.status >= 400) {
      const auto j = json::parse(r.body);
      CHECK(j["status"] == r.status);
      CHECK(j["code"].is_string());
    }
  }
}

TEST_CASE("lazy featuremaps are built once under concurrency") {
  const auto shared = fixture_api(scratch_dir("service-flight"));
  const auto before = shared->featuremap_builds();
  // precomputed default maps need no build
  CHECK(shared->handle_target("/featuremaps/car/netA").status == 200);
  CHECK(shared->featuremap_builds() == before);

  std::vector<std::thread> threads;
  std::vector<std::string> bodies(8);
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    threads.emplace_back([&, i] { bodies[i] = shared->handle_target("/featuremaps/car/netA?measure=texture").body; });
  }
  for (auto& t : threads) t.join();
  CHECK(shared->featuremap_builds() == before + 1);
  for (const auto& b : bodies) CHECK(b == bodies.front());
}

TEST_CASE("http front end") {
  const auto shared = fixture_api(scratch_dir("service-http"));
  HttpServer server(shared, parse_bind_address("127.0.0.1:0"));
  REQUIRE(server.port() > 0);

  httplib::Client client("127.0.0.1", server.port());
  auto res = client.Get("/search/concepts?q=car&threshold=0.5");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(res->get_header_value("Content-Type") == "application/json");
  CHECK(res->body == shared->handle_target("/search/concepts?q=car&threshold=0.5").body);

  res = client.Get("/similar/v%3Av1%2Fs%3A0?measure=color&k=3");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == shared->handle_target("/similar/v:v1/s:0?measure=color&k=3").body);

  res = client.Post("/status", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body)["code"] == "not_found");

  CHECK(code_of([&] { HttpServer clash(shared, parse_bind_address("127.0.0.1:" + std::to_string(server.port()))); }) ==
        ErrorCode::Bind);

  server.stop();
  server.wait();
}
