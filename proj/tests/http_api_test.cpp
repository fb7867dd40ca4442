#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "consilium/http_api.hpp"
#include "test_support.hpp"

using namespace consilium;

namespace {

std::string read_text(const std::string& path) { return detail::read_file(path); }

// A live server on an ephemeral port backed by a fresh service.
class Api : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("consilium_http_" + std::to_string(::getpid()) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    start();
  }

  void TearDown() override {
    stop();
    std::filesystem::remove_all(dir_);
  }

  void start() {
    SessionService::Options opts;
    opts.data_dir = dir_;
    service_ = std::make_unique<SessionService>(opts);
    server_ = std::make_unique<httplib::Server>();
    mount_api(*server_, *service_);
    port_ = server_->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void stop() {
    server_->stop();
    if (thread_.joinable()) thread_.join();
    client_.reset();
    server_.reset();
    service_.reset();
  }

  struct Reply {
    int status;
    Json body;
  };

  Reply send(const std::string& method, const std::string& path, const Json* body = nullptr,
             const std::string& token = "") {
    httplib::Headers headers;
    if (!token.empty()) headers.emplace(kTokenHeader, token);
    std::string payload = body ? body->dump() : "";
    httplib::Result r;
    if (method == "GET") r = client_->Get(path, headers);
    else if (method == "POST") r = client_->Post(path, headers, payload, "application/json");
    else if (method == "PUT") r = client_->Put(path, headers, payload, "application/json");
    else r = client_->Options(path, headers);
    EXPECT_TRUE(r) << method << " " << path;
    if (!r) return {0, Json()};
    Json parsed = r->body.empty() ? Json() : Json::parse(r->body, nullptr, false);
    return {r->status, parsed};
  }

  Reply post(const std::string& path, const Json& body, const std::string& token = "") {
    return send("POST", path, &body, token);
  }
  Reply put(const std::string& path, const Json& body, const std::string& token = "") {
    return send("PUT", path, &body, token);
  }
  Reply get(const std::string& path, const std::string& token = "") { return send("GET", path, nullptr, token); }

  // Session over the ISA data with facilitator "f" and decision makers d1, d2.
  struct Setup {
    std::string id, fac, d1, d2;
  };

  Setup isa_session() {
    Json body{{"matrix", read_text(testing_support::source_path("data/isa_matrix.csv"))},
              {"criteria", Json::parse(read_text(testing_support::source_path("data/isa_criteria.json")))},
              {"facilitator", {{"id", "f"}, {"display_name", "Facilitator"}}}};
    auto r = post("/sessions", body);
    EXPECT_EQ(r.status, 201);
    Setup s{r.body["session"]["id"], r.body["token"], "", ""};
    s.d1 = post("/sessions/" + s.id + "/participants", {{"id", "d1"}, {"role", "decision_maker"}}, s.fac).body["token"];
    s.d2 = post("/sessions/" + s.id + "/participants", {{"id", "d2"}, {"role", "decision_maker"}}, s.fac).body["token"];
    return s;
  }

  Setup small_session() {
    auto r = post("/sessions", {{"alternatives", {"A", "B", "C"}}, {"facilitator", {{"id", "f"}}}});
    EXPECT_EQ(r.status, 201);
    Setup s{r.body["session"]["id"], r.body["token"], "", ""};
    s.d1 = post("/sessions/" + s.id + "/participants", {{"id", "d1"}}, s.fac).body["token"];
    s.d2 = post("/sessions/" + s.id + "/participants", {{"id", "d2"}}, s.fac).body["token"];
    return s;
  }

  void expect_error(const Reply& r, int status, const std::string& code) {
    EXPECT_EQ(r.status, status) << r.body.dump();
    ASSERT_TRUE(r.body.is_object()) << "status " << r.status;
    EXPECT_EQ(r.body["error"], code);
    EXPECT_TRUE(r.body["detail"].is_string());
  }

  std::filesystem::path dir_;
  std::unique_ptr<SessionService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(Api, CreateReturnsFacilitatorViewAndToken) {
  auto r = post("/sessions", {{"alternatives", {"A", "B"}}, {"facilitator", {{"id", "f"}, {"display_name", "Ana"}}}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["session"]["phase"], "setup");
  EXPECT_EQ(r.body["session"]["participants"][0]["role"], "facilitator");
  EXPECT_FALSE(r.body["session"]["participants"][0].contains("token"));
  EXPECT_TRUE(r.body["token"].is_string());
  EXPECT_FALSE(r.body["token"].get<std::string>().empty());
}

TEST_F(Api, CreateWithMatrixTakesAlternativesFromRows) {
  auto s = isa_session();
  auto view = get("/sessions/" + s.id).body;
  EXPECT_EQ(view["alternatives"].size(), 24u);
  EXPECT_EQ(view["criteria"].size(), 6u);
  EXPECT_EQ(view["decision_maker_count"], 2);
}

TEST_F(Api, CreateRejectsBadInput) {
  expect_error(post("/sessions", {{"alternatives", {"A"}}, {"facilitator", {{"id", "f"}}}}), 400, "domain_error");
  expect_error(post("/sessions", {{"alternatives", {"A", "B"}}}), 400, "bad_request");
  expect_error(post("/sessions", {{"alternatives", {"A", "A"}}, {"facilitator", {{"id", "f"}}}}), 400,
               "validation_error");
  expect_error(post("/sessions", {{"matrix", "id,c1\nA,1\nB,x\n"}, {"criteria", Json::array()}, {"facilitator", {{"id", "f"}}}}),
               400, "parse_error");
  auto raw = client_->Post("/sessions", "not json", "application/json");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->status, 400);
  EXPECT_EQ(Json::parse(raw->body)["error"], "bad_request");
}

TEST_F(Api, EnrollNeedsFacilitatorTokenAndSetupPhase) {
  auto s = small_session();
  expect_error(post("/sessions/" + s.id + "/participants", {{"id", "d3"}}), 403, "forbidden");
  expect_error(post("/sessions/" + s.id + "/participants", {{"id", "d3"}}, s.d1), 403, "forbidden");
  expect_error(post("/sessions/" + s.id + "/participants", {{"id", "d1"}}, s.fac), 409, "conflict");
  expect_error(post("/sessions/" + s.id + "/participants", {{"id", "g"}, {"role", "facilitator"}}, s.fac), 409,
               "role_error");
  expect_error(post("/sessions/" + s.id + "/participants", {{"id", "x"}, {"role", "boss"}}, s.fac), 400,
               "bad_request");
  ASSERT_EQ(post("/sessions/" + s.id + "/phase", {{"advance_to", "balloting"}}, s.fac).status, 200);
  expect_error(post("/sessions/" + s.id + "/participants", {{"id", "late"}}, s.fac), 409, "phase_error");
}

TEST_F(Api, PhaseGuards) {
  auto s = small_session();
  auto base = "/sessions/" + s.id;
  expect_error(post(base + "/phase", {{"advance_to", "balloting"}}, s.d1), 403, "forbidden");
  expect_error(post(base + "/phase", {{"advance_to", "results"}}, s.fac), 409, "phase_error");
  expect_error(post(base + "/phase", {{"advance_to", "bogus"}}, s.fac), 400, "bad_request");
  expect_error(put(base + "/ballots/d1", {{"ranking", {"A", "B", "C"}}}, s.d1), 409, "phase_error");
  EXPECT_EQ(post(base + "/phase", {{"advance_to", "balloting"}}, s.fac).body["phase"], "balloting");
  expect_error(post(base + "/phase", {{"advance_to", "results"}}, s.fac), 400, "domain_error");
  expect_error(get(base + "/results?method=borda"), 409, "phase_error");
}

TEST_F(Api, BallotsRequireOwnTokenAndAreRedacted) {
  auto s = small_session();
  auto base = "/sessions/" + s.id;
  post(base + "/phase", {{"advance_to", "balloting"}}, s.fac);
  expect_error(put(base + "/ballots/d1", {{"ranking", {"A", "B", "C"}}}), 403, "forbidden");
  expect_error(put(base + "/ballots/d1", {{"ranking", {"A", "B", "C"}}}, s.d2), 403, "forbidden");
  expect_error(put(base + "/ballots/f", {{"ranking", {"A", "B", "C"}}}, s.fac), 409, "role_error");
  expect_error(put(base + "/ballots/d1", {{"ranking", {"A", "B"}}}, s.d1), 400, "validation_error");
  expect_error(put(base + "/ballots/d1", {{"ranking", {"A", "B", "Z"}}}, s.d1), 400, "validation_error");
  expect_error(put(base + "/ballots/d1", {{"order", {"A"}}}, s.d1), 400, "bad_request");

  auto r = put(base + "/ballots/d1", {{"ranking", {"A", "B", "C"}}}, s.d1);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["my_ballot"], Json({"A", "B", "C"}));
  // resubmission replaces
  r = put(base + "/ballots/d1", {{"ranking", {"C", "B", "A"}}}, s.d1);
  EXPECT_EQ(r.body["my_ballot"], Json({"C", "B", "A"}));
  EXPECT_EQ(r.body["ballot_count"], 1);

  auto anon = get(base).body;
  EXPECT_FALSE(anon.contains("ballots"));
  EXPECT_FALSE(anon.contains("my_ballot"));
  EXPECT_EQ(anon["ballots_submitted"], Json({"d1"}));
  auto other = get(base, s.d2).body;
  EXPECT_FALSE(other.contains("ballots"));
  EXPECT_TRUE(other["my_ballot"].is_null());
  auto fac = get(base, s.fac).body;
  EXPECT_EQ(fac["ballots"]["d1"], Json({"C", "B", "A"}));
  EXPECT_EQ(anon.dump().find(s.d1), std::string::npos);
  EXPECT_EQ(fac.dump().find(s.d1), std::string::npos);
}

TEST_F(Api, SuggestScoresWithCallerWeights) {
  auto s = isa_session();
  auto r = post("/sessions/" + s.id + "/suggest",
                {{"weights", {{"c1", 1.0}, {"c2", 0.0}, {"c3", 0.0}, {"c4", 0.0}, {"c5", 0.0}, {"c6", 0.0}}}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["method"], "min-max/saw");
  EXPECT_EQ(r.body["ranking"][0], "ISA_6");  // highest CVLI count
  EXPECT_EQ(r.body["ranking"].size(), 24u);
  expect_error(post("/sessions/" + s.id + "/suggest", {{"weights", {{"c1", 1.0}, {"zz", 0.0}}}}), 400, "config_error");
  expect_error(post("/sessions/" + s.id + "/suggest",
                    {{"weights", {{"c1", 0.5}, {"c2", 0.0}, {"c3", 0.0}, {"c4", 0.0}, {"c5", 0.0}, {"c6", 0.0}}}}),
               400, "validation_error");
  expect_error(post("/sessions/" + s.id + "/suggest", {{"weights", {{"c1", "heavy"}}}}), 400, "bad_request");
  auto plain = small_session();
  expect_error(post("/sessions/" + plain.id + "/suggest", {{"weights", {{"c1", 1.0}}}}), 400, "domain_error");
}

TEST_F(Api, ResultsForBothMethods) {
  auto s = small_session();
  auto base = "/sessions/" + s.id;
  post(base + "/phase", {{"advance_to", "balloting"}}, s.fac);
  put(base + "/ballots/d1", {{"ranking", {"A", "B", "C"}}}, s.d1);
  put(base + "/ballots/d2", {{"ranking", {"B", "A", "C"}}}, s.d2);
  EXPECT_EQ(post(base + "/phase", {{"advance_to", "results"}}, s.fac).body["results_available"], true);

  auto borda = get(base + "/results?method=borda");
  ASSERT_EQ(borda.status, 200);
  EXPECT_EQ(borda.body["method"], "borda");
  EXPECT_EQ(borda.body["scores"]["A"], 5);
  EXPECT_EQ(borda.body["scores"]["B"], 5);
  EXPECT_EQ(borda.body["scores"]["C"], 2);
  EXPECT_EQ(borda.body["ranking"], Json({"A", "B", "C"}));

  auto cond = get(base + "/results?method=condorcet");
  ASSERT_EQ(cond.status, 200);
  EXPECT_EQ(cond.body["has_condorcet_winner"], false);  // A and B tie 1-1
  EXPECT_TRUE(cond.body["condorcet_winner"].is_null());
  EXPECT_EQ(cond.body["pairwise"]["voter_count"], 2);

  expect_error(get(base + "/results"), 400, "bad_request");
  expect_error(get(base + "/results?method=plurality"), 400, "bad_request");
  expect_error(put(base + "/ballots/d1", {{"ranking", {"C", "B", "A"}}}, s.d1), 409, "phase_error");

  EXPECT_EQ(post(base + "/phase", {{"advance_to", "closed"}}, s.fac).body["phase"], "closed");
  EXPECT_EQ(get(base + "/results?method=borda").body, borda.body);
}

TEST_F(Api, UnknownSessionAndRoute) {
  expect_error(get("/sessions/nope"), 404, "not_found");
  expect_error(post("/sessions/nope/phase", {{"advance_to", "balloting"}}, "t"), 404, "not_found");
  expect_error(get("/nothing/here"), 404, "not_found");
}

TEST_F(Api, CorsPreflight) {
  auto r = client_->Options("/sessions");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 204);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_NE(r->get_header_value("Access-Control-Allow-Headers").find(kTokenHeader), std::string::npos);
}

TEST_F(Api, CloneStartsNewRoundWithSameParticipants) {
  auto s = small_session();
  auto base = "/sessions/" + s.id;
  post(base + "/phase", {{"advance_to", "balloting"}}, s.fac);
  put(base + "/ballots/d1", {{"ranking", {"A", "B", "C"}}}, s.d1);
  expect_error(post(base + "/clone", Json::object(), s.d1), 403, "forbidden");
  auto r = post(base + "/clone", Json::object(), s.fac);
  ASSERT_EQ(r.status, 201);
  auto id = r.body["session"]["id"].get<std::string>();
  EXPECT_NE(id, s.id);
  EXPECT_EQ(r.body["session"]["cloned_from"], s.id);
  EXPECT_EQ(r.body["session"]["phase"], "setup");
  EXPECT_EQ(r.body["session"]["ballot_count"], 0);
  EXPECT_EQ(r.body["session"]["participants"].size(), 3u);
  // existing tokens carry over
  ASSERT_EQ(post("/sessions/" + id + "/phase", {{"advance_to", "balloting"}}, s.fac).status, 200);
  EXPECT_EQ(put("/sessions/" + id + "/ballots/d1", {{"ranking", {"C", "A", "B"}}}, s.d1).status, 200);
  EXPECT_EQ(get(base, s.d1).body["my_ballot"], Json({"A", "B", "C"}));
}

TEST_F(Api, SessionsSurviveRestart) {
  auto s = small_session();
  auto base = "/sessions/" + s.id;
  post(base + "/phase", {{"advance_to", "balloting"}}, s.fac);
  put(base + "/ballots/d1", {{"ranking", {"B", "C", "A"}}}, s.d1);
  auto before = get(base, s.fac).body;
  EXPECT_TRUE(std::filesystem::exists(dir_ / "sessions" / (s.id + ".json")));
  stop();
  start();
  auto after = get(base, s.fac).body;
  EXPECT_EQ(after, before);
  EXPECT_EQ(put(base + "/ballots/d2", {{"ranking", {"A", "B", "C"}}}, s.d2).status, 200);
}
