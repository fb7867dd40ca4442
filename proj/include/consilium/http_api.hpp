#pragma once

#include <map>
#include <string>
#include <utility>

#include <httplib.h>

#include "consilium/error.hpp"
#include "consilium/json_util.hpp"
#include "consilium/service.hpp"

namespace consilium {

inline constexpr const char* kTokenHeader = "X-Participant-Token";

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::validation_error:
    case ErrorCode::domain_error:
    case ErrorCode::config_error:
    case ErrorCode::bad_request: return 400;
    case ErrorCode::forbidden: return 403;
    case ErrorCode::not_found: return 404;
    case ErrorCode::phase_error:
    case ErrorCode::role_error:
    case ErrorCode::conflict: return 409;
  }
  return 400;
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, std::string_view code, const std::string& detail) {
  send_json(res, status, Json{{"error", code}, {"detail", detail}});
}

inline Json parse_body(const httplib::Request& req) {
  Json body = Json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) fail(ErrorCode::bad_request, "request body must be a JSON object");
  return body;
}

inline std::string caller_token(const httplib::Request& req) { return req.get_header_value(kTokenHeader); }

// Wraps a handler so library errors become `{error, detail}` responses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, to_string(ErrorCode::bad_request), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

inline SessionSpec spec_from_json(const Json& body) {
  SessionSpec spec;
  if (body.contains("criteria") && !body["criteria"].is_null()) spec.criteria = criteria_from_json(body["criteria"]);
  if (body.contains("matrix") && !body["matrix"].is_null()) {
    if (!body["matrix"].is_string()) fail(ErrorCode::parse_error, "'matrix' must be CSV text");
    spec.matrix = load_matrix(body["matrix"].get<std::string>());
  }
  if (body.contains("alternatives")) spec.alternatives = alternatives_from_json(body["alternatives"]);
  return spec;
}

}  // namespace detail

/// Registers the session API routes on `server`.
inline void mount_api(httplib::Server& server, SessionService& service) {
  using detail::guarded;
  using detail::send_json;
  using httplib::Request;
  using httplib::Response;

  // Browser clients may be served from another origin.
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", std::string("Content-Type, ") + kTokenHeader},
                              {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"}});
  server.Options(R"(/.*)", [](const Request&, Response& res) { res.status = 204; });
  server.set_error_handler([](const Request& req, Response& res) {
    if (res.body.empty() && res.status == 404) {
      detail::send_error(res, 404, to_string(ErrorCode::not_found), "no route for " + req.method + " " + req.path);
    }
  });

  server.Post("/sessions", guarded([&service](const Request& req, Response& res) {
    auto body = detail::parse_body(req);
    if (!body.contains("facilitator") || !body["facilitator"].is_object()) {
      fail(ErrorCode::bad_request, "body needs a 'facilitator' object {id, display_name}");
    }
    const auto& f = body["facilitator"];
    auto id = f.value("id", std::string{});
    auto issued = service.create(detail::spec_from_json(body), id, f.value("display_name", id));
    const auto& fac = issued.session.facilitator();
    send_json(res, 201, Json{{"session", session_view_json(issued.session, &fac)}, {"token", issued.token}});
  }));

  server.Get(R"(/sessions/([^/]+))", guarded([&service](const Request& req, Response& res) {
    auto s = service.get(req.matches[1]);
    send_json(res, 200, session_view_json(s, s.find_by_token(detail::caller_token(req))));
  }));

  server.Post(R"(/sessions/([^/]+)/participants)", guarded([&service](const Request& req, Response& res) {
    auto body = detail::parse_body(req);
    Participant p;
    p.id = body.value("id", std::string{});
    p.display_name = body.value("display_name", p.id);
    auto role = parse_role(body.value("role", std::string{"decision_maker"}));
    if (!role) fail(ErrorCode::bad_request, "role must be facilitator or decision_maker");
    p.role = *role;
    auto issued = service.enroll(req.matches[1], detail::caller_token(req), std::move(p));
    const auto* enrolled = issued.session.find_by_token(issued.token);
    send_json(res, 201, Json{{"participant", participant_to_json(*enrolled, false)}, {"token", issued.token}});
  }));

  server.Post(R"(/sessions/([^/]+)/phase)", guarded([&service](const Request& req, Response& res) {
    auto body = detail::parse_body(req);
    auto target = parse_phase(body.value("advance_to", std::string{}));
    if (!target) fail(ErrorCode::bad_request, "advance_to must be one of balloting, results, closed");
    auto token = detail::caller_token(req);
    auto s = service.advance(req.matches[1], token, *target);
    send_json(res, 200, session_view_json(s, s.find_by_token(token)));
  }));

  server.Put(R"(/sessions/([^/]+)/ballots/([^/]+))", guarded([&service](const Request& req, Response& res) {
    auto body = detail::parse_body(req);
    if (!body.contains("ranking") || !body["ranking"].is_array()) {
      fail(ErrorCode::bad_request, "body needs a 'ranking' array");
    }
    Ranking ranking{body["ranking"].get<std::vector<std::string>>(), true};
    auto token = detail::caller_token(req);
    auto s = service.submit(req.matches[1], token, req.matches[2], std::move(ranking));
    send_json(res, 200, session_view_json(s, s.find_by_token(token)));
  }));

  server.Post(R"(/sessions/([^/]+)/suggest)", guarded([&service](const Request& req, Response& res) {
    auto body = detail::parse_body(req);
    if (!body.contains("weights") || !body["weights"].is_object()) {
      fail(ErrorCode::bad_request, "body needs a 'weights' object {criterion-id: weight}");
    }
    std::map<std::string, double> weights;
    for (const auto& [cid, w] : body["weights"].items()) {
      if (!w.is_number()) fail(ErrorCode::bad_request, "weight for " + cid + " must be a number");
      weights[cid] = w.get<double>();
    }
    auto suggestion = service.suggest(req.matches[1], weights);
    send_json(res, 200, to_json(suggestion.scores, suggestion.ranking));
  }));

  server.Get(R"(/sessions/([^/]+)/results)", guarded([&service](const Request& req, Response& res) {
    if (!req.has_param("method")) fail(ErrorCode::bad_request, "query parameter method=borda|condorcet required");
    auto name = req.get_param_value("method");
    auto method = parse_method(name);
    if (!method) fail(ErrorCode::bad_request, "unknown method '" + name + "' (borda|condorcet)");
    send_json(res, 200, to_json(service.results(req.matches[1], *method)));
  }));

  server.Post(R"(/sessions/([^/]+)/clone)", guarded([&service](const Request& req, Response& res) {
    auto issued = service.clone(req.matches[1], detail::caller_token(req));
    const auto& fac = issued.session.facilitator();
    send_json(res, 201, Json{{"session", session_view_json(issued.session, &fac)}, {"token", issued.token}});
  }));
}

}  // namespace consilium
