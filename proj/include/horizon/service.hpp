#pragma once

// Local HTTP/JSON veneer over one engine session (/api/v1/...). Routing and
// serialization live in Service::handle so they can be exercised without a
// socket; mount() binds the same handler into a cpp-httplib server.

#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>

#include "horizon/engine.hpp"
#include "horizon/error.hpp"
#include "horizon/json_io.hpp"

namespace horizon {

struct ApiResponse {
  int status = 200;
  Json body;
  std::size_t log_position = 0;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_frame:
    case ErrorCode::unknown_node:
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::total_conflict:
    case ErrorCode::unreachable_frame:
    case ErrorCode::duplicate_relation:
    case ErrorCode::disabled_node:
      return 409;
    case ErrorCode::parse_error:
      return 400;
    case ErrorCode::io_error:
      return 500;
    default:
      return 422;
  }
}

// Masses and derived scores travel as decimal strings with 17 significant
// digits so a client can display exactly what the engine computed.
inline Json api_number(double v) { return format_double(v); }

inline Json api_masses(const Boe& b) {
  Json arr = Json::array();
  for (const auto& fe : b.focal())
    arr.push_back(Json{{"set", b.frame().labels_of(fe.set)}, {"mass", api_number(fe.mass)}});
  return arr;
}

inline Json api_node(const LineageNode& n) {
  return Json{{"node_id", n.id},
              {"frame", n.boe.frame().id()},
              {"kind", n.kind() == BoeKind::initial ? "initial" : "secondary"},
              {"op", to_json(n.op)},
              {"inputs", n.inputs},
              {"disabled", n.disabled},
              {"open_world", n.boe.is_open_world()},
              {"masses", api_masses(n.boe)},
              {"conflict", api_number(n.boe.conflict())},
              {"translation_loss", api_number(n.boe.translation_loss())},
              {"source", to_json(n.boe.source())}};
}

inline Json api_conclusion(const ConclusionReport& r, const Frame& frame) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"statement", frame.labels_of(row.statement.members)},
                        {"label", row.label},
                        {"support", api_number(row.support)},
                        {"uncertainty", api_number(row.uncertainty)},
                        {"against", api_number(row.against)}});
  return Json{{"boe_id", r.boe_id},
              {"frame", r.frame_id},
              {"rows", std::move(rows)},
              {"conflict", api_number(r.conflict)},
              {"unknown_mass", api_number(r.unknown_mass)},
              {"translation_loss", api_number(r.translation_loss)},
              {"inconclusive", r.inconclusive}};
}

inline Json api_influence(const InfluenceReport& r, const std::map<std::string, std::string>& names) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    auto it = names.find(e.boe_id);
    entries.push_back(Json{{"boe_id", e.boe_id},
                           {"source", it == names.end() ? std::string() : it->second},
                           {"influence", api_number(e.influence)},
                           {"share", api_number(e.share)},
                           {"leave_one_out", e.leave_one_out ? api_number(*e.leave_one_out) : Json()}});
  }
  return Json{{"conclusion_id", r.conclusion_id},
              {"entries", std::move(entries)},
              {"most_influential", r.most_influential},
              {"least_influential", r.least_influential},
              {"exact", r.exact},
              {"method", r.method == InfluenceMethod::standalone ? "standalone" : "leave_one_out"},
              {"text", explanation_text(r, names)}};
}

class Service {
 public:
  explicit Service(Session session) : session_(std::move(session)) {}

  // Read access for tests and the CLI; takes the shared lock.
  template <class Fn>
  auto read(Fn&& fn) const {
    std::shared_lock lock(mutex_);
    return fn(session_);
  }

  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body = {}) {
    try {
      return route(method, path, body);
    } catch (const Error& e) {
      return error_response(http_status(e.code()), std::string(to_string(e.code())), e.what());
    } catch (const Json::exception& e) {
      return error_response(422, "invalid_request", e.what());
    }
  }

  void mount(httplib::Server& server) {
    auto adapter = [this](const httplib::Request& req, httplib::Response& res) {
      ApiResponse r = handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_header("X-Log-Position", std::to_string(r.log_position));
      res.set_content(r.body.dump(), "application/json");
    };
    const std::string any = R"(/api/v1/.*)";
    server.Get(any, adapter);
    server.Post(any, adapter);
  }

 private:
  static ApiResponse error_response(int status, std::string code, std::string message) {
    return {status, Json{{"error", Json{{"code", std::move(code)}, {"message", std::move(message)}, {"detail", nullptr}}}}, 0};
  }

  static std::vector<std::string> split(std::string_view path) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
      while (i < path.size() && path[i] == '/') ++i;
      std::size_t j = i;
      while (j < path.size() && path[j] != '/') ++j;
      if (j > i) out.emplace_back(path.substr(i, j - i));
      i = j;
    }
    return out;
  }

  static Json parse_body(std::string_view body) {
    Json j = body.empty() ? Json::object() : parse_json(body);
    if (!j.is_object()) fail(ErrorCode::validation_error, "request body must be a JSON object");
    return j;
  }

  // Accepts a mass or rate given either as a JSON number or a decimal string.
  static double number_or_string(const Json& v, const char* what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      char* end = nullptr;
      const double d = std::strtod(s.c_str(), &end);
      if (end != s.c_str() && *end == '\0') return d;
    }
    fail(ErrorCode::validation_error, std::string(what) + " must be a number");
  }

  ApiResponse ok(int status, Json body) const { return {status, std::move(body), session_.log_position()}; }

  ApiResponse route(std::string_view method, std::string_view path, std::string_view body) {
    const auto parts = split(path);
    if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1")
      fail(ErrorCode::not_found, "no such endpoint: " + std::string(path));
    const std::string& res = parts[2];

    if (method == "GET") {
      std::shared_lock lock(mutex_);
      if (parts.size() == 3 && res == "frames") {
        Json out = Json::array();
        for (const auto& f : session_.kb().gallery.frames()) out.push_back(to_json(*f));
        return ok(200, std::move(out));
      }
      if (parts.size() == 3 && res == "relations") {
        Json out = Json::array();
        for (const auto& rel : session_.kb().gallery.relations()) {
          Json pairs = Json::array();
          for (const auto& [a, b] : rel->label_pairs()) pairs.push_back(Json::array({a, b}));
          out.push_back(Json{{"a", rel->frame_a().id()}, {"b", rel->frame_b().id()}, {"pairs", std::move(pairs)}});
        }
        return ok(200, std::move(out));
      }
      if (parts.size() == 3 && res == "boes") {
        Json out = Json::array();
        for (const auto* n : session_.nodes()) out.push_back(api_node(*n));
        return ok(200, std::move(out));
      }
      if (res == "nodes" && parts.size() == 4) return ok(200, api_node(session_.node(parts[3])));
      if (res == "nodes" && parts.size() == 5 && parts[4] == "conclusion") {
        const auto& n = session_.node(parts[3]);
        return ok(200, api_conclusion(session_.conclusion_of(n.id), n.boe.frame()));
      }
      if (res == "nodes" && parts.size() == 5 && parts[4] == "explanation")
        return ok(200, api_influence(session_.explanation_of(parts[3]), session_.source_names()));
      fail(ErrorCode::not_found, "no such endpoint: GET " + std::string(path));
    }

    if (method != "POST") fail(ErrorCode::invalid_argument, "unsupported method " + std::string(method));
    const Json req = parse_body(body);
    std::unique_lock lock(mutex_);

    if (parts.size() == 3 && res == "boes") {
      Json masses = Json::array();
      for (const auto& m : array_field(req, "masses", "request"))
        masses.push_back(Json{{"set", field(m, "set", "masses[]")}, {"mass", number_or_string(field(m, "mass", "masses[]"), "mass")}});
      Json rec{{"op", "submit"}, {"frame", string_field(req, "frame", "request")}, {"masses", std::move(masses)}};
      if (req.contains("source")) rec["source"] = req["source"];
      return created(session_.apply(rec).back());
    }
    if (parts.size() == 4 && res == "ops") {
      const std::string& op = parts[3];
      if (op == "fuse") {
        Json rec{{"op", "fuse"},
                 {"nodes", field(req, "node_ids", "request")},
                 {"rule", req.value("rule", std::string("dempster"))},
                 {"target", string_field(req, "target_frame", "request")}};
        if (req.contains("auto_discount") && !req["auto_discount"].is_null()) rec["auto_discount"] = req["auto_discount"];
        return created(session_.apply(rec).back());
      }
      if (op == "discount") {
        Json rec{{"op", "discount"},
                 {"node", string_field(req, "node_id", "request")},
                 {"rate", number_or_string(field(req, "rate", "request"), "rate")}};
        return created(session_.apply(rec).back());
      }
      if (op == "translate") {
        Json rec{{"op", "translate"},
                 {"node", string_field(req, "node_id", "request")},
                 {"target", string_field(req, "target_frame", "request")}};
        return created(session_.apply(rec).back());
      }
    }
    if (parts.size() == 3 && res == "whatif") {
      Json rd = Json::object();
      if (req.contains("rediscount")) {
        const Json& src = req["rediscount"];
        if (!src.is_object()) fail(ErrorCode::validation_error, "rediscount must be an object");
        for (auto it = src.begin(); it != src.end(); ++it) rd[it.key()] = number_or_string(it.value(), "rate");
      }
      Json rec{{"op", "what_if"},
               {"recompute", string_field(req, "recompute", "request")},
               {"disable", req.value("disable", Json::array())},
               {"rediscount", std::move(rd)}};
      return created(session_.apply(rec).back());
    }
    fail(ErrorCode::not_found, "no such endpoint: POST " + std::string(path));
  }

  ApiResponse created(const NodeId& id) const {
    return ok(201, Json{{"node_id", id}, {"log_position", session_.log_position()}});
  }

  mutable std::shared_mutex mutex_;
  Session session_;
};

}  // namespace horizon
