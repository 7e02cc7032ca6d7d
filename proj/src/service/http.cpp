#include "emocal/service/http.hpp"

#include <sstream>

#include <httplib.h>

#include "emocal/sched/constraints.hpp"

namespace emocal::service {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::Infeasible:
    case ErrorCode::NoEvents:
    case ErrorCode::ModelMissing:
    case ErrorCode::EmptySchedule:
      return 409;
    case ErrorCode::CorruptLog:
      return 500;
    default:
      return 400;
  }
}

nlohmann::json error_body(const Error& e) {
  return {{"code", error_code_name(e.code())}, {"message", e.what()}, {"details", e.details()}};
}

namespace {

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("request body is not JSON: ") + ex.what());
  }
}

template <typename T>
T body_as(const nlohmann::json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ValidationFailed, std::string(what) + ": " + ex.what());
  }
}

// Runs a handler and turns thrown errors into {code, message, details}.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_json(res, error_body(e), http_status(e.code()));
    } catch (const std::exception& e) {
      send_json(res, {{"code", "Internal"}, {"message", e.what()}, {"details", nlohmann::json::object()}}, 500);
    }
  };
}

EmotionState emotion_from_request(Service& svc, const nlohmann::json& body) {
  if (!body.is_object()) throw Error(ErrorCode::ValidationFailed, "emotion request must be an object");
  static constexpr const char* kSources[] = {"manual", "hr_file", "hr_recording", "activity_log", "activity_csv"};
  std::vector<std::string> given;
  for (const char* s : kSources)
    if (body.contains(s)) given.emplace_back(s);
  if (given.size() != 1)
    throw Error(ErrorCode::ValidationFailed, "exactly one emotion source is required",
                {{"sources", given}, {"accepted", kSources}});
  const auto& src = given.front();
  const auto& value = body.at(src);
  int channel = body.value("channel", 1);

  if (src == "manual") {
    auto e = body_as<EmotionState>(value, "manual emotion");
    if (!value.contains("at")) e.at = svc.now();
    return svc.set_emotion(e);
  }
  if (src == "hr_file") return svc.set_emotion_from_recording(ecg::load_recording(value.get<std::string>()), channel);
  if (src == "hr_recording") {
    std::istringstream in(value.get<std::string>());
    return svc.set_emotion_from_recording(ecg::read_recording(in), channel);
  }
  if (src == "activity_log") return svc.set_emotion_from_activity(behavior::load_activity_log(value.get<std::string>()));
  std::istringstream in(value.get<std::string>());
  return svc.set_emotion_from_activity(behavior::read_activity_log(in));
}

}  // namespace

void register_routes(httplib::Server& server, Service& svc) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Post("/events", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                auto spec = body_as<EventSpec>(parse_body(req), "event");
                send_json(res, {{"id", svc.add_event(std::move(spec))}}, 201);
              }));

  server.Delete(R"(/events/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  std::string id = req.matches[1];
                  svc.remove_event(id);
                  send_json(res, {{"id", id}, {"removed", true}});
                }));

  server.Post("/emotion", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                send_json(res, emotion_from_request(svc, parse_body(req)));
              }));

  server.Post("/solve", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                auto schedule = svc.solve();
                auto s = svc.state();
                nlohmann::json body = schedule;
                body["violations"] = sched::all_violations(schedule.placements, s->emotion, s->config.thresholds);
                send_json(res, body);
              }));

  server.Get("/state", guarded([&svc](const httplib::Request&, httplib::Response& res) {
               auto [s, seq] = svc.versioned_state();
               nlohmann::json body = *s;
               body["seq"] = seq;
               send_json(res, body);
             }));

  server.Get("/schedule", guarded([&svc](const httplib::Request&, httplib::Response& res) {
               auto s = svc.state();
               if (!s->schedule) throw Error(ErrorCode::NotFound, "no schedule has been solved yet");
               send_json(res, *s->schedule);
             }));

  server.Post("/config", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                auto cfg = body_as<ServiceConfig>(parse_body(req), "config");
                send_json(res, svc.set_config(cfg));
              }));
}

}  // namespace emocal::service
