#pragma once

// JSON-over-HTTP front end for Service.

#include <nlohmann/json.hpp>

#include "emocal/error.hpp"
#include "emocal/service/service.hpp"

namespace httplib {
class Server;
}

namespace emocal::service {

/// 400 for bad input, 404 for unknown ids and files, 409 when the request
/// conflicts with the current state or models, 500 otherwise.
int http_status(ErrorCode code);

/// {"code", "message", "details"}
nlohmann::json error_body(const Error& e);

/// Routes:
///   POST   /events        EventSpec -> 201 {"id"}
///   DELETE /events/{id}   -> {"id", "removed"}
///   POST   /emotion       exactly one of {"manual": EmotionState},
///                         {"hr_file": path}, {"hr_recording": text},
///                         {"activity_log": path}, {"activity_csv": text};
///                         optional "channel" for recordings -> EmotionState
///   POST   /solve         -> Schedule plus "violations"
///   GET    /state         -> AppState plus "seq"
///   GET    /schedule      -> last Schedule, 404 before the first solve
///   POST   /config        ServiceConfig -> ServiceConfig
void register_routes(httplib::Server& server, Service& service);

}  // namespace emocal::service
