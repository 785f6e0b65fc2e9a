#include "tilekit/report.hpp"

namespace tilekit {

const char* VerificationReport::status_name(Status s) {
    switch (s) {
        case Status::Pass:
            return "pass";
        case Status::Fail:
            return "fail";
        case Status::Inconclusive:
            return "inconclusive";
    }
    return "?";
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["stage"] = stage;
    j["anchor"] = anchor;
    j["status"] = status_name(status);
    j["metrics"] = metrics;
    j["witnesses"] = witnesses;
    j["config"] = config;
    return j;
}

}  // namespace tilekit
