#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace tilekit {

// Structured pass/fail evidence shared by every verification stage. A fail
// always carries at least one witness; `anchor` is the stable stage
// identifier reports are keyed by.
struct VerificationReport {
    std::string stage;
    std::string anchor;
    enum class Status { Pass, Fail, Inconclusive } status = Status::Pass;
    std::map<std::string, double> metrics;
    std::vector<nlohmann::json> witnesses;
    nlohmann::json config;

    bool passed() const { return status == Status::Pass; }
    void fail_with(nlohmann::json witness) {
        status = Status::Fail;
        witnesses.push_back(std::move(witness));
    }
    nlohmann::json to_json() const;
    static const char* status_name(Status s);
};

}  // namespace tilekit
