#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dpush/simnet.hpp"

namespace dpush {

// Scenario files drive a seeded simulation from JSON: a config object plus
// an ordered action script. Example:
//
//   {
//     "config": {"nodes": 16, "seed": 7, "floor_bits": 12},
//     "actions": [
//       {"op": "create_address", "name": "alice", "node": 3, "kind": "dmail",
//        "difficulty": 12},
//       {"op": "create_identity", "name": "bob", "node": 9},
//       {"op": "offline", "name": "alice"},
//       {"op": "send_dmail", "from": "bob", "to": "alice", "body": "hi"},
//       {"op": "online", "name": "alice"},
//       {"op": "scan_dmail", "as": "alice", "expect_bodies": ["hi"],
//        "expect_senders": ["bob"]}
//     ]
//   }
//
// Further ops: send, scan, rotate, create_channel, publish_channel, follow,
// poll, lookup. Expectations (expect_*) turn into recorded failures, not
// exceptions, so a run always produces its metrics.
struct ScenarioResult {
    SimMetrics metrics;
    std::string metrics_csv;
    std::string trace;
    std::vector<std::string> failures;
    std::vector<std::string> log;

    bool ok() const { return failures.empty(); }
};

SimConfig sim_config_from_json(const nlohmann::json& j);

ScenarioResult run_scenario(const nlohmann::json& doc);
ScenarioResult run_scenario_text(const std::string& text);

}  // namespace dpush
