#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nextjump::scenarios {

using json = nlohmann::json;

class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Flat, fully serializable run description. Every physical or numerical knob lives in params.
struct RunConfig {
    std::string scenario;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
    std::string output;          // CSV path, empty selects the scenario default
    std::string format = "csv";
};

json to_json(const RunConfig& c);
RunConfig config_from_json(const json& j);
std::string serialize(const RunConfig& c);
RunConfig parse_config(const std::string& text);

struct ScenarioSpec {
    std::string name;
    std::vector<std::string> aliases;
    std::string description;
    std::vector<std::pair<std::string, double>> defaults;
    std::vector<std::string> columns;  // CSV header
    std::string default_output;
};

const std::vector<ScenarioSpec>& registry();
// resolves aliases; nullptr when unknown
const ScenarioSpec* find_scenario(const std::string& name);

// Fills defaults, rejects unknown keys and out-of-range values (InvalidConfig).
RunConfig resolve(const RunConfig& c);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// shortest round-trip decimal
std::string format_double(double v);
std::string to_csv(const Table& t);

struct ScenarioResult {
    Table table;
    json summary = json::object();
    json flags = json::object();
};

// Runs a resolved config. Numerical failures surface as nextjump::NumericalError.
ScenarioResult run_scenario(const RunConfig& c);

// sidecar document: config echo, summary, regime flags, wall time
json sidecar(const RunConfig& c, const ScenarioResult& r, double wall_seconds);

}  // namespace nextjump::scenarios
