#pragma once

#include "nextjump/readout.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nextjump::validation {

enum class Level { fast, full };

struct Options {
    Level level = Level::full;
    std::uint64_t seed = 0;
    readout::ErfcFn erfc_fn = nextjump::erfc;  // substitutable for fault injection
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string metric;      // what `measured` is
    double measured = 0.0;
    double tolerance = 0.0;  // pass threshold on `measured`
    std::string detail;      // secondary measurements
    double seconds = 0.0;
};

inline constexpr int criterion_count = 15;

CriterionResult run_criterion(int id, const Options& o);
// all criteria when ids is empty
std::vector<CriterionResult> run_all(const Options& o, const std::vector<int>& ids = {});

std::string format_line(const CriterionResult& r);
nlohmann::json to_json(const std::vector<CriterionResult>& rs);

}  // namespace nextjump::validation
