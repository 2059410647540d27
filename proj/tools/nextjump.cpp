#include "nextjump/numerics.hpp"
#include "nextjump/scenarios.hpp"
#include "nextjump/validation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace {

using nextjump::scenarios::InvalidConfig;
using nextjump::scenarios::RunConfig;

constexpr int exit_ok = 0;
constexpr int exit_failed_checks = 1;
constexpr int exit_invalid_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_io = 4;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    out.close();
    if (!out) throw IoError("write failed for " + path);
}

std::string sidecar_path(const std::string& csv) {
    std::filesystem::path p(csv);
    if (p.extension() == ".csv") p.replace_extension(".json");
    else p += ".json";
    return p.string();
}

// options shared by every scenario subcommand
struct ScenarioCli {
    std::string name;
    CLI::App* sub = nullptr;
    std::map<std::string, std::optional<double>> values;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string json_out;
    bool dump_config = false;
};

struct ValidateCli {
    CLI::App* sub = nullptr;
    std::string level = "fast";
    std::string json_out;
    std::vector<int> only;
    bool inject_erfc_fault = false;
};

double broken_erfc(double x) { return nextjump::erfc(x) + 0.25; }

int run_scenario_cmd(const ScenarioCli& s) {
    RunConfig cfg;
    if (!s.config_path.empty()) cfg = nextjump::scenarios::parse_config(read_file(s.config_path));
    if (!cfg.scenario.empty() && nextjump::scenarios::find_scenario(cfg.scenario) !=
                                     nextjump::scenarios::find_scenario(s.name))
        throw InvalidConfig("config file is for scenario '" + cfg.scenario + "', not '" + s.name + "'");
    cfg.scenario = s.name;
    for (const auto& [k, v] : s.values)
        if (v) cfg.params[k] = *v;
    if (s.seed) cfg.seed = *s.seed;
    if (!s.out.empty()) cfg.output = s.out;
    cfg = nextjump::scenarios::resolve(cfg);

    if (s.dump_config) {
        std::cout << nextjump::scenarios::serialize(cfg) << "\n";
        return exit_ok;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = nextjump::scenarios::run_scenario(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(cfg.output, nextjump::scenarios::to_csv(result.table));
    const std::string side = s.json_out.empty() ? sidecar_path(cfg.output) : s.json_out;
    write_file(side, nextjump::scenarios::sidecar(cfg, result, wall).dump(2) + "\n");
    std::cout << "scenario " << cfg.scenario << " seed " << cfg.seed << ": " << result.table.rows.size()
              << " rows -> " << cfg.output << " (sidecar " << side << ")\n";
    for (const auto& [k, f] : result.flags.items())
        if (f.value("violated", false)) std::cerr << "warning: regime flag " << k << " violated\n";
    return exit_ok;
}

int run_validate_cmd(const ValidateCli& v) {
    nextjump::validation::Options o;
    if (v.level == "fast") o.level = nextjump::validation::Level::fast;
    else if (v.level == "full") o.level = nextjump::validation::Level::full;
    else throw InvalidConfig("validate level must be fast or full");
    if (v.inject_erfc_fault) o.erfc_fn = broken_erfc;
    for (int id : v.only)
        if (id < 1 || id > nextjump::validation::criterion_count)
            throw InvalidConfig("criterion ids run from 1 to " + std::to_string(nextjump::validation::criterion_count));
    std::vector<nextjump::validation::CriterionResult> results;
    std::vector<int> ids = v.only;
    if (ids.empty())
        for (int i = 1; i <= nextjump::validation::criterion_count; ++i) ids.push_back(i);
    bool all = true;
    for (int id : ids) {
        auto r = nextjump::validation::run_criterion(id, o);
        std::cout << nextjump::validation::format_line(r) << std::endl;
        all = all && r.pass;
        results.push_back(std::move(r));
    }
    std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << " (" << v.level << ")\n";
    if (!v.json_out.empty()) {
        nlohmann::json doc = {{"level", v.level}, {"criteria", nextjump::validation::to_json(results)}};
        write_file(v.json_out, doc.dump(2) + "\n");
    }
    return all ? exit_ok : exit_failed_checks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nextjump: quantum-jump, heterodyne and readout simulations"};
    app.require_subcommand(1);

    std::vector<ScenarioCli> scen;
    for (const auto& spec : nextjump::scenarios::registry()) {
        std::vector<std::string> names{spec.name};
        names.insert(names.end(), spec.aliases.begin(), spec.aliases.end());
        for (const auto& n : names) {
            ScenarioCli s;
            s.name = n;
            for (const auto& [k, v] : spec.defaults) s.values[k] = std::nullopt;
            scen.push_back(std::move(s));
        }
    }
    for (auto& s : scen) {
        const auto* spec = nextjump::scenarios::find_scenario(s.name);
        s.sub = app.add_subcommand(s.name, spec->description + (s.name != spec->name ? " (alias of " + spec->name + ")" : ""));
        for (const auto& [k, def] : spec->defaults) {
            s.sub->add_option("--" + k, s.values[k], "default " + nextjump::scenarios::format_double(def));
        }
        s.sub->add_option("--config", s.config_path, "JSON config file; flags override its values");
        s.sub->add_option("--seed", s.seed, "random seed (default 0)");
        s.sub->add_option("--out", s.out, "CSV output path (default " + spec->default_output + ")");
        s.sub->add_option("--json", s.json_out, "sidecar path (default: CSV path with .json)");
        s.sub->add_flag("--dump-config", s.dump_config, "print the resolved config and exit");
    }

    ValidateCli val;
    val.sub = app.add_subcommand("validate", "run the acceptance checks and report pass/fail per criterion");
    val.sub->add_option("level", val.level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    val.sub->add_option("--json", val.json_out, "write the report as JSON");
    val.sub->add_option("--only", val.only, "criterion ids to run");
    val.sub->add_flag("--inject-erfc-fault", val.inject_erfc_fault, "replace erfc with a corrupted version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid_config;
    }

    try {
        if (val.sub->parsed()) return run_validate_cmd(val);
        for (const auto& s : scen)
            if (s.sub->parsed()) return run_scenario_cmd(s);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return exit_io;
    } catch (const nextjump::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return exit_invalid_config;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_invalid_config;
}
