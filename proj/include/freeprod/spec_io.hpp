#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace freeprod {

/// Schema violation in an experiment spec; carries the offending field path.
struct SpecError : std::runtime_error {
    std::string field;
    SpecError(std::string field_path, const std::string& message)
        : std::runtime_error(field_path + ": " + message), field(std::move(field_path)) {}
};

/// Parsed experiment description. The canonical JSON form (sorted keys,
/// defaults filled in) is what emit returns; parse(emit(s)) == s.
struct ExperimentSpec {
    std::string command;
    std::string mode = "float";  // "exact" | "float"
    double tolerance = 1e-12;
    std::uint64_t seed = 0;
    std::string output_prefix = "experiment";
    nlohmann::json algebras = nlohmann::json::array();
    nlohmann::json elements = nlohmann::json::array();
    nlohmann::json params = nlohmann::json::object();

    nlohmann::json canonical() const;

    friend bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
        return a.canonical() == b.canonical();
    }
};

ExperimentSpec parse_spec(const std::string& text);
std::string emit_spec(const ExperimentSpec& spec);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    // Optional CLI overrides; empty/negative means "use the spec".
    std::string mode_override;
    std::string seed_override;
    double tol_override = -1.0;
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 2 spec error, 3 verification failure, 4 budget exhausted
    std::vector<std::string> files;
    nlohmann::json summary;
};

/// Executes one experiment: resolves algebras and elements, dispatches on the
/// command, writes <prefix>_report.csv and <prefix>_summary.json atomically
/// into the output directory. Deterministic for fixed spec + seed.
RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& options);

}  // namespace freeprod
