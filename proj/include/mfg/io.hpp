#pragma once

// File formats:
//   run config   JSON, strict schema (unknown keys are rejected), see README
//   fields       CSV, header "# n=<n> dim=<d>", 17 significant digits;
//                one value per line in 1-D, one row of n values per line in 2-D
//   reports      JSON (trace.json, diagnostics.json, jacobian_check.json)

#include "mfg/diagnostics.hpp"
#include "mfg/problem.hpp"
#include "mfg/solver.hpp"
#include "mfg/verification.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfg {

using json = nlohmann::ordered_json;

struct OutputOptions {
    std::string directory = "out";
    bool dump_matrix = false;
};

struct SweepConfig {
    std::vector<double> alpha;
    std::vector<double> kappa;
    std::vector<double> drift_amplitude{1.0};
};

struct MmsConfig {
    TrigSeries u_exact;
    TrigSeries m_exact;
    std::vector<int> grids;
};

struct RunConfig {
    ProblemSpec problem;
    NewtonOptions newton;
    ContinuationOptions continuation;
    DiagnosticsOptions diagnostics;
    int coercivity_samples = 200;
    std::uint64_t seed = 0;
    OutputOptions output;
    std::optional<SweepConfig> sweep;
    std::optional<MmsConfig> mms;
};

ProblemSpec problem_from_json(const json& j);
json to_json(const ProblemSpec& spec);

TrigSeries trig_series_from_json(const json& j);
json to_json(const TrigSeries& series);

/// Validates and fills defaults. Throws InvalidConfig.
RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::string& path);
/// Every field, defaults included.
json to_json(const RunConfig& config);

json to_json(const NewtonReport& report);
json to_json(const DiagnosticsSnapshot& snap);
json to_json(const ContinuationTrace& trace);
json to_json(const CoercivityReport& report);

void write_field_csv(const Field& field, const std::string& path);
/// Throws Io on malformed files.
Field read_field_csv(const std::string& path);

/// Deterministic dump (2-space indent, trailing newline).
void write_json(const json& j, const std::string& path);

} // namespace mfg
