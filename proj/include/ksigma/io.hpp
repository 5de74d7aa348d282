#pragma once

// File formats: CSV tables (17 significant digits), profile CSV, problem and
// metric JSON, run manifests.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksigma/analysis.hpp"
#include "ksigma/continuation.hpp"
#include "ksigma/radial.hpp"
#include "ksigma/solver.hpp"

namespace ksigma::io {

using nlohmann::json;

std::string tool_version();

/// Shortest round-trip-safe form: scientific, 17 significant digits.
std::string format_double(double x);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::string version = tool_version();

    json to_json() const;
};

/// Writes columns of equal length under `header`.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    /// Column by header name; throws ConfigError when missing.
    const std::vector<double>& column(const std::string& name) const;
    bool has(const std::string& name) const;
};

/// Numeric CSV with one header line; throws ConfigError on malformed rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Columns r, w and optionally dw, d2w (taken as exact when present).
RadialProfile read_profile_csv(const std::filesystem::path& path, const ConeParams& cone);
void write_profile_csv(const std::filesystem::path& path, const RadialProfile& p);

struct ContinuationSpec {
    double delta0 = 1.0;
    ContinuationConfig config;
    std::optional<ParametricRhs> general;  // rhs.terms present
};

struct ProblemSpec {
    RadialProblem problem;
    SolverConfig solver;
    ContinuationSpec continuation;
};

ProblemSpec parse_problem(const json& j);
ProblemSpec load_problem(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// r, w, v, residual
void write_solution_csv(const std::filesystem::path& path, const Solution& s, const ConeParams& cone);
/// t, delta_t, v_at_probe, newton_iters, fold_flag
void write_branch_csv(const std::filesystem::path& path, const Branch& b);

struct MetricSpec {
    int n = 3;
    std::string kind;           // round_sphere | flat | fundamental | power
    double offset = 0.0;        // fundamental: w = 2 log rho + offset
    double coeff = 1.0;         // power: w = coeff rho^exponent
    double exponent = 1.0;
    VolumeCenter center = VolumeCenter::Origin;
    std::vector<double> radii;  // geodesic radii
    double fit_radius = 1.0;

    double w(double rho) const;
};

MetricSpec parse_metric(const json& j);
MetricSpec load_metric(const std::filesystem::path& path);

}  // namespace ksigma::io
