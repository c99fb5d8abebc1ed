#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lenstp/core.hpp"
#include "lenstp/dynamics.hpp"
#include "lenstp/solve.hpp"

namespace lenstp {

using Json = nlohmann::ordered_json;

/// Parsed run configuration. Lens coprimality and resonant invariance
/// congruences are checked at load time, before any computation.
struct RunConfig {
    LensSetting setting;
    std::vector<IsotopyStep> isotopy;

    // Factorization of the lift into C^1-small factors.
    double theta = 0.1;
    int sample_points = 256;
    int max_substeps = 4096;

    // Multistart solver grid and tolerances (shared by both solvers).
    SolverOptions solver;

    // Elementary midpoint solves inside the generating function.
    double elementary_tolerance = 1e-12;
    int elementary_max_iterations = 50;

    // Generating-function start grid and parameter window.
    GenfunSolverOptions genfun;

    static RunConfig from_json(const Json& j);
    static RunConfig load_file(const std::string& path);

    /// Canonical echo of every knob (used for hashing and provenance).
    Json echo_json() const;

    /// Throws ConfigError naming the offending key or term.
    void validate() const;
};

} // namespace lenstp
