#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lenstp/core.hpp"
#include "lenstp/dynamics.hpp"
#include "lenstp/genfun.hpp"

namespace lenstp {

/// One solver hit: a unit sphere point with Phi(p) = e^{2 pi i tau} p up to
/// the recorded residual.
struct TranslatedPointRecord {
    enum class Source { Direct, GenFun };

    CVec point;            // unit sphere point
    double tau = 0.0;      // time-shift in [0, 1)
    double residual = 0.0; // ||Phi(p) - e^{2 pi i tau} p|| against the defining lift
    CVec orbit_rep;        // lexicographically smallest lens image of point
    Source source = Source::Direct;
    int multiplicity = 1;  // converged starts merged into this record

    // Generating-function extras (source == GenFun only).
    double critical_value = 0.0;
    double closure_defect = 0.0;
};

struct ShiftCluster {
    double center = 0.0;            // circular mean of member shifts
    std::vector<int> members;       // indices into the record list
    double radius = 0.0;            // max circular distance to the center
    int distinct_orbits = 0;        // records are orbit-deduplicated, so = members
    bool non_isolated = false;      // many distinct orbits share this shift
    int family_rank = 0;            // PCA rank of the member point cloud
};

/// The set of time-shifts viewed in R/Z, single-linkage clustered.
struct ShiftSpectrum {
    std::vector<ShiftCluster> clusters;
    double tolerance = 1e-5;
    bool empty_input = false;
};

struct SolverOptions {
    int sphere_samples = 0;  // 0 selects the default 32 n^2
    int tau_samples = 64;
    double newton_tolerance = 1e-10;
    double hit_residual = 1e-8;
    double cluster_tolerance = 1e-5;
    int max_iterations = 100;
    std::uint64_t seed = 0;
    int threads = 1;

    int resolved_sphere_samples(int n) const {
        return sphere_samples > 0 ? sphere_samples : 32 * n * n;
    }
};

/// Start grid and window for the generating-function solver.
struct GenfunSolverOptions {
    int sphere_samples = 32;
    int tau_samples = 8;
    double t_min = 0.0;
    double t_max = 1.0;  // window must stay inside (-1, 3)
};

struct ScanDiagnostics {
    int total_starts = 0;
    int converged = 0;
    int non_converged = 0;
    int dropped_residual = 0;  // converged but above the hit residual gate
    int records = 0;
};

struct ScanResult {
    std::vector<TranslatedPointRecord> records;
    ScanDiagnostics diagnostics;
};

/// Phi(p) - e^{2 pi i tau} p; zero iff p is a translated point with shift tau.
CVec residual_vector(const HomogeneousMap& map, const CVec& p, double tau);

/// Distance in R/Z.
double circular_distance(double a, double b);

/// Multistart damped Newton on {residual = 0, |p|^2 = 1} over a deterministic
/// low-discrepancy grid; hits are orbit/shift deduplicated.
ScanResult direct_scan(const HomogeneousMap& map, const SolverOptions& options);

/// Newton on {grad F_t(v) = 0, |v| = 1} in (v, t) from broken-trajectory
/// starts; hits are projected to sphere records through the chain map.
ScanResult genfun_scan(const GeneratingFunction& problem, const HomogeneousMap& map,
                       const SolverOptions& options, const GenfunSolverOptions& gf_options);

/// Single-linkage clustering of the record shifts in the R/Z metric.
ShiftSpectrum count_time_shifts(const std::vector<TranslatedPointRecord>& records,
                                double cluster_tolerance);

struct Verdict {
    enum class Status { Pass, Attention };

    Status status = Status::Attention;
    int bound = 0;           // 2n
    int cluster_count = 0;
    bool degenerate = false;       // a full-dimensional family (identity-like map)
    int non_isolated_families = 0; // clusters that look like positive-dimensional families
    std::string note;
};

/// Compares the cluster count against the 2n bound. Fewer clusters is never a
/// theorem violation: it flags non-isolated translated points (Morse-Bott
/// families) or under-sampling.
Verdict make_verdict(const ShiftSpectrum& spectrum,
                     const std::vector<TranslatedPointRecord>& records,
                     const LensSetting& setting);

} // namespace lenstp
