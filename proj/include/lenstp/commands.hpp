#pragma once

#include "lenstp/config.hpp"
#include "lenstp/report.hpp"

namespace lenstp {

/// Invariant suite results for a configured map (homogeneity, equivariance,
/// symplecticity, factor smallness, gradient-field symmetry).
struct ValidationSummary {
    bool ok = true;
    double homogeneity = 0.0;        // max ||Phi(s z) - s Phi(z)|| / s
    double equivariance = 0.0;       // max ||Phi(g z) - g Phi(z)||
    double symplecticity = 0.0;      // max ||DPhi^T J DPhi - J||
    double composition = 0.0;        // max ||(sigma_m ... sigma_1)(z) - Phi(z)||
    double theta_achieved = 0.0;     // certified ||D sigma - I|| bound
    int factor_count = 0;
    std::vector<double> factor_symmetry;       // dG symmetry residual per factor
    std::vector<double> factor_symplecticity;  // ||D sigma^T J D sigma - J|| per factor
    double elementary_homogeneity = 0.0;       // max |f(2w) - 4 f(w)| / |f(2w)|
    std::vector<std::string> failures;

    Json to_json() const;
};

ValidationSummary run_validation(const RunConfig& config);

/// validate: runs the invariant suites; report.verdict carries PASS/ATTENTION.
Report cmd_validate(const RunConfig& config);

/// scan: direct multistart solver + shift clustering + 2n verdict.
Report cmd_scan(const RunConfig& config);

/// crosscheck: both solvers, matched (orbit, shift) sets and discrepancies.
Report cmd_crosscheck(const RunConfig& config);

/// index-jump: quadratic index difference of the all-linear generating
/// function between t0 and t1.
Report cmd_index_jump(const RunConfig& config, double t0, double t1);

/// bounds: cat(L_p^{2n-1}), window bounds for both parities, shift bound.
Report cmd_bounds(int p, int n);

struct SharpnessOptions {
    double epsilon = 0.02;   // 0 disables the perturbation
    double shift = 0.15;     // base diagonal shift
    SolverOptions solver;    // grid overrides; seed/threads forwarded
};

/// sharpness-demo: the Morse-Bott diagonal map with an invariant perturbation
/// splitting each critical circle; realizes exactly 2n shift clusters.
Report cmd_sharpness_demo(int p, int n, const SharpnessOptions& options);

} // namespace lenstp
