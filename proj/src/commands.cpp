#include "lenstp/commands.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "lenstp/cohomology.hpp"
#include "lenstp/errors.hpp"
#include "lenstp/sampling.hpp"

namespace lenstp {

namespace {

Json tolerances_json(const RunConfig& cfg) {
    return Json{{"newton_tolerance", cfg.solver.newton_tolerance},
                {"hit_residual", cfg.solver.hit_residual},
                {"cluster_tolerance", cfg.solver.cluster_tolerance},
                {"theta", cfg.theta},
                {"elementary_tolerance", cfg.elementary_tolerance}};
}

GeneratingFunction build_problem(const RunConfig& cfg, const HomogeneousMap& map) {
    FactorList factors = factorize(map, cfg.theta, cfg.sample_points, cfg.max_substeps);
    return GeneratingFunction(cfg.setting, std::move(factors), cfg.elementary_tolerance,
                              cfg.elementary_max_iterations);
}

} // namespace

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

Json ValidationSummary::to_json() const {
    return Json{{"ok", ok},
                {"homogeneity", homogeneity},
                {"equivariance", equivariance},
                {"symplecticity_drift", symplecticity},
                {"factor_composition", composition},
                {"theta_achieved", theta_achieved},
                {"factor_count", factor_count},
                {"factor_dg_symmetry", factor_symmetry},
                {"factor_symplecticity_drift", factor_symplecticity},
                {"elementary_homogeneity", elementary_homogeneity},
                {"failures", failures}};
}

ValidationSummary run_validation(const RunConfig& config) {
    const HomogeneousMap map = build_lift(config.setting, config.isotopy);
    const GeneratingFunction problem = build_problem(config, map);
    const int n = config.setting.n;
    const Eigen::MatrixXd J = complex_structure(n);

    ValidationSummary sum;
    sum.factor_count = problem.factor_count();
    sum.theta_achieved = problem.factors().theta_achieved;

    const std::vector<CVec> sample = sphere_sample(n, 8, 7);
    for (const CVec& z : sample) {
        // Positive 1-homogeneity.
        const double s = 1.7;
        sum.homogeneity = std::max(
            sum.homogeneity, distance(map.apply(scaled(z, s)), scaled(map.apply(z), s)) / s);
        // Equivariance under the generator.
        sum.equivariance = std::max(
            sum.equivariance, distance(map.apply(lens_apply(config.setting, z, 1)),
                                       lens_apply(config.setting, map.apply(z), 1)));
        // Symplecticity of the differential.
        const Eigen::MatrixXd d = map.apply_with_differential(z).second;
        sum.symplecticity =
            std::max(sum.symplecticity, (d.transpose() * J * d - J).norm());
        // Factor composition reproduces the lift.
        sum.composition = std::max(sum.composition, distance(problem.apply_factors(z), map.apply(z)));
    }

    sum.factor_symmetry.resize(problem.factor_count());
    sum.factor_symplecticity.resize(problem.factor_count());
    const std::vector<CVec> probe = sphere_sample(n, 3, 11);
    for (int f = 0; f < problem.factor_count(); ++f) {
        double sym = 0.0, drift = 0.0, homog = 0.0;
        for (const CVec& w : probe) {
            sym = std::max(sym, problem.elementary(f).symmetry_residual(w));
            const Eigen::MatrixXd d =
                problem.factors().sigmas[f]->apply_with_differential(w).second;
            drift = std::max(drift, (d.transpose() * J * d - J).norm());
            const double f2 = problem.elementary(f).value(scaled(w, 2.0));
            const double f1 = problem.elementary(f).value(w);
            if (std::abs(f2) > 1e-12)
                homog = std::max(homog, std::abs(f2 - 4.0 * f1) / std::abs(f2));
        }
        sum.factor_symmetry[f] = sym;
        sum.factor_symplecticity[f] = drift;
        sum.elementary_homogeneity = std::max(sum.elementary_homogeneity, homog);
    }

    auto gate = [&](double value, double bound, const std::string& what) {
        if (!(value <= bound)) {
            sum.ok = false;
            sum.failures.push_back(what + " = " + std::to_string(value) + " exceeds " +
                                   std::to_string(bound));
        }
    };
    gate(sum.homogeneity, 1e-9, "homogeneity residual");
    gate(sum.equivariance, 1e-9, "equivariance residual");
    gate(sum.symplecticity, 1e-8, "symplecticity drift");
    gate(sum.composition, 1e-8, "factor composition residual");
    gate(sum.theta_achieved, config.theta, "factor smallness");
    gate(sum.elementary_homogeneity, 1e-9, "elementary homogeneity residual");
    for (int f = 0; f < problem.factor_count(); ++f)
        gate(sum.factor_symmetry[f], 1e-6,
             "dG symmetry residual of factor " + std::to_string(f + 1));
    return sum;
}

Report cmd_validate(const RunConfig& config) {
    const ValidationSummary sum = run_validation(config);
    Report report;
    report.setting = setting_json(config.setting);
    report.verdict = Json{{"status", sum.ok ? "PASS" : "ATTENTION"},
                          {"note", sum.ok ? "all invariant suites passed"
                                          : "invariant suite failures; see diagnostics"}};
    report.diagnostics = Json{{"validation", sum.to_json()},
                              {"tolerances", tolerances_json(config)}};
    report.provenance = provenance_json(config.echo_json(), config.solver.seed);
    return report;
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

Report cmd_scan(const RunConfig& config) {
    const HomogeneousMap map = build_lift(config.setting, config.isotopy);
    const ScanResult scan = direct_scan(map, config.solver);
    const ShiftSpectrum spectrum =
        count_time_shifts(scan.records, config.solver.cluster_tolerance);
    const Verdict v = make_verdict(spectrum, scan.records, config.setting);

    Report report;
    report.setting = setting_json(config.setting);
    report.records = records_json(scan.records);
    report.shift_clusters = clusters_json(spectrum);
    report.verdict = verdict_json(v);
    report.diagnostics = Json{{"direct", scan_diagnostics_json(scan.diagnostics)},
                              {"tolerances", tolerances_json(config)}};
    if (spectrum.empty_input)
        report.diagnostics["warning"] = "no translated points found; spectrum is empty";
    report.provenance = provenance_json(config.echo_json(), config.solver.seed);
    return report;
}

// ---------------------------------------------------------------------------
// crosscheck
// ---------------------------------------------------------------------------

namespace {

struct MatchSummary {
    int matched = 0;
    std::vector<int> unmatched_direct;
    std::vector<int> unmatched_genfun;
    double max_orbit_discrepancy = 0.0;
    double max_shift_discrepancy = 0.0;
};

MatchSummary match_records(const LensSetting& setting,
                           const std::vector<TranslatedPointRecord>& direct,
                           const std::vector<TranslatedPointRecord>& genfun, double tol) {
    MatchSummary out;
    std::vector<bool> used(genfun.size(), false);
    for (std::size_t i = 0; i < direct.size(); ++i) {
        int best = -1;
        double best_orbit = tol;
        for (std::size_t j = 0; j < genfun.size(); ++j) {
            if (used[j]) continue;
            if (circular_distance(direct[i].tau, genfun[j].tau) > tol) continue;
            const double d = orbit_distance(setting, direct[i].point, genfun[j].point);
            if (d <= best_orbit) {
                best_orbit = d;
                best = static_cast<int>(j);
            }
        }
        if (best < 0) {
            out.unmatched_direct.push_back(static_cast<int>(i));
            continue;
        }
        used[best] = true;
        out.matched += 1;
        out.max_orbit_discrepancy = std::max(
            out.max_orbit_discrepancy, orbit_distance(setting, direct[i].point, genfun[best].point));
        out.max_shift_discrepancy = std::max(
            out.max_shift_discrepancy, circular_distance(direct[i].tau, genfun[best].tau));
    }
    for (std::size_t j = 0; j < genfun.size(); ++j)
        if (!used[j]) out.unmatched_genfun.push_back(static_cast<int>(j));
    return out;
}

} // namespace

Report cmd_crosscheck(const RunConfig& config) {
    const HomogeneousMap map = build_lift(config.setting, config.isotopy);
    const GeneratingFunction problem = build_problem(config, map);

    const ScanResult direct = direct_scan(map, config.solver);
    const ScanResult genfun = genfun_scan(problem, map, config.solver, config.genfun);

    const double match_tol = 1e-6;
    const MatchSummary match =
        match_records(config.setting, direct.records, genfun.records, match_tol);

    double max_critical = 0.0, max_defect = 0.0;
    for (const TranslatedPointRecord& r : genfun.records) {
        max_critical = std::max(max_critical, std::abs(r.critical_value));
        max_defect = std::max(max_defect, r.closure_defect);
    }

    // Per-factor gradient-field symmetry: a non-symplectic (corrupted) factor
    // shows up here.
    std::vector<double> factor_symmetry(problem.factor_count(), 0.0);
    const std::vector<CVec> probe = sphere_sample(config.setting.n, 3, 11);
    int worst_factor = -1;
    double worst_symmetry = 0.0;
    for (int f = 0; f < problem.factor_count(); ++f) {
        for (const CVec& w : probe)
            factor_symmetry[f] =
                std::max(factor_symmetry[f], problem.elementary(f).symmetry_residual(w));
        if (factor_symmetry[f] > worst_symmetry) {
            worst_symmetry = factor_symmetry[f];
            worst_factor = f;
        }
    }

    std::vector<TranslatedPointRecord> all = direct.records;
    all.insert(all.end(), genfun.records.begin(), genfun.records.end());
    const ShiftSpectrum spectrum =
        count_time_shifts(direct.records, config.solver.cluster_tolerance);
    const Verdict v = make_verdict(spectrum, direct.records, config.setting);

    Report report;
    report.setting = setting_json(config.setting);
    report.records = records_json(all);
    report.shift_clusters = clusters_json(spectrum);
    report.verdict = verdict_json(v);
    report.diagnostics =
        Json{{"direct", scan_diagnostics_json(direct.diagnostics)},
             {"genfun", scan_diagnostics_json(genfun.diagnostics)},
             {"crosscheck",
              {{"match_tolerance", match_tol},
               {"matched", match.matched},
               {"unmatched_direct", match.unmatched_direct},
               {"unmatched_genfun", match.unmatched_genfun},
               {"max_orbit_discrepancy", match.max_orbit_discrepancy},
               {"max_shift_discrepancy", match.max_shift_discrepancy},
               {"max_genfun_critical_value", max_critical},
               {"max_closure_defect", max_defect}}},
             {"factor_dg_symmetry",
              {{"per_factor", factor_symmetry},
               {"worst_factor", worst_factor + 1},
               {"worst_value", worst_symmetry}}},
             {"tolerances", tolerances_json(config)}};
    report.provenance = provenance_json(config.echo_json(), config.solver.seed);
    return report;
}

// ---------------------------------------------------------------------------
// index-jump
// ---------------------------------------------------------------------------

Report cmd_index_jump(const RunConfig& config, double t0, double t1) {
    for (const IsotopyStep& s : config.isotopy)
        if (s.hamiltonian.kind != HamiltonianTerm::Kind::Diagonal)
            throw ConfigError("index-jump: requires an all-linear (diagonal) isotopy");
    const HomogeneousMap map = build_lift(config.setting, config.isotopy);
    const GeneratingFunction problem = build_problem(config, map);

    GeneratingChain probe = GeneratingChain::zero(problem.dimension(), problem.block_count());
    for (CVec& b : probe.blocks)
        for (Complex& c : b) c = Complex(1.0, 0.0);
    const int i0 = quadratic_index(problem.hessian(t0, probe));
    const int i1 = quadratic_index(problem.hessian(t1, probe));
    const int jump = i1 - i0;

    const int n = config.setting.n;
    Json diag{{"t0", t0},
              {"t1", t1},
              {"index_t0", i0},
              {"index_t1", i1},
              {"jump", jump},
              {"blocks", problem.block_count()},
              {"matrix_dimension", problem.real_dimension()}};
    const double width = t1 - t0;
    if (std::abs(width - std::round(width)) < 1e-12)
        diag["expected_for_integer_window"] = 2 * n * static_cast<int>(std::round(width));
    if (is_prime(config.setting.k) && config.setting.k % 2 == 1 && i1 > i0) {
        const IndexWindow window{i0, i1, config.setting.k,
                                 n * problem.block_count()};
        diag["ls_bound"] = ls_bound(window);
    }

    Report report;
    report.setting = setting_json(config.setting);
    report.verdict = Json{{"status", "PASS"},
                          {"note", "index jump computed; see diagnostics.index_jump"}};
    report.diagnostics = Json{{"index_jump", diag}, {"tolerances", tolerances_json(config)}};
    report.provenance = provenance_json(config.echo_json(), config.solver.seed);
    return report;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

Report cmd_bounds(int p, int n) {
    const int cat = cat_lens(p, n);
    const IndexWindow even{0, 4 * n, p, 2 * n};
    const IndexWindow odd{1, 4 * n + 1, p, 2 * n + 1};
    const int bound_even = ls_bound(even);
    const int bound_odd = ls_bound(odd);
    const int shifts = shift_bound(n);

    Report report;
    report.setting = Json{{"p", p}, {"n", n}};
    report.verdict =
        Json{{"status", "PASS"},
             {"note", "cat(L_p^{2n-1}) = " + std::to_string(cat) + ", minimal time-shifts = " +
                          std::to_string(shifts)}};
    report.diagnostics = Json{{"bounds",
                               {{"cat_lens", cat},
                                {"ls_bound_even_window", bound_even},
                                {"ls_bound_odd_window", bound_odd},
                                {"shift_bound", shifts}}}};
    report.provenance = provenance_json(Json{{"p", p}, {"n", n}}, 0);
    return report;
}

// ---------------------------------------------------------------------------
// sharpness-demo
// ---------------------------------------------------------------------------

Report cmd_sharpness_demo(int p, int n, const SharpnessOptions& options) {
    if (!is_prime(p) || p == 2)
        throw ConfigError("sharpness-demo: p must be an odd prime");
    if (n < 1) throw ConfigError("sharpness-demo: n must be >= 1");
    if (n > 3) throw ConfigError("sharpness-demo: desk scale is n <= 3");

    RunConfig config;
    config.setting.n = n;
    config.setting.k = p;
    config.setting.weights.assign(n, 1);

    // The Morse-Bott map |z_1|^2 + 2 |z_2|^2 + ... + n |z_n|^2 as a diagonal
    // Hamiltonian, scaled so the time-shifts options.shift * j stay distinct
    // mod 1.
    std::vector<double> coefficients(n);
    for (int j = 0; j < n; ++j) coefficients[j] = options.shift * (j + 1);
    config.isotopy.push_back(IsotopyStep{HamiltonianTerm::diagonal(coefficients), 1.0});

    // Invariant splitting perturbation: Re(z_j^p) breaks the j-th critical
    // circle into p maxima and p minima with two distinct shifts.
    if (options.epsilon != 0.0) {
        for (int j = 0; j < n; ++j) {
            std::vector<int> a(n, 0), b(n, 0);
            a[j] = p;
            config.isotopy.push_back(IsotopyStep{
                HamiltonianTerm::resonant(options.epsilon, Complex(1.0, 0.0), a, b), 1.0});
        }
    }

    config.solver = options.solver;
    config.validate();

    Report report = cmd_scan(config);
    report.diagnostics["sharpness"] =
        Json{{"expected_clusters", 2 * n},
             {"perturbation_epsilon", options.epsilon},
             {"base_shift", options.shift},
             {"observed_clusters", report.verdict["clusters"]}};
    return report;
}

} // namespace lenstp
