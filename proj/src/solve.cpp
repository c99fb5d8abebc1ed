#include "lenstp/solve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "lenstp/errors.hpp"
#include "lenstp/sampling.hpp"

namespace lenstp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// A cluster whose members exceed this count is treated as a candidate
// positive-dimensional family.
constexpr int kNonIsolationThreshold = 6;

double reduce_mod1(double t) { return t - std::floor(t); }

bool lex_less_vec(const CVec& a, const CVec& b) {
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j].real() != b[j].real()) return a[j].real() < b[j].real();
        if (a[j].imag() != b[j].imag()) return a[j].imag() < b[j].imag();
    }
    return false;
}
} // namespace

double circular_distance(double a, double b) {
    const double d = std::abs(reduce_mod1(a) - reduce_mod1(b));
    return std::min(d, 1.0 - d);
}

CVec residual_vector(const HomogeneousMap& map, const CVec& p, double tau) {
    return sub(map.apply(p), reeb_flow(p, tau));
}

// ---------------------------------------------------------------------------
// Direct solver
// ---------------------------------------------------------------------------

namespace {

struct RawHit {
    CVec point;
    double tau = 0.0;
    double residual = 0.0;
    double critical_value = 0.0;
    double closure_defect = 0.0;
};

// Damped Newton on the augmented square system
//   G(p, tau) = [ Phi(p) - e^{2 pi i tau} p ; (|p|^2 - 1)/2 ].
std::optional<RawHit> direct_newton(const HomogeneousMap& map, CVec p, double tau,
                                    const SolverOptions& opt) {
    const int n = map.setting.n;
    const int dim = 2 * n + 1;

    auto system_at = [&](const CVec& q, double t) -> Eigen::VectorXd {
        Eigen::VectorXd g(dim);
        g.head(2 * n) = to_real(residual_vector(map, q, t));
        g[2 * n] = 0.5 * (norm_squared(q) - 1.0);
        return g;
    };

    Eigen::VectorXd g = system_at(p, tau);
    double merit = 0.5 * g.squaredNorm();

    for (int it = 0; it < opt.max_iterations; ++it) {
        if (g.norm() <= opt.newton_tolerance) break;

        const Eigen::MatrixXd dphi = map.apply_with_differential(p).second;
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
        const double angle = kTwoPi * reduce_mod1(tau);
        const double c = std::cos(angle), s = std::sin(angle);
        jac.topLeftCorner(2 * n, 2 * n) = dphi;
        for (int j = 0; j < n; ++j) {
            jac(2 * j, 2 * j) -= c;
            jac(2 * j, 2 * j + 1) += s;
            jac(2 * j + 1, 2 * j) -= s;
            jac(2 * j + 1, 2 * j + 1) -= c;
        }
        const CVec rot = reeb_flow(p, tau);
        for (int j = 0; j < n; ++j) {
            jac(2 * j, 2 * n) = kTwoPi * rot[j].imag();
            jac(2 * j + 1, 2 * n) = -kTwoPi * rot[j].real();
        }
        for (int j = 0; j < n; ++j) {
            jac(2 * n, 2 * j) = p[j].real();
            jac(2 * n, 2 * j + 1) = p[j].imag();
        }

        const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-g);
        if (!step.allFinite()) return std::nullopt;

        // Armijo backtracking on the merit 0.5 ||G||^2.
        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            CVec p_try = p;
            for (int j = 0; j < n; ++j)
                p_try[j] += alpha * Complex(step[2 * j], step[2 * j + 1]);
            const double tau_try = tau + alpha * step[2 * n];
            const Eigen::VectorXd g_try = system_at(p_try, tau_try);
            const double merit_try = 0.5 * g_try.squaredNorm();
            if (merit_try <= merit * (1.0 - 2.0e-4 * alpha)) {
                p = std::move(p_try);
                tau = tau_try;
                g = g_try;
                merit = merit_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) return std::nullopt;
    }
    if (g.norm() > opt.newton_tolerance) return std::nullopt;

    RawHit hit;
    hit.point = normalized(p);
    hit.tau = reduce_mod1(tau);
    hit.residual = norm(residual_vector(map, hit.point, hit.tau));
    return hit;
}

std::vector<TranslatedPointRecord> deduplicate(const LensSetting& setting,
                                               std::vector<RawHit> hits,
                                               TranslatedPointRecord::Source source,
                                               double cluster_tol, ScanDiagnostics& diag) {
    struct Keyed {
        RawHit hit;
        CVec rep;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(hits.size());
    for (RawHit& h : hits)
        keyed.push_back(Keyed{std::move(h), CVec{}});
    for (Keyed& k : keyed) k.rep = orbit_representative(setting, k.hit.point);

    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.hit.tau != b.hit.tau) return a.hit.tau < b.hit.tau;
        if (lex_less_vec(a.rep, b.rep)) return true;
        if (lex_less_vec(b.rep, a.rep)) return false;
        return a.hit.residual < b.hit.residual;
    });

    struct Group {
        int best = 0;  // index into keyed
        int count = 0;
    };
    std::vector<Group> groups;
    for (int i = 0; i < static_cast<int>(keyed.size()); ++i) {
        bool placed = false;
        for (Group& grp : groups) {
            const Keyed& lead = keyed[grp.best];
            if (circular_distance(lead.hit.tau, keyed[i].hit.tau) <= cluster_tol &&
                orbit_distance(setting, lead.hit.point, keyed[i].hit.point) <= cluster_tol) {
                grp.count += 1;
                if (keyed[i].hit.residual < lead.hit.residual) grp.best = i;
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back(Group{i, 1});
    }

    std::vector<TranslatedPointRecord> records;
    records.reserve(groups.size());
    for (const Group& grp : groups) {
        const Keyed& k = keyed[grp.best];
        TranslatedPointRecord rec;
        rec.point = k.hit.point;
        rec.tau = k.hit.tau;
        rec.residual = k.hit.residual;
        rec.orbit_rep = k.rep;
        rec.source = source;
        rec.multiplicity = grp.count;
        rec.critical_value = k.hit.critical_value;
        rec.closure_defect = k.hit.closure_defect;
        records.push_back(std::move(rec));
    }
    std::sort(records.begin(), records.end(),
              [](const TranslatedPointRecord& a, const TranslatedPointRecord& b) {
                  if (a.tau != b.tau) return a.tau < b.tau;
                  return lex_less_vec(a.orbit_rep, b.orbit_rep);
              });
    diag.records = static_cast<int>(records.size());
    return records;
}

} // namespace

ScanResult direct_scan(const HomogeneousMap& map, const SolverOptions& options) {
    const int n = map.setting.n;
    const std::vector<CVec> sphere =
        sphere_sample(n, options.resolved_sphere_samples(n), options.seed);
    const std::vector<double> taus = tau_grid(options.tau_samples);

    const int total = static_cast<int>(sphere.size() * taus.size());
    std::vector<std::optional<RawHit>> slots(total);

    parallel_for(total, options.threads, [&](int idx) {
        const int si = idx / static_cast<int>(taus.size());
        const int ti = idx % static_cast<int>(taus.size());
        slots[idx] = direct_newton(map, sphere[si], taus[ti], options);
    });

    ScanResult out;
    out.diagnostics.total_starts = total;
    std::vector<RawHit> hits;
    for (auto& slot : slots) {
        if (!slot) {
            out.diagnostics.non_converged += 1;
            continue;
        }
        out.diagnostics.converged += 1;
        if (slot->residual <= options.hit_residual)
            hits.push_back(std::move(*slot));
        else
            out.diagnostics.dropped_residual += 1;
    }
    out.records = deduplicate(map.setting, std::move(hits), TranslatedPointRecord::Source::Direct,
                              options.cluster_tolerance, out.diagnostics);
    return out;
}

// ---------------------------------------------------------------------------
// Generating-function solver
// ---------------------------------------------------------------------------

namespace {

std::optional<RawHit> genfun_newton(const GeneratingFunction& problem, const HomogeneousMap& map,
                                    GeneratingChain v, double t, const SolverOptions& opt) {
    const int nblocks = problem.block_count();
    const int vdim = problem.real_dimension();
    const int dim = vdim + 1;
    GeneratingFunction::WitnessCache cache;

    auto in_domain = [](double tt) { return tt > -1.0 + 1e-9 && tt < 3.0 - 1e-9; };
    if (!in_domain(t)) return std::nullopt;
    v.normalize();

    auto system_at = [&](const GeneratingChain& w, double tt) -> Eigen::VectorXd {
        Eigen::VectorXd g(dim);
        g.head(vdim) = problem.gradient(tt, w, &cache).flatten();
        g[vdim] = 0.5 * (w.flatten().squaredNorm() - 1.0);
        return g;
    };

    Eigen::VectorXd g = system_at(v, t);
    double merit = 0.5 * g.squaredNorm();

    for (int it = 0; it < opt.max_iterations; ++it) {
        if (g.norm() <= opt.newton_tolerance) break;

        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
        jac.topLeftCorner(vdim, vdim) = problem.hessian(t, v, &cache);
        jac.block(0, vdim, vdim, 1) = problem.gradient_t_derivative(t, v).flatten();
        jac.block(vdim, 0, 1, vdim) = v.flatten().transpose();

        const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-g);
        if (!step.allFinite()) return std::nullopt;

        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            const double t_try = t + alpha * step[vdim];
            if (!in_domain(t_try)) {
                alpha *= 0.5;
                continue;
            }
            const Eigen::VectorXd x_try = v.flatten() + alpha * step.head(vdim);
            GeneratingChain v_try = GeneratingChain::unflatten(problem.dimension(), x_try);
            if (v_try.norm() < 1e-8) {
                alpha *= 0.5;
                continue;
            }
            const Eigen::VectorXd g_try = system_at(v_try, t_try);
            const double merit_try = 0.5 * g_try.squaredNorm();
            if (merit_try <= merit * (1.0 - 2.0e-4 * alpha)) {
                v = std::move(v_try);
                t = t_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) return std::nullopt;

        // Iterates live on the unit sphere of the chain space (the gradient is
        // 1-homogeneous, so rescaling preserves the zero set).
        v.normalize();
        g = system_at(v, t);
        merit = 0.5 * g.squaredNorm();
    }
    if (g.norm() > opt.newton_tolerance) return std::nullopt;
    if (v.block_count() != nblocks) return std::nullopt;

    GeneratingFunction::ExtractedFixedPoint fp;
    try {
        fp = problem.fixed_point_from_chain(v, t);
    } catch (const ContractViolation&) {
        return std::nullopt;
    }
    if (norm(fp.point) == 0.0) return std::nullopt;

    RawHit hit;
    hit.point = normalized(fp.point);
    hit.tau = reduce_mod1(t);
    hit.residual = norm(residual_vector(map, hit.point, hit.tau));
    hit.critical_value = problem.value(t, v, &cache);
    hit.closure_defect = fp.closure_defect;
    return hit;
}

} // namespace

ScanResult genfun_scan(const GeneratingFunction& problem, const HomogeneousMap& map,
                       const SolverOptions& options, const GenfunSolverOptions& gf) {
    problem.check_t(gf.t_min);
    problem.check_t(gf.t_max);
    if (!(gf.t_min < gf.t_max))
        throw std::domain_error("genfun_scan: empty parameter window");

    const int n = problem.dimension();
    // A distinct seed stream keeps the start grid independent of the direct
    // solver's.
    const std::vector<CVec> sphere =
        sphere_sample(n, gf.sphere_samples, options.seed + 0x9e3779b9ULL);
    std::vector<double> ts(gf.tau_samples);
    for (int i = 0; i < gf.tau_samples; ++i)
        ts[i] = gf.t_min + (i + 0.5) * (gf.t_max - gf.t_min) / gf.tau_samples;

    const int total = static_cast<int>(sphere.size() * ts.size());
    std::vector<std::optional<RawHit>> slots(total);

    parallel_for(total, options.threads, [&](int idx) {
        const int si = idx / static_cast<int>(ts.size());
        const int ti = idx % static_cast<int>(ts.size());
        auto [chain, defect] = problem.chain_from_fixed_point(ts[ti], sphere[si]);
        (void)defect;
        slots[idx] = genfun_newton(problem, map, std::move(chain), ts[ti], options);
    });

    ScanResult out;
    out.diagnostics.total_starts = total;
    std::vector<RawHit> hits;
    for (auto& slot : slots) {
        if (!slot) {
            out.diagnostics.non_converged += 1;
            continue;
        }
        out.diagnostics.converged += 1;
        if (slot->residual <= options.hit_residual)
            hits.push_back(std::move(*slot));
        else
            out.diagnostics.dropped_residual += 1;
    }
    out.records = deduplicate(map.setting, std::move(hits), TranslatedPointRecord::Source::GenFun,
                              options.cluster_tolerance, out.diagnostics);
    return out;
}

// ---------------------------------------------------------------------------
// Shift clustering and verdict
// ---------------------------------------------------------------------------

ShiftSpectrum count_time_shifts(const std::vector<TranslatedPointRecord>& records,
                                double cluster_tolerance) {
    ShiftSpectrum spectrum;
    spectrum.tolerance = cluster_tolerance;
    if (records.empty()) {
        spectrum.empty_input = true;
        return spectrum;
    }

    std::vector<int> order(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (records[a].tau != records[b].tau) return records[a].tau < records[b].tau;
        return a < b;
    });

    // Single linkage along the sorted circle.
    std::vector<std::vector<int>> chains;
    for (int idx : order) {
        if (!chains.empty() &&
            records[idx].tau - records[chains.back().back()].tau <= cluster_tolerance) {
            chains.back().push_back(idx);
        } else {
            chains.push_back({idx});
        }
    }
    if (chains.size() > 1) {
        const double wrap_gap =
            records[chains.front().front()].tau + 1.0 - records[chains.back().back()].tau;
        if (wrap_gap <= cluster_tolerance) {
            auto& first = chains.front();
            first.insert(first.begin(), chains.back().begin(), chains.back().end());
            chains.pop_back();
        }
    }

    for (const auto& members : chains) {
        ShiftCluster cluster;
        cluster.members = members;
        double sx = 0.0, sy = 0.0;
        for (int idx : members) {
            sx += std::cos(kTwoPi * records[idx].tau);
            sy += std::sin(kTwoPi * records[idx].tau);
        }
        double center = std::atan2(sy, sx) / kTwoPi;
        cluster.center = reduce_mod1(center);
        for (int idx : members)
            cluster.radius = std::max(cluster.radius,
                                      circular_distance(records[idx].tau, cluster.center));
        cluster.distinct_orbits = static_cast<int>(members.size());
        cluster.non_isolated = cluster.distinct_orbits >= kNonIsolationThreshold;
        spectrum.clusters.push_back(std::move(cluster));
    }
    std::sort(spectrum.clusters.begin(), spectrum.clusters.end(),
              [](const ShiftCluster& a, const ShiftCluster& b) { return a.center < b.center; });
    return spectrum;
}

namespace {

// PCA rank of the member point cloud together with its lens images: 2 for a
// circle family, 2n for a full-dimensional (identity-like) family.
int cluster_rank(const ShiftCluster& cluster, const std::vector<TranslatedPointRecord>& records,
                 const LensSetting& setting) {
    const int n = setting.n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    int count = 0;
    for (int idx : cluster.members) {
        for (int g = 0; g < setting.k; ++g) {
            const Eigen::VectorXd x = to_real(lens_apply(setting, records[idx].point, g));
            cov += x * x.transpose();
            ++count;
        }
    }
    if (count == 0) return 0;
    cov /= count;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (top <= 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > 1e-3 * top) ++rank;
    return rank;
}

} // namespace

Verdict make_verdict(const ShiftSpectrum& spectrum,
                     const std::vector<TranslatedPointRecord>& records,
                     const LensSetting& setting) {
    Verdict v;
    v.bound = 2 * setting.n;
    v.cluster_count = static_cast<int>(spectrum.clusters.size());

    for (const ShiftCluster& cluster : spectrum.clusters) {
        if (!cluster.non_isolated) continue;
        const int rank = cluster_rank(cluster, records, setting);
        if (rank <= 2) {
            v.non_isolated_families += 1;
        } else if (rank >= 2 * setting.n) {
            v.degenerate = true;
        } else {
            v.non_isolated_families += 1;
        }
    }

    if (v.cluster_count >= v.bound) {
        v.status = Verdict::Status::Pass;
        v.note = "found " + std::to_string(v.cluster_count) +
                 " time-shift clusters, meeting the lower bound " + std::to_string(v.bound);
    } else {
        v.status = Verdict::Status::Attention;
        if (v.degenerate) {
            v.note = "degenerate: a full-dimensional family of translated points (identity-like "
                     "map); the finiteness hypothesis of the bound does not apply";
        } else if (v.non_isolated_families > 0) {
            v.note = "non-isolated translated points suspected (" +
                     std::to_string(v.non_isolated_families) +
                     " family clusters); the bound applies only to finitely many translated "
                     "points";
        } else {
            v.note = "fewer clusters than the bound; solver under-sampling or non-isolated "
                     "translated points";
        }
    }
    return v;
}

} // namespace lenstp
