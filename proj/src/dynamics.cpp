#include "lenstp/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "lenstp/errors.hpp"
#include "lenstp/sampling.hpp"

namespace lenstp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Fixed-step RK4 density for resonant flows: h <= 1e-3 * duration.
constexpr int kSubstepsPerStep = 1000;
} // namespace

// ---------------------------------------------------------------------------
// HamiltonianTerm
// ---------------------------------------------------------------------------

HamiltonianTerm HamiltonianTerm::diagonal(std::vector<double> c) {
    HamiltonianTerm t;
    t.kind = Kind::Diagonal;
    t.coefficients = std::move(c);
    return t;
}

HamiltonianTerm HamiltonianTerm::resonant(double eps, Complex phase, std::vector<int> a,
                                          std::vector<int> b) {
    HamiltonianTerm t;
    t.kind = Kind::Resonant;
    t.epsilon = eps;
    t.phase = phase;
    t.a = std::move(a);
    t.b = std::move(b);
    if (t.a.size() != t.b.size())
        throw ConfigError("resonant term: exponent vectors a and b must have equal length");
    for (std::size_t j = 0; j < t.a.size(); ++j)
        if (t.a[j] < 0 || t.b[j] < 0)
            throw ConfigError("resonant term: exponents must be non-negative");
    return t;
}

int HamiltonianTerm::dimension() const {
    return kind == Kind::Diagonal ? static_cast<int>(coefficients.size())
                                  : static_cast<int>(a.size());
}

int HamiltonianTerm::invariance_defect(const LensSetting& setting) const {
    if (kind == Kind::Diagonal) return 0;
    long s = 0;
    for (int j = 0; j < setting.n; ++j)
        s += static_cast<long>(a[j] - b[j]) * setting.weights[j];
    return static_cast<int>(((s % setting.k) + setting.k) % setting.k);
}

std::string HamiltonianTerm::describe() const {
    std::ostringstream os;
    if (kind == Kind::Diagonal) {
        os << "diagonal(";
        for (std::size_t j = 0; j < coefficients.size(); ++j)
            os << (j ? "," : "") << coefficients[j];
        os << ")";
    } else {
        os << "resonant(eps=" << epsilon << ", a=(";
        for (std::size_t j = 0; j < a.size(); ++j) os << (j ? "," : "") << a[j];
        os << "), b=(";
        for (std::size_t j = 0; j < b.size(); ++j) os << (j ? "," : "") << b[j];
        os << "))";
    }
    return os.str();
}

namespace {

// Wirtinger partials of the monomial M(z) = prod_j z_j^{a_j} conj(z_j)^{b_j}
// and of the norm factor ||z||^{2g}, combined into value / packed gradient /
// real Hessian of the resonant Hamiltonian.
struct ResonantDerivatives {
    double value = 0.0;
    CVec gradient;          // packed real gradient
    Eigen::MatrixXd hessian;  // real 2n x 2n

    static ResonantDerivatives compute(const HamiltonianTerm& t, const CVec& z, bool want_hessian) {
        const int n = static_cast<int>(z.size());
        const double q = norm_squared(z);
        if (q < 1e-280)
            throw NumericError("resonant Hamiltonian evaluated too close to the origin");

        // Per-coordinate power tables pz[j][e] = z_j^e, pzb[j][e] = conj(z_j)^e.
        std::vector<std::vector<Complex>> pz(n), pzb(n);
        for (int j = 0; j < n; ++j) {
            pz[j].resize(t.a[j] + 1);
            pzb[j].resize(t.b[j] + 1);
            pz[j][0] = pzb[j][0] = Complex(1.0, 0.0);
            for (int e = 1; e <= t.a[j]; ++e) pz[j][e] = pz[j][e - 1] * z[j];
            for (int e = 1; e <= t.b[j]; ++e) pzb[j][e] = pzb[j][e - 1] * std::conj(z[j]);
        }
        auto tj = [&](int j) { return pz[j][t.a[j]] * pzb[j][t.b[j]]; };

        // Range products of the untouched coordinate factors.
        std::vector<Complex> pre(n + 1), suf(n + 1);
        pre[0] = Complex(1.0, 0.0);
        for (int j = 0; j < n; ++j) pre[j + 1] = pre[j] * tj(j);
        suf[n] = Complex(1.0, 0.0);
        for (int j = n - 1; j >= 0; --j) suf[j] = suf[j + 1] * tj(j);
        auto rest1 = [&](int j) { return pre[j] * suf[j + 1]; };
        auto rest2 = [&](int j, int l) {  // j < l
            Complex mid(1.0, 0.0);
            for (int r = j + 1; r < l; ++r) mid *= tj(r);
            return pre[j] * mid * suf[l + 1];
        };
        // z_j-local factor with exponents shifted by (da, db); zero if negative.
        auto local = [&](int j, int da, int db) -> Complex {
            const int ea = t.a[j] + da, eb = t.b[j] + db;
            if (ea < 0 || eb < 0) return Complex(0.0, 0.0);
            return pz[j][ea] * pzb[j][eb];
        };

        const Complex M = pre[n];
        CVec P(n), Q(n);  // dM/dz_j, dM/dzbar_j
        for (int j = 0; j < n; ++j) {
            P[j] = static_cast<double>(t.a[j]) * local(j, -1, 0) * rest1(j);
            Q[j] = static_cast<double>(t.b[j]) * local(j, 0, -1) * rest1(j);
        }

        int d = 0;
        for (int j = 0; j < n; ++j) d += t.a[j] + t.b[j];
        const double g = 0.5 * (2.0 - d);
        const double s = std::pow(q, g);
        const double sq = (g != 0.0) ? g * std::pow(q, g - 1.0) : 0.0;        // ds/dq
        const double sqq = (g != 0.0) ? g * (g - 1.0) * std::pow(q, g - 2.0) : 0.0;

        const Complex c = t.phase;
        const double u = 0.5 * (c * M + std::conj(c * M)).real();

        ResonantDerivatives out;
        out.value = t.epsilon * u * s;
        out.gradient.resize(n);
        for (int j = 0; j < n; ++j) {
            const Complex u_zb = 0.5 * (c * Q[j] + std::conj(c * P[j]));
            const Complex s_zb = sq * z[j];
            out.gradient[j] = 2.0 * t.epsilon * (u_zb * s + u * s_zb);
        }
        if (!want_hessian) return out;

        out.hessian = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        for (int j = 0; j < n; ++j) {
            for (int l = 0; l < n; ++l) {
                Complex PP, PQ_jl, PQ_lj, QQ;
                if (j == l) {
                    PP = static_cast<double>(t.a[j]) * (t.a[j] - 1) * local(j, -2, 0) * rest1(j);
                    PQ_jl = PQ_lj =
                        static_cast<double>(t.a[j]) * t.b[j] * local(j, -1, -1) * rest1(j);
                    QQ = static_cast<double>(t.b[j]) * (t.b[j] - 1) * local(j, 0, -2) * rest1(j);
                } else {
                    const int lo = std::min(j, l), hi = std::max(j, l);
                    const Complex rest = rest2(lo, hi);
                    PP = static_cast<double>(t.a[j]) * t.a[l] * local(j, -1, 0) * local(l, -1, 0) *
                         rest;
                    PQ_jl = static_cast<double>(t.a[j]) * t.b[l] * local(j, -1, 0) *
                            local(l, 0, -1) * rest;
                    PQ_lj = static_cast<double>(t.a[l]) * t.b[j] * local(l, -1, 0) *
                            local(j, 0, -1) * rest;
                    QQ = static_cast<double>(t.b[j]) * t.b[l] * local(j, 0, -1) * local(l, 0, -1) *
                         rest;
                }
                const Complex u_zz = 0.5 * (c * PP + std::conj(c * QQ));
                const Complex u_zzb = 0.5 * (c * PQ_jl + std::conj(c * PQ_lj));
                const Complex u_z_j = 0.5 * (c * P[j] + std::conj(c * Q[j]));
                const Complex u_z_l = 0.5 * (c * P[l] + std::conj(c * Q[l]));
                const Complex u_zb_l = 0.5 * (c * Q[l] + std::conj(c * P[l]));

                const Complex s_z_j = sq * std::conj(z[j]);
                const Complex s_z_l = sq * std::conj(z[l]);
                const Complex s_zb_l = sq * z[l];
                const Complex s_zz = sqq * std::conj(z[j]) * std::conj(z[l]);
                Complex s_zzb = sqq * std::conj(z[j]) * z[l];
                if (j == l) s_zzb += sq;

                const Complex A =
                    t.epsilon * (u_zz * s + u_z_j * s_z_l + u_z_l * s_z_j + u * s_zz);
                const Complex B =
                    t.epsilon * (u_zzb * s + u_z_j * s_zb_l + u_zb_l * s_z_j + u * s_zzb);

                out.hessian(2 * j, 2 * l) = 2.0 * (A + B).real();
                out.hessian(2 * j, 2 * l + 1) = -2.0 * A.imag() + 2.0 * B.imag();
                out.hessian(2 * j + 1, 2 * l) = -2.0 * A.imag() - 2.0 * B.imag();
                out.hessian(2 * j + 1, 2 * l + 1) = -2.0 * A.real() + 2.0 * B.real();
            }
        }
        return out;
    }
};

void check_dimension(const HamiltonianTerm& t, const CVec& z) {
    if (t.dimension() != static_cast<int>(z.size()))
        throw std::invalid_argument("HamiltonianTerm: dimension mismatch");
}

} // namespace

double HamiltonianTerm::value(const CVec& z) const {
    check_dimension(*this, z);
    if (kind == Kind::Diagonal) {
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) s += coefficients[j] * std::norm(z[j]);
        return std::numbers::pi * s;
    }
    return ResonantDerivatives::compute(*this, z, false).value;
}

CVec HamiltonianTerm::gradient(const CVec& z) const {
    check_dimension(*this, z);
    if (kind == Kind::Diagonal) {
        CVec g(z.size());
        for (std::size_t j = 0; j < z.size(); ++j)
            g[j] = 2.0 * std::numbers::pi * coefficients[j] * z[j];
        return g;
    }
    return ResonantDerivatives::compute(*this, z, false).gradient;
}

Eigen::MatrixXd HamiltonianTerm::real_hessian(const CVec& z) const {
    check_dimension(*this, z);
    const int n = static_cast<int>(z.size());
    if (kind == Kind::Diagonal) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        for (int j = 0; j < n; ++j) {
            h(2 * j, 2 * j) = h(2 * j + 1, 2 * j + 1) = 2.0 * std::numbers::pi * coefficients[j];
        }
        return h;
    }
    return ResonantDerivatives::compute(*this, z, true).hessian;
}

// ---------------------------------------------------------------------------
// Flow factors
// ---------------------------------------------------------------------------

namespace {

class DiagonalFlowFactor final : public FlowFactor {
public:
    explicit DiagonalFlowFactor(std::vector<double> angles) : angles_(std::move(angles)) {}

    int dimension() const override { return static_cast<int>(angles_.size()); }

    CVec apply(const CVec& z) const override {
        CVec out(z.size());
        for (std::size_t j = 0; j < z.size(); ++j)
            out[j] = Complex(std::cos(angles_[j]), std::sin(angles_[j])) * z[j];
        return out;
    }

    std::pair<CVec, Eigen::MatrixXd> apply_with_differential(const CVec& z) const override {
        const int n = dimension();
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        for (int j = 0; j < n; ++j) {
            const double ct = std::cos(angles_[j]), st = std::sin(angles_[j]);
            m(2 * j, 2 * j) = ct;
            m(2 * j, 2 * j + 1) = -st;
            m(2 * j + 1, 2 * j) = st;
            m(2 * j + 1, 2 * j + 1) = ct;
        }
        return {apply(z), std::move(m)};
    }

    bool linear() const override { return true; }

    std::shared_ptr<const FlowFactor> subdivided(int pieces) const override {
        std::vector<double> a(angles_);
        for (double& x : a) x /= pieces;
        return std::make_shared<DiagonalFlowFactor>(std::move(a));
    }

    std::string label() const override {
        bool trivial = true;
        for (double x : angles_) trivial = trivial && x == 0.0;
        return trivial ? "identity" : "diagonal rotation";
    }

private:
    std::vector<double> angles_;
};

class ResonantFlowFactor final : public FlowFactor {
public:
    ResonantFlowFactor(HamiltonianTerm term, double duration)
        : term_(std::move(term)), duration_(duration) {}

    int dimension() const override { return term_.dimension(); }

    CVec apply(const CVec& z) const override {
        CVec state = z;
        const double h = duration_ / kSubstepsPerStep;
        for (int s = 0; s < kSubstepsPerStep; ++s) rk4_step(state, h);
        return state;
    }

    std::pair<CVec, Eigen::MatrixXd> apply_with_differential(const CVec& z) const override {
        const int n = dimension();
        CVec state = z;
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2 * n, 2 * n);
        const Eigen::MatrixXd J = complex_structure(n);
        const double h = duration_ / kSubstepsPerStep;
        for (int s = 0; s < kSubstepsPerStep; ++s) rk4_step_variational(state, m, J, h);
        return {std::move(state), std::move(m)};
    }

    bool linear() const override { return false; }

    std::shared_ptr<const FlowFactor> subdivided(int pieces) const override {
        return std::make_shared<ResonantFlowFactor>(term_, duration_ / pieces);
    }

    std::string label() const override { return term_.describe(); }

private:
    // Hamiltonian vector field X = i grad H (convention i_X omega = -dH).
    CVec field(const CVec& z) const { return mul_i(term_.gradient(z)); }

    void rk4_step(CVec& z, double h) const {
        const CVec k1 = field(z);
        const CVec k2 = field(add(z, scaled(k1, 0.5 * h)));
        const CVec k3 = field(add(z, scaled(k2, 0.5 * h)));
        const CVec k4 = field(add(z, scaled(k3, h)));
        for (std::size_t j = 0; j < z.size(); ++j)
            z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }

    void rk4_step_variational(CVec& z, Eigen::MatrixXd& m, const Eigen::MatrixXd& J,
                              double h) const {
        auto dx = [&](const CVec& at) -> Eigen::MatrixXd { return J * term_.real_hessian(at); };

        const CVec k1 = field(z);
        const Eigen::MatrixXd K1 = dx(z) * m;
        const CVec z2 = add(z, scaled(k1, 0.5 * h));
        const CVec k2 = field(z2);
        const Eigen::MatrixXd K2 = dx(z2) * (m + 0.5 * h * K1);
        const CVec z3 = add(z, scaled(k2, 0.5 * h));
        const CVec k3 = field(z3);
        const Eigen::MatrixXd K3 = dx(z3) * (m + 0.5 * h * K2);
        const CVec z4 = add(z, scaled(k3, h));
        const CVec k4 = field(z4);
        const Eigen::MatrixXd K4 = dx(z4) * (m + h * K3);

        for (std::size_t j = 0; j < z.size(); ++j)
            z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        m += h / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    }

    HamiltonianTerm term_;
    double duration_;
};

} // namespace

std::shared_ptr<const FlowFactor> make_flow_factor(const HamiltonianTerm& term, double duration) {
    if (!std::isfinite(duration)) throw ConfigError("flow factor: duration must be finite");
    if (term.kind == HamiltonianTerm::Kind::Diagonal) {
        std::vector<double> angles(term.coefficients.size());
        for (std::size_t j = 0; j < angles.size(); ++j)
            angles[j] = kTwoPi * term.coefficients[j] * duration;
        return std::make_shared<DiagonalFlowFactor>(std::move(angles));
    }
    if (duration == 0.0)
        return identity_factor(term.dimension());
    return std::make_shared<ResonantFlowFactor>(term, duration);
}

std::shared_ptr<const FlowFactor> identity_factor(int n) {
    return std::make_shared<DiagonalFlowFactor>(std::vector<double>(n, 0.0));
}

std::pair<CVec, Eigen::MatrixXd> flow_step(const HamiltonianTerm& term, double T, const CVec& z) {
    if (norm_squared(z) == 0.0)
        throw std::domain_error("flow_step: the flow is defined on C^n minus the origin");
    return make_flow_factor(term, T)->apply_with_differential(z);
}

// ---------------------------------------------------------------------------
// HomogeneousMap
// ---------------------------------------------------------------------------

CVec HomogeneousMap::apply(const CVec& z) const {
    CVec out = z;
    for (const auto& f : steps) out = f->apply(out);
    return out;
}

std::pair<CVec, Eigen::MatrixXd> HomogeneousMap::apply_with_differential(const CVec& z) const {
    const int n = setting.n;
    CVec out = z;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    for (const auto& f : steps) {
        auto [img, df] = f->apply_with_differential(out);
        out = std::move(img);
        m = df * m;
    }
    return {std::move(out), std::move(m)};
}

bool HomogeneousMap::all_linear() const {
    for (const auto& f : steps)
        if (!f->linear()) return false;
    return true;
}

HomogeneousMap build_lift(const LensSetting& setting, const std::vector<IsotopyStep>& steps) {
    setting.validate();
    HomogeneousMap map;
    map.setting = setting;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const HamiltonianTerm& term = steps[i].hamiltonian;
        if (term.dimension() != setting.n)
            throw ConfigError("isotopy step " + std::to_string(i + 1) + " (" + term.describe() +
                              "): dimension does not match the lens setting");
        const int defect = term.invariance_defect(setting);
        if (defect != 0)
            throw ConfigError("isotopy step " + std::to_string(i + 1) + " (" + term.describe() +
                              "): not Z/kZ-invariant, sum (a_j - b_j) w_j = " +
                              std::to_string(defect) + " (mod " + std::to_string(setting.k) + ")");
        map.steps.push_back(make_flow_factor(term, steps[i].duration));
    }
    return map;
}

double conformal_factor(const HomogeneousMap& map, const CVec& p) {
    if (std::abs(norm(p) - 1.0) > 1e-12)
        throw std::domain_error("conformal_factor: point must be on the unit sphere");
    return -2.0 * std::log(norm(map.apply(p)));
}

FactorList factorize(const HomogeneousMap& map, double theta, int sample_points,
                     int max_substeps) {
    if (!(theta > 0.0 && theta < 1.0))
        throw std::domain_error("factorize: theta must lie in (0, 1)");
    const int n = map.setting.n;
    // D sigma is 0-homogeneous, so certifying on the sphere certifies every ray.
    const std::vector<CVec> sample = sphere_sample(n, sample_points, 0);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2 * n, 2 * n);

    FactorList list;
    for (const auto& step : map.steps) {
        int pieces = 1;
        while (true) {
            auto sub = step->subdivided(pieces);
            double bound = 0.0;
            for (const CVec& p : sample) {
                const Eigen::MatrixXd d = sub->apply_with_differential(p).second;
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(d - id);
                bound = std::max(bound, svd.singularValues()(0));
            }
            if (bound <= theta) {
                for (int i = 0; i < pieces; ++i) list.sigmas.push_back(sub);
                list.theta_achieved = std::max(list.theta_achieved, bound);
                break;
            }
            pieces *= 2;
            if (pieces > max_substeps)
                throw NumericError("factorize: could not reach ||D sigma - I|| <= " +
                                   std::to_string(theta) + " for step '" + step->label() +
                                   "' within " + std::to_string(max_substeps) +
                                   " substeps; use smaller step durations");
        }
    }
    if (list.sigmas.empty()) {
        list.sigmas.push_back(identity_factor(n));
        list.sigmas.push_back(identity_factor(n));
    }
    if (list.count() % 2 != 0) list.sigmas.push_back(identity_factor(n));
    return list;
}

} // namespace lenstp
