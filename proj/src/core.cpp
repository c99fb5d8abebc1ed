#include "lenstp/core.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "lenstp/errors.hpp"

namespace lenstp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUnitTol = 1e-12;

void require_same_size(const CVec& u, const CVec& v, const char* who) {
    if (u.size() != v.size())
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}
} // namespace

double norm_squared(const CVec& z) {
    double s = 0.0;
    for (const Complex& c : z) s += std::norm(c);
    return s;
}

double norm(const CVec& z) { return std::sqrt(norm_squared(z)); }

double distance(const CVec& a, const CVec& b) { return norm(sub(a, b)); }

double real_inner(const CVec& u, const CVec& v) {
    require_same_size(u, v, "real_inner");
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        s += u[j].real() * v[j].real() + u[j].imag() * v[j].imag();
    return s;
}

CVec mul_i(const CVec& z) {
    CVec out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        out[j] = Complex(-z[j].imag(), z[j].real());
    return out;
}

CVec scaled(const CVec& z, double s) {
    CVec out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = s * z[j];
    return out;
}

CVec scaled(const CVec& z, Complex s) {
    CVec out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = s * z[j];
    return out;
}

CVec add(const CVec& a, const CVec& b) {
    require_same_size(a, b, "add");
    CVec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + b[j];
    return out;
}

CVec sub(const CVec& a, const CVec& b) {
    require_same_size(a, b, "sub");
    CVec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] - b[j];
    return out;
}

CVec normalized(const CVec& z) {
    const double r = norm(z);
    if (r == 0.0) throw std::domain_error("normalized: zero vector");
    return scaled(z, 1.0 / r);
}

Eigen::VectorXd to_real(const CVec& z) {
    Eigen::VectorXd x(2 * static_cast<int>(z.size()));
    for (std::size_t j = 0; j < z.size(); ++j) {
        x[2 * j] = z[j].real();
        x[2 * j + 1] = z[j].imag();
    }
    return x;
}

CVec from_real(const Eigen::VectorXd& x) {
    if (x.size() % 2 != 0)
        throw std::invalid_argument("from_real: odd length");
    CVec z(x.size() / 2);
    for (std::size_t j = 0; j < z.size(); ++j)
        z[j] = Complex(x[2 * j], x[2 * j + 1]);
    return z;
}

Eigen::MatrixXd complex_structure(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        J(2 * j, 2 * j + 1) = -1.0;
        J(2 * j + 1, 2 * j) = 1.0;
    }
    return J;
}

void LensSetting::validate() const {
    if (n < 1) throw ConfigError("LensSetting: complex dimension n must be >= 1");
    if (k < 2) throw ConfigError("LensSetting: group order k must be >= 2");
    if (static_cast<int>(weights.size()) != n)
        throw ConfigError("LensSetting: expected " + std::to_string(n) + " weights, got " +
                          std::to_string(weights.size()));
    for (int j = 0; j < n; ++j) {
        const int w = ((weights[j] % k) + k) % k;
        if (std::gcd(w, k) != 1)
            throw ConfigError("LensSetting: weight w_" + std::to_string(j + 1) + " = " +
                              std::to_string(weights[j]) + " is not prime to k = " +
                              std::to_string(k) + " (the action would not be free)");
    }
}

TangentVector make_tangent(CVec base, CVec direction) {
    require_same_size(base, direction, "make_tangent");
    if (std::abs(norm(base) - 1.0) > kUnitTol)
        throw std::domain_error("make_tangent: base point is not on the unit sphere");
    const double pairing = std::abs(real_inner(direction, base));
    if (pairing > 1e-12 * std::max(1.0, norm(direction)))
        throw std::domain_error("make_tangent: direction is not tangent to the sphere");
    return TangentVector{std::move(base), std::move(direction)};
}

double contact_form(const CVec& at, const CVec& direction) {
    require_same_size(at, direction, "contact_form");
    if (std::abs(norm(at) - 1.0) > kUnitTol)
        throw std::domain_error("contact_form: base point is not on the unit sphere");
    return real_inner(mul_i(at), direction) / kTwoPi;
}

double contact_form(const TangentVector& v) { return contact_form(v.base, v.direction); }

CVec reeb_flow(const CVec& z, double t) {
    const double t_red = t - std::floor(t);
    const double angle = kTwoPi * t_red;
    return scaled(z, Complex(std::cos(angle), std::sin(angle)));
}

CVec lens_apply(const LensSetting& setting, const CVec& z, long power) {
    if (static_cast<int>(z.size()) != setting.n)
        throw std::invalid_argument("lens_apply: dimension mismatch");
    CVec out(z.size());
    for (int j = 0; j < setting.n; ++j) {
        const long e = (((power * setting.weights[j]) % setting.k) + setting.k) % setting.k;
        const double angle = kTwoPi * static_cast<double>(e) / setting.k;
        out[j] = Complex(std::cos(angle), std::sin(angle)) * z[j];
    }
    return out;
}

double orbit_distance(const LensSetting& setting, const CVec& p, const CVec& q) {
    if (std::abs(norm(p) - 1.0) > kUnitTol || std::abs(norm(q) - 1.0) > kUnitTol)
        throw std::domain_error("orbit_distance: both points must be on the unit sphere");
    double best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < setting.k; ++g)
        best = std::min(best, distance(lens_apply(setting, p, g), q));
    return best;
}

namespace {
bool lex_less(const CVec& a, const CVec& b) {
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j].real() != b[j].real()) return a[j].real() < b[j].real();
        if (a[j].imag() != b[j].imag()) return a[j].imag() < b[j].imag();
    }
    return false;
}
} // namespace

CVec orbit_representative(const LensSetting& setting, const CVec& p) {
    CVec best = p;
    for (int g = 1; g < setting.k; ++g) {
        CVec cand = lens_apply(setting, p, g);
        if (lex_less(cand, best)) best = cand;
    }
    return best;
}

} // namespace lenstp
