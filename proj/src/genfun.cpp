#include "lenstp/genfun.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "lenstp/errors.hpp"

namespace lenstp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kRotationEdges = 7;
} // namespace

double rotation_value(double t, const CVec& w) {
    if (!(std::abs(t) < 0.5))
        throw std::domain_error("rotation generating function: |t| must be < 1/2");
    return -std::tan(std::numbers::pi * t) * norm_squared(w);
}

CVec rotation_gradient(double t, const CVec& w) {
    if (!(std::abs(t) < 0.5))
        throw std::domain_error("rotation generating function: |t| must be < 1/2");
    return scaled(w, -2.0 * std::tan(std::numbers::pi * t));
}

// ---------------------------------------------------------------------------
// ElementaryGenFunction
// ---------------------------------------------------------------------------

ElementaryGenFunction::ElementaryGenFunction(std::shared_ptr<const FlowFactor> sigma,
                                             double tolerance, int max_iterations)
    : sigma_(std::move(sigma)), tolerance_(tolerance), max_iterations_(max_iterations) {}

ElementaryGenFunction::MidpointSolve ElementaryGenFunction::solve(const CVec& w, const CVec* hint,
                                                                  bool with_differential) const {
    const int n = static_cast<int>(w.size());
    const double scale = 1.0 + norm(w);
    CVec z = hint && hint->size() == w.size() ? *hint : w;
    Eigen::MatrixXd dsigma;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2 * n, 2 * n);

    // The damped iteration z <- z - r has derivative (I - D sigma)/2, a
    // contraction for C^1-small factors; it avoids tracking the variational
    // equation. Stalls escalate to the Newton loop below.
    constexpr int kCheapIterations = 16;
    int it = 0;
    double rn = 0.0;
    if (!with_differential) {
        for (; it <= kCheapIterations; ++it) {
            CVec img = sigma_->apply(z);
            CVec r(n);
            for (int j = 0; j < n; ++j) r[j] = 0.5 * (z[j] + img[j]) - w[j];
            rn = norm(r);
            if (rn <= tolerance_ * scale)
                return MidpointSolve{std::move(z), std::move(img), Eigen::MatrixXd(), it, rn};
            if (it == kCheapIterations) break;
            for (int j = 0; j < n; ++j) z[j] -= r[j];
        }
    }

    for (; it <= max_iterations_; ++it) {
        auto [img, d] = sigma_->apply_with_differential(z);
        dsigma = std::move(d);
        CVec r(n);
        for (int j = 0; j < n; ++j) r[j] = 0.5 * (z[j] + img[j]) - w[j];
        rn = norm(r);
        if (rn <= tolerance_ * scale)
            return MidpointSolve{std::move(z), std::move(img), std::move(dsigma), it, rn};
        const Eigen::VectorXd step = ((id + dsigma) * 0.5).partialPivLu().solve(to_real(r));
        if (!step.allFinite())
            throw NumericError("elementary generating function: singular midpoint Jacobian");
        const CVec sc = from_real(step);
        for (int j = 0; j < n; ++j) z[j] -= sc[j];
    }
    throw NumericError(
        "elementary generating function: midpoint solve did not converge (residual " +
        std::to_string(rn) + "); the factorization smallness bound theta may be too lax");
}

CVec ElementaryGenFunction::gradient(const CVec& w, const CVec* hint, CVec* witness_out) const {
    MidpointSolve s = solve(w, hint, false);
    CVec g(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const Complex d = s.witness[j] - s.image[j];
        g[j] = Complex(-d.imag(), d.real());
    }
    if (witness_out) *witness_out = std::move(s.witness);
    return g;
}

double ElementaryGenFunction::value(const CVec& w, const CVec* hint, CVec* witness_out) const {
    return 0.5 * real_inner(gradient(w, hint, witness_out), w);
}

Eigen::MatrixXd ElementaryGenFunction::gradient_jacobian(const CVec& w, const CVec* hint,
                                                         CVec* witness_out) const {
    const int n = static_cast<int>(w.size());
    MidpointSolve s = solve(w, hint, true);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    const Eigen::MatrixXd inv = (id + s.dsigma).partialPivLu().solve(id);
    if (witness_out) *witness_out = std::move(s.witness);
    return 2.0 * complex_structure(n) * (id - s.dsigma) * inv;
}

double ElementaryGenFunction::symmetry_residual(const CVec& w) const {
    const Eigen::MatrixXd dg = gradient_jacobian(w);
    const double denom = dg.norm();
    if (denom < 1e-300) return 0.0;
    return (dg - dg.transpose()).norm() / denom;
}

// ---------------------------------------------------------------------------
// GeneratingChain
// ---------------------------------------------------------------------------

double GeneratingChain::norm() const {
    double s = 0.0;
    for (const CVec& b : blocks) s += norm_squared(b);
    return std::sqrt(s);
}

void GeneratingChain::normalize() {
    const double r = norm();
    if (r == 0.0) throw std::domain_error("GeneratingChain: cannot normalize the zero chain");
    for (CVec& b : blocks)
        for (Complex& c : b) c /= r;
}

GeneratingChain GeneratingChain::scaled_by(double s) const {
    GeneratingChain out = *this;
    for (CVec& b : out.blocks)
        for (Complex& c : b) c *= s;
    return out;
}

Eigen::VectorXd GeneratingChain::flatten() const {
    Eigen::VectorXd x(2 * n * block_count());
    int at = 0;
    for (const CVec& b : blocks) {
        for (const Complex& c : b) {
            x[at++] = c.real();
            x[at++] = c.imag();
        }
    }
    return x;
}

GeneratingChain GeneratingChain::unflatten(int n, const Eigen::VectorXd& x) {
    if (x.size() % (2 * n) != 0)
        throw std::invalid_argument("GeneratingChain::unflatten: length mismatch");
    GeneratingChain v;
    v.n = n;
    const int count = static_cast<int>(x.size()) / (2 * n);
    v.blocks.resize(count, CVec(n));
    int at = 0;
    for (CVec& b : v.blocks)
        for (Complex& c : b) {
            c = Complex(x[at], x[at + 1]);
            at += 2;
        }
    return v;
}

GeneratingChain GeneratingChain::lens_image(const LensSetting& setting, long power) const {
    GeneratingChain out = *this;
    for (CVec& b : out.blocks) b = lens_apply(setting, b, power);
    return out;
}

GeneratingChain GeneratingChain::zero(int n, int blocks) {
    GeneratingChain v;
    v.n = n;
    v.blocks.assign(blocks, CVec(n, Complex(0.0, 0.0)));
    return v;
}

// ---------------------------------------------------------------------------
// GeneratingFunction
// ---------------------------------------------------------------------------

GeneratingFunction::GeneratingFunction(LensSetting setting, FactorList factors,
                                       double newton_tolerance, int newton_max_iterations)
    : setting_(std::move(setting)), factors_(std::move(factors)) {
    m_ = factors_.count();
    if (m_ < 2 || m_ % 2 != 0)
        throw std::invalid_argument("GeneratingFunction: factor count must be even and >= 2");
    elementary_.reserve(m_);
    for (const auto& sigma : factors_.sigmas)
        elementary_.emplace_back(sigma, newton_tolerance, newton_max_iterations);
}

void GeneratingFunction::check_t(double t) const {
    if (!(t > -1.0 && t < 3.0))
        throw std::domain_error("generating function parameter t must lie in (-1, 3)");
}

double GeneratingFunction::edge_value(int edge, double t, const CVec& midpoint,
                                      WitnessCache* cache) const {
    if (edge < m_) {
        const CVec* hint = nullptr;
        if (cache && static_cast<int>(cache->witnesses.size()) == m_ &&
            !cache->witnesses[edge].empty())
            hint = &cache->witnesses[edge];
        CVec witness;
        const double f = elementary_[edge].value(midpoint, hint, &witness);
        if (cache) {
            if (static_cast<int>(cache->witnesses.size()) != m_) cache->witnesses.resize(m_);
            cache->witnesses[edge] = std::move(witness);
        }
        return f;
    }
    return rotation_value(t / 7.0, midpoint);
}

CVec GeneratingFunction::edge_gradient(int edge, double t, const CVec& midpoint,
                                       WitnessCache* cache) const {
    if (edge < m_) {
        const CVec* hint = nullptr;
        if (cache && static_cast<int>(cache->witnesses.size()) == m_ &&
            !cache->witnesses[edge].empty())
            hint = &cache->witnesses[edge];
        CVec witness;
        CVec g = elementary_[edge].gradient(midpoint, hint, &witness);
        if (cache) {
            if (static_cast<int>(cache->witnesses.size()) != m_) cache->witnesses.resize(m_);
            cache->witnesses[edge] = std::move(witness);
        }
        return g;
    }
    return rotation_gradient(t / 7.0, midpoint);
}

double GeneratingFunction::value(double t, const GeneratingChain& v, WitnessCache* cache) const {
    check_t(t);
    const int count = block_count();
    if (v.block_count() != count || v.n != setting_.n)
        throw std::invalid_argument("generating function: chain shape mismatch");
    double total = 0.0;
    for (int e = 0; e < count; ++e) {
        const CVec& a = v.blocks[e];
        const CVec& b = v.blocks[(e + 1) % count];
        CVec mid(setting_.n);
        for (int j = 0; j < setting_.n; ++j) mid[j] = 0.5 * (a[j] + b[j]);
        total += edge_value(e, t, mid, cache);
        total += 0.5 * real_inner(a, mul_i(b));
    }
    return total;
}

GeneratingChain GeneratingFunction::gradient(double t, const GeneratingChain& v,
                                             WitnessCache* cache) const {
    check_t(t);
    const int count = block_count();
    if (v.block_count() != count || v.n != setting_.n)
        throw std::invalid_argument("generating function: chain shape mismatch");

    std::vector<CVec> edge_grads(count);
    for (int e = 0; e < count; ++e) {
        const CVec& a = v.blocks[e];
        const CVec& b = v.blocks[(e + 1) % count];
        CVec mid(setting_.n);
        for (int j = 0; j < setting_.n; ++j) mid[j] = 0.5 * (a[j] + b[j]);
        edge_grads[e] = edge_gradient(e, t, mid, cache);
    }

    GeneratingChain g = GeneratingChain::zero(setting_.n, count);
    for (int j = 0; j < count; ++j) {
        const int prev = (j + count - 1) % count;
        const CVec& vn = v.blocks[(j + 1) % count];
        const CVec& vp = v.blocks[prev];
        for (int c = 0; c < setting_.n; ++c) {
            const Complex diff = vn[c] - vp[c];
            g.blocks[j][c] = 0.5 * edge_grads[prev][c] + 0.5 * edge_grads[j][c] +
                             0.5 * Complex(-diff.imag(), diff.real());
        }
    }
    return g;
}

Eigen::MatrixXd GeneratingFunction::hessian(double t, const GeneratingChain& v,
                                            WitnessCache* cache) const {
    check_t(t);
    const int count = block_count();
    const int n = setting_.n;
    const int dim = 2 * n * count;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    const Eigen::MatrixXd J = complex_structure(n);
    const Eigen::MatrixXd I2n = Eigen::MatrixXd::Identity(2 * n, 2 * n);

    auto block_add = [&](int bj, int bl, const Eigen::MatrixXd& M) {
        H.block(2 * n * bj, 2 * n * bl, 2 * n, 2 * n) += M;
    };

    for (int e = 0; e < count; ++e) {
        const int next = (e + 1) % count;
        const CVec& a = v.blocks[e];
        const CVec& b = v.blocks[next];
        CVec mid(n);
        for (int j = 0; j < n; ++j) mid[j] = 0.5 * (a[j] + b[j]);

        Eigen::MatrixXd dg;
        if (e < m_) {
            const CVec* hint = nullptr;
            if (cache && static_cast<int>(cache->witnesses.size()) == m_ &&
                !cache->witnesses[e].empty())
                hint = &cache->witnesses[e];
            CVec witness;
            dg = elementary_[e].gradient_jacobian(mid, hint, &witness);
            if (cache) {
                if (static_cast<int>(cache->witnesses.size()) != m_) cache->witnesses.resize(m_);
                cache->witnesses[e] = std::move(witness);
            }
        } else {
            dg = -2.0 * std::tan(std::numbers::pi * t / 7.0) * I2n;
        }
        const Eigen::MatrixXd quarter = 0.25 * dg;
        block_add(e, e, quarter);
        block_add(next, next, quarter);
        block_add(e, next, quarter + 0.5 * J);
        block_add(next, e, quarter.transpose() - 0.5 * J);
    }
    return H;
}

GeneratingChain GeneratingFunction::gradient_t_derivative(double t,
                                                          const GeneratingChain& v) const {
    check_t(t);
    const int count = block_count();
    const double u = std::numbers::pi * t / 7.0;
    const double sec = 1.0 / std::cos(u);
    const double coeff = -(2.0 * std::numbers::pi / 7.0) * sec * sec;

    GeneratingChain g = GeneratingChain::zero(setting_.n, count);
    for (int e = m_; e < count; ++e) {
        const int next = (e + 1) % count;
        for (int c = 0; c < setting_.n; ++c) {
            const Complex mid = 0.5 * (v.blocks[e][c] + v.blocks[next][c]);
            const Complex contrib = 0.5 * coeff * mid;
            g.blocks[e][c] += contrib;
            g.blocks[next][c] += contrib;
        }
    }
    return g;
}

std::pair<GeneratingChain, double> GeneratingFunction::chain_from_fixed_point(double t,
                                                                              const CVec& z) const {
    check_t(t);
    if (norm_squared(z) == 0.0)
        throw std::domain_error("chain_from_fixed_point: z must be non-zero");
    const int count = block_count();
    GeneratingChain v;
    v.n = setting_.n;
    v.blocks.resize(count);
    v.blocks[0] = z;
    for (int j = 0; j + 1 < count; ++j) {
        if (j < m_) {
            v.blocks[j + 1] = factors_.sigmas[j]->apply(v.blocks[j]);
        } else {
            const double angle = -kTwoPi * t / 7.0;
            v.blocks[j + 1] = scaled(v.blocks[j], Complex(std::cos(angle), std::sin(angle)));
        }
    }
    const double angle = -kTwoPi * t / 7.0;
    const CVec closing = scaled(v.blocks[count - 1], Complex(std::cos(angle), std::sin(angle)));
    const double defect = distance(closing, v.blocks[0]);
    return {std::move(v), defect};
}

CVec GeneratingFunction::apply_factors(const CVec& z) const {
    CVec out = z;
    for (const auto& f : factors_.sigmas) out = f->apply(out);
    return out;
}

bool GeneratingFunction::all_linear() const {
    for (const auto& f : factors_.sigmas)
        if (!f->linear()) return false;
    return true;
}

GeneratingFunction::ExtractedFixedPoint GeneratingFunction::fixed_point_from_chain(
    const GeneratingChain& v, double t, double gradient_tolerance) const {
    check_t(t);
    const double scale = std::max(1.0, v.norm());
    ExtractedFixedPoint out;
    out.gradient_norm = gradient(t, v).norm();
    if (out.gradient_norm > gradient_tolerance * scale)
        throw ContractViolation(
            "fixed_point_from_chain: chain is not critical (gradient norm " +
            std::to_string(out.gradient_norm) + " exceeds tolerance)");
    out.point = v.blocks[0];
    const double angle = -kTwoPi * t;
    const CVec mapped =
        scaled(apply_factors(out.point), Complex(std::cos(angle), std::sin(angle)));
    out.fixed_point_residual = distance(mapped, out.point);
    out.ratio = out.gradient_norm > 0.0 ? out.fixed_point_residual / out.gradient_norm : 0.0;
    const double close_angle = -kTwoPi * t / 7.0;
    const CVec closing = scaled(v.blocks[block_count() - 1],
                                Complex(std::cos(close_angle), std::sin(close_angle)));
    out.closure_defect = distance(closing, v.blocks[0]);
    return out;
}

} // namespace lenstp
