#include "lenstp/cohomology.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Eigenvalues>

#include "lenstp/errors.hpp"

namespace lenstp {

bool is_prime(int p) {
    if (p < 2) return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

namespace {
void require_odd_prime(int p, const char* who) {
    if (!is_prime(p))
        throw std::domain_error(std::string(who) + ": p = " + std::to_string(p) +
                                " is not prime");
    if (p == 2)
        throw std::domain_error(std::string(who) +
                                ": p = 2 is unsupported (the even case is handled separately)");
}
} // namespace

RingClass RingClass::zero(int p, int N) {
    require_odd_prime(p, "RingClass");
    RingClass u;
    u.p = p;
    u.N = N;
    return u;
}

RingClass RingClass::make(int p, int N, int coeff, int alpha_exp, int beta_exp) {
    require_odd_prime(p, "RingClass");
    if (N < 1) throw std::domain_error("RingClass: N must be >= 1");
    if (alpha_exp < 0 || beta_exp < 0)
        throw std::domain_error("RingClass: exponents must be non-negative");
    RingClass u;
    u.p = p;
    u.N = N;
    u.coeff = ((coeff % p) + p) % p;
    // alpha^2 = 0 and beta^N = 0.
    if (u.coeff == 0 || alpha_exp >= 2 || beta_exp >= N) {
        u.coeff = 0;
        u.alpha_exp = u.beta_exp = 0;
        return u;
    }
    u.alpha_exp = alpha_exp;
    u.beta_exp = beta_exp;
    return u;
}

RingClass class_mul(const RingClass& u, const RingClass& v) {
    if (u.p != v.p || u.N != v.N)
        throw std::domain_error("class_mul: mismatched ring parameters");
    if (u.is_zero() || v.is_zero()) return RingClass::zero(u.p, u.N);
    // beta has even degree, so moving alpha factors across beta costs no sign;
    // alpha * alpha dies by the ring relation (p odd).
    return RingClass::make(u.p, u.N, u.coeff * v.coeff, u.alpha_exp + v.alpha_exp,
                           u.beta_exp + v.beta_exp);
}

RingClass bockstein(const RingClass& u) {
    if (u.is_zero() || u.alpha_exp == 0) return RingClass::zero(u.p, u.N);
    return RingClass::make(u.p, u.N, u.coeff, 0, u.beta_exp + 1);
}

int cwgt_lower(const RingClass& u) {
    if (u.is_zero()) throw std::domain_error("cwgt_lower: undefined for the zero class");
    return u.alpha_exp + 2 * u.beta_exp;
}

int cat_lens(int p, int n) {
    require_odd_prime(p, "cat_lens");
    if (n < 1) throw std::domain_error("cat_lens: n must be >= 1");
    const RingClass top = RingClass::make(p, n, 1, 1, n - 1);
    const int lower = 1 + cwgt_lower(top);
    // A Morse function with exactly 2n critical points caps the category.
    const int upper = 2 * n;
    if (lower != upper)
        throw ContractViolation("cat_lens: lower bound " + std::to_string(lower) +
                                " does not meet the Morse upper bound " + std::to_string(upper));
    return upper;
}

int quadratic_index(const Eigen::MatrixXd& H) {
    if (H.rows() != H.cols()) throw std::domain_error("quadratic_index: matrix must be square");
    const double scale = H.norm();
    if (scale > 0.0 && (H - H.transpose()).norm() > 1e-6 * scale)
        throw std::domain_error("quadratic_index: matrix is not symmetric within 1e-6");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    const double smallest = ev.cwiseAbs().minCoeff();
    if (largest == 0.0 || smallest <= 1e-8 * largest)
        throw NumericError("quadratic_index: near-degenerate form, smallest |eigenvalue| " +
                           std::to_string(smallest) +
                           " (move t away from a time-shift and retry)");
    int negatives = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] < 0.0) ++negatives;
    return negatives;
}

int index_jump(const GeneratingFunction& problem, double t0, double t1) {
    problem.check_t(t0);
    problem.check_t(t1);
    if (!problem.all_linear())
        throw ConfigError(
            "index_jump: requires an all-linear problem (the generating function must be a "
            "quadratic form)");
    // The Hessian of a quadratic form does not depend on the chain.
    GeneratingChain probe = GeneratingChain::zero(problem.dimension(), problem.block_count());
    for (CVec& b : probe.blocks)
        for (Complex& c : b) c = Complex(1.0, 0.0);
    const int i0 = quadratic_index(problem.hessian(t0, probe));
    const int i1 = quadratic_index(problem.hessian(t1, probe));
    return i1 - i0;
}

void IndexWindow::validate() const {
    require_odd_prime(p, "IndexWindow");
    if (N < 1) throw std::domain_error("IndexWindow: N must be >= 1");
    if (!(0 <= a && a <= b && b <= 2 * N))
        throw std::domain_error("IndexWindow: indices must satisfy 0 <= a <= b <= 2N");
}

int ls_bound(const IndexWindow& window) {
    window.validate();
    if (window.b - window.a < 1) return 0;
    const int parity = window.a % 2;
    const int beta_base = window.a / 2;
    int best = 0;
    for (int eps = 0; eps <= 1; ++eps) {
        if (parity + eps > 1) continue;
        const int slack = window.b - 1 - window.a - eps;
        if (slack < 0) continue;
        // Largest beta exponent allowed by the degree and ring budgets.
        const int e = std::min(slack / 2, window.N - 1 - beta_base);
        if (e < 0) continue;
        best = std::max(best, 1 + eps + 2 * e);
    }
    return best;
}

int shift_bound(int n) {
    if (n < 1) throw std::domain_error("shift_bound: n must be >= 1");
    // Representative windows of both parities, ring just large enough.
    const IndexWindow even{0, 4 * n, 3, 2 * n};
    const IndexWindow odd{1, 4 * n + 1, 3, 2 * n + 1};
    const int from_even = (ls_bound(even) + 1) / 2;
    const int from_odd = (ls_bound(odd) + 1) / 2;
    if (from_even != from_odd || from_even != 2 * n)
        throw ContractViolation("shift_bound: parity cases disagree (" +
                                std::to_string(from_even) + " vs " + std::to_string(from_odd) +
                                ")");
    return 2 * n;
}

} // namespace lenstp
