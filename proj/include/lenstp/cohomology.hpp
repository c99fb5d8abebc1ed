#pragma once

#include <Eigen/Core>

#include "lenstp/genfun.hpp"

namespace lenstp {

bool is_prime(int p);

/// Element c * alpha^eps * beta^e of H^*(L_p^{2N-1}; F_p) with the lens ring
/// relations alpha^2 = 0, beta^N = 0 (deg alpha = 1, deg beta = 2, p odd).
struct RingClass {
    int p = 3;
    int N = 1;
    int coeff = 0;      // in F_p; 0 encodes the zero class
    int alpha_exp = 0;  // 0 or 1
    int beta_exp = 0;

    static RingClass zero(int p, int N);
    static RingClass make(int p, int N, int coeff, int alpha_exp, int beta_exp);

    bool is_zero() const { return coeff == 0; }
    int degree() const { return alpha_exp + 2 * beta_exp; }
    bool operator==(const RingClass& other) const = default;
};

/// Cup product under the ring relations; graded-commutative.
RingClass class_mul(const RingClass& u, const RingClass& v);

/// Mod-p Bockstein: B(alpha) = beta, B(beta) = 0, extended as a derivation,
/// so B(c alpha beta^e) = c beta^{e+1} and B(c beta^e) = 0.
RingClass bockstein(const RingClass& u);

/// Certified lower bound on the Fadell-Husseini category weight:
/// each alpha factor contributes >= 1, each beta = B(alpha) factor >= 2.
int cwgt_lower(const RingClass& u);

/// cat(L_p^{2n-1}) = 2n: lower bound 1 + cwgt_lower(alpha beta^{n-1}),
/// upper bound from the 2n-critical-point Morse function.
int cat_lens(int p, int n);

/// Number of negative eigenvalues of a nondegenerate symmetric matrix.
/// Throws NumericError when the smallest |eigenvalue| is below
/// 1e-8 * the largest (the caller must move t off a time-shift).
int quadratic_index(const Eigen::MatrixXd& H);

/// A window of cohomological indices of sublevel sets.
struct IndexWindow {
    int a = 0;  // ind { F_{t0} <= 0 }
    int b = 0;  // ind { F_{t1} <= 0 }
    int p = 3;
    int N = 1;

    void validate() const;  // 0 <= a <= b <= 2N
};

/// i(hessian at t1) - i(hessian at t0) for an all-linear problem, where the
/// generating function is a quadratic form and the sublevel sets retract on
/// lens spaces, so the quadratic index equals the cohomological index.
int index_jump(const GeneratingFunction& problem, double t0, double t1);

/// Largest 1 + cwgt_lower(alpha^eps beta^e) over multiplier monomials that
/// keep the product class alive in the relative window: alpha budget
/// parity(a) + eps <= 1, degree a + eps + 2e <= b - 1, beta budget
/// floor(a/2) + e <= N - 1. Returns 0 on an empty window.
int ls_bound(const IndexWindow& window);

/// Minimal number of time-shifts in R/Z: 2n = ceil(ls_bound / 2) for both
/// parities of the base index.
int shift_bound(int n);

} // namespace lenstp
