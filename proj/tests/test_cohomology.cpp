#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lenstp/cohomology.hpp"
#include "lenstp/errors.hpp"

using namespace lenstp;

namespace {

std::vector<RingClass> basis_monomials(int p, int N) {
    std::vector<RingClass> out;
    for (int eps = 0; eps <= 1; ++eps)
        for (int e = 0; e < N; ++e) out.push_back(RingClass::make(p, N, 1, eps, e));
    return out;
}

// Test-local sum of two classes that are scalar multiples of one monomial.
RingClass add_classes(const RingClass& a, const RingClass& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    REQUIRE(a.alpha_exp == b.alpha_exp);
    REQUIRE(a.beta_exp == b.beta_exp);
    return RingClass::make(a.p, a.N, a.coeff + b.coeff, a.alpha_exp, a.beta_exp);
}

RingClass negate(const RingClass& a) {
    if (a.is_zero()) return a;
    return RingClass::make(a.p, a.N, a.p - a.coeff, a.alpha_exp, a.beta_exp);
}

// Independent eigenvalue route: cyclic Jacobi rotations on a copy.
int jacobi_negative_count(Eigen::MatrixXd A) {
    const int n = static_cast<int>(A.rows());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
        if (off < 1e-24) break;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (std::abs(A(i, j)) < 1e-15) continue;
                const double theta = 0.5 * std::atan2(2.0 * A(i, j), A(j, j) - A(i, i));
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    const double aik = A(i, k), ajk = A(j, k);
                    A(i, k) = c * aik - s * ajk;
                    A(j, k) = s * aik + c * ajk;
                }
                for (int k = 0; k < n; ++k) {
                    const double aki = A(k, i), akj = A(k, j);
                    A(k, i) = c * aki - s * akj;
                    A(k, j) = s * aki + c * akj;
                }
            }
        }
    }
    int negatives = 0;
    for (int i = 0; i < n; ++i)
        if (A(i, i) < 0.0) ++negatives;
    return negatives;
}

GeneratingFunction diagonal_problem() {
    LensSetting s{2, 3, {1, 1}};
    HomogeneousMap map =
        build_lift(s, {IsotopyStep{HamiltonianTerm::diagonal({0.15, 0.35}), 1.0}});
    return GeneratingFunction(s, factorize(map, 0.1, 64));
}

} // namespace

TEST_CASE("ring multiplication examples") {
    const int p = 5, N = 4;
    const RingClass alpha = RingClass::make(p, N, 1, 1, 0);
    const RingClass beta = RingClass::make(p, N, 1, 0, 1);

    CHECK(class_mul(alpha, alpha).is_zero());

    RingClass beta_top = RingClass::make(p, N, 1, 0, N - 1);
    const RingClass top = class_mul(alpha, beta_top);
    CHECK(!top.is_zero());
    CHECK(top.degree() == 2 * N - 1);

    CHECK(class_mul(beta_top, beta).is_zero());

    const RingClass other = RingClass::make(7, N, 1, 0, 1);
    CHECK_THROWS_AS(class_mul(alpha, other), std::domain_error);
}

TEST_CASE("ring axioms hold exhaustively for N <= 12, p in {3,5,7}") {
    for (const int p : {3, 5, 7}) {
        for (int N = 1; N <= 12; ++N) {
            const std::vector<RingClass> basis = basis_monomials(p, N);
            for (const RingClass& u : basis) {
                for (const RingClass& v : basis) {
                    // Graded commutativity: the sign only matters when both
                    // degrees are odd, and then both products carry alpha^2.
                    const RingClass uv = class_mul(u, v);
                    const RingClass vu = class_mul(v, u);
                    if (u.degree() % 2 == 1 && v.degree() % 2 == 1) {
                        CHECK(uv.is_zero());
                        CHECK(vu.is_zero());
                    } else {
                        CHECK(uv == vu);
                    }
                    for (const RingClass& w : basis)
                        CHECK(class_mul(class_mul(u, v), w) == class_mul(u, class_mul(v, w)));
                }
            }
        }
    }
}

TEST_CASE("bockstein") {
    const int p = 3, N = 6;
    const RingClass alpha = RingClass::make(p, N, 1, 1, 0);
    const RingClass beta = RingClass::make(p, N, 1, 0, 1);

    SUBCASE("generators") {
        CHECK(bockstein(alpha) == beta);
        CHECK(bockstein(beta).is_zero());
        const RingClass alpha_beta = class_mul(alpha, beta);
        CHECK(bockstein(alpha_beta) == RingClass::make(p, N, 1, 0, 2));
    }
    SUBCASE("B o B = 0 and the derivation rule, exhaustively") {
        for (const int prime : {3, 5, 7}) {
            for (int n = 1; n <= 12; ++n) {
                for (const RingClass& u : basis_monomials(prime, n)) {
                    CHECK(bockstein(bockstein(u)).is_zero());
                    for (const RingClass& v : basis_monomials(prime, n)) {
                        const RingClass lhs = bockstein(class_mul(u, v));
                        RingClass second = class_mul(u, bockstein(v));
                        if (u.degree() % 2 == 1) second = negate(second);
                        const RingClass rhs = add_classes(class_mul(bockstein(u), v), second);
                        CHECK(lhs == rhs);
                    }
                }
            }
        }
    }
}

TEST_CASE("category weight lower bounds") {
    const int p = 3;
    SUBCASE("generators and the top class") {
        const int N = 4;
        CHECK(cwgt_lower(RingClass::make(p, N, 1, 1, 0)) == 1);
        CHECK(cwgt_lower(RingClass::make(p, N, 1, 0, 1)) == 2);
        // alpha beta^{n-1} certifies cat >= 2n.
        for (int n = 1; n <= 4; ++n)
            CHECK(1 + cwgt_lower(RingClass::make(p, n, 1, 1, n - 1)) == 2 * n);
        CHECK_THROWS_AS(cwgt_lower(RingClass::zero(p, N)), std::domain_error);
    }
    SUBCASE("additive on non-vanishing products") {
        const int N = 12;
        for (const RingClass& u : basis_monomials(p, N)) {
            for (const RingClass& v : basis_monomials(p, N)) {
                const RingClass uv = class_mul(u, v);
                if (uv.is_zero()) continue;
                CHECK(cwgt_lower(uv) == cwgt_lower(u) + cwgt_lower(v));
            }
        }
    }
}

TEST_CASE("lens space category") {
    CHECK(cat_lens(3, 2) == 4);
    CHECK(cat_lens(5, 3) == 6);
    CHECK(cat_lens(7, 1) == 2);
    CHECK(cat_lens(7, 4) == 8);
    CHECK_THROWS_AS(cat_lens(2, 2), std::domain_error);
    CHECK_THROWS_AS(cat_lens(9, 2), std::domain_error);
}

TEST_CASE("quadratic index") {
    SUBCASE("definite and mixed diagonal forms") {
        CHECK(quadratic_index(Eigen::MatrixXd::Identity(5, 5)) == 0);
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
        d.diagonal() << -1.0, -1.0, 1.0;
        CHECK(quadratic_index(d) == 2);
    }
    SUBCASE("near-degenerate forms are refused") {
        Eigen::MatrixXd d = Eigen::MatrixXd::Identity(3, 3);
        d(2, 2) = 1e-12;
        CHECK_THROWS_AS(quadratic_index(d), NumericError);
    }
    SUBCASE("asymmetry is refused") {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
        a(0, 1) = 0.5;
        CHECK_THROWS_AS(quadratic_index(a), std::domain_error);
    }
    SUBCASE("pure-coupling hessian against an independent Jacobi oracle") {
        LensSetting s{1, 3, {1}};
        HomogeneousMap map = build_lift(s, {});
        const GeneratingFunction problem(s, factorize(map, 0.1, 16));
        GeneratingChain probe = GeneratingChain::zero(1, problem.block_count());
        for (CVec& b : probe.blocks) b[0] = Complex(1.0, 0.0);
        const Eigen::MatrixXd h = problem.hessian(0.05, probe);
        CHECK(quadratic_index(h) == jacobi_negative_count(h));
    }
}

TEST_CASE("index jump of the diagonal example") {
    const GeneratingFunction problem = diagonal_problem();

    SUBCASE("one period contributes 2n, two periods 4n") {
        CHECK(index_jump(problem, 0.0, 1.0) == 4);
        CHECK(index_jump(problem, 0.0, 2.0) == 8);
        CHECK(index_jump(problem, 0.7, 0.7) == 0);
    }
    SUBCASE("additive over regular subdivisions") {
        CHECK(index_jump(problem, 0.0, 2.0) ==
              index_jump(problem, 0.0, 0.5) + index_jump(problem, 0.5, 2.0));
    }
    SUBCASE("a time-shift endpoint is rejected as degenerate") {
        CHECK_THROWS_AS(index_jump(problem, 0.0, 0.15), NumericError);
    }
    SUBCASE("nonlinear problems are rejected") {
        LensSetting s{2, 3, {1, 1}};
        HomogeneousMap map = build_lift(
            s, {IsotopyStep{HamiltonianTerm::resonant(0.01, Complex(1.0, 0.0), {3, 0}, {0, 0}),
                            1.0}});
        const GeneratingFunction nonlinear(s, factorize(map, 0.3, 32));
        CHECK_THROWS_AS(index_jump(nonlinear, 0.0, 1.0), ConfigError);
    }
}

TEST_CASE("ls_bound") {
    SUBCASE("window examples") {
        CHECK(ls_bound(IndexWindow{10, 18, 3, 10}) == 8);
        CHECK(ls_bound(IndexWindow{11, 19, 3, 10}) == 7);
        // Full window over the whole lens space recovers the category.
        for (int N = 2; N <= 6; ++N)
            CHECK(ls_bound(IndexWindow{0, 2 * N, 5, N}) == 2 * N);
        CHECK(ls_bound(IndexWindow{4, 4, 3, 4}) == 0);
    }
    SUBCASE("4n and 4n-1 for the theorem windows") {
        for (int n = 1; n <= 3; ++n) {
            CHECK(ls_bound(IndexWindow{0, 4 * n, 3, 2 * n}) == 4 * n);
            CHECK(ls_bound(IndexWindow{1, 4 * n + 1, 3, 2 * n + 1}) == 4 * n - 1);
        }
    }
    SUBCASE("monotone in the window") {
        const int p = 3, N = 12;
        for (int a = 0; a <= 6; ++a) {
            for (int b = a; b <= 2 * N; ++b) {
                const int here = ls_bound(IndexWindow{a, b, p, N});
                if (b + 1 <= 2 * N) CHECK(ls_bound(IndexWindow{a, b + 1, p, N}) >= here);
                if (a + 1 <= b) CHECK(ls_bound(IndexWindow{a + 1, b, p, N}) <= here);
            }
        }
    }
    SUBCASE("invalid windows are rejected") {
        CHECK_THROWS_AS(ls_bound(IndexWindow{3, 2, 3, 4}), std::domain_error);
        CHECK_THROWS_AS(ls_bound(IndexWindow{0, 20, 3, 4}), std::domain_error);
    }
}

TEST_CASE("shift bound") {
    CHECK(shift_bound(1) == 2);
    CHECK(shift_bound(2) == 4);
    CHECK(shift_bound(3) == 6);
    // ceil(4n/2) and ceil((4n-1)/2) agree.
    for (int n = 1; n <= 5; ++n) {
        CHECK((ls_bound(IndexWindow{0, 4 * n, 3, 2 * n}) + 1) / 2 == shift_bound(n));
        CHECK((ls_bound(IndexWindow{1, 4 * n + 1, 3, 2 * n + 1}) + 1) / 2 == shift_bound(n));
    }
    CHECK_THROWS_AS(shift_bound(0), std::domain_error);
}
