#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "lenstp/errors.hpp"
#include "lenstp/genfun.hpp"

using namespace lenstp;

namespace {

constexpr double kPi = std::numbers::pi;

LensSetting lens33() { return LensSetting{2, 3, {1, 1}}; }

CVec random_point(std::mt19937_64& rng, int n, double radius = 1.0) {
    std::normal_distribution<double> gauss;
    CVec z(n);
    for (int j = 0; j < n; ++j) z[j] = Complex(gauss(rng), gauss(rng));
    return scaled(z, radius / norm(z));
}

GeneratingChain random_chain(std::mt19937_64& rng, int n, int blocks) {
    GeneratingChain v;
    v.n = n;
    std::normal_distribution<double> gauss;
    v.blocks.resize(blocks, CVec(n));
    for (CVec& b : v.blocks)
        for (Complex& c : b) c = Complex(gauss(rng), gauss(rng));
    v.normalize();
    return v;
}

// e^{-2 pi i t} z as a flow factor.
std::shared_ptr<const FlowFactor> small_rotation(int n, double t) {
    return make_flow_factor(HamiltonianTerm::diagonal(std::vector<double>(n, -t)), 1.0);
}

GeneratingFunction identity_problem() {
    HomogeneousMap map = build_lift(lens33(), {});
    return GeneratingFunction(lens33(), factorize(map, 0.1, 32));
}

GeneratingFunction diagonal_problem() {
    HomogeneousMap map =
        build_lift(lens33(), {IsotopyStep{HamiltonianTerm::diagonal({0.15, 0.35}), 1.0}});
    return GeneratingFunction(lens33(), factorize(map, 0.1, 64));
}

GeneratingFunction perturbed_problem() {
    HomogeneousMap map = build_lift(
        lens33(),
        {IsotopyStep{HamiltonianTerm::diagonal({0.1, 0.2}), 1.0},
         IsotopyStep{HamiltonianTerm::resonant(0.01, Complex(1.0, 0.0), {3, 0}, {0, 0}), 1.0}});
    return GeneratingFunction(lens33(), factorize(map, 0.3, 64));
}

Eigen::VectorXd fd_gradient_of_F(const GeneratingFunction& problem, double t,
                                 const GeneratingChain& v, double h) {
    GeneratingFunction::WitnessCache cache;
    const Eigen::VectorXd x = v.flatten();
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fp = problem.value(t, GeneratingChain::unflatten(v.n, xp), &cache);
        const double fm = problem.value(t, GeneratingChain::unflatten(v.n, xm), &cache);
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

} // namespace

TEST_CASE("rotation term") {
    std::mt19937_64 rng(21);
    SUBCASE("vanishes at t = 0") {
        for (int trial = 0; trial < 5; ++trial)
            CHECK(rotation_value(0.0, random_point(rng, 2)) == 0.0);
    }
    SUBCASE("quarter shift on a unit vector") {
        CHECK(rotation_value(0.25, random_point(rng, 3)) == doctest::Approx(-1.0).epsilon(1e-14));
    }
    SUBCASE("domain boundary") {
        const CVec w = random_point(rng, 2);
        CHECK_THROWS_AS(rotation_value(0.5, w), std::domain_error);
        CHECK_THROWS_AS(rotation_gradient(-0.5, w), std::domain_error);
    }
}

TEST_CASE("rotation identity: the midpoint solve reproduces the closed form") {
    // For w = (z + delta_t z)/2 the gradient i (z - delta_t z) must equal
    // -2 tan(pi t) w; checked through the actual midpoint solver.
    std::mt19937_64 rng(23);
    for (const double t : {0.1, 0.25, 0.4}) {
        for (const int n : {2, 3}) {
            const ElementaryGenFunction gf(small_rotation(n, t));
            for (int trial = 0; trial < 10; ++trial) {
                const CVec w = random_point(rng, n, 0.5 + trial * 0.2);
                const auto solve = gf.solve(w);
                CVec lhs(n);
                for (int j = 0; j < n; ++j) {
                    const Complex d = solve.witness[j] - solve.image[j];
                    lhs[j] = Complex(-d.imag(), d.real());
                }
                CHECK(distance(lhs, rotation_gradient(t, w)) < 1e-12);
            }
        }
    }
}

TEST_CASE("elementary generating function") {
    std::mt19937_64 rng(29);

    SUBCASE("identity factor has zero gradient and witness w") {
        const ElementaryGenFunction gf(identity_factor(2));
        const CVec w = random_point(rng, 2);
        CVec witness;
        const CVec g = gf.gradient(w, nullptr, &witness);
        CHECK(norm(g) == 0.0);
        CHECK(distance(witness, w) == 0.0);
        CHECK(gf.value(w) == 0.0);
    }
    SUBCASE("small rotation matches the rotation term") {
        const double t = 0.07;
        const ElementaryGenFunction gf(small_rotation(2, t));
        for (int trial = 0; trial < 5; ++trial) {
            const CVec w = random_point(rng, 2);
            CHECK(distance(gf.gradient(w), rotation_gradient(t, w)) < 1e-12);
            CHECK(gf.value(w) == doctest::Approx(rotation_value(t, w)).epsilon(1e-12));
        }
    }
    SUBCASE("gradient jacobian matches finite differences for a resonant factor") {
        auto sigma = make_flow_factor(
            HamiltonianTerm::resonant(0.05, Complex(0.6, 0.8), {3, 0}, {0, 0}), 1.0);
        const ElementaryGenFunction gf(sigma);
        const CVec w = random_point(rng, 2);
        const Eigen::MatrixXd dg = gf.gradient_jacobian(w);
        Eigen::MatrixXd fd(4, 4);
        const double h = 1e-6;
        for (int col = 0; col < 4; ++col) {
            CVec wp = w, wm = w;
            const Complex bump = (col % 2 == 0) ? Complex(h, 0.0) : Complex(0.0, h);
            wp[col / 2] += bump;
            wm[col / 2] -= bump;
            fd.col(col) = (to_real(gf.gradient(wp)) - to_real(gf.gradient(wm))) / (2.0 * h);
        }
        CHECK((dg - fd).norm() < 1e-6 * std::max(1.0, dg.norm()));
        CHECK(gf.symmetry_residual(w) < 1e-6);
    }
    SUBCASE("2-homogeneity of the value") {
        auto sigma = make_flow_factor(
            HamiltonianTerm::resonant(0.05, Complex(1.0, 0.0), {2, 1}, {0, 0}), 1.0);
        const ElementaryGenFunction gf(sigma);
        for (int trial = 0; trial < 5; ++trial) {
            const CVec w = random_point(rng, 2);
            const double f1 = gf.value(w);
            const double f2 = gf.value(scaled(w, 2.0));
            CHECK(std::abs(f2 - 4.0 * f1) <= 1e-9 * std::max(1.0, std::abs(f2)));
        }
    }
}

TEST_CASE("dG symmetry residual grows with injected symplecticity error") {
    // A factor whose differential is corrupted away from the symplectic group
    // must lose the Lagrangian-graph symmetry monotonically.
    class CorruptedFactor final : public FlowFactor {
    public:
        CorruptedFactor(std::shared_ptr<const FlowFactor> base, double corruption)
            : base_(std::move(base)), corruption_(corruption) {}
        int dimension() const override { return base_->dimension(); }
        CVec apply(const CVec& z) const override { return base_->apply(z); }
        std::pair<CVec, Eigen::MatrixXd> apply_with_differential(const CVec& z) const override {
            auto [img, d] = base_->apply_with_differential(z);
            d(0, 0) *= 1.0 + corruption_;
            return {std::move(img), std::move(d)};
        }
        bool linear() const override { return base_->linear(); }
        std::shared_ptr<const FlowFactor> subdivided(int) const override { return nullptr; }
        std::string label() const override { return "corrupted"; }

    private:
        std::shared_ptr<const FlowFactor> base_;
        double corruption_;
    };

    std::mt19937_64 rng(31);
    const CVec w = random_point(rng, 2);
    double previous = -1.0;
    for (const double corruption : {0.0, 0.01, 0.03, 0.09}) {
        auto factor = std::make_shared<CorruptedFactor>(small_rotation(2, 0.05), corruption);
        const ElementaryGenFunction gf(factor);
        const double residual = gf.symmetry_residual(w);
        CHECK(residual > previous);
        previous = residual;
        if (corruption == 0.0) CHECK(residual < 1e-9);
    }
    CHECK(previous > 1e-3);
}

TEST_CASE("assembled generating function") {
    std::mt19937_64 rng(37);

    SUBCASE("identity factors at t = 0 reduce to the coupling form") {
        const GeneratingFunction problem = identity_problem();
        const GeneratingChain v = random_chain(rng, 2, problem.block_count());
        double coupling = 0.0;
        const int count = problem.block_count();
        for (int j = 0; j < count; ++j)
            coupling += 0.5 * real_inner(v.blocks[j], mul_i(v.blocks[(j + 1) % count]));
        CHECK(problem.value(0.0, v) == doctest::Approx(coupling).epsilon(1e-13));
    }
    SUBCASE("2-homogeneity in the chain") {
        const GeneratingFunction problem = diagonal_problem();
        const GeneratingChain v = random_chain(rng, 2, problem.block_count());
        const double f = problem.value(0.4, v);
        const double f2 = problem.value(0.4, v.scaled_by(3.0));
        CHECK(f2 == doctest::Approx(9.0 * f).epsilon(1e-11));
    }
    SUBCASE("lens invariance of the value") {
        const GeneratingFunction problem = perturbed_problem();
        for (int trial = 0; trial < 3; ++trial) {
            const GeneratingChain v = random_chain(rng, 2, problem.block_count());
            const double f = problem.value(0.6, v);
            const double fg = problem.value(0.6, v.lens_image(lens33(), 1));
            CHECK(std::abs(f - fg) < 1e-10 * std::max(1.0, std::abs(f)));
        }
    }
    SUBCASE("domain of t is enforced") {
        const GeneratingFunction problem = identity_problem();
        const GeneratingChain v = random_chain(rng, 2, problem.block_count());
        CHECK_THROWS_AS(problem.value(-1.0, v), std::domain_error);
        CHECK_THROWS_AS(problem.value(3.0, v), std::domain_error);
    }
}

TEST_CASE("gradient of the generating function") {
    std::mt19937_64 rng(41);

    SUBCASE("matches central finite differences (linear problem)") {
        const GeneratingFunction problem = diagonal_problem();
        for (int trial = 0; trial < 3; ++trial) {
            const GeneratingChain v = random_chain(rng, 2, problem.block_count());
            const Eigen::VectorXd g = problem.gradient(0.3, v).flatten();
            const Eigen::VectorXd fd = fd_gradient_of_F(problem, 0.3, v, 1e-6);
            CHECK((g - fd).norm() < 1e-6 * std::max(1.0, g.norm()));
        }
    }
    SUBCASE("matches central finite differences (perturbed problem)") {
        const GeneratingFunction problem = perturbed_problem();
        const GeneratingChain v = random_chain(rng, 2, problem.block_count());
        const Eigen::VectorXd g = problem.gradient(0.3, v).flatten();
        const Eigen::VectorXd fd = fd_gradient_of_F(problem, 0.3, v, 1e-6);
        CHECK((g - fd).norm() < 1e-6 * std::max(1.0, g.norm()));
    }
    SUBCASE("Euler identity") {
        const GeneratingFunction problem = perturbed_problem();
        for (int trial = 0; trial < 3; ++trial) {
            const GeneratingChain v = random_chain(rng, 2, problem.block_count());
            const double t = 0.2 + 0.5 * trial;
            const double euler = problem.gradient(t, v).flatten().dot(v.flatten());
            CHECK(std::abs(euler - 2.0 * problem.value(t, v)) < 1e-9);
        }
    }
    SUBCASE("vanishes on chains built from true fixed points") {
        const GeneratingFunction problem = diagonal_problem();
        CVec e1(2, Complex(0.0, 0.0));
        e1[0] = Complex(1.0, 0.0);
        auto [chain, defect] = problem.chain_from_fixed_point(0.15, e1);
        CHECK(defect <= 1e-12);
        CHECK(problem.gradient(0.15, chain).norm() <= 1e-10);
    }
}

TEST_CASE("hessian of the generating function") {
    std::mt19937_64 rng(43);

    SUBCASE("chain independence for an all-linear problem") {
        const GeneratingFunction problem = diagonal_problem();
        REQUIRE(problem.all_linear());
        const GeneratingChain v1 = random_chain(rng, 2, problem.block_count());
        const GeneratingChain v2 = random_chain(rng, 2, problem.block_count());
        const Eigen::MatrixXd h1 = problem.hessian(0.25, v1);
        const Eigen::MatrixXd h2 = problem.hessian(0.25, v2);
        CHECK((h1 - h2).norm() < 1e-11 * std::max(1.0, h1.norm()));
        CHECK((h1 - h1.transpose()).norm() < 1e-6 * std::max(1.0, h1.norm()));
    }
    SUBCASE("matches finite differences of the gradient (perturbed problem)") {
        const GeneratingFunction problem = perturbed_problem();
        const GeneratingChain v = random_chain(rng, 2, problem.block_count());
        const double t = 0.45;
        const Eigen::MatrixXd h = problem.hessian(t, v);
        CHECK((h - h.transpose()).norm() < 1e-6 * std::max(1.0, h.norm()));

        const Eigen::VectorXd x = v.flatten();
        const double step = 1e-5;
        Eigen::MatrixXd fd(x.size(), x.size());
        GeneratingFunction::WitnessCache cache;
        for (int col = 0; col < x.size(); ++col) {
            Eigen::VectorXd xp = x, xm = x;
            xp[col] += step;
            xm[col] -= step;
            const Eigen::VectorXd gp =
                problem.gradient(t, GeneratingChain::unflatten(2, xp), &cache).flatten();
            const Eigen::VectorXd gm =
                problem.gradient(t, GeneratingChain::unflatten(2, xm), &cache).flatten();
            fd.col(col) = (gp - gm) / (2.0 * step);
        }
        CHECK((h - fd).norm() < 1e-5 * std::max(1.0, h.norm()));
    }
    SUBCASE("strictly decreasing in t away from vanishing rotation midpoints") {
        const GeneratingFunction problem = diagonal_problem();
        for (int trial = 0; trial < 5; ++trial) {
            const GeneratingChain v = random_chain(rng, 2, problem.block_count());
            const double f1 = problem.value(0.2, v);
            const double f2 = problem.value(0.9, v);
            CHECK(f1 > f2);
        }
    }
}

TEST_CASE("chain correspondence") {
    const GeneratingFunction problem = diagonal_problem();
    CVec e1(2, Complex(0.0, 0.0));
    e1[0] = Complex(1.0, 0.0);

    SUBCASE("identity factors at t = 0 give a constant chain") {
        const GeneratingFunction id = identity_problem();
        const CVec z{Complex(0.4, 0.1), Complex(-0.2, 0.3)};
        auto [chain, defect] = id.chain_from_fixed_point(0.0, z);
        CHECK(defect == 0.0);
        for (const CVec& b : chain.blocks) CHECK(distance(b, z) == 0.0);
    }
    SUBCASE("eigenvector of the diagonal map closes at its shift") {
        auto [chain, defect] = problem.chain_from_fixed_point(0.15, e1);
        CHECK(defect <= 1e-12);
        CHECK(problem.gradient(0.15, chain).norm() <= 1e-10);
    }
    SUBCASE("closure defect has the closed form off the shift") {
        auto [chain, defect] = problem.chain_from_fixed_point(0.2, e1);
        (void)chain;
        const double expected = std::abs(std::polar(1.0, -2.0 * kPi * 0.05) - Complex(1.0, 0.0));
        CHECK(defect == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("round trip through the projection") {
        auto [chain, defect] = problem.chain_from_fixed_point(0.15, e1);
        (void)defect;
        const auto extracted = problem.fixed_point_from_chain(chain, 0.15);
        CHECK(distance(extracted.point, e1) == 0.0);
        CHECK(extracted.fixed_point_residual <= 1e-12);
        // Euler forces the critical value to vanish at critical chains.
        const double cv = problem.value(0.15, chain);
        CHECK(std::abs(cv) <= 1e-9 * chain.norm() * chain.norm());
    }
    SUBCASE("non-critical chains violate the projection contract") {
        std::mt19937_64 rng(47);
        const GeneratingChain v = random_chain(rng, 2, problem.block_count());
        CHECK_THROWS_AS(problem.fixed_point_from_chain(v, 0.15), ContractViolation);
    }
}
