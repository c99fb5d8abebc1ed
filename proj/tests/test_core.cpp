#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lenstp/core.hpp"
#include "lenstp/errors.hpp"

using namespace lenstp;

namespace {

constexpr double kPi = std::numbers::pi;

CVec e1(int n) {
    CVec z(n, Complex(0.0, 0.0));
    z[0] = Complex(1.0, 0.0);
    return z;
}

CVec e2(int n) {
    CVec z(n, Complex(0.0, 0.0));
    z[1] = Complex(1.0, 0.0);
    return z;
}

CVec random_unit(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss;
    CVec z(n);
    for (int j = 0; j < n; ++j) z[j] = Complex(gauss(rng), gauss(rng));
    return normalized(z);
}

} // namespace

TEST_CASE("contact form on coordinate directions") {
    const CVec at = e1(2);
    CHECK(contact_form(at, mul_i(at)) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
    CHECK(contact_form(at, e2(2)) == doctest::Approx(0.0).epsilon(1e-14));

    CVec diag{Complex(1.0 / std::sqrt(2.0), 0.0), Complex(1.0 / std::sqrt(2.0), 0.0)};
    CHECK(contact_form(diag, mul_i(diag)) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
}

TEST_CASE("contact form rejects non-unit base points") {
    CVec z{Complex(2.0, 0.0), Complex(0.0, 0.0)};
    CHECK_THROWS_AS(contact_form(z, z), std::domain_error);
}

TEST_CASE("tangent vector construction checks tangency") {
    const CVec base = e1(2);
    CHECK_NOTHROW(make_tangent(base, mul_i(base)));
    CHECK_NOTHROW(make_tangent(base, e2(2)));
    CHECK_THROWS_AS(make_tangent(base, base), std::domain_error);
}

TEST_CASE("reeb flow periods") {
    const CVec z{Complex(0.3, -0.4), Complex(0.1, 0.2)};
    SUBCASE("half period negates") {
        const CVec half = reeb_flow(e1(2), 0.5);
        CHECK(std::abs(half[0] + Complex(1.0, 0.0)) < 1e-15);
    }
    SUBCASE("full period is the identity") {
        const CVec full = reeb_flow(z, 1.0);
        for (int j = 0; j < 2; ++j) CHECK(std::abs(full[j] - z[j]) < 1e-15);
    }
    SUBCASE("quarter period multiplies by i") {
        const CVec quarter = reeb_flow(e1(2), 0.25);
        CHECK(std::abs(quarter[0] - Complex(0.0, 1.0)) < 1e-15);
    }
    SUBCASE("composition law") {
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> uni(-2.0, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            const double s = uni(rng), t = uni(rng);
            const CVec lhs = reeb_flow(reeb_flow(z, s), t);
            const CVec rhs = reeb_flow(z, s + t);
            CHECK(distance(lhs, rhs) < 1e-12);
        }
    }
}

TEST_CASE("lens action") {
    LensSetting s33{2, 3, {1, 1}};
    s33.validate();

    SUBCASE("full cycle is the identity") {
        const CVec z{Complex(0.5, 0.2), Complex(-0.1, 0.7)};
        const CVec w = lens_apply(s33, z, 3);
        CHECK(distance(w, z) < 1e-15);
    }
    SUBCASE("componentwise rotation with distinct weights") {
        LensSetting s{2, 3, {1, 2}};
        const CVec z{Complex(1.0, 0.0), Complex(1.0, 0.0)};
        const CVec w = lens_apply(s, z, 1);
        CHECK(std::abs(w[0] - std::polar(1.0, 2.0 * kPi / 3.0)) < 1e-15);
        CHECK(std::abs(w[1] - std::polar(1.0, 4.0 * kPi / 3.0)) < 1e-15);
    }
    SUBCASE("antipodal action for k = 2") {
        LensSetting s{2, 2, {1, 1}};
        const CVec z{Complex(0.3, 0.1), Complex(0.2, -0.5)};
        const CVec w = lens_apply(s, z, 1);
        CHECK(distance(w, scaled(z, -1.0)) < 1e-15);
    }
    SUBCASE("coprimality is enforced") {
        LensSetting bad{2, 4, {2, 2}};
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}

TEST_CASE("contact form is lens invariant and commutes with the Reeb flow") {
    LensSetting s{2, 5, {1, 3}};
    s.validate();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const CVec p = random_unit(rng, 2);
        CVec dir = mul_i(p);  // Reeb direction, tangent at p
        const double before = contact_form(p, dir);
        const double after = contact_form(lens_apply(s, p, 1), lens_apply(s, dir, 1));
        CHECK(std::abs(before - after) < 1e-12);

        const CVec a = lens_apply(s, reeb_flow(p, 0.37), 2);
        const CVec b = reeb_flow(lens_apply(s, p, 2), 0.37);
        CHECK(distance(a, b) < 1e-14);
    }
}

TEST_CASE("orbit distance") {
    LensSetting s33{2, 3, {1, 1}};
    const CVec p = e1(2);

    SUBCASE("zero on the same point") { CHECK(orbit_distance(s33, p, p) == 0.0); }
    SUBCASE("zero across the orbit") {
        LensSetting s2{2, 2, {1, 1}};
        const CVec q = scaled(p, -1.0);
        CHECK(orbit_distance(s2, p, q) < 1e-15);
    }
    SUBCASE("brute force value for orthogonal axes") {
        // All three group images of e1 stay on the first axis, so each is at
        // distance sqrt(2) from e2.
        double brute = std::numeric_limits<double>::infinity();
        for (int g = 0; g < 3; ++g)
            brute = std::min(brute, distance(lens_apply(s33, p, g), e2(2)));
        CHECK(brute == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        CHECK(orbit_distance(s33, p, e2(2)) == doctest::Approx(brute).epsilon(1e-14));
    }
    SUBCASE("symmetry") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            const CVec a = random_unit(rng, 2), b = random_unit(rng, 2);
            CHECK(orbit_distance(s33, a, b) ==
                  doctest::Approx(orbit_distance(s33, b, a)).epsilon(1e-12));
        }
    }
    SUBCASE("rejects non-unit points") {
        CHECK_THROWS_AS(orbit_distance(s33, scaled(p, 2.0), p), std::domain_error);
    }
}

TEST_CASE("orbit representative is the lexicographic minimum") {
    LensSetting s33{2, 3, {1, 1}};
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const CVec p = random_unit(rng, 2);
        const CVec rep = orbit_representative(s33, p);
        CHECK(orbit_distance(s33, rep, p) < 1e-12);
        // Idempotent: the representative of the representative is itself.
        const CVec rep2 = orbit_representative(s33, normalized(rep));
        CHECK(distance(rep, rep2) < 1e-12);
    }
}
