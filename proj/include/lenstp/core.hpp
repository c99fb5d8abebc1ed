#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace lenstp {

using Complex = std::complex<double>;

/// A point of C^n. std::complex stores re/im adjacently, so a CVec is the
/// interleaved coordinate vector (x_1, y_1, ..., x_n, y_n) of R^{2n}.
/// All inner products below are the real Euclidean product of R^{2n}.
using CVec = std::vector<Complex>;

double norm_squared(const CVec& z);
double norm(const CVec& z);
double distance(const CVec& a, const CVec& b);

/// Real Euclidean inner product of R^{2n}.
double real_inner(const CVec& u, const CVec& v);

CVec mul_i(const CVec& z);               // z -> i z
CVec scaled(const CVec& z, double s);
CVec scaled(const CVec& z, Complex s);
CVec add(const CVec& a, const CVec& b);
CVec sub(const CVec& a, const CVec& b);
CVec normalized(const CVec& z);

/// Interleaved real view (x_1, y_1, ..., x_n, y_n) and back.
Eigen::VectorXd to_real(const CVec& z);
CVec from_real(const Eigen::VectorXd& x);

/// The real 2n x 2n matrix of multiplication by i.
Eigen::MatrixXd complex_structure(int n);

/// Equivariance context: S^{2n-1} with the Z/kZ action
/// z_j -> exp(2 pi i w_j / k) z_j.
struct LensSetting {
    int n = 2;                 // complex dimension
    int k = 2;                 // group order
    std::vector<int> weights;  // w_1..w_n, each prime to k

    /// Throws ConfigError unless n >= 1, k >= 2, weights.size() == n and
    /// gcd(w_j, k) == 1 for every j.
    void validate() const;
};

/// A tangent vector of the unit sphere: base point plus a direction with
/// vanishing real inner product against the base.
struct TangentVector {
    CVec base;
    CVec direction;
};

/// Validates unit base and tangency (|<dir, base>| <= 1e-12 ||dir||).
TangentVector make_tangent(CVec base, CVec direction);

/// Standard contact form (1/2pi) sum_j (x_j dy_j - y_j dx_j) evaluated on a
/// direction at a unit base point. Equals (1/2pi) <i.at, v>.
double contact_form(const CVec& at, const CVec& direction);
double contact_form(const TangentVector& v);

/// Reeb flow z -> exp(2 pi i t) z, reduced mod 1 so integer times are exact.
CVec reeb_flow(const CVec& z, double t);

/// Generator power of the lens action applied componentwise.
CVec lens_apply(const LensSetting& setting, const CVec& z, long power);

/// min over group elements g of || g.p - q ||; both points must be unit.
double orbit_distance(const LensSetting& setting, const CVec& p, const CVec& q);

/// Lexicographically smallest group image of p (interleaved real order).
CVec orbit_representative(const LensSetting& setting, const CVec& p);

} // namespace lenstp
