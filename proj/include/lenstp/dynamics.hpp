#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lenstp/core.hpp"

namespace lenstp {

/// Catalog of 2-homogeneous Hamiltonians on C^n \ 0.
///
/// diagonal:  H(z) = pi * sum_j c_j |z_j|^2           (always invariant)
/// resonant:  H(z) = eps * Re(c * prod_j z_j^{a_j} conj(z_j)^{b_j}) * ||z||^{2-d}
///            with d = sum_j (a_j + b_j); invariant under the lens action iff
///            sum_j (a_j - b_j) w_j = 0 (mod k).
struct HamiltonianTerm {
    enum class Kind { Diagonal, Resonant };

    Kind kind = Kind::Diagonal;
    std::vector<double> coefficients;  // diagonal c_j
    double epsilon = 0.0;              // resonant amplitude
    Complex phase{1.0, 0.0};           // resonant c
    std::vector<int> a;                // holomorphic exponents
    std::vector<int> b;                // antiholomorphic exponents

    static HamiltonianTerm diagonal(std::vector<double> c);
    static HamiltonianTerm resonant(double eps, Complex phase, std::vector<int> a,
                                    std::vector<int> b);

    int dimension() const;
    double value(const CVec& z) const;
    /// Real gradient packed as a complex vector: (dH/dx_j) + i (dH/dy_j).
    CVec gradient(const CVec& z) const;
    /// Real 2n x 2n Hessian in interleaved coordinates.
    Eigen::MatrixXd real_hessian(const CVec& z) const;

    /// sum_j (a_j - b_j) w_j mod k; zero for diagonal terms.
    int invariance_defect(const LensSetting& setting) const;
    std::string describe() const;
};

/// One leg of the contact isotopy: flow `hamiltonian` for `duration`.
struct IsotopyStep {
    HamiltonianTerm hamiltonian;
    double duration = 1.0;
};

/// An elementary 1-homogeneous equivariant map with its differential.
class FlowFactor {
public:
    virtual ~FlowFactor() = default;
    virtual int dimension() const = 0;
    virtual CVec apply(const CVec& z) const = 0;
    /// Image together with the real 2n x 2n Jacobian at z.
    virtual std::pair<CVec, Eigen::MatrixXd> apply_with_differential(const CVec& z) const = 0;
    virtual bool linear() const = 0;
    /// The factor representing 1/pieces of this flow.
    virtual std::shared_ptr<const FlowFactor> subdivided(int pieces) const = 0;
    virtual std::string label() const = 0;
};

std::shared_ptr<const FlowFactor> make_flow_factor(const HamiltonianTerm& term, double duration);
std::shared_ptr<const FlowFactor> identity_factor(int n);

/// Time-T Hamiltonian flow of one term with its differential, convention
/// i_X omega = -dH (so H = pi ||z||^2 generates the Reeb lift e^{2 pi i t} z).
/// Diagonal terms use the exact closed form; resonant terms a fixed-step
/// RK4 with the variational equation for the differential.
std::pair<CVec, Eigen::MatrixXd> flow_step(const HamiltonianTerm& term, double T, const CVec& z);

/// The R_+ homogeneous, Z/kZ-equivariant lift: composition of the isotopy
/// step flows in listed order (first listed acts first).
struct HomogeneousMap {
    LensSetting setting;
    std::vector<std::shared_ptr<const FlowFactor>> steps;

    CVec apply(const CVec& z) const;
    std::pair<CVec, Eigen::MatrixXd> apply_with_differential(const CVec& z) const;
    bool all_linear() const;
};

/// Validates every term (dimension and invariance congruence, naming the
/// offending step) and assembles the lift.
HomogeneousMap build_lift(const LensSetting& setting, const std::vector<IsotopyStep>& steps);

/// g(p) with phi^* alpha = e^g alpha for the sphere restriction phi of Phi;
/// equals -2 log ||Phi(p)|| at unit p.
double conformal_factor(const HomogeneousMap& map, const CVec& p);

/// The lift rewritten as a product of C^1-small factors, m even.
struct FactorList {
    std::vector<std::shared_ptr<const FlowFactor>> sigmas;
    double theta_achieved = 0.0;  // max sampled ||D sigma - I||
    int count() const { return static_cast<int>(sigmas.size()); }
};

/// Splits each defining step into equal substeps, doubling the count until
/// the sampled operator norm ||D sigma - I|| <= theta on a deterministic
/// sphere sample, then pads with identity factors so the count is even.
FactorList factorize(const HomogeneousMap& map, double theta, int sample_points = 256,
                     int max_substeps = 4096);

} // namespace lenstp
