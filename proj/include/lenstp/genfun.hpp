#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lenstp/core.hpp"
#include "lenstp/dynamics.hpp"

namespace lenstp {

/// Generating function of the small rotation z -> e^{-2 pi i t} z:
/// q_t(w) = -tan(pi t) ||w||^2, defined for |t| < 1/2.
double rotation_value(double t, const CVec& w);
CVec rotation_gradient(double t, const CVec& w);

/// Elementary generating function of one C^1-small factor sigma.
/// For a query w the midpoint equation (z + sigma(z))/2 = w is solved for z;
/// the gradient field is G(w) = i (z - sigma(z)) and the value follows from
/// Euler's identity f(w) = <G(w), w> / 2.
class ElementaryGenFunction {
public:
    ElementaryGenFunction(std::shared_ptr<const FlowFactor> sigma, double tolerance = 1e-12,
                          int max_iterations = 50);

    struct MidpointSolve {
        CVec witness;             // z
        CVec image;               // sigma(z)
        Eigen::MatrixXd dsigma;   // D sigma(z); empty unless requested
        int iterations = 0;
        double residual = 0.0;
    };

    /// Newton from z0 = w (or the hint). `with_differential` additionally
    /// tracks D sigma along the solve; without it a derivative-free damped
    /// iteration is used, which the C^1-smallness bound makes a contraction.
    MidpointSolve solve(const CVec& w, const CVec* hint = nullptr,
                        bool with_differential = false) const;

    CVec gradient(const CVec& w, const CVec* hint = nullptr, CVec* witness_out = nullptr) const;
    double value(const CVec& w, const CVec* hint = nullptr, CVec* witness_out = nullptr) const;

    /// dG(w) = 2 J (I - D sigma)(I + D sigma)^{-1}; symmetric when sigma is
    /// symplectic (the graph of G is then Lagrangian).
    Eigen::MatrixXd gradient_jacobian(const CVec& w, const CVec* hint = nullptr,
                                      CVec* witness_out = nullptr) const;

    /// ||dG - dG^T||_F / ||dG||_F at w.
    double symmetry_residual(const CVec& w) const;

    const FlowFactor& factor() const { return *sigma_; }

private:
    std::shared_ptr<const FlowFactor> sigma_;
    double tolerance_;
    int max_iterations_;
};

/// A point of (C^n)^{m+7} with cyclic successor indexing.
struct GeneratingChain {
    int n = 0;
    std::vector<CVec> blocks;

    int block_count() const { return static_cast<int>(blocks.size()); }
    double norm() const;
    void normalize();
    GeneratingChain scaled_by(double s) const;

    Eigen::VectorXd flatten() const;
    static GeneratingChain unflatten(int n, const Eigen::VectorXd& x);

    /// Diagonal lens action applied to every block.
    GeneratingChain lens_image(const LensSetting& setting, long power) const;

    static GeneratingChain zero(int n, int blocks);
};

/// The assembled generating function F_t on (C^n)^{m+7}, t in (-1, 3):
/// factor terms on the first m edges, seven rotation terms q_{t/7}, and the
/// cyclic coupling sum_j <v_j, i v_{j+1}> / 2.
class GeneratingFunction {
public:
    GeneratingFunction(LensSetting setting, FactorList factors, double newton_tolerance = 1e-12,
                       int newton_max_iterations = 50);

    int factor_count() const { return m_; }                  // m (even)
    int block_count() const { return m_ + 7; }
    int dimension() const { return setting_.n; }
    int real_dimension() const { return 2 * setting_.n * block_count(); }
    const LensSetting& setting() const { return setting_; }
    const FactorList& factors() const { return factors_; }
    const ElementaryGenFunction& elementary(int j) const { return elementary_[j]; }

    /// Per-edge witness hints, reused across nearby evaluations.
    struct WitnessCache {
        std::vector<CVec> witnesses;
    };

    double value(double t, const GeneratingChain& v, WitnessCache* cache = nullptr) const;
    GeneratingChain gradient(double t, const GeneratingChain& v,
                             WitnessCache* cache = nullptr) const;
    Eigen::MatrixXd hessian(double t, const GeneratingChain& v,
                            WitnessCache* cache = nullptr) const;
    /// d(gradient)/dt; only the rotation edges contribute.
    GeneratingChain gradient_t_derivative(double t, const GeneratingChain& v) const;

    /// Broken trajectory through the factors and seven rotation steps.
    /// Returns the chain and the closure defect |e^{-2 pi i t/7} v_{m+7} - v_1|,
    /// which vanishes iff z is a fixed point of e^{-2 pi i t} Phi.
    std::pair<GeneratingChain, double> chain_from_fixed_point(double t, const CVec& z) const;

    struct ExtractedFixedPoint {
        CVec point;                    // v_1
        double gradient_norm = 0.0;
        double fixed_point_residual = 0.0;  // |e^{-2 pi i t} Phi(v_1) - v_1|
        double ratio = 0.0;                 // residual / gradient norm
        double closure_defect = 0.0;
    };

    /// Projects a near-critical chain to its fixed point v_1. Throws
    /// ContractViolation if the chain is not critical to `gradient_tolerance`
    /// relative to its norm.
    ExtractedFixedPoint fixed_point_from_chain(const GeneratingChain& v, double t,
                                               double gradient_tolerance = 1e-6) const;

    /// Composition of all factors (equals the lift up to factorization drift).
    CVec apply_factors(const CVec& z) const;

    bool all_linear() const;
    void check_t(double t) const;  // enforces t in (-1, 3)

private:
    double edge_value(int edge, double t, const CVec& midpoint, WitnessCache* cache) const;
    CVec edge_gradient(int edge, double t, const CVec& midpoint, WitnessCache* cache) const;

    LensSetting setting_;
    FactorList factors_;
    std::vector<ElementaryGenFunction> elementary_;
    int m_ = 0;
};

} // namespace lenstp
