#pragma once

#include "otguide/measures.hpp"

#include <Eigen/Dense>

namespace otguide {

struct SinkhornConfig {
    double epsilon = 0.05;
    int max_iterations = 10000;
    // L-infinity bound on the marginal violation of the returned plan.
    double tolerance = 1e-6;
    // Log-sum-exp updates on the dual potentials. The plain scaling path
    // underflows exp(-C/epsilon) for small epsilon and is kept for
    // cross-checking.
    bool log_domain = true;
    // Log-domain only: warm-start from a decreasing sequence of coarser
    // epsilons. The final stage iterates at `epsilon`, so the fixed point is
    // unchanged; only the iteration count drops.
    bool epsilon_scaling = true;

    // Throws ConfigError unless epsilon > 0, tolerance > 0, max_iterations >= 1.
    void validate() const;
};

// A transport plan: nonnegative, finite n x m matrix.
class Coupling {
public:
    Coupling() = default;
    explicit Coupling(Eigen::MatrixXd plan);

    const Eigen::MatrixXd& plan() const noexcept { return plan_; }
    Eigen::Index rows() const noexcept { return plan_.rows(); }
    Eigen::Index cols() const noexcept { return plan_.cols(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return plan_(i, j); }

private:
    Eigen::MatrixXd plan_;
};

struct SinkhornSolution {
    Coupling plan;
    Eigen::VectorXd potentials_f;
    Eigen::VectorXd potentials_g;
    double transport_cost = 0.0;  // <C, P>
    double reg_objective = 0.0;   // <C, P> - epsilon * H(P)
    int iterations_used = 0;
    bool converged = false;
    double marginal_error = 0.0;
};

/// H(P) = -sum_ij P_ij (log P_ij - 1), with zero entries contributing 0.
/// Note H([[1]]) = 1.
double entropy(const Coupling& plan);

/// Entropic optimal transport between weights a (rows) and b (columns).
///
/// Alternates row and column scalings until the marginal violation of the
/// plan drops to cfg.tolerance or cfg.max_iterations is reached. A
/// nonconverged result is returned with converged == false; deciding whether
/// that is fatal is up to the caller. Potentials satisfy
/// P_ij = exp((f_i + g_j - C_ij) / epsilon).
SinkhornSolution sinkhorn_solve(const WeightVector& a, const WeightVector& b, const CostMatrix& cost,
                                const SinkhornConfig& cfg);

struct LpSolution {
    double cost = 0.0;
    Coupling plan;
};

/// Exact Kantorovich cost by enumerating every permutation. Only uniform
/// square problems with n <= 7 are accepted (an optimal plan is then a scaled
/// permutation matrix); anything else raises CapabilityError.
LpSolution lp_oracle(const WeightVector& a, const WeightVector& b, const CostMatrix& cost);

/// max(|rowsum(P) - a|_inf, |colsum(P) - b|_inf)
double check_marginals(const Coupling& plan, const WeightVector& a, const WeightVector& b);

}  // namespace otguide
