#include "otguide/sinkhorn.hpp"

#include "otguide/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace otguide {

namespace {

constexpr int kMaxOracleSize = 7;
constexpr int kCoarseStageIterations = 200;

void require_shapes(const WeightVector& a, const WeightVector& b, Eigen::Index rows,
                    Eigen::Index cols) {
    if (a.size() != rows || b.size() != cols) {
        throw ShapeError("marginals of size " + std::to_string(a.size()) + "/" +
                         std::to_string(b.size()) + " do not match a " + std::to_string(rows) +
                         "x" + std::to_string(cols) + " matrix");
    }
}

// log(sum_k exp(x_k)) without overflow.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double peak = x.maxCoeff();
    if (!std::isfinite(peak)) return peak;
    return peak + std::log((x.array() - peak).exp().sum());
}

Eigen::MatrixXd gibbs_plan(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                           const Eigen::MatrixXd& cost, double epsilon) {
    Eigen::MatrixXd plan(cost.rows(), cost.cols());
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
        for (Eigen::Index i = 0; i < cost.rows(); ++i) {
            plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / epsilon);
        }
    }
    return plan;
}

double marginal_violation(const Eigen::MatrixXd& plan, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b) {
    const double rows = (plan.rowwise().sum() - a).cwiseAbs().maxCoeff();
    const double cols = (plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
    return std::max(rows, cols);
}

struct Iterate {
    Eigen::VectorXd f;
    Eigen::VectorXd g;
    Eigen::MatrixXd plan;
    int iterations = 0;
    double error = std::numeric_limits<double>::infinity();
};

// Runs log-domain iterations at one epsilon, starting from the potentials in
// `it`. Returns once the marginal violation reaches `tolerance` or `budget`
// iterations have been spent.
void log_domain_stage(Iterate& it, const Eigen::VectorXd& log_a, const Eigen::VectorXd& log_b,
                      const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                      const Eigen::MatrixXd& cost, double eps, double tolerance, int budget) {
    const Eigen::Index n = cost.rows();
    const Eigen::Index m = cost.cols();
    Eigen::VectorXd scratch_row(m);
    Eigen::VectorXd scratch_col(n);
    for (int k = 0; k < budget; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            scratch_row = (it.g - cost.row(i).transpose()) / eps;
            it.f[i] = eps * (log_a[i] - log_sum_exp(scratch_row));
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            scratch_col = (it.f - cost.col(j)) / eps;
            it.g[j] = eps * (log_b[j] - log_sum_exp(scratch_col));
        }
        it.plan = gibbs_plan(it.f, it.g, cost, eps);
        ++it.iterations;
        it.error = marginal_violation(it.plan, a, b);
        if (it.error <= tolerance) return;
    }
}

Iterate solve_log_domain(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         const Eigen::MatrixXd& cost, const SinkhornConfig& cfg) {
    const Eigen::VectorXd log_a = a.array().log();
    const Eigen::VectorXd log_b = b.array().log();

    Iterate it;
    it.f = Eigen::VectorXd::Zero(cost.rows());
    it.g = Eigen::VectorXd::Zero(cost.cols());

    // Epsilon scaling: when epsilon is small against the spread of the costs
    // the potentials must travel far in steps of size ~epsilon, so start from
    // a coarse epsilon and halve it, warm-starting each stage.
    if (cfg.epsilon_scaling) {
        const double span = cost.maxCoeff() - cost.minCoeff();
        std::vector<double> schedule;
        for (double eps = span; eps > 2.0 * cfg.epsilon; eps *= 0.5) schedule.push_back(eps);
        for (const double eps : schedule) {
            const int budget = std::min(kCoarseStageIterations, cfg.max_iterations - it.iterations - 1);
            if (budget <= 0) break;
            log_domain_stage(it, log_a, log_b, a, b, cost, eps, cfg.tolerance, budget);
        }
    }
    log_domain_stage(it, log_a, log_b, a, b, cost, cfg.epsilon, cfg.tolerance,
                     std::max(cfg.max_iterations - it.iterations, 1));
    return it;
}

Iterate solve_scaling(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                      const Eigen::MatrixXd& cost, const SinkhornConfig& cfg) {
    const double eps = cfg.epsilon;
    // std::exp rather than Eigen's vectorized exp, which clamps its argument
    // and turns a fully underflowed kernel into a constant one.
    const Eigen::MatrixXd kernel = cost.unaryExpr([eps](double c) { return std::exp(-c / eps); });
    Eigen::VectorXd u = Eigen::VectorXd::Ones(cost.rows());
    Eigen::VectorXd v = Eigen::VectorXd::Ones(cost.cols());

    Iterate it;
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        u = a.cwiseQuotient(kernel * v);
        v = b.cwiseQuotient(kernel.transpose() * u);
        it.iterations = k;
        if (!u.allFinite() || !v.allFinite()) {
            // exp(-C/eps) underflowed; the scaling form cannot represent the plan.
            it.error = std::numeric_limits<double>::infinity();
            break;
        }
        it.plan = u.asDiagonal() * kernel * v.asDiagonal();
        it.error = marginal_violation(it.plan, a, b);
        if (it.error <= cfg.tolerance) break;
    }
    it.f = eps * u.array().log().matrix();
    it.g = eps * v.array().log().matrix();
    if (it.plan.size() == 0 || !it.plan.allFinite()) {
        it.plan = Eigen::MatrixXd::Zero(cost.rows(), cost.cols());
    }
    return it;
}

}  // namespace

void SinkhornConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ConfigError("sinkhorn epsilon must be a positive finite number");
    }
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
        throw ConfigError("sinkhorn tolerance must be a positive finite number");
    }
    if (max_iterations < 1) {
        throw ConfigError("sinkhorn max_iterations must be >= 1");
    }
}

Coupling::Coupling(Eigen::MatrixXd plan) : plan_(std::move(plan)) {
    if (!plan_.allFinite()) {
        throw DomainError("coupling has non-finite entries");
    }
    if ((plan_.array() < 0.0).any()) {
        throw DomainError("coupling has a negative entry");
    }
}

double entropy(const Coupling& plan) {
    double h = 0.0;
    const Eigen::MatrixXd& p = plan.plan();
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            const double x = p(i, j);
            if (x > 0.0) h -= x * (std::log(x) - 1.0);
        }
    }
    return h;
}

SinkhornSolution sinkhorn_solve(const WeightVector& a, const WeightVector& b, const CostMatrix& cost,
                                const SinkhornConfig& cfg) {
    cfg.validate();
    require_shapes(a, b, cost.rows(), cost.cols());

    Iterate it = cfg.log_domain ? solve_log_domain(a.values(), b.values(), cost.entries(), cfg)
                                : solve_scaling(a.values(), b.values(), cost.entries(), cfg);

    SinkhornSolution sol{Coupling(std::move(it.plan)), std::move(it.f), std::move(it.g)};
    sol.transport_cost = cost.entries().cwiseProduct(sol.plan.plan()).sum();
    sol.reg_objective = sol.transport_cost - cfg.epsilon * entropy(sol.plan);
    sol.iterations_used = it.iterations;
    sol.marginal_error = it.error;
    sol.converged = it.error <= cfg.tolerance;
    return sol;
}

LpSolution lp_oracle(const WeightVector& a, const WeightVector& b, const CostMatrix& cost) {
    const Eigen::Index n = cost.rows();
    if (n != cost.cols() || n > kMaxOracleSize) {
        throw CapabilityError("lp_oracle only supports square problems up to " +
                              std::to_string(kMaxOracleSize) + "x" +
                              std::to_string(kMaxOracleSize));
    }
    require_shapes(a, b, n, n);
    const double share = 1.0 / static_cast<double>(n);
    const auto is_uniform = [share](const WeightVector& w) {
        return (w.values().array() - share).abs().maxCoeff() <= 1e-15;
    };
    if (!is_uniform(a) || !is_uniform(b)) {
        throw CapabilityError("lp_oracle only supports uniform marginals");
    }

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::vector<Eigen::Index> best = perm;
    double best_total = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
        if (total < best_total) {
            best_total = total;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) plan(i, best[static_cast<std::size_t>(i)]) = share;
    return LpSolution{best_total * share, Coupling(std::move(plan))};
}

double check_marginals(const Coupling& plan, const WeightVector& a, const WeightVector& b) {
    require_shapes(a, b, plan.rows(), plan.cols());
    return marginal_violation(plan.plan(), a.values(), b.values());
}

}  // namespace otguide
