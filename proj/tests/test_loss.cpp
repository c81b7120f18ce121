#include "otguide/errors.hpp"
#include "otguide/loss.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace otguide;
using otguide::testing::Gen;

namespace {

Embedding vec(double x, double y) { return Eigen::Vector2d(x, y); }

SinkhornConfig tight(double eps) {
    SinkhornConfig cfg;
    cfg.epsilon = eps;
    cfg.tolerance = 1e-9;
    cfg.max_iterations = 100000;
    return cfg;
}

// Regularized objective as a function of the stacked patch embeddings.
double reg_objective_at(const Eigen::VectorXd& stacked, std::size_t n, Eigen::Index d,
                        const EmbeddingList& vs, Metric metric, const SinkhornConfig& cfg) {
    EmbeddingList us;
    for (std::size_t i = 0; i < n; ++i) {
        us.push_back(stacked.segment(static_cast<Eigen::Index>(i) * d, d));
    }
    return ot_loss(us, vs, metric, cfg).value;
}

}  // namespace

TEST(MeanLoss, Examples) {
    const EmbeddingList u = {vec(1, 2)};
    const EmbeddingList v = {vec(-3, 1)};
    EXPECT_EQ(mean_loss(u, v, Metric::Cosine), cosine_distance(u[0], v[0]));

    const EmbeddingList axes = {vec(1, 0), vec(0, 1)};
    EXPECT_DOUBLE_EQ(mean_loss(axes, axes, Metric::Cosine), 0.5);
    EXPECT_THROW(mean_loss({}, axes, Metric::Cosine), ArgumentError);
    EXPECT_THROW(mean_loss(axes, {}, Metric::Cosine), ArgumentError);
}

TEST(MeanLoss, MatchesLargeEpsilonTransport) {
    Gen gen(31);
    for (int trial = 0; trial < 20; ++trial) {
        const EmbeddingList us = gen.units(static_cast<std::size_t>(gen.integer(1, 8)), 5);
        const EmbeddingList vs = gen.units(static_cast<std::size_t>(gen.integer(1, 4)), 5);
        SinkhornConfig cfg;
        cfg.epsilon = 1e3;
        EXPECT_NEAR(ot_loss(us, vs, Metric::Cosine, cfg).transport_cost,
                    mean_loss(us, vs, Metric::Cosine), 1e-3);
    }
}

TEST(MeanLoss, EqualsCostAgainstIndependentCoupling) {
    Gen gen(32);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = static_cast<std::size_t>(gen.integer(1, 10));
        const std::size_t m = static_cast<std::size_t>(gen.integer(1, 5));
        const EmbeddingList us = gen.units(n, 4);
        const EmbeddingList vs = gen.units(m, 4);
        for (const Metric metric : {Metric::Cosine, Metric::Geodesic}) {
            const CostMatrix c = build_cost_matrix(us, vs, metric);
            const double coupled =
                c.entries().cwiseProduct(independent_coupling(c.rows(), c.cols()).plan()).sum();
            EXPECT_NEAR(mean_loss(us, vs, metric), coupled, 1e-12);
        }
    }
}

TEST(OtLoss, SingleProblemIsForced) {
    const EmbeddingList u = {vec(1, 2)};
    const EmbeddingList v = {vec(2, -1.5)};
    const LossReport r = ot_loss(u, v, Metric::Cosine, SinkhornConfig{});
    const double d = cosine_distance(u[0], v[0]);
    EXPECT_NEAR(r.transport_cost, d, 1e-15);
    EXPECT_NEAR(r.value, d - SinkhornConfig{}.epsilon, 1e-15);
}

TEST(OtLoss, AxesClosedForm) {
    const EmbeddingList axes = {vec(1, 0), vec(0, 1)};
    SinkhornConfig cfg;
    cfg.epsilon = 0.1;
    cfg.tolerance = 1e-12;
    const LossReport r = ot_loss(axes, axes, Metric::Cosine, cfg);
    const double q = std::exp(-10.0);
    EXPECT_NEAR(r.transport_cost, q / (1.0 + q), 1e-12);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.mode.kind, AggregationMode::Kind::OptimalTransport);
}

TEST(OtLoss, IdenticalSetsBeatMean) {
    Gen gen(33);
    for (int trial = 0; trial < 20; ++trial) {
        const EmbeddingList us = gen.units(static_cast<std::size_t>(gen.integer(1, 7)), 6);
        EXPECT_LE(ot_loss(us, us, Metric::Cosine, SinkhornConfig{}).transport_cost,
                  mean_loss(us, us, Metric::Cosine) + 1e-12);
    }
}

TEST(OtLoss, StrictNonConvergenceCarriesIterations) {
    Gen gen(34);
    const EmbeddingList us = gen.units(6, 4);
    const EmbeddingList vs = gen.units(3, 4);
    SinkhornConfig cfg;
    cfg.epsilon = 0.01;
    cfg.max_iterations = 3;
    cfg.epsilon_scaling = false;
    const LossReport lax = ot_loss(us, vs, Metric::Cosine, cfg);
    EXPECT_FALSE(lax.converged);
    try {
        ot_loss(us, vs, Metric::Cosine, cfg, true);
        FAIL() << "expected NonConvergenceError";
    } catch (const NonConvergenceError& e) {
        EXPECT_EQ(e.iterations(), 3);
    }
}

TEST(LossGradients, ZeroAtMinimum) {
    const EmbeddingList u = {vec(0.6, 0.8)};
    const EmbeddingList g = loss_gradients(AggregationMode::optimal_transport({}), u, u,
                                           Metric::Cosine);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_LT(g[0].norm(), 1e-15);
}

TEST(LossGradients, MeanModeUsesIdenticalRows) {
    Gen gen(35);
    const EmbeddingList us = gen.units(5, 4);
    const EmbeddingList vs = gen.units(3, 4);
    const LossReport r = aggregate_loss(AggregationMode::mean(), us, vs, Metric::Cosine);
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(r.coupling(i, j), 1.0 / 15.0);
    }
    for (std::size_t i = 0; i < us.size(); ++i) {
        Embedding expected = Embedding::Zero(4);
        for (const Embedding& v : vs) expected += distance_grad(Metric::Cosine, us[i], v);
        expected /= 15.0;
        EXPECT_LT((r.patch_gradients[i] - expected).norm(), 1e-15);
    }
    EXPECT_EQ(r.value, r.transport_cost);
    EXPECT_NEAR(r.value, mean_loss(us, vs, Metric::Cosine), 1e-12);
}

TEST(LossGradients, EnvelopeMatchesFiniteDifferences) {
    Gen gen(36);
    for (const Metric metric : {Metric::Cosine, Metric::Geodesic}) {
        for (int trial = 0; trial < 5; ++trial) {
            const std::size_t n = 4;
            const Eigen::Index d = 6;
            const EmbeddingList us = gen.units(n, d);
            const EmbeddingList vs = gen.units(3, d);
            const SinkhornConfig cfg = tight(trial % 2 == 0 ? 0.05 : 0.2);
            const LossReport r = ot_loss(us, vs, metric, cfg);
            const Eigen::VectorXd fd = otguide::testing::central_difference(
                [&](const Eigen::VectorXd& x) { return reg_objective_at(x, n, d, vs, metric, cfg); },
                otguide::testing::stack(us), 1e-4);
            EXPECT_LE(otguide::testing::rel_error(otguide::testing::stack(r.patch_gradients), fd), 1e-4)
                << to_string(metric) << " trial " << trial;
        }
    }
}

TEST(LossGradients, FiniteEverywhere) {
    Gen gen(37);
    for (int trial = 0; trial < 50; ++trial) {
        const EmbeddingList us = gen.units(static_cast<std::size_t>(gen.integer(1, 10)), 3);
        const EmbeddingList vs = gen.units(static_cast<std::size_t>(gen.integer(1, 4)), 3);
        for (const auto& g : ot_loss(us, vs, Metric::Cosine, SinkhornConfig{}).patch_gradients) {
            EXPECT_TRUE(g.allFinite());
        }
    }
}

TEST(LossGradients, GeodesicSingularityNamesPatch) {
    const EmbeddingList us = {vec(0, 1), vec(1, 0)};
    const EmbeddingList vs = {vec(1, 0), vec(-1, 1)};
    try {
        aggregate_loss(AggregationMode::mean(), us, vs, Metric::Geodesic);
        FAIL() << "expected SingularGradientError";
    } catch (const SingularGradientError& e) {
        EXPECT_NE(std::string(e.what()).find("patch 1"), std::string::npos) << e.what();
    }
}

TEST(LossGradients, CouplingShapeChecked) {
    const EmbeddingList us = {vec(0, 1)};
    EXPECT_THROW(loss_gradients(independent_coupling(2, 1), us, us, Metric::Cosine), ShapeError);
}

TEST(OtLoss, RowsDifferOnNonConstantCost) {
    Gen gen(38);
    for (int trial = 0; trial < 20; ++trial) {
        const EmbeddingList us = gen.units(6, 5);
        const EmbeddingList vs = gen.units(2, 5);
        const LossReport r = ot_loss(us, vs, Metric::Cosine, SinkhornConfig{});
        double widest = 0.0;
        for (Eigen::Index i = 0; i < 6; ++i) {
            for (Eigen::Index k = i + 1; k < 6; ++k) {
                widest = std::max(widest,
                                  (r.coupling.plan().row(i) - r.coupling.plan().row(k)).lpNorm<1>());
            }
        }
        EXPECT_GT(widest, 0.0);
    }
}

TEST(AggregationMode, ParseAndPrint) {
    EXPECT_EQ(parse_mode("ot"), AggregationMode::Kind::OptimalTransport);
    EXPECT_EQ(parse_mode("mean"), AggregationMode::Kind::Mean);
    EXPECT_EQ(to_string(AggregationMode::Kind::Mean), "mean");
    EXPECT_THROW(parse_mode("sum"), ConfigError);
}
