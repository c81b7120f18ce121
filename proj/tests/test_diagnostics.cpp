#include "otguide/diagnostics.hpp"
#include "otguide/errors.hpp"
#include "otguide/svg.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace otguide;
using otguide::testing::Gen;

namespace {

Embedding vec(double x, double y) { return Eigen::Vector2d(x, y); }

PromptSet axes() { return PromptSet({"east", "north"}, {vec(1, 0), vec(0, 1)}); }

// Unit vectors spread over the half circle between v and -v.
EmbeddingList arc(Gen& gen, std::size_t n, const Embedding& v, const Embedding& w) {
    EmbeddingList out;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = gen.uniform(0.05, M_PI - 0.05);
        out.push_back(std::cos(t) * v + std::sin(t) * w);
    }
    return out;
}

}  // namespace

TEST(Phi, Examples) {
    const PromptSet p = axes();
    const Eigen::VectorXd at_first = phi(vec(1, 0), p, Metric::Cosine);
    EXPECT_EQ(at_first[0], 0.0);
    EXPECT_EQ(at_first[1], 1.0);

    Gen gen(61);
    const PromptSet random = PromptSet::random(4, 6, 1);
    const Embedding u = gen.unit(6);
    const Eigen::VectorXd f = phi(u, random, Metric::Geodesic);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(f[static_cast<Eigen::Index>(j)], geodesic_distance(u, random[j]));
    }
}

TEST(Pushforward, Examples) {
    const PromptSet p = axes();
    EXPECT_EQ(pushforward(vec(0.6, 0.8), p, Metric::Cosine, Embedding::Zero(2)).norm(), 0.0);

    // n = m = 1 in Mean mode: g = grad D, so w = |grad D|^2 = 1 here.
    const PromptSet north({"north"}, {vec(0, 1)});
    const EmbeddingList u = {vec(1, 0)};
    const EmbeddingList g = loss_gradients(AggregationMode::mean(), u, north.embeddings(),
                                           Metric::Cosine);
    const Eigen::VectorXd w = pushforward(u[0], north, Metric::Cosine, g[0]);
    ASSERT_EQ(w.size(), 1);
    EXPECT_NEAR(w[0], 1.0, 1e-15);
}

TEST(Pushforward, LinearInTangent) {
    Gen gen(62);
    for (int trial = 0; trial < 50; ++trial) {
        const PromptSet p = PromptSet::random(gen.integer(1, 4), 5, static_cast<std::uint64_t>(trial));
        const Embedding u = gen.unit(5);
        const Embedding g = gen.vector(5);
        const double alpha = gen.uniform(-3.0, 3.0);
        for (const Metric metric : {Metric::Cosine, Metric::Geodesic}) {
            const Eigen::VectorXd base = pushforward(u, p, metric, g);
            EXPECT_LT((pushforward(u, p, metric, alpha * g) - alpha * base).norm(),
                      1e-12 * (1.0 + base.norm()));
            EXPECT_EQ(pushforward(u, p, metric, Embedding::Zero(5)).norm(), 0.0);
        }
    }
}

TEST(Pushforward, GeodesicSingularity) {
    EXPECT_THROW(pushforward(vec(1, 0), axes(), Metric::Geodesic, vec(0, 1)), SingularGradientError);
}

TEST(AssignPatches, PromptsAssignToThemselves) {
    const PromptSet p = PromptSet::random(4, 6, 3);
    const AssignmentReport r = assign_patches(p.embeddings(), p, Metric::Cosine);
    EXPECT_EQ(r.assigned, (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(r.counts, (std::vector<int>{1, 1, 1, 1}));
}

TEST(AssignPatches, HandComputedCounts) {
    // Distances to (1,0): 0, 1 - 0.9/sqrt(0.82), 1. To (0,1): 1, 1 - 0.1/sqrt(0.82), 0.
    const EmbeddingList us = {vec(1, 0), vec(0.9, 0.1).normalized(), vec(0, 1)};
    const AssignmentReport r = assign_patches(us, axes(), Metric::Cosine);
    EXPECT_EQ(r.assigned, (std::vector<int>{0, 0, 1}));
    EXPECT_EQ(r.counts, (std::vector<int>{2, 1}));
}

TEST(AssignPatches, TiesGoToLowestIndex) {
    const EmbeddingList us = {vec(1, 1), vec(-1, -1)};
    const AssignmentReport r = assign_patches(us, axes(), Metric::Cosine);
    EXPECT_EQ(r.assigned, (std::vector<int>{0, 0}));
    EXPECT_EQ(r.counts, (std::vector<int>{2, 0}));
}

TEST(AssignPatches, DistanceRowsMatchCostMatrixBitwise) {
    Gen gen(63);
    for (int trial = 0; trial < 20; ++trial) {
        const PromptSet p = PromptSet::random(gen.integer(1, 5), 4, static_cast<std::uint64_t>(trial));
        const EmbeddingList us = gen.units(static_cast<std::size_t>(gen.integer(1, 12)), 4);
        const AssignmentReport r = assign_patches(us, p, Metric::Geodesic);
        EXPECT_EQ(r.distances, build_cost_matrix(us, p.embeddings(), Metric::Geodesic).entries());
        for (std::size_t i = 0; i < us.size(); ++i) {
            Eigen::Index best = 0;
            r.distances.row(static_cast<Eigen::Index>(i)).minCoeff(&best);
            EXPECT_EQ(r.assigned[i], static_cast<int>(best));
        }
        EXPECT_EQ(std::accumulate(r.counts.begin(), r.counts.end(), 0), static_cast<int>(us.size()));
    }
}

TEST(BalanceMetrics, Examples) {
    const BalanceMetrics even = balance_metrics(std::vector<int>{32, 32});
    EXPECT_EQ(even.min_count, 32);
    EXPECT_DOUBLE_EQ(even.normalized_entropy, 1.0);

    const BalanceMetrics collapsed = balance_metrics(std::vector<int>{64, 0});
    EXPECT_EQ(collapsed.min_count, 0);
    EXPECT_EQ(collapsed.normalized_entropy, 0.0);

    // -(p log p + q log q) / log 2 with p = 36/64, q = 28/64.
    const double p = 36.0 / 64.0;
    const double q = 28.0 / 64.0;
    const double expected = -(p * std::log(p) + q * std::log(q)) / std::log(2.0);
    const BalanceMetrics fig = balance_metrics(std::vector<int>{36, 28});
    EXPECT_EQ(fig.min_count, 28);
    EXPECT_NEAR(fig.normalized_entropy, expected, 1e-15);
    EXPECT_NEAR(fig.normalized_entropy, 0.9887, 5e-5);
}

TEST(BalanceMetrics, SinglePromptIsBalanced) {
    EXPECT_EQ(balance_metrics(std::vector<int>{7}).normalized_entropy, 1.0);
    EXPECT_THROW(balance_metrics(std::vector<int>{}), ArgumentError);
    EXPECT_THROW(balance_metrics(std::vector<int>{0, 0}), ArgumentError);
}

TEST(BalanceMetrics, Pigeonhole) {
    Gen gen(64);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> counts(static_cast<std::size_t>(gen.integer(1, 6)));
        for (int& c : counts) c = gen.integer(0, 20);
        counts.front() += 1;
        const int n = std::accumulate(counts.begin(), counts.end(), 0);
        const double share = static_cast<double>(n) / static_cast<double>(counts.size());
        const BalanceMetrics b = balance_metrics(counts);
        EXPECT_LE(b.min_count, share);
        EXPECT_GE(*std::max_element(counts.begin(), counts.end()), share);
        EXPECT_GE(b.normalized_entropy, 0.0);
        EXPECT_LE(b.normalized_entropy, 1.0 + 1e-15);
    }
}

TEST(TangentReport, MeanModeSharesWeights) {
    Gen gen(65);
    const PromptSet p = PromptSet::random(2, 5, 4);
    const EmbeddingList us = gen.units(7, 5);
    const TangentReport r = tangent_report(us, p, Metric::Cosine, AggregationMode::mean());
    for (Eigen::Index i = 0; i < 7; ++i) {
        EXPECT_EQ(r.coupling.plan().row(i), r.coupling.plan().row(0));
    }
    EXPECT_EQ(mix_ratio_stddev(r.coupling), 0.0);
    EXPECT_EQ(r.objective, "mean_distance");
    EXPECT_EQ(r.epsilon, 0.0);
    EXPECT_TRUE(r.phi.allFinite() && r.pushforward.allFinite());
}

TEST(TangentReport, OtFansOut) {
    Gen gen(66);
    for (int trial = 0; trial < 10; ++trial) {
        const PromptSet p = PromptSet::random(2, 6, static_cast<std::uint64_t>(trial));
        const EmbeddingList us = gen.units(12, 6);
        SinkhornConfig cfg;
        cfg.epsilon = 0.05;
        const TangentReport ot =
            tangent_report(us, p, Metric::Cosine, AggregationMode::optimal_transport(cfg));
        EXPECT_GT(mix_ratio_stddev(ot.coupling), 0.0);
        EXPECT_EQ(ot.objective, "regularized_transport");
        EXPECT_EQ(ot.epsilon, 0.05);
    }
}

TEST(TangentReport, AntipodalFanOutExceedsMean) {
    Gen gen(67);
    for (int trial = 0; trial < 10; ++trial) {
        const PromptSet p = PromptSet::antipodal(6, static_cast<std::uint64_t>(trial));
        Embedding side = gen.unit(6);
        side -= side.dot(p[0]) * p[0];
        side.normalize();
        const EmbeddingList us = arc(gen, 16, p[0], side);
        SinkhornConfig cfg;
        cfg.epsilon = 0.05;
        const double ot = mix_ratio_stddev(
            tangent_report(us, p, Metric::Cosine, AggregationMode::optimal_transport(cfg)).coupling);
        const double mean =
            mix_ratio_stddev(tangent_report(us, p, Metric::Cosine, AggregationMode::mean()).coupling);
        EXPECT_EQ(mean, 0.0);
        EXPECT_GT(ot, mean);
    }
}

TEST(TangentReport, SinglePatchModesCoincide) {
    Gen gen(68);
    const PromptSet p = PromptSet::random(3, 4, 9);
    const EmbeddingList u = gen.units(1, 4);
    const TangentReport ot =
        tangent_report(u, p, Metric::Cosine, AggregationMode::optimal_transport({}));
    const TangentReport mean = tangent_report(u, p, Metric::Cosine, AggregationMode::mean());
    EXPECT_LT((ot.coupling.plan() - mean.coupling.plan()).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((ot.pushforward - mean.pushforward).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(ot.phi, mean.phi);
}

TEST(MixRatio, NeedsTwoPrompts) {
    EXPECT_THROW(mix_ratio_stddev(independent_coupling(3, 1)), ArgumentError);
}

TEST(Svg, PanelsAndMetadata) {
    Gen gen(69);
    const PromptSet two({"cat & dog", "<sea>"}, PromptSet::random(2, 4, 1).embeddings());
    const EmbeddingList us = gen.units(5, 4);
    const TangentReport r = tangent_report(us, two, Metric::Cosine, AggregationMode::optimal_transport({}));
    QuiverOptions opts;
    opts.arrow_scale = 2.5;
    const std::string svg = render_tangent_svg(r, two.labels(), opts);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("arrow_scale=2.500000"), std::string::npos);
    EXPECT_NE(svg.find("objective=regularized_transport"), std::string::npos);
    EXPECT_NE(svg.find("D(u, cat &amp; dog)"), std::string::npos);
    EXPECT_NE(svg.find("D(u, &lt;sea&gt;)"), std::string::npos);

    const PromptSet three = PromptSet::random(3, 4, 2);
    const std::string svg3 = render_tangent_svg(
        tangent_report(us, three, Metric::Cosine, AggregationMode::mean()), three.labels());
    std::size_t panels = 0;
    for (std::size_t at = svg3.find("class=\"panel\""); at != std::string::npos;
         at = svg3.find("class=\"panel\"", at + 1)) {
        ++panels;
    }
    EXPECT_EQ(panels, 3u);

    const PromptSet one = PromptSet::random(1, 4, 2);
    EXPECT_THROW(render_tangent_svg(tangent_report(us, one, Metric::Cosine, AggregationMode::mean()),
                                    one.labels()),
                 ArgumentError);
}
