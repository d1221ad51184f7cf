#include "hypograph/exact_diffusion.hpp"
#include "hypograph/lowrank_diffusion.hpp"
#include "hypograph/oracle_check.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace hypograph;

namespace {

LabelledGraph path2() { return LabelledGraph(2, {{0, 1}}, Matrix(2, 1, {0.0, 1.0})); }

FeatureConfig cfg_of(bool diff, bool zs, bool tp, std::size_t M, std::size_t k) {
    FeatureConfig c;
    c.diff = diff;
    c.zero_start = zs;
    c.time_param = tp;
    c.max_degree = M;
    c.walk_length = k;
    return c;
}

RankOneFunctional constant_functional(std::size_t M, std::vector<double> u) {
    return RankOneFunctional{std::vector<std::vector<double>>(M, std::move(u))};
}

} // namespace

TEST(CuMatrix, PathGraph) {
    const auto C = cu_matrix(path2(), std::vector<double>{1.0}, cfg_of(true, false, false, 1, 1));
    EXPECT_EQ(C.get(0, 1), 1.0);
    EXPECT_EQ(C.get(1, 0), -1.0);
}

TEST(CuMatrix, ZeroVectorGivesZeroMatrix) {
    Rng rng(1);
    const auto g = random_graph(rng, 6, 3, 0.5);
    const auto C = cu_matrix(g, std::vector<double>(3, 0.0), cfg_of(true, true, false, 2, 1));
    for (double v : C.values()) EXPECT_EQ(v, 0.0);
}

TEST(CuMatrix, TimeCoordinateIsAlwaysOne) {
    Rng rng(2);
    const auto g = random_graph(rng, 6, 2, 0.6);
    const std::vector<double> u{1.0, 0.0, 0.0};
    for (auto diff : {true, false}) {
        const auto C = cu_matrix(g, u, cfg_of(diff, false, true, 2, 1));
        for (double v : C.values()) EXPECT_EQ(v, 1.0);
    }
}

TEST(CuMatrix, RawValuesAndIsolatedDiagonal) {
    LabelledGraph g(3, {{0, 1}}, Matrix(3, 1, {2.0, 3.0, 5.0}));
    const std::vector<double> u{2.0};
    const auto Cd = cu_matrix(g, u, cfg_of(true, false, false, 1, 1));
    const auto Cr = cu_matrix(g, u, cfg_of(false, false, false, 1, 1));
    EXPECT_EQ(Cd.get(2, 2), 0.0);
    EXPECT_EQ(Cr.get(2, 2), 10.0);
    EXPECT_EQ(Cr.get(1, 0), 4.0);
}

TEST(CuMatrix, DimensionMismatchThrows) {
    EXPECT_THROW(cu_matrix(path2(), std::vector<double>{1.0}, cfg_of(true, false, true, 1, 1)), DimensionError);
}

TEST(LowRankRecursion, PathSingleStep) {
    const auto g = path2();
    const auto s = lowrank_recursion(g, transition_matrix(g), constant_functional(1, {1.0}),
                                     cfg_of(true, false, false, 1, 1));
    EXPECT_EQ(s(0, 1), 1.0);
    EXPECT_EQ(s(1, 1), -1.0);
}

TEST(LowRankRecursion, PathTwoStepsCancel) {
    const auto g = path2();
    const auto s = lowrank_recursion(g, transition_matrix(g), constant_functional(1, {1.0}),
                                     cfg_of(true, false, false, 1, 2));
    EXPECT_EQ(s(0, 1), 0.0);
}

TEST(LowRankRecursion, ZeroFunctional) {
    Rng rng(3);
    const auto g = random_graph(rng, 7, 2, 0.5);
    const auto s = lowrank_recursion(g, transition_matrix(g), constant_functional(3, {0.0, 0.0}),
                                     cfg_of(true, false, false, 3, 4));
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        EXPECT_EQ(s(i, 0), 1.0);
        for (std::size_t m = 1; m <= 3; ++m) EXPECT_EQ(s(i, m), 0.0);
    }
}

TEST(LowRankRecursion, BaseCaseMatchesClosedForm) {
    // f_{1,m} = c_m (P . C^{u_{M-m+1}} . ... . C^{u_M}) 1
    Rng rng(4);
    const auto g = random_graph(rng, 6, 2, 0.6);
    const auto P = random_transition(rng, g, TransitionKind::Weighted);
    const auto cfg = cfg_of(true, false, false, 3, 1);
    const auto ell = random_unit_functional(rng, 2, 3);
    const auto s = lowrank_recursion(g, P, ell, cfg);
    const auto c = cfg.lift_coefficients();
    for (std::size_t m = 1; m <= 3; ++m) {
        std::vector<double> had(P.values().begin(), P.values().end());
        for (std::size_t q = 3 - m + 1; q <= 3; ++q) {
            const auto cu = cu_values(g, ell.u[q - 1], cfg);
            for (std::size_t e = 0; e < had.size(); ++e) had[e] *= cu[e];
        }
        const auto y = CsrMatrix(g.pattern(), had).multiply(std::vector<double>(g.num_nodes(), 1.0));
        for (std::size_t i = 0; i < g.num_nodes(); ++i) EXPECT_NEAR(s(i, m), c[m] * y[i], 1e-14);
    }
}

TEST(LowRankRecursion, ColumnZeroStaysOneAndTraceLength) {
    Rng rng(5);
    const auto g = random_graph(rng, 8, 2, 0.4);
    std::vector<LowRankState> trace;
    lowrank_recursion(g, random_transition(rng, g, TransitionKind::Attention), random_unit_functional(rng, 2, 2),
                      cfg_of(true, false, false, 2, 6), &trace);
    ASSERT_EQ(trace.size(), 7u);
    for (const auto& s : trace)
        for (std::size_t i = 0; i < g.num_nodes(); ++i) EXPECT_EQ(s(i, 0), 1.0);
}

TEST(LowRankRecursion, NonFiniteReportsStepAndDegree) {
    LabelledGraph g(2, {{0, 1}}, Matrix(2, 1, {0.0, 1.0}));
    try {
        lowrank_recursion(g, transition_matrix(g), constant_functional(2, {1e160}), cfg_of(true, false, false, 2, 1));
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("k = 1, m = 2"), std::string::npos) << e.what();
    }
}

TEST(LowRankRecursion, PatternAndShapeChecks) {
    const auto g = path2();
    LabelledGraph tri(3, {{0, 1}, {1, 2}, {0, 2}}, Matrix(3, 1));
    EXPECT_THROW(lowrank_recursion(g, transition_matrix(tri), constant_functional(1, {1.0}),
                                   cfg_of(true, false, false, 1, 1)),
                 DimensionError);
    EXPECT_THROW(lowrank_recursion(g, transition_matrix(g), constant_functional(2, {1.0}),
                                   cfg_of(true, false, false, 1, 1)),
                 DimensionError);
}

TEST(LowRankRecursion, AlgOptWithFactorialsIsBitIdentical) {
    Rng rng(6);
    const auto g = random_graph(rng, 8, 3, 0.5);
    const auto P = transition_matrix(g);
    const auto ell = random_unit_functional(rng, 3, 4);
    auto cfg = cfg_of(true, true, false, 4, 5);
    const auto base = batch_features(g, P, std::span(&ell, 1), cfg);
    cfg.coefficients = {1.0, 1.0, 1.0 / 2.0, 1.0 / 6.0, 1.0 / 24.0};
    EXPECT_EQ(batch_features(g, P, std::span(&ell, 1), cfg), base);
}

TEST(LowRankRecursion, AlgOptMatchesOracle) {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = random_graph(rng, 1 + rng.next() % 7, 2, 0.5);
        auto cfg = cfg_of(trial % 2, trial % 3 == 0, trial % 4 == 0, 3, rng.next() % 5);
        cfg.coefficients = {1.0, rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const auto P = random_transition(rng, g, static_cast<TransitionKind>(trial % 3));
        const std::vector fs{random_unit_functional(rng, cfg.lift_dim(2), 3)};
        EXPECT_LE(max_relative_error(batch_features(g, P, fs, cfg), batch_features_exact(g, P, fs, cfg)), 1e-10);
    }
}

TEST(ZeroStartCorrection, ZeroAttributesIsIdentity) {
    Rng rng(8);
    auto g = random_graph(rng, 6, 2, 0.5);
    g = g.with_attributes(Matrix(6, 2, 0.0));
    const auto cfg = cfg_of(true, true, false, 3, 3);
    const auto ell = random_unit_functional(rng, 2, 3);
    const auto s = lowrank_recursion(g, transition_matrix(g), ell, cfg);
    const auto z = zerostart_correct(g, s, ell, cfg);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(z[i], s(i, 3));
}

TEST(ZeroStartCorrection, DegreeOneTwoTermExpansion) {
    Rng rng(9);
    const auto g = random_graph(rng, 5, 2, 0.6);
    auto cfg = cfg_of(true, true, false, 1, 3);
    cfg.coefficients = {1.0, 0.7};
    const auto ell = random_unit_functional(rng, 2, 1);
    const auto s = lowrank_recursion(g, transition_matrix(g), ell, cfg);
    const auto z = zerostart_correct(g, s, ell, cfg);
    for (std::size_t i = 0; i < 5; ++i)
        EXPECT_DOUBLE_EQ(z[i], 0.7 * dot(ell.u[0], g.attribute(i)) * s(i, 0) + s(i, 1));
}

TEST(ZeroStartCorrection, OffReturnsStateColumn) {
    Rng rng(10);
    const auto g = random_graph(rng, 5, 2, 0.6);
    const auto cfg = cfg_of(true, false, false, 2, 2);
    const auto ell = random_unit_functional(rng, 2, 2);
    const auto s = lowrank_recursion(g, transition_matrix(g), ell, cfg);
    EXPECT_EQ(zerostart_correct(g, s, ell, cfg), s.column(2));
}

TEST(ZeroStartCorrection, MatchesExactZeroStartedFeatures) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_graph(rng, 1 + rng.next() % 6, 1 + rng.next() % 3, 0.5);
        const auto cfg = cfg_of(rng.next() % 2, true, rng.next() % 2, 1 + rng.next() % 3, rng.next() % 5);
        const auto P = random_transition(rng, g, static_cast<TransitionKind>(trial % 3));
        const auto ell = random_unit_functional(rng, cfg.lift_dim(g.attr_dim()), cfg.max_degree);
        const auto z = zerostart_correct(g, lowrank_recursion(g, P, ell, cfg), ell, cfg);
        const auto phi = node_features_exact(g, P, cfg, cfg.walk_length);
        const auto lM = functional_as_seq(ell, cfg.max_degree, cfg.max_degree);
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
            const double ref = inner_product(lM, phi[i]);
            EXPECT_LE(std::abs(z[i] - ref) / std::max(1.0, std::abs(ref)), 1e-10);
        }
    }
}

TEST(ZeroStartCorrection, ConfigMismatchThrows) {
    const auto g = path2();
    const auto ell = constant_functional(2, {1.0});
    const auto s = lowrank_recursion(g, transition_matrix(g), ell, cfg_of(true, true, false, 2, 1));
    EXPECT_THROW(zerostart_correct(g, s, constant_functional(3, {1.0}), cfg_of(true, true, false, 3, 1)),
                 DimensionError);
}

TEST(BatchFeatures, SingleFunctionalReducesToRecursion) {
    Rng rng(12);
    const auto g = random_graph(rng, 7, 2, 0.5);
    const auto P = transition_matrix(g);
    const auto cfg = cfg_of(true, true, false, 3, 4);
    const auto ell = random_unit_functional(rng, 2, 3);
    const auto B = batch_features(g, P, std::span(&ell, 1), cfg);
    const auto all = zerostart_correct_all(g, lowrank_recursion(g, P, ell, cfg), ell, cfg);
    EXPECT_EQ(B, all);
    const auto top = zerostart_correct(g, lowrank_recursion(g, P, ell, cfg), ell, cfg);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(B(i, 2), top[i]);
}

TEST(BatchFeatures, DuplicatedFunctionalDuplicatesColumns) {
    Rng rng(13);
    const auto g = random_graph(rng, 7, 2, 0.5);
    const auto ell = random_unit_functional(rng, 2, 2);
    const std::vector fs{ell, random_unit_functional(rng, 2, 2), ell};
    const auto B = batch_features(g, transition_matrix(g), fs, cfg_of(true, true, false, 2, 3));
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t m = 0; m < 2; ++m) EXPECT_EQ(B(i, m), B(i, 4 + m));
}

TEST(BatchFeatures, InconsistentShapesThrow) {
    const auto g = path2();
    const std::vector fs{constant_functional(2, {1.0}), constant_functional(3, {1.0})};
    EXPECT_THROW(batch_features(g, transition_matrix(g), fs, cfg_of(true, true, false, 2, 1)), DimensionError);
}

TEST(BatchFeatures, TranslationInvariantWithoutZeroStart) {
    Rng rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + rng.next() % 7;
        auto g = random_graph(rng, n, 2, 0.5);
        Matrix dyadic(n, 2), shifted(n, 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < 2; ++a) {
                dyadic(i, a) = std::ldexp(static_cast<double>(rng.next() % 32), -3);
                shifted(i, a) = dyadic(i, a) + 1.5;
            }
        const auto cfg = cfg_of(true, false, trial % 2, 3, 4);
        const std::vector fs{random_unit_functional(rng, cfg.lift_dim(2), 3)};
        const auto a = g.with_attributes(dyadic), b = g.with_attributes(shifted);
        const auto Fa = batch_features(a, transition_matrix(a), fs, cfg);
        const auto Fb = batch_features(b, transition_matrix(b), fs, cfg);
        EXPECT_LE(max_relative_error(Fa, Fb), 1e-12);
    }
}

TEST(BatchFeatures, PermutationEquivariant) {
    Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + rng.next() % 9;
        const auto g = random_graph(rng, n, 2, 0.5);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[rng.next() % (i + 1)]);
        const auto h = permute_graph(g, perm);
        const auto cfg = cfg_of(true, true, true, 3, 4);
        const std::vector fs{random_unit_functional(rng, 3, 3), random_unit_functional(rng, 3, 3)};
        const auto Fg = batch_features(g, transition_matrix(g), fs, cfg);
        const auto Fh = batch_features(h, transition_matrix(h), fs, cfg);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < Fg.cols(); ++c) EXPECT_NEAR(Fh(perm[i], c), Fg(i, c), 1e-12);
    }
}

TEST(BatchFeatures, ScalingOneComponentScalesHigherDegrees) {
    Rng rng(16);
    const auto g = random_graph(rng, 7, 2, 0.5);
    const auto P = transition_matrix(g);
    const auto cfg = cfg_of(true, false, false, 3, 4);
    const auto ell = random_unit_functional(rng, 2, 3);
    const auto base = lowrank_recursion(g, P, ell, cfg);
    for (std::size_t m = 1; m <= 3; ++m) {
        auto scaled = ell;
        for (double& x : scaled.u[3 - m]) x *= 2.5;  // u_{M-m+1}
        const auto s = lowrank_recursion(g, P, scaled, cfg);
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t mp = 1; mp <= 3; ++mp) {
                const double expect = mp >= m ? 2.5 * base(i, mp) : base(i, mp);
                EXPECT_NEAR(s(i, mp), expect, 1e-12 * std::max(1.0, std::abs(expect)));
            }
    }
}

TEST(BatchFeatures, OracleEquivalenceAllVariations) {
    CheckOptions opt;
    opt.graphs = 10;
    opt.seed = 99;
    const auto report = run_oracle_check(opt);
    EXPECT_EQ(report.cases, 240u);
    for (const auto& row : report.rows) EXPECT_LE(row.max_rel_error, 1e-10) << row.config;
}
