#include "spectral_sift/error.hpp"
#include "spectral_sift/preprocess.hpp"
#include "spectral_sift/wavesel.hpp"

#include "wavesel_oracles.hpp"

#include <gtest/gtest.h>

using namespace spectral_sift;
using namespace spectral_sift::testing;

TEST(ExcludeTail, TopIndices) {
    EXPECT_EQ(exclude_tail(12, 3), (BandList{9, 10, 11}));
    EXPECT_TRUE(exclude_tail(5, 0).empty());
    EXPECT_THROW(exclude_tail(5, 5), InvalidArgument);
    EXPECT_EQ(usable_bands(5, {1, 3}), (BandList{0, 2, 4}));
}

TEST(InitByCorrelation, MatchesOracle) {
    std::mt19937_64 rng(61);
    const Matrix x = random_matrix(rng, 30, 9);
    Vector y(30);
    for (int i = 0; i < 30; ++i) y(i) = x(i, 4) + 0.5 * x(i, 7) > 0 ? 1.0 : 0.0;
    EXPECT_EQ(init_by_correlation(x, y, 3, {8}), correlation_oracle(x, y, 3, {8}));
    EXPECT_THROW(init_by_correlation(x, y, 8, {8}), InvalidArgument);
    Matrix tied(4, 2);
    tied << 1, 1, 2, 2, 3, 3, 4, 4;
    Vector ty(4);
    ty << 0, 0, 1, 1;
    EXPECT_EQ(init_by_correlation(tied, ty, 1), BandList{0});
}

TEST(R2Forward, SingleExactBand) {
    std::mt19937_64 rng(62);
    const Matrix x = random_matrix(rng, 25, 8);
    const Vector y = x.col(5);
    R2ForwardOptions o;
    o.target = 1;
    const SelectionReport r = r2_forward_select(x, y, o);
    EXPECT_EQ(r.selected, BandList{5});
    ASSERT_EQ(r.r2_trace.size(), 1u);
    EXPECT_NEAR(r.r2_trace[0], 1.0, 1e-12);
    EXPECT_TRUE(std::isnan(r.initial_r2));
}

TEST(R2Forward, OrthogonalPairFoundFirst) {
    std::mt19937_64 rng(63);
    Matrix raw = random_matrix(rng, 30, 12);
    raw = raw.rowwise() - raw.colwise().mean();
    const Matrix q = Eigen::HouseholderQR<Matrix>(raw).householderQ() * Matrix::Identity(30, 12);
    const Vector y = q.col(2) + q.col(9);
    R2ForwardOptions o;
    o.target = 2;
    const SelectionReport r = r2_forward_select(q, y, o);
    // exhaustive search over every pair agrees
    double best = -1.0;
    std::set<int> best_pair;
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j) {
            const double v = nipals_r2(q, y, {i, j}, 5);
            if (v > best) {
                best = v;
                best_pair = {i, j};
            }
        }
    EXPECT_EQ(std::set<int>(r.selected.begin(), r.selected.end()), best_pair);
    EXPECT_EQ(best_pair, (std::set<int>{2, 9}));
}

TEST(R2Forward, AgreesWithGreedyOracle) {
    std::mt19937_64 rng(64);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix x = random_matrix(rng, 24, 10);
        const Vector y = x.col(1) - 0.7 * x.col(6) + 0.3 * random_vector(rng, 24);
        R2ForwardOptions o;
        o.excluded = {9};
        o.initial = init_by_correlation(x, y, 2, o.excluded);
        o.target = 6;
        o.max_components = 3;
        const SelectionReport r = r2_forward_select(x, y, o);
        EXPECT_EQ(r.selected, greedy_oracle(x, y, o.initial, 6, {9}, 3)) << trial;
        for (std::size_t i = 1; i < r.r2_trace.size(); ++i) EXPECT_GE(r.r2_trace[i], r.r2_trace[i - 1] - 1e-12);
    }
}

TEST(R2Forward, StopCallbackEndsEarly) {
    std::mt19937_64 rng(65);
    const Matrix x = random_matrix(rng, 20, 8);
    const Vector y = random_vector(rng, 20);
    R2ForwardOptions o;
    o.target = 6;
    std::vector<std::size_t> seen;
    o.stop = [&](const BandList& s) {
        seen.push_back(s.size());
        return s.size() == 3;
    };
    const SelectionReport r = r2_forward_select(x, y, o);
    EXPECT_EQ(r.selected.size(), 3u);
    EXPECT_TRUE(r.stopped_early);
    EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(R2Forward, SkipsConstantBandWithWarning) {
    std::mt19937_64 rng(66);
    Matrix x = random_matrix(rng, 20, 4);
    x.col(2).setConstant(1.0);
    const Vector y = x.col(0) + x.col(3);
    R2ForwardOptions o;
    o.target = 3;
    o.initial = {0, 3};
    const SelectionReport r = r2_forward_select(x, y, o);
    EXPECT_EQ(r.selected.size(), 3u);
    EXPECT_NE(r.selected[2], 2);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(R2Forward, Errors) {
    std::mt19937_64 rng(67);
    const Matrix x = random_matrix(rng, 10, 5);
    const Vector y = random_vector(rng, 10);
    R2ForwardOptions o;
    o.target = 5;
    o.excluded = {4};
    EXPECT_THROW(r2_forward_select(x, y, o), InvalidArgument);
    o.target = 2;
    o.initial = {4};
    EXPECT_THROW(r2_forward_select(x, y, o), InvalidArgument);
    o.initial = {1, 1};
    EXPECT_THROW(r2_forward_select(x, y, o), InvalidArgument);
    o.initial = {};
    EXPECT_THROW(r2_forward_select(x, Vector::Ones(10), o), InvalidArgument);
    EXPECT_THROW(r2_forward_select(x, Vector::Ones(9), o), InvalidArgument);
}

TEST(Covproc, AlphaFormula) {
    Vector y(3), t(3);
    y << 1, -1, 2;
    t << 2, 0, 1;
    EXPECT_DOUBLE_EQ(covproc_alpha(y, t), 4.0 / 5.0);
    EXPECT_TRUE(std::isnan(covproc_alpha(y, Vector::Zero(3))));
}

TEST(Covproc, SingleProportionalColumn) {
    std::mt19937_64 rng(68);
    const int n = 40;
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = i % 2;
    Matrix x = random_matrix(rng, n, 6);
    x.col(3) = 2.0 * y;
    const SelectionReport r = covproc_select(x, y, CovprocOptions{1, {}, true});
    ASSERT_EQ(r.rounds.size(), 1u);
    EXPECT_EQ(r.rounds[0].bands, BandList{3});
    // enumeration over prefixes: only the first reaches the maximal alpha
    const auto& a = r.rounds[0].alpha;
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i], a[0]);
}

TEST(Covproc, MatchesIndependentRounds) {
    std::mt19937_64 rng(69);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix x = random_matrix(rng, 30, 10);
        Vector y(30);
        for (int i = 0; i < 30; ++i) y(i) = x(i, 2) + x(i, 5) > 0 ? 1.0 : 0.0;
        const CovprocOptions opt{3, {9}, true};
        const SelectionReport r = covproc_select(x, y, opt);
        const BandList usable = usable_bands(10, {9});
        const auto oracle =
            covproc_oracle(autoscale(select_columns(x, usable)), y.array() - y.mean(), 3);
        ASSERT_EQ(r.rounds.size(), oracle.size());
        for (std::size_t k = 0; k < oracle.size(); ++k) {
            const auto& got = r.rounds[k];
            ASSERT_EQ(got.alpha.size(), oracle[k].alpha.size());
            for (std::size_t i = 0; i < got.alpha.size(); ++i) {
                if (std::isnan(oracle[k].alpha[i])) {
                    EXPECT_TRUE(std::isnan(got.alpha[i]));
                } else {
                    EXPECT_NEAR(got.alpha[i], oracle[k].alpha[i], 1e-10);
                }
            }
            ASSERT_EQ(static_cast<int>(got.bands.size()), oracle[k].best_len);
            for (int i = 0; i < oracle[k].best_len; ++i)
                EXPECT_EQ(got.bands[static_cast<std::size_t>(i)],
                          usable[static_cast<std::size_t>(oracle[k].order[static_cast<std::size_t>(i)])]);
            EXPECT_LT((oracle[k].deflated.transpose() * oracle[k].score).cwiseAbs().maxCoeff(), 1e-8);
        }
    }
}

TEST(Covproc, DeflatedScoresAreOrthogonal) {
    std::mt19937_64 rng(70);
    const Matrix x = random_matrix(rng, 25, 8);
    Vector y = x.col(0) + x.col(4);
    y = (y.array() > 0).cast<double>();
    const auto oracle = covproc_oracle(autoscale(x), y.array() - y.mean(), 2);
    ASSERT_EQ(oracle.size(), 2u);
    EXPECT_LT(std::abs(oracle[0].score.dot(oracle[1].score)), 1e-8);
    const SelectionReport r = covproc_select(x, y, CovprocOptions{2, {}, true});
    EXPECT_EQ(r.rounds.size(), 2u);
}

TEST(ReorderRounds, ConcatenatesAndDeduplicates) {
    SelectionReport r;
    r.method = SelectionMethod::Covproc;
    r.rounds = {{1, {4, 5}, {}, {}}, {2, {7, 4}, {}, {}}, {3, {9}, {}, {}}};
    EXPECT_EQ(reorder_rounds(r, {1}), (BandList{4, 5}));
    EXPECT_EQ(reorder_rounds(r, {3, 2}), (BandList{9, 7, 4}));
    const BandList a = reorder_rounds(r, {2, 3});
    const BandList b = reorder_rounds(r, {3, 2});
    EXPECT_EQ(std::set<int>(a.begin(), a.end()), std::set<int>(b.begin(), b.end()));
    EXPECT_EQ(reorder_rounds(r, {1, 2}), (BandList{4, 5, 7}));
    EXPECT_THROW(reorder_rounds(r, {4}), InvalidArgument);
}

TEST(Covproc, Errors) {
    std::mt19937_64 rng(71);
    const Matrix x = random_matrix(rng, 10, 3);
    const Vector y = random_vector(rng, 10);
    EXPECT_THROW(covproc_select(x, y, CovprocOptions{0, {}, true}), InvalidArgument);
    EXPECT_THROW(covproc_select(x, y, CovprocOptions{1, {0, 1, 2}, true}), InvalidArgument);
    EXPECT_THROW(covproc_select(x, Vector::Ones(4), CovprocOptions{}), InvalidArgument);
}
