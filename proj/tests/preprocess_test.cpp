#include "spectral_sift/error.hpp"
#include "spectral_sift/preprocess.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace spectral_sift;
using spectral_sift::testing::random_matrix;

TEST(FitScale, SmallExample) {
    Matrix x(2, 2);
    x << 0, 2, 2, 4;
    const ScaleModel m = fit_scale(x);
    EXPECT_DOUBLE_EQ(m.means(0), 1.0);
    EXPECT_DOUBLE_EQ(m.means(1), 3.0);
    EXPECT_NEAR(m.stds(0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(m.stds(1), std::sqrt(2.0), 1e-15);
    EXPECT_FALSE(m.degenerate[0]);
}

TEST(FitScale, ConstantColumnFlagged) {
    Matrix x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    const ScaleModel m = fit_scale(x);
    EXPECT_TRUE(m.degenerate[1]);
    EXPECT_EQ(m.stds(1), 1.0);
    const Matrix s = apply_scale(m, x);
    EXPECT_TRUE(s.col(1).isZero(0.0));
}

TEST(FitScale, AlreadyStandardized) {
    std::mt19937_64 rng(3);
    const Matrix x = random_matrix(rng, 40, 6);
    const Matrix z = apply_scale(fit_scale(x), x);
    const ScaleModel again = fit_scale(z);
    EXPECT_LT(again.means.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((again.stds.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(ApplyScale, TrainingColumnsStandardized) {
    std::mt19937_64 rng(4);
    Matrix x = random_matrix(rng, 30, 5);
    x.col(2) = x.col(2) * 40.0 + Vector::Constant(30, 7.0);
    const ScaleModel m = fit_scale(x);
    const Matrix z = apply_scale(m, x);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-12);
        EXPECT_NEAR(std::sqrt(z.col(j).squaredNorm() / 29.0), 1.0, 1e-12);
    }
    Matrix mean_row = m.means.transpose();
    EXPECT_TRUE(apply_scale(m, mean_row).isZero(0.0));
}

TEST(ApplyScale, InvertRoundTripAndMismatch) {
    std::mt19937_64 rng(5);
    const Matrix x = random_matrix(rng, 12, 4) * 3.0;
    const ScaleModel m = fit_scale(x);
    const Matrix y = random_matrix(rng, 7, 4);
    EXPECT_LT((invert_scale(m, apply_scale(m, y)) - y).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_THROW(apply_scale(m, Matrix::Zero(2, 3)), InvalidArgument);
    EXPECT_THROW(invert_scale(m, Matrix::Zero(2, 5)), InvalidArgument);
    EXPECT_THROW(fit_scale(Matrix::Zero(1, 3)), InvalidArgument);
}

TEST(FitCenter, OnlyCenters) {
    std::mt19937_64 rng(6);
    const Matrix x = random_matrix(rng, 9, 3) * 5.0;
    const ScaleModel m = fit_center(x);
    EXPECT_TRUE(m.stds.isOnes(0.0));
    const Matrix c = apply_scale(m, x);
    EXPECT_LT((c - (x.rowwise() - x.colwise().mean())).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(ScaleModel::identity(3).means.isZero(0.0));
}
