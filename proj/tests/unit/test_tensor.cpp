#include "oracles.hpp"

#include "ttoi/errors.hpp"
#include "ttoi/rng.hpp"
#include "ttoi/tensor.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace ttoi;

using oracle::random_left_factors;
using oracle::random_right_factors;

TEST(DenseTensor, RejectsEmptyShapes)
{
    EXPECT_THROW(DenseTensor(Dims{}), ArgumentError);
    EXPECT_THROW(DenseTensor(Dims{2, 0}), ArgumentError);
    EXPECT_THROW(DenseTensor(Dims{2, 2}, std::vector<double>(3)), ArgumentError);
}

TEST(DenseTensor, OverflowingShapeIsAResourceError)
{
    const std::size_t big = std::size_t{1} << 40;
    EXPECT_THROW(checked_product(Dims{big, big}), ResourceError);
}

TEST(DenseTensor, OffsetFollowsFirstIndexFastest)
{
    DenseTensor t({3, 2, 4});
    for (std::size_t lin = 0; lin < t.size(); ++lin) t.data()[lin] = static_cast<double>(lin);
    EXPECT_EQ(t.at({2, 1, 3}), 2 + 3 * (1 + 2 * 3));
    EXPECT_THROW(t.at({3, 0, 0}), ArgumentError);
    EXPECT_THROW(t.at({0, 0}), ArgumentError);
}

TEST(SequentialUnfold, MatchesIndexLoops)
{
    Rng rng(11);
    const DenseTensor t = oracle::random_tensor(rng, {3, 2, 4, 2});
    for (std::size_t k = 1; k <= 3; ++k) {
        EXPECT_EQ(sequential_unfold(t, k), oracle::unfold(t, k)) << "k=" << k;
    }
    EXPECT_THROW(sequential_unfold(t, 0), ArgumentError);
    EXPECT_THROW(sequential_unfold(t, 4), ArgumentError);
}

TEST(SequentialUnfold, FoldRoundTripIsBitExact)
{
    Rng rng(12);
    const DenseTensor t = oracle::random_tensor(rng, {2, 3, 2, 3});
    for (std::size_t k = 1; k <= 3; ++k) {
        EXPECT_EQ(fold(sequential_unfold(t, k), t.dims(), k), t);
        EXPECT_DOUBLE_EQ(sequential_unfold(t, k).squaredNorm(), t.squared_norm());
    }
    EXPECT_THROW(fold(Matrix::Zero(3, 3), t.dims(), 1), ArgumentError);
}

TEST(Vectorize, OrderOneAndMatrixCases)
{
    DenseTensor v({4}, {1, 2, 3, 4});
    EXPECT_EQ(vectorize(v), (std::vector<double>{1, 2, 3, 4}));
    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    EXPECT_EQ(vectorize(DenseTensor::from_matrix(m)), (std::vector<double>{1, 3, 2, 4}));
}

TEST(Vectorize, MatchesIndexTupleLoop)
{
    Rng rng(13);
    const DenseTensor t = oracle::random_tensor(rng, {3, 2, 4});
    const auto v = vectorize(t);
    for (std::size_t i3 = 0; i3 < 4; ++i3)
        for (std::size_t i2 = 0; i2 < 2; ++i2)
            for (std::size_t i1 = 0; i1 < 3; ++i1) EXPECT_EQ(v[i3 * 6 + i2 * 3 + i1], t.at({i1, i2, i3}));
}

TEST(ReshapeMatrix, ForcedEntry)
{
    Matrix a = Matrix::Zero(2, 4);
    a(0, 1) = 5;  // i1 = 1, i2 = 2, i3 = 1 (1-based)
    const Matrix b = reshape_matrix(a, 4, 2);
    EXPECT_EQ(b(2, 0), 5);
    EXPECT_EQ(reshape_matrix(b, 2, 4), a);
}

TEST(ReshapeMatrix, MatchesTripleLoop)
{
    Rng rng(14);
    const Matrix a = oracle::random_matrix(rng, 3, 20);
    EXPECT_EQ(reshape_matrix(a, 12, 5), oracle::reshape(a, 12, 5));
    const Matrix b = oracle::random_matrix(rng, 12, 5);
    EXPECT_EQ(reshape_matrix(b, 3, 20), oracle::reshape(b, 3, 20));
    EXPECT_THROW(reshape_matrix(a, 7, 5), ArgumentError);
}

TEST(Kronecker, SmallCasesAndQuadrupleLoop)
{
    Rng rng(15);
    const Matrix v = oracle::random_matrix(rng, 3, 2);
    EXPECT_EQ(kronecker(Matrix::Identity(1, 1), v), v);
    Matrix two(1, 1);
    two << 2;
    EXPECT_EQ(kronecker(two, Matrix::Identity(2, 2)), Matrix(2 * Matrix::Identity(2, 2)));
    const Matrix u = oracle::random_matrix(rng, 2, 3);
    EXPECT_EQ(kronecker(u, v), oracle::kron(u, v));
}

TEST(RealignmentMatrix, SmallCases)
{
    EXPECT_EQ(realignment_matrix(1, 3), Matrix(Matrix::Identity(3, 3)));
    Matrix expected(4, 1);
    expected << 1, 0, 0, 1;
    EXPECT_EQ(realignment_matrix(2, 1), expected);
    EXPECT_EQ(realignment_matrix(3, 2), oracle::realignment(3, 2));
}

TEST(RealignmentMatrix, ReshapeIdentityHoldsExactly)
{
    Rng rng(16);
    const DenseTensor t = oracle::random_tensor(rng, {2, 2, 3});
    const Matrix lhs = sequential_unfold(t, 2);
    const Matrix rhs = oracle::kron(oracle::eye(2), sequential_unfold(t, 1)) * realignment_matrix(2, 3);
    EXPECT_EQ((lhs - rhs).norm(), 0.0);
}

TEST(RealignmentMatrix, AllPairsOnOrderFive)
{
    Rng rng(17);
    const DenseTensor t = oracle::random_tensor(rng, {2, 3, 2, 2, 3});
    const Dims& p = t.dims();
    for (std::size_t i = 1; i <= 3; ++i) {
        for (std::size_t j = i + 1; j <= 4; ++j) {
            const std::size_t q = oracle::prod(p, i, j);
            const std::size_t s = oracle::prod(p, j, 5);
            const std::size_t lead = oracle::prod(p, 0, i);
            const Matrix a = oracle::realignment(q, s);
            const Matrix forward = oracle::kron(oracle::eye(q), oracle::unfold(t, i)) * a;
            EXPECT_EQ((oracle::unfold(t, j) - forward).norm(), 0.0) << i << "," << j;
            const Matrix back = oracle::realignment(q, lead).transpose() * oracle::kron(oracle::unfold(t, j), oracle::eye(q));
            EXPECT_EQ((oracle::unfold(t, i) - back).norm(), 0.0) << i << "," << j;
        }
    }
}

TEST(ImplicitKronecker, MatchesMaterialized)
{
    Rng rng(18);
    const Matrix prod = oracle::random_matrix(rng, 6, 2);
    const Matrix b = oracle::random_matrix(rng, 3 * 2, 4);
    EXPECT_LT(oracle::rel_error(kron_identity_right(prod, b, 3), oracle::kron(prod, oracle::eye(3)) * b), 1e-14);
    const Matrix a = oracle::random_matrix(rng, 5, 3 * 6);
    EXPECT_LT(oracle::rel_error(times_kron_identity(a, prod, 3), a * oracle::kron(prod, oracle::eye(3))), 1e-14);
}

TEST(ForwardSequentialMultiply, MatchesKroneckerProducts)
{
    Rng rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        const Dims dims = {2 + rng.below(3), 2 + rng.below(3), 2 + rng.below(3), 2 + rng.below(3)};
        const Ranks r = {1 + rng.below(2), 1 + rng.below(3), 1 + rng.below(2)};
        const DenseTensor t = oracle::random_tensor(rng, dims);
        const std::vector<Matrix> m = random_left_factors(rng, dims, r);
        const ForwardProducts out = forward_sequential_multiply(t, m);
        for (std::size_t k = 1; k <= 3; ++k) {
            const Matrix s_tilde = oracle::left_product(m, dims, k).transpose() * oracle::unfold(t, k);
            EXPECT_LT(oracle::rel_error(out.s_tilde[k - 1], s_tilde), 1e-12);
            const Matrix s = k == 1 ? oracle::unfold(t, 1)
                                    : Matrix(oracle::kron(oracle::eye(dims[k - 1]),
                                                          oracle::left_product(m, dims, k - 1).transpose()) *
                                             oracle::unfold(t, k));
            EXPECT_LT(oracle::rel_error(out.s[k - 1], s), 1e-12);
        }
    }
}

TEST(ForwardSequentialMultiply, ZeroTensorAndShapeErrors)
{
    Rng rng(20);
    const Dims dims = {2, 3, 2};
    const std::vector<Matrix> m = random_left_factors(rng, dims, {2, 1});
    const ForwardProducts out = forward_sequential_multiply(DenseTensor(dims), m);
    for (const Matrix& s : out.s_tilde) EXPECT_EQ(s.norm(), 0.0);
    std::vector<Matrix> bad = m;
    bad[1] = Matrix::Zero(5, 1);
    EXPECT_THROW(forward_sequential_multiply(DenseTensor(dims), bad), ArgumentError);
}

TEST(BackwardSequentialMultiply, MatchesKroneckerProducts)
{
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Dims dims = {2 + rng.below(3), 2 + rng.below(3), 2 + rng.below(3), 2 + rng.below(3)};
        const Ranks r = {1 + rng.below(2), 1 + rng.below(3), 1 + rng.below(2)};
        const DenseTensor t = oracle::random_tensor(rng, dims);
        const std::vector<Matrix> b = random_right_factors(rng, dims, r);
        const BackwardProducts out = backward_sequential_multiply(t, b);
        for (std::size_t k = 1; k <= 3; ++k) {
            const Matrix w_tilde = oracle::unfold(t, k) * oracle::right_product(b, dims, k + 1);
            EXPECT_LT(oracle::rel_error(out.w_tilde[k - 1], w_tilde), 1e-12);
            const Matrix w = k == 3 ? oracle::unfold(t, 3)
                                    : Matrix(oracle::unfold(t, k) *
                                             oracle::kron(oracle::right_product(b, dims, k + 2), oracle::eye(dims[k])));
            EXPECT_LT(oracle::rel_error(out.w[k - 1], w), 1e-12);
        }
    }
}

TEST(BackwardSequentialMultiply, OrderTwoIsASingleProduct)
{
    Rng rng(22);
    const DenseTensor t = oracle::random_tensor(rng, {3, 4});
    const std::vector<Matrix> b = {oracle::random_matrix(rng, 4, 2)};
    const BackwardProducts out = backward_sequential_multiply(t, b);
    EXPECT_LT(oracle::rel_error(out.w_tilde[0], oracle::unfold(t, 1) * b[0]), 1e-14);
}

TEST(SequentialMultiply, Superposition)
{
    Rng rng(23);
    const Dims dims = {3, 2, 3};
    const DenseTensor a = oracle::random_tensor(rng, dims);
    const DenseTensor b = oracle::random_tensor(rng, dims);
    DenseTensor sum(dims);
    for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] = a.data()[i] + 2.0 * b.data()[i];
    const std::vector<Matrix> m = random_left_factors(rng, dims, {2, 2});
    const auto fa = forward_sequential_multiply(a, m);
    const auto fb = forward_sequential_multiply(b, m);
    const auto fs = forward_sequential_multiply(sum, m);
    EXPECT_LT(oracle::rel_error(fs.s_tilde[1], fa.s_tilde[1] + 2.0 * fb.s_tilde[1]), 1e-13);
}
