#include "deepesn/topology.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

using namespace deepesn;

namespace {

// Oracles: complex Schur based eigenvalues and a Jacobi SVD, both independent of
// the power-iteration / real-Schur route used by the library.
double oracle_spectral_radius(const RealMatrix& m)
{
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m.cast<std::complex<double>>(), false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double oracle_operator_norm(const RealMatrix& m)
{
    Eigen::JacobiSVD<RealMatrix> svd(m);
    return svd.singularValues()(0);
}

std::vector<Eigen::Index> row_nonzeros(const RealMatrix& m)
{
    std::vector<Eigen::Index> counts;
    for (Eigen::Index i = 0; i < m.rows(); ++i) counts.push_back((m.row(i).array() != 0.0).count());
    return counts;
}

RealMatrix random_uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    RandomStream rng(seed);
    RealMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

TEST(SparseRecurrent, SingleUnitKeepsSignAndTakesRho)
{
    bool saw_negative = false, saw_positive = false;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomStream rng(seed);
        const RealMatrix m = make_sparse_recurrent(1, 1, 0.5, rng);
        ASSERT_EQ(m.rows(), 1);
        EXPECT_NEAR(std::abs(m(0, 0)), 0.5, 1e-15);
        (m(0, 0) < 0 ? saw_negative : saw_positive) = true;
    }
    EXPECT_TRUE(saw_negative && saw_positive);
}

TEST(SparseRecurrent, HitsTargetSpectralRadius)
{
    RandomStream rng(2024);
    const RealMatrix m = make_sparse_recurrent(100, 5, 0.9, rng);
    EXPECT_NEAR(oracle_spectral_radius(m), 0.9, 1e-8);
}

TEST(SparseRecurrent, ExactFanInPerRow)
{
    RandomStream rng(11);
    const RealMatrix m = make_sparse_recurrent(100, 5, 0.9, rng);
    for (auto c : row_nonzeros(m)) EXPECT_EQ(c, 5);
}

TEST(SparseRecurrent, RejectsBadFanIn)
{
    RandomStream rng(1);
    EXPECT_THROW(make_sparse_recurrent(10, 0, 0.9, rng), InvalidArgument);
    EXPECT_THROW(make_sparse_recurrent(10, 11, 0.9, rng), InvalidArgument);
    EXPECT_THROW(make_sparse_recurrent(10, 5, 0.0, rng), InvalidArgument);
}

TEST(SparseRecurrent, DeterministicGivenSeed)
{
    RandomStream a(99), b(99);
    EXPECT_EQ(make_sparse_recurrent(60, 5, 0.8, a), make_sparse_recurrent(60, 5, 0.8, b));
}

TEST(PermutationRecurrent, IdentityPermutation)
{
    const std::vector<std::size_t> id{0, 1, 2};
    EXPECT_EQ(make_permutation_matrix(id, 0.7), RealMatrix(0.7 * RealMatrix::Identity(3, 3)));
}

TEST(PermutationRecurrent, OrthogonalUpToScale)
{
    RandomStream rng(4);
    const RealMatrix m = make_permutation_recurrent(4, 0.9, rng);
    EXPECT_TRUE((m.transpose() * m).isApprox(0.81 * RealMatrix::Identity(4, 4), 1e-15));
}

TEST(PermutationRecurrent, OneEntryPerRowAndColumn)
{
    RandomStream rng(8);
    const RealMatrix m = make_permutation_recurrent(50, 0.3, rng);
    for (Eigen::Index i = 0; i < 50; ++i) {
        EXPECT_EQ((m.row(i).array() != 0.0).count(), 1);
        EXPECT_EQ((m.col(i).array() != 0.0).count(), 1);
        EXPECT_DOUBLE_EQ(m.row(i).sum(), 0.3);
    }
}

TEST(PermutationRecurrent, SpectralRadiusIsLambda)
{
    RandomStream rng(10);
    const RealMatrix m = make_permutation_recurrent(10, 0.9, rng);
    EXPECT_NEAR(spectral_radius(m), 0.9, 1e-12);
    EXPECT_NEAR(oracle_spectral_radius(m), 0.9, 1e-12);
}

TEST(PermutationMatrix, RejectsNonPermutation)
{
    const std::vector<std::size_t> dup{0, 0, 1};
    EXPECT_THROW(make_permutation_matrix(dup, 1.0), InvalidArgument);
}

TEST(RingRecurrent, MatchesClosedForm)
{
    RealMatrix expected = RealMatrix::Zero(4, 4);
    expected(0, 3) = 1.0;
    expected(1, 0) = 1.0;
    expected(2, 1) = 1.0;
    expected(3, 2) = 1.0;
    EXPECT_EQ(make_ring_recurrent(4, 1.0), expected);
}

TEST(RingRecurrent, CubeOfThreeRingIsScaledIdentity)
{
    const RealMatrix m = make_ring_recurrent(3, 0.5);
    EXPECT_TRUE((m * m * m).isApprox(0.125 * RealMatrix::Identity(3, 3), 1e-15));
}

TEST(RingRecurrent, EigenvaluesOnCircle)
{
    const RealMatrix m = make_ring_recurrent(8, 0.9);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m.cast<std::complex<double>>(), false);
    for (Eigen::Index i = 0; i < 8; ++i) EXPECT_NEAR(std::abs(solver.eigenvalues()(i)), 0.9, 1e-12);
}

TEST(RingRecurrent, IsSingleCyclePermutation)
{
    for (std::size_t n : {2u, 5u, 167u}) {
        std::vector<std::size_t> cycle(n);
        for (std::size_t j = 0; j < n; ++j) cycle[j] = (j + 1) % n;
        EXPECT_EQ(make_ring_recurrent(n, 0.6), make_permutation_matrix(cycle, 0.6));
    }
}

TEST(RingRecurrent, RejectsSingleUnit) { EXPECT_THROW(make_ring_recurrent(1, 0.5), InvalidArgument); }

TEST(ChainRecurrent, ThreeUnitShiftIsNilpotent)
{
    RealMatrix expected = RealMatrix::Zero(3, 3);
    expected(1, 0) = 1.0;
    expected(2, 1) = 1.0;
    const RealMatrix m = make_chain_recurrent(3, 1.0);
    EXPECT_EQ(m, expected);
    EXPECT_EQ(m * m * m, RealMatrix::Zero(3, 3));
}

TEST(ChainRecurrent, SpectralRadiusZero)
{
    EXPECT_EQ(spectral_radius(make_chain_recurrent(3, 0.5)), 0.0);
    EXPECT_LE(spectral_radius(make_chain_recurrent(500, 0.9)), 1e-8);
}

TEST(ChainRecurrent, TwoNormIsLambda)
{
    const RealMatrix m = make_chain_recurrent(5, 0.8);
    EXPECT_NEAR(oracle_operator_norm(m), 0.8, 1e-12);
    EXPECT_NEAR(operator_norm(m), 0.8, 1e-10);
}

TEST(ChainRecurrent, RejectsSingleUnit) { EXPECT_THROW(make_chain_recurrent(1, 0.5), InvalidArgument); }

TEST(InputMatrix, ScalarCase)
{
    RandomStream rng(1);
    const RealMatrix m = make_input_matrix(1, 1, 1.3, rng);
    EXPECT_NEAR(std::abs(m(0, 0)), 1.3, 1e-15);
}

TEST(InputMatrix, ColumnVectorNorm)
{
    RandomStream rng(12);
    const RealMatrix m = make_input_matrix(500, 1, 0.6, rng);
    EXPECT_NEAR(m.col(0).norm(), 0.6, 1e-8);
    EXPECT_EQ((m.array() == 0.0).count(), 0);
}

TEST(InputMatrix, TwoColumnNorm)
{
    RandomStream rng(13);
    const RealMatrix m = make_input_matrix(10, 2, 0.7, rng);
    EXPECT_NEAR(oracle_operator_norm(m), 0.7, 1e-8);
}

TEST(InterlayerMatrix, DenseSingleRow)
{
    RandomStream rng(14);
    const RealMatrix m = make_interlayer_matrix(1, 5, 5, 1.0, rng);
    EXPECT_EQ((m.array() != 0.0).count(), 5);
    EXPECT_NEAR(m.row(0).norm(), 1.0, 1e-12);
}

TEST(InterlayerMatrix, FanInPerRow)
{
    RandomStream rng(15);
    const RealMatrix m = make_interlayer_matrix(167, 167, 5, 1.0, rng);
    for (auto c : row_nonzeros(m)) EXPECT_EQ(c, 5);
}

TEST(InterlayerMatrix, TwoNorm)
{
    RandomStream rng(16);
    const RealMatrix m = make_interlayer_matrix(50, 50, 5, 1.5, rng);
    EXPECT_NEAR(oracle_operator_norm(m), 1.5, 1e-8);
}

TEST(InterlayerMatrix, RejectsBadFanIn)
{
    RandomStream rng(1);
    EXPECT_THROW(make_interlayer_matrix(10, 4, 5, 1.0, rng), InvalidArgument);
}

TEST(SpectralRadius, SwapMatrix)
{
    RealMatrix m(2, 2);
    m << 0, 1, 1, 0;
    EXPECT_NEAR(spectral_radius(m), 1.0, 1e-12);
}

TEST(SpectralRadius, ScaledPermutation)
{
    RandomStream rng(17);
    EXPECT_NEAR(spectral_radius(make_permutation_recurrent(30, 0.85, rng)), 0.85, 1e-12);
}

TEST(SpectralRadius, RandomDenseMatchesOracle)
{
    const RealMatrix m = random_uniform(50, 50, 18);
    const double expected = oracle_spectral_radius(m);
    EXPECT_NEAR(spectral_radius(m), expected, 1e-8 * expected);
}

TEST(SpectralRadius, RealDominantEigenvalueViaPowerIteration)
{
    // Positive matrices have a real dominant (Perron) eigenvalue.
    const RealMatrix m = random_uniform(40, 40, 19).cwiseAbs();
    const double expected = oracle_spectral_radius(m);
    EXPECT_NEAR(spectral_radius(m), expected, 1e-8 * expected);
}

TEST(SpectralRadius, RejectsNonSquare) { EXPECT_THROW(spectral_radius(RealMatrix::Zero(2, 3)), InvalidArgument); }

TEST(OperatorNorm, Identity) { EXPECT_NEAR(operator_norm(RealMatrix::Identity(6, 6)), 1.0, 1e-12); }

TEST(OperatorNorm, Diagonal)
{
    RealMatrix d = RealMatrix::Zero(3, 3);
    d.diagonal() << 3.0, 1.0, 0.5;
    EXPECT_NEAR(operator_norm(d), 3.0, 1e-12);
}

TEST(OperatorNorm, RandomMatchesOracle)
{
    const RealMatrix m = random_uniform(20, 7, 20);
    const double expected = oracle_operator_norm(m);
    EXPECT_NEAR(operator_norm(m), expected, 1e-8 * expected);
}

TEST(TopologyKind, NamesRoundTrip)
{
    for (const TopologyKind& k : {TopologyKind{Sparse{}}, TopologyKind{Sparse{7}}, TopologyKind{Permutation{}},
                                  TopologyKind{Ring{}}, TopologyKind{Chain{}}})
        EXPECT_EQ(parse_topology(topology_name(k)), k);
    EXPECT_THROW(parse_topology("smallworld"), InvalidArgument);
    EXPECT_THROW(parse_topology("sparse:0"), InvalidArgument);
}

TEST(ScalingSpec, Validation)
{
    EXPECT_NO_THROW((ScalingSpec{0.9, 1.0, 1.0}.validate()));
    EXPECT_THROW((ScalingSpec{0.0, 1.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((ScalingSpec{0.9, -1.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((ScalingSpec{0.9, 1.0, std::nan("")}.validate()), InvalidArgument);
}

// Property sweep: every constructor reproduces its target when re-measured.
TEST(TopologyProperties, TargetsReproducedAcrossSeeds)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream rng(1000 + seed);
        const std::size_t n = 20 + 13 * seed;
        const double target = 0.1 + 0.09 * static_cast<double>(seed);

        const RealMatrix sparse = make_sparse_recurrent(n, 5, target, rng);
        EXPECT_NEAR(oracle_spectral_radius(sparse), target, 1e-8);
        for (auto c : row_nonzeros(sparse)) EXPECT_EQ(c, 5);

        const RealMatrix perm = make_permutation_recurrent(n, target, rng);
        EXPECT_TRUE((perm.transpose() * perm).isApprox(target * target * RealMatrix::Identity(n, n), 1e-14));

        const RealMatrix inter = make_interlayer_matrix(n, n + 3, 5, 2 * target, rng);
        EXPECT_NEAR(oracle_operator_norm(inter), 2 * target, 1e-8);
    }
}
