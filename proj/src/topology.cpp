#include "deepesn/topology.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <vector>

namespace deepesn {

namespace {

constexpr int kMaxPowerIterations = 10000;
constexpr double kPowerTolerance = 1e-10;
constexpr double kDegenerateThreshold = 1e-12;
constexpr int kMaxDrawAttempts = 10;

void require_positive_finite(double v, const char* what)
{
    if (!std::isfinite(v) || v <= 0.0)
        throw InvalidArgument(std::string(what) + " must be positive and finite, got " + std::to_string(v));
}

// Fixed pseudo-random start vector; independent of any caller stream so that the
// measurement functions stay pure.
RealVector start_vector(Eigen::Index n)
{
    RandomStream rng(0x5eedcafef00dULL);
    RealVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(0.5, 1.5) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
    return v.normalized();
}

// Matrix-vector product that exploits structural zeros when the matrix is sparse.
class Operator {
public:
    explicit Operator(const RealMatrix& m) : dense_(m)
    {
        const auto nnz = (m.array() != 0.0).count();
        sparse_mode_ = nnz * 4 < m.size();
        if (sparse_mode_) sparse_ = m.sparseView();
    }

    RealVector apply(const RealVector& x) const { return sparse_mode_ ? RealVector(sparse_ * x) : RealVector(dense_ * x); }
    RealVector apply_transposed(const RealVector& x) const
    {
        return sparse_mode_ ? RealVector(sparse_.transpose() * x) : RealVector(dense_.transpose() * x);
    }

private:
    const RealMatrix& dense_;
    bool sparse_mode_ = false;
    Eigen::SparseMatrix<double> sparse_;
};

// Fills `fan_in` distinct random columns per row with uniform [-1,1] values.
RealMatrix draw_sparse_rows(std::size_t rows, std::size_t cols, std::size_t fan_in, RandomStream& rng)
{
    RealMatrix m = RealMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<std::size_t> pool(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t k = 0; k < fan_in; ++k) {
            const std::size_t pick = k + static_cast<std::size_t>(rng.below(cols - k));
            std::swap(pool[k], pool[pick]);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pool[k])) = rng.uniform(-1.0, 1.0);
        }
    }
    return m;
}

std::vector<std::size_t> random_permutation(std::size_t n, RandomStream& rng)
{
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[static_cast<std::size_t>(rng.below(i))]);
    return p;
}

void check_structured_size(std::size_t n, const char* what)
{
    if (n < 2) throw InvalidArgument(std::string(what) + " topology needs at least 2 units, got " + std::to_string(n));
}

}  // namespace

std::string topology_name(const TopologyKind& kind)
{
    struct Visitor {
        std::string operator()(const Sparse& s) const
        {
            return s.fan_in == Sparse{}.fan_in ? "sparse" : "sparse:" + std::to_string(s.fan_in);
        }
        std::string operator()(const Permutation&) const { return "permutation"; }
        std::string operator()(const Ring&) const { return "ring"; }
        std::string operator()(const Chain&) const { return "chain"; }
    };
    return std::visit(Visitor{}, kind);
}

TopologyKind parse_topology(std::string_view text)
{
    if (text == "sparse") return Sparse{};
    if (text == "permutation") return Permutation{};
    if (text == "ring") return Ring{};
    if (text == "chain") return Chain{};
    if (text.starts_with("sparse:")) {
        const auto digits = text.substr(7);
        std::size_t k = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc{} && ptr == digits.data() + digits.size() && k >= 1) return Sparse{k};
    }
    throw InvalidArgument("unknown topology '" + std::string(text) + "' (expected sparse, permutation, ring or chain)");
}

std::uint64_t topology_code(const TopologyKind& kind)
{
    if (const auto* s = std::get_if<Sparse>(&kind)) return hash_combine(1, s->fan_in);
    return static_cast<std::uint64_t>(kind.index()) + 1;
}

void ScalingSpec::validate() const
{
    require_positive_finite(rho, "rho");
    require_positive_finite(omega_in, "omega_in");
    require_positive_finite(omega_il, "omega_il");
}

RealMatrix make_sparse_recurrent(std::size_t n, std::size_t fan_in, double rho, RandomStream& rng)
{
    if (n < 1 || fan_in < 1 || fan_in > n)
        throw InvalidArgument("sparse fan-in must lie in [1, " + std::to_string(n) + "], got " + std::to_string(fan_in));
    require_positive_finite(rho, "rho");
    for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
        RealMatrix m = draw_sparse_rows(n, n, fan_in, rng);
        const double raw = spectral_radius(m);
        if (raw >= kDegenerateThreshold) return m * (rho / raw);
    }
    throw DegenerateDraw("sparse recurrent matrix had zero spectral radius in " + std::to_string(kMaxDrawAttempts) +
                         " consecutive draws");
}

RealMatrix make_permutation_matrix(std::span<const std::size_t> targets, double lambda)
{
    const auto n = static_cast<Eigen::Index>(targets.size());
    RealMatrix m = RealMatrix::Zero(n, n);
    std::vector<bool> seen(targets.size(), false);
    for (Eigen::Index j = 0; j < n; ++j) {
        const std::size_t t = targets[static_cast<std::size_t>(j)];
        if (t >= targets.size() || seen[t]) throw InvalidArgument("targets is not a permutation");
        seen[t] = true;
        m(static_cast<Eigen::Index>(t), j) = lambda;
    }
    return m;
}

RealMatrix make_permutation_recurrent(std::size_t n, double lambda, RandomStream& rng)
{
    if (n < 1) throw InvalidArgument("permutation topology needs at least 1 unit");
    require_positive_finite(lambda, "lambda");
    const auto p = random_permutation(n, rng);
    return make_permutation_matrix(p, lambda);
}

RealMatrix make_ring_recurrent(std::size_t n, double lambda)
{
    check_structured_size(n, "ring");
    require_positive_finite(lambda, "lambda");
    std::vector<std::size_t> next(n);
    for (std::size_t j = 0; j < n; ++j) next[j] = (j + 1) % n;
    return make_permutation_matrix(next, lambda);
}

RealMatrix make_chain_recurrent(std::size_t n, double lambda)
{
    check_structured_size(n, "chain");
    require_positive_finite(lambda, "lambda");
    const auto size = static_cast<Eigen::Index>(n);
    RealMatrix m = RealMatrix::Zero(size, size);
    for (Eigen::Index i = 0; i + 1 < size; ++i) m(i + 1, i) = lambda;
    return m;
}

RealMatrix make_recurrent(const TopologyKind& kind, std::size_t n, double rho, RandomStream& rng)
{
    struct Visitor {
        std::size_t n;
        double rho;
        RandomStream& rng;
        RealMatrix operator()(const Sparse& s) const { return make_sparse_recurrent(n, s.fan_in, rho, rng); }
        RealMatrix operator()(const Permutation&) const { return make_permutation_recurrent(n, rho, rng); }
        RealMatrix operator()(const Ring&) const { return make_ring_recurrent(n, rho); }
        RealMatrix operator()(const Chain&) const { return make_chain_recurrent(n, rho); }
    };
    return std::visit(Visitor{n, rho, rng}, kind);
}

RealMatrix make_input_matrix(std::size_t n_r, std::size_t n_u, double omega_in, RandomStream& rng)
{
    if (n_r < 1 || n_u < 1) throw InvalidArgument("input matrix dimensions must be positive");
    require_positive_finite(omega_in, "omega_in");
    for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
        RealMatrix m = draw_sparse_rows(n_r, n_u, n_u, rng);
        const double raw = operator_norm(m);
        if (raw >= kDegenerateThreshold) return m * (omega_in / raw);
    }
    throw DegenerateDraw("input matrix draw was all zero");
}

RealMatrix make_interlayer_matrix(std::size_t n_to, std::size_t n_from, std::size_t fan_in, double omega_il,
                                  RandomStream& rng)
{
    if (n_to < 1 || n_from < 1 || fan_in < 1 || fan_in > n_from)
        throw InvalidArgument("inter-layer fan-in must lie in [1, " + std::to_string(n_from) + "], got " +
                              std::to_string(fan_in));
    require_positive_finite(omega_il, "omega_il");
    for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
        RealMatrix m = draw_sparse_rows(n_to, n_from, fan_in, rng);
        const double raw = operator_norm(m);
        if (raw >= kDegenerateThreshold) return m * (omega_il / raw);
    }
    throw DegenerateDraw("inter-layer matrix draw was all zero");
}

double spectral_radius(const RealMatrix& m)
{
    if (m.rows() != m.cols())
        throw InvalidArgument("spectral radius needs a square matrix, got " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()));
    if (m.size() == 0) throw InvalidArgument("spectral radius of an empty matrix");
    if (m.rows() == 1) return std::abs(m(0, 0));

    // Power iteration converges only for a single real dominant eigenvalue; the
    // Rayleigh residual test rejects everything else and we fall through to the
    // dense solver.
    const Operator op(m);
    RealVector x = start_vector(m.rows());
    for (int it = 0; it < kMaxPowerIterations; ++it) {
        RealVector y = op.apply(x);
        const double norm = y.norm();
        // A random start vector annihilated exactly means m is nilpotent.
        if (norm == 0.0) return 0.0;
        const double mu = x.dot(y);
        if (std::abs(mu) > 0.0 && (y - mu * x).norm() <= kPowerTolerance * std::abs(mu)) return std::abs(mu);
        x = y / norm;
    }
    Eigen::EigenSolver<RealMatrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw Error("eigenvalue computation did not converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm(const RealMatrix& m)
{
    if (m.size() == 0) throw InvalidArgument("operator norm of an empty matrix");
    if (m.cols() == 1) return m.col(0).norm();
    if (m.rows() == 1) return m.row(0).norm();

    const Operator op(m);
    RealVector x = start_vector(m.cols());
    for (int it = 0; it < kMaxPowerIterations; ++it) {
        RealVector y = op.apply_transposed(op.apply(x));
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        const double mu = x.dot(y);
        if ((y - mu * x).norm() <= kPowerTolerance * mu) return std::sqrt(mu);
        x = y / norm;
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(m.transpose() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

}  // namespace deepesn
