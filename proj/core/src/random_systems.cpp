#include "deadbeat/random_systems.hpp"

#include <cmath>

#include "deadbeat/errors.hpp"

namespace deadbeat {

namespace {

constexpr double kKrylovCondMax = 1e8;
constexpr double kInvertibleCondMax = 1e6;
constexpr int kMaxDraws = 10000;

double condition(const Matrix& M, Eigen::Index rank) {
    Eigen::JacobiSVD<Matrix> svd(M);
    const Vector& sv = svd.singularValues();
    if (sv.size() < rank || !(sv(rank - 1) > 0.0)) return INFINITY;
    return sv(0) / sv(rank - 1);
}

Matrix krylov(const Matrix& A, const Matrix& B) {
    const auto n = A.rows();
    const auto m = B.cols();
    Matrix K(n, n * m);
    K.leftCols(m) = B;
    for (Eigen::Index i = 1; i < n; ++i) K.middleCols(i * m, m) = A * K.middleCols((i - 1) * m, m);
    return K;
}

bool well_controllable(const Matrix& A, const Matrix& B) {
    return condition(krylov(A, B), A.rows()) < kKrylovCondMax;
}

void require_shape(int n, int m) {
    if (n < 1 || m < 1) throw InvalidInput("random system: n and m must be positive");
}

}  // namespace

Rng stream_for(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

Matrix gaussian_matrix(Rng& rng, int rows, int cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(rows, cols);
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = normal(rng);
    return M;
}

Vector uniform_vector(Rng& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> uni(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uni(rng);
    return v;
}

Matrix random_orthogonal(Rng& rng, int n) {
    const Matrix G = gaussian_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    return Q;
}

LinearSystem random_controllable_pair(Rng& rng, int n, int m, bool invertible_A) {
    require_shape(n, m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        Matrix A = scale * gaussian_matrix(rng, n, n);
        Matrix B = gaussian_matrix(rng, n, m);
        if (invertible_A && condition(A, n) > kInvertibleCondMax) continue;
        if (!well_controllable(A, B)) continue;
        return {std::move(A), std::move(B), SystemForm::Factored};
    }
    throw NumericalFailure("random_controllable_pair: no acceptable draw");
}

LinearSystem random_singular_controllable_pair(Rng& rng, int n, int m, int rank) {
    require_shape(n, m);
    if (rank < 0 || rank >= n || rank < n - m)
        throw InvalidInput("random_singular_controllable_pair: need n - m <= rank < n");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        Matrix A = scale * gaussian_matrix(rng, n, rank) * gaussian_matrix(rng, rank, n);
        Matrix B = gaussian_matrix(rng, n, m);
        if (!well_controllable(A, B)) continue;
        return {std::move(A), std::move(B), SystemForm::Factored};
    }
    throw NumericalFailure("random_singular_controllable_pair: no acceptable draw");
}

LinearSystem random_kalman_split_pair(Rng& rng, int n, int m, int r, bool zero_modes) {
    require_shape(n, m);
    if (r < 0 || r >= n) throw InvalidInput("random_kalman_split_pair: need 0 <= r < n");
    const int u = n - r;
    std::uniform_real_distribution<double> magnitude(0.5, 1.5);
    std::bernoulli_distribution negative(0.5);

    Matrix T = Matrix::Zero(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    T.topRows(r) = scale * gaussian_matrix(rng, r, n);
    Matrix A22 = 0.5 * gaussian_matrix(rng, u, u);
    A22 = A22.triangularView<Eigen::StrictlyUpper>();
    if (!zero_modes)
        for (int i = 0; i < u; ++i) A22(i, i) = negative(rng) ? -magnitude(rng) : magnitude(rng);
    T.bottomRightCorner(u, u) = A22;

    Matrix Bt = Matrix::Zero(n, m);
    Bt.topRows(r) = gaussian_matrix(rng, r, m);

    const Matrix Q = random_orthogonal(rng, n);
    return {Q * T * Q.transpose(), Q * Bt, SystemForm::Factored};
}

}  // namespace deadbeat
