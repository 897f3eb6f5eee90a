#include "deadbeat/subspace.hpp"

#include <cmath>
#include <string>

#include "deadbeat/errors.hpp"

namespace deadbeat {

namespace {

constexpr double kOrthonormalTol = 1e-10;

// Largest-magnitude entry of every column made positive (first one on ties).
void fix_signs(Matrix& Q) {
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < Q.rows(); ++i) {
            const double a = std::abs(Q(i, j));
            if (a > best) {
                best = a;
                imax = i;
            }
        }
        if (Q(imax, j) < 0.0) Q.col(j) = -Q.col(j);
    }
}

int numerical_rank(const Vector& sv, double scale, double rank_rel) {
    if (!(scale > 0.0)) return 0;
    const double cutoff = rank_rel * scale;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 0.0 && sv(i) >= cutoff) ++r;
    return r;
}

double largest_singular_value(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

// Range of M with singular values judged against rank_rel * scale.
Subspace range_scaled(const Matrix& M, double scale, const Tolerance& tol) {
    const auto n = static_cast<int>(M.rows());
    if (M.cols() == 0 || M.rows() == 0) return Subspace::zero(n);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
    const int r = numerical_rank(svd.singularValues(), scale, tol.rank_rel);
    Matrix basis = svd.matrixU().leftCols(r);
    fix_signs(basis);
    return Subspace::from_orthonormal(std::move(basis));
}

Subspace null_scaled(const Matrix& M, double scale, const Tolerance& tol) {
    const auto n = static_cast<int>(M.cols());
    if (M.rows() == 0) return Subspace::full(n);
    if (n == 0) return Subspace::zero(0);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const int r = numerical_rank(svd.singularValues(), scale, tol.rank_rel);
    Matrix basis = svd.matrixV().rightCols(n - r);
    fix_signs(basis);
    return Subspace::from_orthonormal(std::move(basis));
}

void require_same_ambient(const Subspace& S, const Subspace& T, const char* op) {
    if (S.ambient_dim() != T.ambient_dim())
        throw InvalidInput(std::string(op) + ": ambient dimensions differ (" +
                           std::to_string(S.ambient_dim()) + " vs " +
                           std::to_string(T.ambient_dim()) + ")");
}

}  // namespace

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

void Tolerance::validate() const {
    auto ok = [](double v) { return v > 0.0 && v < 1.0; };
    if (!ok(rank_rel)) throw InvalidInput("tolerance: rank_rel must lie in (0, 1)");
    if (!ok(residual_rel)) throw InvalidInput("tolerance: residual_rel must lie in (0, 1)");
}

Subspace Subspace::zero(int ambient_dim) {
    if (ambient_dim < 0) throw InvalidInput("subspace: negative ambient dimension");
    return Subspace(Matrix(ambient_dim, 0));
}

Subspace Subspace::full(int ambient_dim) {
    if (ambient_dim < 0) throw InvalidInput("subspace: negative ambient dimension");
    return Subspace(Matrix::Identity(ambient_dim, ambient_dim));
}

Subspace Subspace::from_orthonormal(Matrix basis) {
    require_finite(basis, "subspace basis");
    if (basis.cols() > basis.rows()) throw InvalidInput("subspace: more basis columns than rows");
    if (basis.cols() > 0) {
        const Matrix gram = basis.transpose() * basis;
        const double dev =
            (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
        if (dev > kOrthonormalTol) throw InvalidInput("subspace: basis columns are not orthonormal");
    }
    return Subspace(std::move(basis));
}

Vector Subspace::project(const Vector& x) const {
    if (x.size() != basis_.rows()) throw InvalidInput("project: length mismatch");
    if (basis_.cols() == 0) return Vector::Zero(x.size());
    return basis_ * (basis_.transpose() * x);
}

Subspace column_space(const Matrix& M, const Tolerance& tol) {
    require_finite(M, "column_space");
    return range_scaled(M, largest_singular_value(M), tol);
}

Subspace null_space(const Matrix& M, const Tolerance& tol, std::optional<double> scale) {
    require_finite(M, "null_space");
    return null_scaled(M, scale ? *scale : largest_singular_value(M), tol);
}

Subspace complement(const Subspace& S) {
    // Columns are orthonormal, so sigma_max is 1 whenever S is nonzero.
    return null_scaled(S.basis().transpose(), 1.0, Tolerance{});
}

Subspace sum(const Subspace& S, const Subspace& T, const Tolerance& tol) {
    require_same_ambient(S, T, "sum");
    Matrix C(S.ambient_dim(), S.dim() + T.dim());
    C << S.basis(), T.basis();
    return range_scaled(C, largest_singular_value(C), tol);
}

Subspace intersect(const Subspace& S, const Subspace& T, const Tolerance& tol) {
    require_same_ambient(S, T, "intersect");
    return complement(sum(complement(S), complement(T), tol));
}

Subspace preimage(const Matrix& A, const Subspace& S, const Tolerance& tol) {
    require_finite(A, "preimage");
    if (A.rows() != A.cols()) throw InvalidInput("preimage: A must be square");
    if (A.rows() != S.ambient_dim()) throw InvalidInput("preimage: A and S dimensions differ");
    const auto n = static_cast<int>(A.rows());
    if (S.dim() == n) return Subspace::full(n);
    const Matrix V = complement(S).basis();
    return null_scaled(V.transpose() * A, largest_singular_value(A), tol);
}

bool contains(const Subspace& S, const Vector& x, const Tolerance& tol) {
    if (x.size() != S.ambient_dim()) throw InvalidInput("contains: length mismatch");
    return (x - S.project(x)).norm() <= tol.residual_rel * (1.0 + x.norm());
}

bool equal(const Subspace& S, const Subspace& T, const Tolerance& tol) {
    require_same_ambient(S, T, "equal");
    if (S.dim() != T.dim()) return false;
    for (int j = 0; j < S.dim(); ++j)
        if (!contains(T, S.basis().col(j), tol)) return false;
    for (int j = 0; j < T.dim(); ++j)
        if (!contains(S, T.basis().col(j), tol)) return false;
    return true;
}

AffineSet::AffineSet(const Vector& point, Subspace direction) : direction_(std::move(direction)) {
    if (point.size() != direction_.ambient_dim())
        throw InvalidInput("affine set: point length differs from direction ambient dimension");
    require_finite(point, "affine set point");
    point_ = point - direction_.project(point);
}

bool AffineSet::contains(const Vector& x, const Tolerance& tol) const {
    if (x.size() != point_.size()) throw InvalidInput("affine contains: length mismatch");
    const Vector d = x - point_;
    return (d - direction_.project(d)).norm() <= tol.residual_rel * (1.0 + d.norm());
}

std::optional<AffineSet> affine_intersect(const AffineSet& P, const AffineSet& Q,
                                          const Tolerance& tol) {
    if (P.ambient_dim() != Q.ambient_dim())
        throw InvalidInput("affine_intersect: ambient dimensions differ");
    const Matrix& U = P.direction().basis();
    const Matrix& V = Q.direction().basis();
    const Vector delta = Q.point() - P.point();
    const Eigen::Index du = U.cols();
    const Eigen::Index dv = V.cols();

    Matrix C(delta.size(), du + dv);
    C << U, -V;
    Vector coef = Vector::Zero(du + dv);
    if (C.cols() > 0) {
        Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(tol.rank_rel);
        coef = svd.solve(delta);
    }
    const double residual = (C * coef - delta).norm();
    if (residual > tol.residual_rel * (1.0 + delta.norm())) return std::nullopt;

    // Average of the two parametrizations keeps the result symmetric in (P, Q).
    const Vector from_p = P.point() + U * coef.head(du);
    const Vector from_q = Q.point() + V * coef.tail(dv);
    return AffineSet(0.5 * (from_p + from_q), intersect(P.direction(), Q.direction(), tol));
}

}  // namespace deadbeat
