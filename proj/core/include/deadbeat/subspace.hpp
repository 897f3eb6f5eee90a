#pragma once

#include <optional>

#include <Eigen/Dense>

namespace deadbeat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numerical policy shared by every rank decision and consistency test.
//   rank_rel      singular values below rank_rel * sigma_max count as zero
//   residual_rel  relative residual allowed in membership / consistency tests
struct Tolerance {
    double rank_rel = 1e-10;
    double residual_rel = 1e-8;

    // Throws InvalidInput unless both values lie in (0, 1).
    void validate() const;
};

// A linear subspace of R^n stored as an n x d matrix with orthonormal columns.
// d == 0 is the zero subspace. Bases produced by this library follow a fixed
// sign convention (largest-magnitude entry of each column is positive), so
// identical inputs always yield bitwise-identical bases.
class Subspace {
public:
    static Subspace zero(int ambient_dim);
    static Subspace full(int ambient_dim);

    // Wraps an existing orthonormal basis. Throws InvalidInput if the columns
    // are not orthonormal to within 1e-10.
    static Subspace from_orthonormal(Matrix basis);

    [[nodiscard]] int ambient_dim() const noexcept { return static_cast<int>(basis_.rows()); }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(basis_.cols()); }
    [[nodiscard]] const Matrix& basis() const noexcept { return basis_; }

    // Orthogonal projection of x onto the subspace.
    [[nodiscard]] Vector project(const Vector& x) const;

private:
    explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}

    Matrix basis_;
};

// Range of M. Rank cutoff is rank_rel * sigma_max(M).
Subspace column_space(const Matrix& M, const Tolerance& tol = {});

// {x : M x = 0}. Same cutoff and sign convention as column_space. When
// `scale` is given, the cutoff is rank_rel * scale instead of
// rank_rel * sigma_max(M); use it when M is a product whose exact value may
// vanish, so that round-off is not read as rank.
Subspace null_space(const Matrix& M, const Tolerance& tol = {},
                    std::optional<double> scale = std::nullopt);

Subspace complement(const Subspace& S);

Subspace sum(const Subspace& S, const Subspace& T, const Tolerance& tol = {});

// S ∩ T, computed as (S⊥ + T⊥)⊥.
Subspace intersect(const Subspace& S, const Subspace& T, const Tolerance& tol = {});

// {x : A x ∈ S}. A may be singular; the result always contains null(A).
// Computed as null(Vᵀ A) with V a basis of S⊥; the rank cutoff is scaled by
// sigma_max(A) so that round-off in Vᵀ A is not mistaken for rank.
Subspace preimage(const Matrix& A, const Subspace& S, const Tolerance& tol = {});

// ‖x − P_S x‖ <= residual_rel * (1 + ‖x‖).
bool contains(const Subspace& S, const Vector& x, const Tolerance& tol = {});

bool equal(const Subspace& S, const Subspace& T, const Tolerance& tol = {});

// x + S, kept canonical: the stored point is the minimum-norm element, i.e.
// orthogonal to the direction.
class AffineSet {
public:
    AffineSet(const Vector& point, Subspace direction);

    [[nodiscard]] const Vector& point() const noexcept { return point_; }
    [[nodiscard]] const Subspace& direction() const noexcept { return direction_; }
    [[nodiscard]] int ambient_dim() const noexcept { return direction_.ambient_dim(); }

    [[nodiscard]] bool contains(const Vector& x, const Tolerance& tol = {}) const;

private:
    Vector point_;
    Subspace direction_;
};

// P ∩ Q, or std::nullopt when the two sets do not meet. Emptiness is decided
// by the least-squares residual of P.point + U u = Q.point + V v against
// residual_rel * (1 + ‖Q.point − P.point‖).
std::optional<AffineSet> affine_intersect(const AffineSet& P, const AffineSet& Q,
                                          const Tolerance& tol = {});

// Throws InvalidInput if any entry is NaN or infinite.
void require_finite(const Matrix& M, const char* what);

}  // namespace deadbeat
