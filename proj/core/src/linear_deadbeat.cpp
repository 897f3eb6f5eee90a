#include "deadbeat/linear_deadbeat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "deadbeat/errors.hpp"

namespace deadbeat {

namespace {

Eigen::Vector2d singular_extremes(const Matrix& A) {
    Eigen::JacobiSVD<Matrix> svd(A);
    const Vector& sv = svd.singularValues();
    return {sv(0), sv(sv.size() - 1)};
}

bool is_invertible(const Matrix& A, const Tolerance& tol) {
    const Eigen::Vector2d ext = singular_extremes(A);
    return ext(0) > 0.0 && ext(1) > tol.rank_rel * ext(0);
}

// Q factor of a thin Householder QR; same span, unit orthogonal columns.
Matrix orthonormal_columns(const Matrix& M) {
    Eigen::HouseholderQR<Matrix> qr(M);
    return qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
}

// Size of the eigenvalue cluster at zero: dim null(Aⁿ), accumulated as
// null(A) ⊆ A⁻¹null(A) ⊆ … until it stops growing.
int nilpotent_dimension(const Matrix& A, const Tolerance& tol) {
    const auto n = static_cast<int>(A.rows());
    Subspace kernel = Subspace::zero(n);
    for (int j = 0; j < n; ++j) {
        Subspace next = preimage(A, kernel, tol);
        if (next.dim() == kernel.dim()) break;
        kernel = std::move(next);
    }
    return kernel.dim();
}

void require_scalar_input(const LinearSystem& sys) {
    if (sys.input_dim() != 1)
        throw UnsupportedInputWidth("deadbeat gain needs a single input column, got m = " +
                                    std::to_string(sys.input_dim()));
}

// Closed loop for n = 1: A (1 − B K2) = 0 with K2 = 1/B.
GainResult scalar_state_gain(const LinearSystem& sys) {
    const double b = sys.B(0, 0);
    if (b == 0.0) throw Uncontrollable("scalar system with B = 0");
    GainResult g;
    g.K2 = Matrix::Constant(1, 1, 1.0 / b);
    g.K = convert_gain(g.K2, sys.A);
    g.nilpotency_residual = verify_nilpotent(sys.A * (Matrix::Identity(1, 1) - sys.B * g.K2));
    return g;
}

// K2 = wᵀ / (wᵀ B), then the self-check on A (I − B K2).
GainResult finish_gain(const LinearSystem& sys, const Vector& w, const Tolerance& tol) {
    const double denom = w.dot(sys.B.col(0));
    if (!(std::abs(denom) > tol.residual_rel * w.norm() * sys.B.norm()))
        throw Uncontrollable("normal vector is orthogonal to B");
    GainResult g;
    g.K2 = w.transpose() / denom;
    g.K = convert_gain(g.K2, sys.A);
    const auto n = sys.state_dim();
    g.nilpotency_residual = verify_nilpotent(sys.A * (Matrix::Identity(n, n) - sys.B * g.K2));
    if (!(g.nilpotency_residual <= tol.residual_rel)) {
        std::ostringstream os;
        os << "closed loop is not nilpotent (residual " << g.nilpotency_residual << ")";
        throw Uncontrollable(os.str());
    }
    return g;
}

void require_usable_chain(const SubspaceChain& chain, int n) {
    if (chain.levels.empty() || chain.levels.front().ambient_dim() != n)
        throw InvalidInput("subspace chain does not match the system dimension");
    if (!chain.stabilized_at)
        throw InvalidInput("subspace chain has not stabilized; compute it with kmax >= n + 1");
    if (!chain.reaches_full_space())
        throw NotControllable("subspace chain stabilizes below R^n; no deadbeat tracker exists");
}

void require_length(const Vector& v, int n, const char* what) {
    if (v.size() != n)
        throw InvalidInput(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                           std::to_string(v.size()));
}

// [x̂]₀ ∩ [x]⁻_j at the largest nonempty level j.
std::pair<int, AffineSet> select_level(const Vector& xhat, const Vector& x, const LinearSystem& sys,
                                       const SubspaceChain& chain, const Tolerance& tol) {
    const int n = sys.state_dim();
    require_usable_chain(chain, n);
    require_length(xhat, n, "xhat");
    require_length(x, n, "x");
    const AffineSet base = class_at_level(xhat, 0, chain);
    const int lowest = 2 - chain.horizon();
    for (int level = 1; level >= lowest; --level) {
        if (auto meet = affine_intersect(base, minus_class_at_level(x, level, sys, chain, tol), tol))
            return {level, std::move(*meet)};
    }
    throw NotControllable("no level of the class hierarchy meets [xhat]_0");
}

}  // namespace

void LinearSystem::validate() const {
    if (A.rows() == 0 || A.rows() != A.cols()) throw InvalidInput("system: A must be square and nonempty");
    if (B.rows() != A.rows()) throw InvalidInput("system: B must have as many rows as A");
    if (B.cols() < 1) throw InvalidInput("system: B needs at least one column");
    require_finite(A, "system A");
    require_finite(B, "system B");
}

LinearSystem to_factored(const LinearSystem& sys, const Tolerance& tol) {
    sys.validate();
    if (sys.form == SystemForm::Factored) return sys;
    if (!is_invertible(sys.A, tol))
        throw SingularA("standard-form system with singular A has no factored equivalent");
    return {sys.A, sys.A.partialPivLu().solve(sys.B), SystemForm::Factored};
}

std::vector<int> SubspaceChain::dims() const {
    std::vector<int> out;
    out.reserve(levels.size());
    for (const auto& s : levels) out.push_back(s.dim());
    return out;
}

bool SubspaceChain::reaches_full_space() const {
    return !levels.empty() && levels.back().dim() == levels.back().ambient_dim();
}

int SubspaceChain::horizon() const {
    if (!stabilized_at) throw InvalidInput("subspace chain has not stabilized");
    return *stabilized_at + 1;
}

SubspaceChain subspace_chain(const LinearSystem& sys, int kmax, const Tolerance& tol) {
    sys.validate();
    if (kmax < 0) throw InvalidInput("subspace_chain: kmax must be nonnegative");
    SubspaceChain chain;
    chain.levels.reserve(static_cast<std::size_t>(kmax) + 1);
    chain.levels.push_back(column_space(sys.B, tol));
    for (int k = 0; k < kmax; ++k) {
        if (chain.stabilized_at) {
            chain.levels.push_back(chain.levels.back());
            continue;
        }
        Subspace next = sum(preimage(sys.A, chain.levels[k], tol), chain.levels.front(), tol);
        if (equal(next, chain.levels[k], tol)) {
            chain.stabilized_at = k;
            chain.levels.push_back(chain.levels[k]);
        } else {
            chain.levels.push_back(std::move(next));
        }
    }
    return chain;
}

SubspaceChain subspace_chain(const LinearSystem& sys, const Tolerance& tol) {
    return subspace_chain(sys, sys.state_dim() + 1, tol);
}

PbhResult pbh_test(const LinearSystem& sys, const Tolerance& tol) {
    sys.validate();
    const Eigen::Index n = sys.A.rows();
    const Eigen::Index m = sys.B.cols();
    Eigen::EigenSolver<Matrix> es(sys.A, false);
    if (es.info() != Eigen::Success) throw NumericalFailure("pbh_test: eigenvalue computation failed");

    // Zero eigenvalues are exempt. A defective zero eigenvalue is computed with
    // error ~ eps^{1/k}, so beyond the absolute cutoff the z smallest
    // eigenvalues are also exempt, z being the size of the nilpotent cluster.
    const double zero_cut = tol.rank_rel * sys.A.norm();
    std::vector<std::complex<double>> eigs(es.eigenvalues().begin(), es.eigenvalues().end());
    std::stable_sort(eigs.begin(), eigs.end(),
                     [](auto a, auto b) { return std::abs(a) < std::abs(b); });
    const int zero_cluster = nilpotent_dimension(sys.A, tol);
    PbhResult result;
    for (std::size_t i = 0; i < eigs.size(); ++i) {
        const std::complex<double> lambda = eigs[i];
        if (std::abs(lambda) <= zero_cut || static_cast<int>(i) < zero_cluster) continue;
        // [Re −Im; Im Re] has rank 2·rank of the complex matrix [A − λI  B].
        Matrix re(n, n + m);
        re << sys.A - lambda.real() * Matrix::Identity(n, n), sys.B;
        Matrix im = Matrix::Zero(n, n + m);
        im.leftCols(n) = -lambda.imag() * Matrix::Identity(n, n);
        Matrix embed(2 * n, 2 * (n + m));
        embed << re, -im, im, re;
        if (column_space(embed, tol).dim() < 2 * n) {
            result.pass = false;
            result.failing_eigenvalue = lambda;
            break;
        }
    }
    return result;
}

bool geometric_controllable(const LinearSystem& sys, const Tolerance& tol) {
    const int n = sys.state_dim();
    return subspace_chain(sys, n, tol).levels.back().dim() == n;
}

ControllabilityReport analyze_controllability(const LinearSystem& sys, const Tolerance& tol) {
    const PbhResult pbh = pbh_test(sys, tol);
    const int n = sys.state_dim();
    const SubspaceChain chain = subspace_chain(sys, n, tol);
    ControllabilityReport report;
    report.pbh_pass = pbh.pass;
    report.failing_eigenvalue = pbh.failing_eigenvalue;
    report.chain_dims = chain.dims();
    report.geometric_pass = chain.levels.back().dim() == n;
    if (report.pbh_pass != report.geometric_pass)
        throw NumericalFailure("PBH and subspace-chain controllability tests disagree");
    return report;
}

GainResult deadbeat_gain(const LinearSystem& sys, const Tolerance& tol) {
    sys.validate();
    require_scalar_input(sys);
    const int n = sys.state_dim();
    if (n == 1) return scalar_state_gain(sys);
    if (!is_invertible(sys.A, tol))
        throw SingularA("A is singular; use the dual algorithm");

    const auto lu = sys.A.partialPivLu();
    // X spans S₋ᵢ. Columns are re-orthonormalized every pass: the span is what
    // matters, and raw A⁻ⁱB columns drift apart in scale by orders of magnitude.
    Matrix X = sys.B / sys.B.norm();
    for (int i = 1; i <= n - 2; ++i) {
        Matrix next(n, X.cols() + 1);
        next << lu.solve(X), sys.B;
        X = orthonormal_columns(next);
    }
    const Subspace normal = null_space(lu.solve(X).transpose(), tol);
    if (normal.dim() != 1)
        throw Uncontrollable("A^{-1} X has a null space of dimension " + std::to_string(normal.dim()) +
                             ", expected 1");
    return finish_gain(sys, normal.basis().col(0), tol);
}

GainResult deadbeat_gain_dual(const LinearSystem& sys, const Tolerance& tol) {
    sys.validate();
    require_scalar_input(sys);
    const int n = sys.state_dim();
    if (n == 1) return scalar_state_gain(sys);

    const Matrix At = sys.A.transpose();
    const double scale = At.norm();
    Matrix Xperp = null_space(sys.B.transpose(), tol).basis();
    if (Xperp.cols() != n - 1) throw Uncontrollable("B is zero");
    for (int i = 1; i <= n - 2; ++i) {
        // null((Aᵀ X⊥)ᵀ) spans A⁻¹ S; its products with A may vanish exactly.
        const Matrix pre = null_space((At * Xperp).transpose(), tol, scale).basis();
        Matrix stacked(n, pre.cols() + 1);
        stacked << pre, sys.B;
        Xperp = null_space(stacked.transpose(), tol).basis();
        if (Xperp.cols() != n - 1 - i)
            throw Uncontrollable("dual recursion: complement has dimension " +
                                 std::to_string(Xperp.cols()) + ", expected " +
                                 std::to_string(n - 1 - i));
    }
    const Vector y = At * Xperp.col(0);
    if (!(y.norm() > tol.rank_rel * scale)) throw Uncontrollable("dual recursion: Aᵀ X⊥ vanishes");
    return finish_gain(sys, y, tol);
}

double verify_nilpotent(const Matrix& M) {
    if (M.rows() != M.cols()) throw InvalidInput("verify_nilpotent: matrix must be square");
    const auto n = M.rows();
    if (n == 0) return 0.0;
    Matrix power = M;
    for (Eigen::Index i = 1; i < n; ++i) power = power * M;
    const double denom = std::max(1.0, std::pow(M.norm(), static_cast<double>(n)));
    return power.norm() / denom;
}

Matrix convert_gain(const Matrix& K2, const Matrix& A) {
    if (A.rows() != A.cols() || K2.cols() != A.rows())
        throw InvalidInput("convert_gain: K2 must have as many columns as the square A");
    return K2 * A;
}

AffineSet class_at_level(const Vector& x, int k, const SubspaceChain& chain) {
    if (k < 0 || k >= static_cast<int>(chain.levels.size()))
        throw InvalidInput("class_at_level: level index out of range");
    return AffineSet(x, chain.levels[static_cast<std::size_t>(k)]);
}

AffineSet minus_class_at_level(const Vector& x, int level, const LinearSystem& sys,
                               const SubspaceChain& chain, const Tolerance& tol) {
    if (level == 1) return AffineSet(x, Subspace::zero(static_cast<int>(x.size())));
    const int k = -level;
    if (k < 0 || k >= static_cast<int>(chain.levels.size()))
        throw InvalidInput("minus_class_at_level: level out of range");
    return AffineSet(x, preimage(sys.A, chain.levels[static_cast<std::size_t>(k)], tol));
}

int pi_level(const Vector& xhat, const Vector& x, const LinearSystem& sys,
             const SubspaceChain& chain, const Tolerance& tol) {
    return select_level(xhat, x, sys, chain, tol).first;
}

Vector linear_tracker_step(const Vector& xhat, const Vector& x, const LinearSystem& sys,
                           const SubspaceChain& chain, const Tolerance& tol) {
    if (sys.form != SystemForm::Factored)
        throw InvalidInput("linear_tracker_step: system must be in factored form (see to_factored)");
    return sys.A * select_level(xhat, x, sys, chain, tol).second.point();
}

}  // namespace deadbeat
