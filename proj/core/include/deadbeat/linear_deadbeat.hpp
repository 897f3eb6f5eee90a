#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "deadbeat/subspace.hpp"

namespace deadbeat {

// Standard:  x̂⁺ = A x̂ + B u
// Factored:  x̂⁺ = A (x̂ + B u)
// Both forms share deadbeat controllability; a gain K2 for the factored form
// becomes K = K2 A for the standard form.
enum class SystemForm { Standard, Factored };

struct LinearSystem {
    Matrix A;
    Matrix B;
    SystemForm form = SystemForm::Factored;

    [[nodiscard]] int state_dim() const noexcept { return static_cast<int>(A.rows()); }
    [[nodiscard]] int input_dim() const noexcept { return static_cast<int>(B.cols()); }

    // Throws InvalidInput unless A is square, B has n rows and m >= 1
    // columns, and all entries are finite.
    void validate() const;
};

// Converts a standard-form system to factored form (B' = A⁻¹ B).
// Throws SingularA when A is not invertible.
LinearSystem to_factored(const LinearSystem& sys, const Tolerance& tol = {});

// S₀ = R(B), S₋ₖ₋₁ = A⁻¹ S₋ₖ + S₀. levels[k] holds S₋ₖ.
struct SubspaceChain {
    std::vector<Subspace> levels;
    // First k with levels[k+1] == levels[k]; empty if not reached within kmax.
    std::optional<int> stabilized_at;

    [[nodiscard]] std::vector<int> dims() const;
    [[nodiscard]] bool reaches_full_space() const;
    // Deadbeat horizon p = stabilized_at + 1 (valid once the chain is full).
    [[nodiscard]] int horizon() const;
};

SubspaceChain subspace_chain(const LinearSystem& sys, int kmax, const Tolerance& tol = {});
// Same with kmax = n + 1, enough to observe stabilization.
SubspaceChain subspace_chain(const LinearSystem& sys, const Tolerance& tol = {});

struct PbhResult {
    bool pass = true;
    std::optional<std::complex<double>> failing_eigenvalue;
};

// rank [A − λI  B] = n for every eigenvalue with |λ| > rank_rel * ‖A‖_F.
// The complex rank is evaluated on the 2n x 2(n+m) real embedding.
PbhResult pbh_test(const LinearSystem& sys, const Tolerance& tol = {});

// dim S₋ₙ == n.
bool geometric_controllable(const LinearSystem& sys, const Tolerance& tol = {});

struct ControllabilityReport {
    bool pbh_pass = false;
    bool geometric_pass = false;
    std::vector<int> chain_dims;  // dims of S₀ … S₋ₙ
    std::optional<std::complex<double>> failing_eigenvalue;
};

// Runs both tests; a disagreement between them raises NumericalFailure.
ControllabilityReport analyze_controllability(const LinearSystem& sys, const Tolerance& tol = {});

struct GainResult {
    Matrix K2;  // factored-form gain, 1 x n
    Matrix K;   // standard-form gain K2 A
    double nilpotency_residual = 0.0;  // verify_nilpotent(A (I − B K2))
};

// Scalar-input deadbeat gain through the subspace recursion on A⁻¹.
// Throws UnsupportedInputWidth (m != 1), SingularA, Uncontrollable.
GainResult deadbeat_gain(const LinearSystem& sys, const Tolerance& tol = {});

// Dual recursion on orthogonal complements; works for singular A.
GainResult deadbeat_gain_dual(const LinearSystem& sys, const Tolerance& tol = {});

// ‖Mⁿ‖_F / max(1, ‖M‖_Fⁿ). Zero for an exactly nilpotent M.
double verify_nilpotent(const Matrix& M);

// K = K2 A. Throws InvalidInput on shape mismatch.
Matrix convert_gain(const Matrix& K2, const Matrix& A);

// [x]₋ₖ = x + S₋ₖ.
AffineSet class_at_level(const Vector& x, int k, const SubspaceChain& chain);

// [x]⁻ at `level` ∈ {1, 0, −1, …}: level 1 is the singleton {x}, level −k is
// x + A⁻¹ S₋ₖ.
AffineSet minus_class_at_level(const Vector& x, int level, const LinearSystem& sys,
                               const SubspaceChain& chain, const Tolerance& tol = {});

// Largest level j ∈ {2 − p, …, 0, 1} with [x̂]₀ ∩ [x]⁻ⱼ nonempty.
// Throws NotControllable when the chain never fills R^n or no level qualifies.
int pi_level(const Vector& xhat, const Vector& x, const LinearSystem& sys,
             const SubspaceChain& chain, const Tolerance& tol = {});

// One step of the set-intersection tracker: A·z with z the minimum-norm point
// of [x̂]₀ ∩ [x]⁻_π. Requires a factored-form system.
Vector linear_tracker_step(const Vector& xhat, const Vector& x, const LinearSystem& sys,
                           const SubspaceChain& chain, const Tolerance& tol = {});

}  // namespace deadbeat
