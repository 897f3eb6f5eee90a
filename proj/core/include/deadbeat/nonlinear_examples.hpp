#pragma once

#include <memory>
#include <string_view>

#include <Eigen/Dense>

#include "deadbeat/subspace.hpp"

namespace deadbeat {

using Vector3 = Eigen::Vector3d;

// Sign-preserving real cube root: sign(y) |y|^{1/3}.
double real_cbrt(double y);

// A controlled system x̂⁺ = f(μ(x̂, u)) together with its hand-derived
// deadbeat feedback law κ. The tracker x̂⁺ = f(μ(x̂, κ(x̂, x))) matches the
// reference x⁺ = f(x) from step horizon() on.
class ControlledSystem {
public:
    virtual ~ControlledSystem() = default;

    [[nodiscard]] virtual std::string_view name() const = 0;
    [[nodiscard]] virtual int state_dim() const { return 3; }
    [[nodiscard]] virtual int horizon() const { return 3; }
    // Input u with μ(x, u) = x.
    [[nodiscard]] virtual double neutral_input() const = 0;

    [[nodiscard]] virtual bool in_domain(const Vector3& x) const = 0;
    [[nodiscard]] virtual Vector3 f(const Vector3& x) const = 0;
    [[nodiscard]] virtual Vector3 f_inv(const Vector3& x) const = 0;
    [[nodiscard]] virtual Vector3 mu(const Vector3& x, double u) const = 0;
    [[nodiscard]] virtual double kappa(const Vector3& xhat, const Vector3& x) const = 0;

    // Closed-form tracker step, derived independently of f ∘ μ ∘ κ.
    [[nodiscard]] virtual Vector3 tracker_step(const Vector3& xhat, const Vector3& x) const = 0;

    // True when z lies in both [x̂]₀ and [x]⁻₋₁ to within 1e-9 relative.
    [[nodiscard]] virtual bool in_intersection(const Vector3& xhat, const Vector3& x,
                                               const Vector3& z) const = 0;

    [[nodiscard]] Vector3 composed_step(const Vector3& xhat, const Vector3& x) const {
        return f(mu(xhat, kappa(xhat, x)));
    }
};

// f(x) = (−x₂, x₁ + x₃^{1/3}, x₂³ + x₃), μ(x, u) = (x₁, x₂, x₃ + u³) on R³.
class HomogeneousSystem final : public ControlledSystem {
public:
    [[nodiscard]] std::string_view name() const override { return "homogeneous"; }
    [[nodiscard]] double neutral_input() const override { return 0.0; }
    [[nodiscard]] bool in_domain(const Vector3& x) const override;
    [[nodiscard]] Vector3 f(const Vector3& x) const override;
    [[nodiscard]] Vector3 f_inv(const Vector3& x) const override;
    [[nodiscard]] Vector3 mu(const Vector3& x, double u) const override;
    [[nodiscard]] double kappa(const Vector3& xhat, const Vector3& x) const override;
    [[nodiscard]] Vector3 tracker_step(const Vector3& xhat, const Vector3& x) const override;
    [[nodiscard]] bool in_intersection(const Vector3& xhat, const Vector3& x,
                                       const Vector3& z) const override;
};

// f(x) = (x₁x₂x₃, x₃/x₁, √(x₁x₂)), μ(x, u) = (x₁/u, x₂u², x₃/u) on the open
// positive orthant with u > 0. Every entry point throws DomainViolation on a
// non-positive argument.
class PositiveSystem final : public ControlledSystem {
public:
    [[nodiscard]] std::string_view name() const override { return "positive"; }
    [[nodiscard]] double neutral_input() const override { return 1.0; }
    [[nodiscard]] bool in_domain(const Vector3& x) const override;
    [[nodiscard]] Vector3 f(const Vector3& x) const override;
    [[nodiscard]] Vector3 f_inv(const Vector3& x) const override;
    [[nodiscard]] Vector3 mu(const Vector3& x, double u) const override;
    [[nodiscard]] double kappa(const Vector3& xhat, const Vector3& x) const override;
    [[nodiscard]] Vector3 tracker_step(const Vector3& xhat, const Vector3& x) const override;
    [[nodiscard]] bool in_intersection(const Vector3& xhat, const Vector3& x,
                                       const Vector3& z) const override;
};

// Weighted scaling Δ_λ x = (λx₁, λx₂, λ³x₃) under which HomogeneousSystem is
// homogeneous.
struct Dilation {
    double lambda = 1.0;

    [[nodiscard]] Vector3 apply(const Vector3& x) const {
        return {lambda * x(0), lambda * x(1), lambda * lambda * lambda * x(2)};
    }
};

double homogeneous_kappa(const Vector3& xhat, const Vector3& x);
Vector3 homogeneous_tracker_step(const Vector3& xhat, const Vector3& x);
double positive_kappa(const Vector3& xhat, const Vector3& x);
Vector3 positive_tracker_step(const Vector3& xhat, const Vector3& x);

// μ(x̂, κ(x̂, x)) lies in [x̂]₀ ∩ [x]⁻₋₁.
bool class_membership_check(const ControlledSystem& sys, const Vector3& xhat, const Vector3& x);

// "homogeneous" or "positive"; nullptr for any other name.
std::unique_ptr<ControlledSystem> make_example_system(std::string_view name);

}  // namespace deadbeat
