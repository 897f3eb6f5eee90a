#include "deadbeat/nonlinear_examples.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deadbeat/errors.hpp"

namespace deadbeat {

namespace {

constexpr double kMembershipTol = 1e-9;

bool close_rel(double a, double b) {
    return std::abs(a - b) <= kMembershipTol * std::max({1.0, std::abs(a), std::abs(b)});
}

double cube(double v) { return v * v * v; }

void require_positive(const Vector3& x, const char* what) {
    if (!(x.array() > 0.0).all() || !x.allFinite())
        throw DomainViolation(std::string(what) + ": state must be strictly positive");
}

}  // namespace

double real_cbrt(double y) { return std::cbrt(y); }

// --- homogeneous ----------------------------------------------------------

bool HomogeneousSystem::in_domain(const Vector3& x) const { return x.allFinite(); }

Vector3 HomogeneousSystem::f(const Vector3& x) const {
    return {-x(1), x(0) + real_cbrt(x(2)), cube(x(1)) + x(2)};
}

Vector3 HomogeneousSystem::f_inv(const Vector3& x) const {
    const double s = cube(x(0)) + x(2);
    return {x(1) - real_cbrt(s), -x(0), s};
}

Vector3 HomogeneousSystem::mu(const Vector3& x, double u) const {
    return {x(0), x(1), x(2) + cube(u)};
}

double HomogeneousSystem::kappa(const Vector3& xhat, const Vector3& x) const {
    return homogeneous_kappa(xhat, x);
}

Vector3 HomogeneousSystem::tracker_step(const Vector3& xhat, const Vector3& x) const {
    return homogeneous_tracker_step(xhat, x);
}

bool HomogeneousSystem::in_intersection(const Vector3& xhat, const Vector3& x,
                                        const Vector3& z) const {
    // [x̂]₀ = {(x̂₁, x̂₂, α³)}; [x]⁻₋₁ = {(x₁ + x₃^{1/3} − β, α, β³)}.
    const bool in_base = close_rel(z(0), xhat(0)) && close_rel(z(1), xhat(1));
    const double beta = real_cbrt(z(2));
    const bool in_minus = close_rel(z(0), x(0) + real_cbrt(x(2)) - beta);
    return in_base && in_minus;
}

double homogeneous_kappa(const Vector3& xhat, const Vector3& x) {
    return real_cbrt(cube(x(0) - xhat(0) + real_cbrt(x(2))) - xhat(2));
}

Vector3 homogeneous_tracker_step(const Vector3& xhat, const Vector3& x) {
    const double r = real_cbrt(x(2));
    return {-xhat(1), x(0) + r, cube(xhat(1)) + cube(x(0) - xhat(0) + r)};
}

// --- positive -------------------------------------------------------------

bool PositiveSystem::in_domain(const Vector3& x) const {
    return x.allFinite() && (x.array() > 0.0).all();
}

Vector3 PositiveSystem::f(const Vector3& x) const {
    require_positive(x, "positive f");
    return {x(0) * x(1) * x(2), x(2) / x(0), std::sqrt(x(0) * x(1))};
}

Vector3 PositiveSystem::f_inv(const Vector3& x) const {
    require_positive(x, "positive f_inv");
    const double z2 = x(2) * x(2);
    return {x(0) / (x(1) * z2), x(1) * z2 * z2 / x(0), x(0) / z2};
}

Vector3 PositiveSystem::mu(const Vector3& x, double u) const {
    require_positive(x, "positive mu");
    if (!(u > 0.0) || !std::isfinite(u)) throw DomainViolation("positive mu: input must be > 0");
    return {x(0) / u, x(1) * u * u, x(2) / u};
}

double PositiveSystem::kappa(const Vector3& xhat, const Vector3& x) const {
    return positive_kappa(xhat, x);
}

Vector3 PositiveSystem::tracker_step(const Vector3& xhat, const Vector3& x) const {
    return positive_tracker_step(xhat, x);
}

bool PositiveSystem::in_intersection(const Vector3& xhat, const Vector3& x, const Vector3& z) const {
    if (!in_domain(z)) return false;
    require_positive(xhat, "positive in_intersection");
    require_positive(x, "positive in_intersection");
    // [x̂]₀ = {(x̂₁/γ, x̂₂γ², x̂₃/γ)}: γ is fixed by the first coordinate.
    const double gamma = xhat(0) / z(0);
    const bool in_base = close_rel(z(1), xhat(1) * gamma * gamma) && close_rel(z(2), xhat(2) / gamma);
    // [x]⁻₋₁ = {(x₁/(α²β), x₂α⁴/β, x₃β/α³)}: in logs a = ln α, b = ln β,
    //   l₁ = −2a − b, l₂ = 4a − b, l₃ = −3a + b.
    const double l1 = std::log(z(0) / x(0));
    const double l2 = std::log(z(1) / x(1));
    const double a = (l2 - l1) / 6.0;
    const double b = -2.0 * a - l1;
    const bool in_minus = close_rel(z(2), x(2) * std::exp(b - 3.0 * a));
    return in_base && in_minus;
}

double positive_kappa(const Vector3& xhat, const Vector3& x) {
    require_positive(xhat, "positive kappa");
    require_positive(x, "positive kappa");
    const double num = std::cbrt(x(0)) * std::pow(x(1), 5.0 / 3.0) * x(2) * x(2);
    const double den = std::cbrt(xhat(0)) * std::pow(xhat(1), 5.0 / 3.0) * xhat(2) * xhat(2);
    return num / den;
}

Vector3 positive_tracker_step(const Vector3& xhat, const Vector3& x) {
    require_positive(xhat, "positive tracker");
    require_positive(x, "positive tracker");
    const double third = std::cbrt(xhat(0)) * std::pow(x(0), 1.0 / 6.0) * std::pow(x(1), 5.0 / 6.0) *
                         x(2) / (std::cbrt(xhat(1)) * xhat(2));
    return {xhat(0) * xhat(1) * xhat(2), xhat(2) / xhat(0), third};
}

// --- shared ---------------------------------------------------------------

bool class_membership_check(const ControlledSystem& sys, const Vector3& xhat, const Vector3& x) {
    return sys.in_intersection(xhat, x, sys.mu(xhat, sys.kappa(xhat, x)));
}

std::unique_ptr<ControlledSystem> make_example_system(std::string_view name) {
    if (name == "homogeneous") return std::make_unique<HomogeneousSystem>();
    if (name == "positive") return std::make_unique<PositiveSystem>();
    return nullptr;
}

}  // namespace deadbeat
