#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deadbeat/linear_deadbeat.hpp"
#include "deadbeat/nonlinear_examples.hpp"

namespace deadbeat {

using StateMap = std::function<Vector(const Vector&)>;
using TrackerMap = std::function<Vector(const Vector& xhat, const Vector& x)>;
using DomainCheck = std::function<bool(const Vector&)>;

// Any state with norm above this aborts a run with DivergedAtStep.
inline constexpr double kDivergenceBound = 1e12;

// 2(n + 1): headroom beyond the n + 1 guarantee of the linear tracker.
inline constexpr int default_horizon(int n) { return 2 * (n + 1); }

struct Trajectory {
    int dim = 0;
    std::vector<Vector> states;  // states[k] at time k; states[0] is the initial condition

    [[nodiscard]] int steps() const noexcept { return static_cast<int>(states.size()) - 1; }
};

// ‖ψ − φ‖ / (1 + ‖φ‖).
double relative_gap(const Vector& psi, const Vector& phi);

struct TrackingRun {
    Trajectory reference;  // φ
    Trajectory tracker;    // ψ
    std::optional<int> deadbeat_step;
    double tol_used = 0.0;

    // Largest relative_gap over k in [from, N]; 0 when the range is empty.
    [[nodiscard]] double max_gap_from(int from) const;
};

// Smallest k such that relative_gap <= tol at every j in [k, N].
std::optional<int> first_deadbeat_step(const Trajectory& reference, const Trajectory& tracker,
                                       double tol);

Trajectory simulate_autonomous(const StateMap& step, const Vector& x0, int N,
                               const DomainCheck& in_domain = {});

// x⁺ = f(x), x̂⁺ = tracker(x̂, x) in lockstep for N steps.
TrackingRun simulate_coupled(const TrackerMap& tracker, const StateMap& f, const Vector& x0,
                             const Vector& xhat0, int N, double tol,
                             const DomainCheck& in_domain = {});

struct RegulationRun {
    Trajectory trajectory;
    std::optional<int> first_zero_step;  // first k with ‖x(k)‖ <= tol (1 + ‖x0‖)
};

// x⁺ = (A − B K) x.
RegulationRun regulation_run(const Matrix& A, const Matrix& B, const Matrix& K, const Vector& x0,
                             int N, double tol);

// Adapters onto the state-map interface.
StateMap linear_reference(const LinearSystem& sys);
TrackerMap linear_tracker(const LinearSystem& sys, const SubspaceChain& chain,
                          const Tolerance& tol = {});
StateMap nonlinear_reference(const ControlledSystem& sys);
TrackerMap nonlinear_tracker(const ControlledSystem& sys);
DomainCheck nonlinear_domain(const ControlledSystem& sys);

// Header `k,x1..xn,xhat1..xhatn`, one row per step, 17 significant digits.
void write_tracking_csv(std::ostream& os, const TrackingRun& run);

enum class BatchFamily {
    Gain,         // primal algorithm, invertible A; pass = nilpotency, histogram = regulation step
    GainDual,     // dual algorithm, rank-deficient A; same criteria
    Tracker,      // set-intersection tracker on random controllable pairs
    Homogeneous,  // closed-form nonlinear tracker
    Positive,
};

std::optional<BatchFamily> parse_batch_family(std::string_view name);
std::string_view to_string(BatchFamily family);

struct BatchConfig {
    BatchFamily family = BatchFamily::Gain;
    int count = 0;
    std::uint64_t seed = 1;
    int n_min = 2;
    int n_max = 8;
    int inputs = 1;           // m, tracker family only
    int horizon = 0;          // 0 selects default_horizon(n)
    std::optional<double> tracking_tol;  // defaults: 1e-8 linear, 1e-6 nonlinear
    int threads = 1;
    Tolerance tolerance{};
};

struct BatchSummary {
    int runs = 0;
    int passes = 0;
    int failures = 0;
    int errors = 0;  // runs that raised; also counted as failures
    double max_residual = 0.0;
    std::map<int, int> step_histogram;  // deadbeat (or first-zero) step -> count

    // Associative and commutative.
    void merge(const BatchSummary& other);
    bool operator==(const BatchSummary&) const = default;
};

// Deterministic for a fixed config; run i draws from stream_for(seed, i), so
// the result does not depend on the thread count.
BatchSummary batch_experiment(const BatchConfig& config);

}  // namespace deadbeat
