#include "deadbeat/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <thread>

#include "deadbeat/errors.hpp"
#include "deadbeat/random_systems.hpp"

namespace deadbeat {

namespace {

void guard_state(const Vector& x, int k, const DomainCheck& in_domain) {
    if (!x.allFinite()) throw DivergedAtStep(k, "non-finite state");
    if (x.norm() > kDivergenceBound) throw DivergedAtStep(k, "state norm exceeds 1e12");
    if (in_domain && !in_domain(x)) throw DivergedAtStep(k, "state left the domain");
}

void require_initial(const Vector& x0, const DomainCheck& in_domain, const char* what) {
    if (!x0.allFinite()) throw InvalidInput(std::string(what) + ": non-finite initial state");
    if (in_domain && !in_domain(x0)) throw InvalidInput(std::string(what) + ": initial state outside the domain");
}

Vector3 to3(const Vector& v) {
    if (v.size() != 3) throw InvalidInput("nonlinear example systems are three-dimensional");
    return {v(0), v(1), v(2)};
}

Vector from3(const Vector3& v) { return Vector(v); }

BatchSummary one_run(const BatchConfig& cfg, std::uint64_t index) {
    BatchSummary s;
    s.runs = 1;
    Rng rng = stream_for(cfg.seed, index);
    std::uniform_int_distribution<int> pick_n(cfg.n_min, cfg.n_max);
    const bool linear_family = cfg.family == BatchFamily::Gain || cfg.family == BatchFamily::GainDual ||
                               cfg.family == BatchFamily::Tracker;
    const double track_tol = cfg.tracking_tol.value_or(linear_family ? 1e-8 : 1e-6);
    try {
        bool pass = false;
        double residual = 0.0;
        std::optional<int> step;
        switch (cfg.family) {
        case BatchFamily::Gain:
        case BatchFamily::GainDual: {
            const int n = pick_n(rng);
            const bool dual = cfg.family == BatchFamily::GainDual;
            const LinearSystem sys = dual ? random_singular_controllable_pair(rng, n, 1, n - 1)
                                          : random_controllable_pair(rng, n, 1, true);
            const GainResult g = dual ? deadbeat_gain_dual(sys, cfg.tolerance)
                                      : deadbeat_gain(sys, cfg.tolerance);
            const Vector x0 = gaussian_matrix(rng, n, 1);
            const int N = cfg.horizon > 0 ? cfg.horizon : default_horizon(n);
            const RegulationRun reg = regulation_run(sys.A, sys.B, g.K, x0, N, track_tol);
            residual = g.nilpotency_residual;
            step = reg.first_zero_step;
            // Judged on nilpotency. The regulation step is recorded but not
            // required to be <= n: strongly non-normal closed loops can leave
            // rounding residue far above tol (1 + |x0|) after n steps.
            pass = residual <= cfg.tolerance.residual_rel;
            break;
        }
        case BatchFamily::Tracker: {
            const int n = pick_n(rng);
            const LinearSystem sys = random_controllable_pair(rng, n, cfg.inputs, false);
            const SubspaceChain chain = subspace_chain(sys, cfg.tolerance);
            const Vector x0 = gaussian_matrix(rng, n, 1);
            const Vector xhat0 = gaussian_matrix(rng, n, 1);
            const int N = cfg.horizon > 0 ? cfg.horizon : default_horizon(n);
            const TrackingRun run = simulate_coupled(linear_tracker(sys, chain, cfg.tolerance),
                                                     linear_reference(sys), x0, xhat0, N, track_tol);
            const int p = chain.horizon();
            residual = run.max_gap_from(p);
            step = run.deadbeat_step;
            pass = step && *step <= p;
            break;
        }
        case BatchFamily::Homogeneous:
        case BatchFamily::Positive: {
            const auto sys = make_example_system(to_string(cfg.family));
            const bool positive = cfg.family == BatchFamily::Positive;
            const double lo = positive ? 0.5 : -2.0;
            const double hi = 2.0;
            const Vector x0 = uniform_vector(rng, 3, lo, hi);
            const Vector xhat0 = uniform_vector(rng, 3, lo, hi);
            const int N = cfg.horizon > 0 ? cfg.horizon : default_horizon(3);
            const TrackingRun run = simulate_coupled(nonlinear_tracker(*sys), nonlinear_reference(*sys),
                                                     x0, xhat0, N, track_tol, nonlinear_domain(*sys));
            const int p = sys->horizon();
            residual = run.max_gap_from(p);
            step = run.deadbeat_step;
            pass = step && *step <= p && residual <= track_tol;
            break;
        }
        }
        s.max_residual = residual;
        if (step) s.step_histogram[*step] = 1;
        (pass ? s.passes : s.failures) = 1;
    } catch (const Error&) {
        s.errors = 1;
        s.failures = 1;
    }
    return s;
}

}  // namespace

double relative_gap(const Vector& psi, const Vector& phi) {
    return (psi - phi).norm() / (1.0 + phi.norm());
}

double TrackingRun::max_gap_from(int from) const {
    double worst = 0.0;
    const int N = reference.steps();
    for (int k = std::max(from, 0); k <= N; ++k)
        worst = std::max(worst, relative_gap(tracker.states[static_cast<std::size_t>(k)],
                                             reference.states[static_cast<std::size_t>(k)]));
    return worst;
}

std::optional<int> first_deadbeat_step(const Trajectory& reference, const Trajectory& tracker,
                                       double tol) {
    if (reference.states.size() != tracker.states.size())
        throw InvalidInput("first_deadbeat_step: trajectories differ in length");
    std::optional<int> first;
    for (int k = reference.steps(); k >= 0; --k) {
        const auto i = static_cast<std::size_t>(k);
        if (relative_gap(tracker.states[i], reference.states[i]) > tol) break;
        first = k;
    }
    return first;
}

Trajectory simulate_autonomous(const StateMap& step, const Vector& x0, int N,
                               const DomainCheck& in_domain) {
    if (N < 0) throw InvalidInput("simulate_autonomous: N must be nonnegative");
    require_initial(x0, in_domain, "simulate_autonomous");
    Trajectory traj;
    traj.dim = static_cast<int>(x0.size());
    traj.states.reserve(static_cast<std::size_t>(N) + 1);
    traj.states.push_back(x0);
    for (int k = 1; k <= N; ++k) {
        Vector next = step(traj.states.back());
        guard_state(next, k, in_domain);
        traj.states.push_back(std::move(next));
    }
    return traj;
}

TrackingRun simulate_coupled(const TrackerMap& tracker, const StateMap& f, const Vector& x0,
                             const Vector& xhat0, int N, double tol, const DomainCheck& in_domain) {
    if (N < 0) throw InvalidInput("simulate_coupled: N must be nonnegative");
    if (x0.size() != xhat0.size()) throw InvalidInput("simulate_coupled: x0 and xhat0 differ in length");
    require_initial(x0, in_domain, "simulate_coupled x0");
    require_initial(xhat0, in_domain, "simulate_coupled xhat0");
    TrackingRun run;
    run.tol_used = tol;
    run.reference.dim = run.tracker.dim = static_cast<int>(x0.size());
    run.reference.states.push_back(x0);
    run.tracker.states.push_back(xhat0);
    for (int k = 1; k <= N; ++k) {
        const Vector& x = run.reference.states.back();
        const Vector& xhat = run.tracker.states.back();
        Vector xhat_next = tracker(xhat, x);
        Vector x_next = f(x);
        guard_state(x_next, k, in_domain);
        guard_state(xhat_next, k, in_domain);
        run.reference.states.push_back(std::move(x_next));
        run.tracker.states.push_back(std::move(xhat_next));
    }
    run.deadbeat_step = first_deadbeat_step(run.reference, run.tracker, tol);
    return run;
}

RegulationRun regulation_run(const Matrix& A, const Matrix& B, const Matrix& K, const Vector& x0,
                             int N, double tol) {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || K.rows() != B.cols() || K.cols() != n || x0.size() != n)
        throw InvalidInput("regulation_run: inconsistent shapes");
    const Matrix closed = A - B * K;
    RegulationRun out;
    out.trajectory = simulate_autonomous([&closed](const Vector& x) { return Vector(closed * x); }, x0, N);
    const double bound = tol * (1.0 + x0.norm());
    for (int k = 0; k <= N; ++k) {
        if (out.trajectory.states[static_cast<std::size_t>(k)].norm() <= bound) {
            out.first_zero_step = k;
            break;
        }
    }
    return out;
}

StateMap linear_reference(const LinearSystem& sys) {
    return [A = sys.A](const Vector& x) { return Vector(A * x); };
}

TrackerMap linear_tracker(const LinearSystem& sys, const SubspaceChain& chain, const Tolerance& tol) {
    return [sys, chain, tol](const Vector& xhat, const Vector& x) {
        return linear_tracker_step(xhat, x, sys, chain, tol);
    };
}

StateMap nonlinear_reference(const ControlledSystem& sys) {
    return [&sys](const Vector& x) { return from3(sys.f(to3(x))); };
}

TrackerMap nonlinear_tracker(const ControlledSystem& sys) {
    return [&sys](const Vector& xhat, const Vector& x) { return from3(sys.tracker_step(to3(xhat), to3(x))); };
}

DomainCheck nonlinear_domain(const ControlledSystem& sys) {
    return [&sys](const Vector& x) { return x.size() == 3 && sys.in_domain(to3(x)); };
}

void write_tracking_csv(std::ostream& os, const TrackingRun& run) {
    const int n = run.reference.dim;
    os << "k";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= n; ++i) os << ",xhat" << i;
    os << '\n';
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
    };
    for (int k = 0; k <= run.reference.steps(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        os << k;
        for (int j = 0; j < n; ++j) put(run.reference.states[i](j));
        for (int j = 0; j < n; ++j) put(run.tracker.states[i](j));
        os << '\n';
    }
}

std::optional<BatchFamily> parse_batch_family(std::string_view name) {
    if (name == "gain") return BatchFamily::Gain;
    if (name == "gain-dual") return BatchFamily::GainDual;
    if (name == "tracker") return BatchFamily::Tracker;
    if (name == "homogeneous") return BatchFamily::Homogeneous;
    if (name == "positive") return BatchFamily::Positive;
    return std::nullopt;
}

std::string_view to_string(BatchFamily family) {
    switch (family) {
    case BatchFamily::Gain: return "gain";
    case BatchFamily::GainDual: return "gain-dual";
    case BatchFamily::Tracker: return "tracker";
    case BatchFamily::Homogeneous: return "homogeneous";
    case BatchFamily::Positive: return "positive";
    }
    return "unknown";
}

void BatchSummary::merge(const BatchSummary& other) {
    runs += other.runs;
    passes += other.passes;
    failures += other.failures;
    errors += other.errors;
    max_residual = std::max(max_residual, other.max_residual);
    for (const auto& [step, count] : other.step_histogram) step_histogram[step] += count;
}

BatchSummary batch_experiment(const BatchConfig& config) {
    config.tolerance.validate();
    if (config.count < 0) throw InvalidInput("batch: count must be nonnegative");
    if (config.n_min < 2 || config.n_max < config.n_min)
        throw InvalidInput("batch: need 2 <= n_min <= n_max");
    if (config.inputs < 1) throw InvalidInput("batch: inputs must be positive");

    const int workers = std::clamp(config.threads, 1, std::max(1, config.count));
    std::vector<BatchSummary> partial(static_cast<std::size_t>(workers));
    auto work = [&](int w) {
        for (int i = w; i < config.count; i += workers)
            partial[static_cast<std::size_t>(w)].merge(one_run(config, static_cast<std::uint64_t>(i)));
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    BatchSummary total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

}  // namespace deadbeat
