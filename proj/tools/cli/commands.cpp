#include "cli/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/system_file.hpp"
#include "deadbeat/deadbeat.hpp"

namespace deadbeat::cli {

namespace {

using nlohmann::json;

std::string num(double v) {
    if (v == 0.0) v = 0.0;  // no "-0" in text output
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string row_text(const Matrix& M) {
    std::string s = "[";
    for (Eigen::Index j = 0; j < M.size(); ++j) {
        if (j) s += ", ";
        s += num(M(j));
    }
    return s + "]";
}

std::vector<double> to_std(const Matrix& M) { return {M.data(), M.data() + M.size()}; }

// Options shared by every subcommand that reads a linear system.
struct SystemSource {
    std::string path;
    std::string a_file;
    std::string b_file;
    std::string form = "factored";
    std::optional<double> rank_tol;
    std::optional<double> residual_tol;

    void attach(CLI::App& sub) {
        sub.add_option("system", path, "JSON system file (n, m, A, B, form)");
        sub.add_option("--A-file", a_file, "plain-text matrix file for A (instead of a system file)");
        sub.add_option("--B-file", b_file, "plain-text matrix file for B");
        sub.add_option("--form", form, "form for --A-file/--B-file input")
            ->check(CLI::IsMember({"factored", "standard"}));
        attach_tolerances(sub);
    }

    void attach_tolerances(CLI::App& sub) {
        sub.add_option("--rank-tol", rank_tol, "relative singular-value cutoff (default 1e-10)");
        sub.add_option("--residual-tol", residual_tol, "relative residual tolerance (default 1e-8)");
    }

    [[nodiscard]] Tolerance tolerance() const {
        Tolerance tol = tolerance_from_env(std::getenv("DEADBEAT_TOL"));
        if (rank_tol) tol.rank_rel = *rank_tol;
        if (residual_tol) tol.residual_rel = *residual_tol;
        tol.validate();
        return tol;
    }

    [[nodiscard]] LinearSystem load() const {
        if (!path.empty()) {
            if (!a_file.empty() || !b_file.empty())
                throw InvalidInput("give either a system file or --A-file/--B-file, not both");
            return load_system(path);
        }
        if (a_file.empty() || b_file.empty())
            throw InvalidInput("no system given: pass a system file or both --A-file and --B-file");
        LinearSystem sys{load_matrix_text(a_file), load_matrix_text(b_file),
                         form == "standard" ? SystemForm::Standard : SystemForm::Factored};
        sys.validate();
        return sys;
    }
};

void write_csv_file(const std::string& path, const TrackingRun& run) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot write '" + path + "'");
    write_tracking_csv(os, run);
}

int cmd_check(const SystemSource& src, std::ostream& out) {
    const LinearSystem sys = src.load();
    const ControllabilityReport rep = analyze_controllability(sys, src.tolerance());
    out << "PBH test: " << (rep.pbh_pass ? "pass" : "fail") << '\n';
    if (rep.failing_eigenvalue) {
        const auto l = *rep.failing_eigenvalue;
        out << "failing eigenvalue: " << num(l.real());
        if (l.imag() != 0.0) out << (l.imag() < 0 ? " - " : " + ") << num(std::abs(l.imag())) << "i";
        out << '\n';
    }
    // The chain is constant once it stabilizes; print up to that level.
    auto dims = rep.chain_dims;
    while (dims.size() > 1 && dims.back() == dims[dims.size() - 2]) dims.pop_back();
    out << "chain dims:";
    for (int d : dims) out << ' ' << d;
    out << '\n';
    out << "geometric test: " << (rep.geometric_pass ? "pass" : "fail") << '\n';
    out << (rep.geometric_pass ? "deadbeat controllable" : "not deadbeat controllable") << '\n';
    return rep.geometric_pass ? kOk : kNotControllable;
}

int cmd_gain(const SystemSource& src, bool dual, bool as_json, std::ostream& out) {
    const LinearSystem sys = src.load();
    const Tolerance tol = src.tolerance();
    const GainResult g = dual ? deadbeat_gain_dual(sys, tol) : deadbeat_gain(sys, tol);
    if (as_json) {
        json doc;
        doc["algorithm"] = dual ? "dual" : "primal";
        doc["K2"] = to_std(g.K2);
        doc["K"] = to_std(g.K);
        doc["nilpotency_residual"] = g.nilpotency_residual;
        out << doc.dump() << '\n';
        return kOk;
    }
    out << "algorithm: " << (dual ? "dual" : "primal") << '\n';
    out << "K2 (factored form): " << row_text(g.K2) << '\n';
    out << "K  (standard form): " << row_text(g.K) << '\n';
    out << "nilpotency residual: " << num(g.nilpotency_residual) << '\n';
    out << "closed loop for this system's form: "
        << (sys.form == SystemForm::Factored ? "A (I - B K2)" : "A - B K") << '\n';
    return kOk;
}

struct TrackOptions {
    std::string x0;
    std::string xhat0;
    std::optional<int> steps;
    std::uint64_t seed = 1;
    std::string out;
    double track_tol = 1e-8;
};

int cmd_track(const SystemSource& src, const TrackOptions& opt, std::ostream& out, std::ostream& err) {
    const Tolerance tol = src.tolerance();
    const LinearSystem sys = to_factored(src.load(), tol);
    const int n = sys.state_dim();
    const SubspaceChain chain = subspace_chain(sys, tol);
    if (!chain.reaches_full_space()) {
        err << "error: system is not deadbeat controllable; no tracker exists\n";
        return kNotControllable;
    }
    Rng rng = stream_for(opt.seed, 0);
    const Vector x0 = opt.x0.empty() ? Vector(gaussian_matrix(rng, n, 1)) : parse_vector(opt.x0);
    const Vector xhat0 = opt.xhat0.empty() ? Vector(gaussian_matrix(rng, n, 1)) : parse_vector(opt.xhat0);
    if (x0.size() != n || xhat0.size() != n)
        throw InvalidInput("--x0/--xhat0 must have " + std::to_string(n) + " entries");
    const int steps = opt.steps.value_or(default_horizon(n));
    if (steps < 0) throw InvalidInput("--steps must be nonnegative");

    const TrackingRun run = simulate_coupled(linear_tracker(sys, chain, tol), linear_reference(sys), x0,
                                             xhat0, steps, opt.track_tol);
    if (!opt.out.empty()) write_csv_file(opt.out, run);
    const int p = chain.horizon();
    out << "deadbeat_step=" << (run.deadbeat_step ? std::to_string(*run.deadbeat_step) : "none")
        << " horizon=" << p << " max_gap_after_horizon=" << num(run.max_gap_from(p)) << '\n';
    return run.deadbeat_step && *run.deadbeat_step <= p ? kOk : kGuaranteeViolated;
}

struct DemoOptions {
    std::string name;
    std::uint64_t seed = 1;
    int steps = default_horizon(3);
    std::string out;
    double track_tol = 1e-6;
};

int cmd_demo(const DemoOptions& opt, std::ostream& out, std::ostream& err) {
    const auto sys = make_example_system(opt.name);
    if (!sys) {
        err << "error: unknown demo '" << opt.name << "' (expected homogeneous or positive)\n";
        return kInputError;
    }
    if (opt.steps < 0) throw InvalidInput("--steps must be nonnegative");
    const bool positive = opt.name == "positive";
    Rng rng = stream_for(opt.seed, 0);
    const Vector x0 = uniform_vector(rng, 3, positive ? 0.5 : -2.0, 2.0);
    const Vector xhat0 = uniform_vector(rng, 3, positive ? 0.5 : -2.0, 2.0);
    const TrackingRun run = simulate_coupled(nonlinear_tracker(*sys), nonlinear_reference(*sys), x0, xhat0,
                                             opt.steps, opt.track_tol, nonlinear_domain(*sys));
    if (!opt.out.empty()) write_csv_file(opt.out, run);
    const int p = sys->horizon();
    const double residual = run.max_gap_from(p);
    out << "demo=" << opt.name << " first_equal_step="
        << (run.deadbeat_step ? std::to_string(*run.deadbeat_step) : "none") << " horizon=" << p
        << " max_post_horizon_residual=" << num(residual) << '\n';
    const bool ok = run.deadbeat_step && *run.deadbeat_step <= p && residual <= opt.track_tol;
    return ok ? kOk : kGuaranteeViolated;
}

struct BatchOptions {
    std::string family;
    BatchConfig config;
    bool as_json = false;
};

int cmd_batch(const BatchOptions& opt, const SystemSource& tols, std::ostream& out, std::ostream& err) {
    const auto family = parse_batch_family(opt.family);
    if (!family) {
        err << "error: unknown family '" << opt.family
            << "' (expected gain, gain-dual, tracker, homogeneous, positive)\n";
        return kInputError;
    }
    BatchConfig cfg = opt.config;
    cfg.family = *family;
    cfg.tolerance = tols.tolerance();
    const BatchSummary s = batch_experiment(cfg);
    if (opt.as_json) {
        json hist = json::object();
        for (const auto& [step, count] : s.step_histogram) hist[std::to_string(step)] = count;
        json doc{{"family", opt.family}, {"runs", s.runs},       {"passes", s.passes},
                 {"failures", s.failures}, {"errors", s.errors}, {"max_residual", s.max_residual},
                 {"step_histogram", hist}};
        out << doc.dump() << '\n';
    } else {
        out << "family=" << opt.family << " runs=" << s.runs << " passes=" << s.passes
            << " failures=" << s.failures << " errors=" << s.errors
            << " max_residual=" << num(s.max_residual) << '\n';
        out << "step histogram:";
        for (const auto& [step, count] : s.step_histogram) out << ' ' << step << ':' << count;
        out << '\n';
    }
    return s.failures == 0 ? kOk : kGuaranteeViolated;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deadbeat control toolkit: controllability, deadbeat gains, set-based trackers",
                 "deadbeat"};
    app.require_subcommand(1);

    SystemSource check_src;
    auto* check = app.add_subcommand("check", "PBH and subspace-chain controllability tests");
    check_src.attach(*check);

    SystemSource gain_src;
    bool dual = false;
    bool as_json = false;
    auto* gain = app.add_subcommand("gain", "scalar-input deadbeat gain");
    gain_src.attach(*gain);
    gain->add_flag("--dual", dual, "use the dual recursion (works for singular A)");
    gain->add_flag("--json", as_json, "machine-readable output");

    SystemSource track_src;
    TrackOptions track_opt;
    auto* track = app.add_subcommand("track", "simulate the set-intersection tracker");
    track_src.attach(*track);
    track->add_option("--x0", track_opt.x0, "reference initial state, comma separated");
    track->add_option("--xhat0", track_opt.xhat0, "tracker initial state, comma separated");
    track->add_option("--steps", track_opt.steps, "horizon N (default 2(n+1))");
    track->add_option("--seed", track_opt.seed, "seed for initial states not given explicitly");
    track->add_option("--out", track_opt.out, "CSV output path");
    track->add_option("--track-tol", track_opt.track_tol, "relative tracking tolerance (default 1e-8)");

    DemoOptions demo_opt;
    auto* demo = app.add_subcommand("demo", "nonlinear example trackers (homogeneous, positive)");
    demo->add_option("name", demo_opt.name, "homogeneous | positive")->required();
    demo->add_option("--seed", demo_opt.seed, "seed for the initial pair");
    demo->add_option("--steps", demo_opt.steps, "horizon N (default 8)");
    demo->add_option("--out", demo_opt.out, "CSV output path");
    demo->add_option("--track-tol", demo_opt.track_tol, "relative tracking tolerance (default 1e-6)");

    BatchOptions batch_opt;
    SystemSource batch_tols;
    auto* batch = app.add_subcommand("batch", "seeded experiments over random systems");
    batch->add_option("--family", batch_opt.family, "gain | gain-dual | tracker | homogeneous | positive")
        ->required();
    batch->add_option("--count", batch_opt.config.count, "number of runs");
    batch->add_option("--seed", batch_opt.config.seed, "base seed");
    batch->add_option("--n-min", batch_opt.config.n_min, "smallest state dimension (linear families)");
    batch->add_option("--n-max", batch_opt.config.n_max, "largest state dimension (linear families)");
    batch->add_option("--inputs", batch_opt.config.inputs, "input count m (tracker family)");
    batch->add_option("--steps", batch_opt.config.horizon, "horizon N (default 2(n+1))");
    batch->add_option("--threads", batch_opt.config.threads, "worker threads");
    batch->add_option("--track-tol", batch_opt.config.tracking_tol, "relative tracking tolerance");
    batch->add_flag("--json", batch_opt.as_json, "machine-readable summary");
    batch_tols.attach_tolerances(*batch);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (check->parsed()) return cmd_check(check_src, out);
        if (gain->parsed()) return cmd_gain(gain_src, dual, as_json, out);
        if (track->parsed()) return cmd_track(track_src, track_opt, out, err);
        if (demo->parsed()) return cmd_demo(demo_opt, out, err);
        if (batch->parsed()) return cmd_batch(batch_opt, batch_tols, out, err);
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const UnsupportedInputWidth& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const SingularA& e) {
        err << "error: " << e.what() << '\n';
        return kSingularA;
    } catch (const Uncontrollable& e) {
        err << "error: " << e.what() << '\n';
        return kNotControllable;
    } catch (const NotControllable& e) {
        err << "error: " << e.what() << '\n';
        return kNotControllable;
    } catch (const DivergedAtStep& e) {
        err << "error: " << e.what() << '\n';
        return kGuaranteeViolated;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
    return kInputError;
}

}  // namespace deadbeat::cli
