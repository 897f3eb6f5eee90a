#include <cmath>
#include <sstream>

#include <doctest.h>

#include "deadbeat/deadbeat.hpp"
#include "support/oracles.hpp"

using namespace deadbeat;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) x(i++) = e;
    return x;
}

LinearSystem rotation90() { return {oracle::rotation(M_PI / 2), oracle::e1_column(2)}; }

}  // namespace

TEST_CASE("simulate_autonomous examples") {
    const Vector x0 = vec({0.3, -2.0, 5.0});
    const Trajectory id = simulate_autonomous([](const Vector& x) { return x; }, x0, 4);
    CHECK(id.steps() == 4);
    for (const Vector& s : id.states) CHECK(s == x0);

    const Matrix A = oracle::rotation(M_PI / 2);
    const Trajectory rot = simulate_autonomous([&](const Vector& x) { return Vector(A * x); }, vec({1, 0}), 5);
    const Vector expected[] = {vec({1, 0}), vec({0, -1}), vec({-1, 0}), vec({0, 1}), vec({1, 0}), vec({0, -1})};
    for (int k = 0; k <= 5; ++k) CHECK((rot.states[k] - expected[k]).norm() < 1e-12);

    const PositiveSystem p;
    const Trajectory fixed = simulate_autonomous(nonlinear_reference(p), vec({1, 1, 1}), 6, nonlinear_domain(p));
    for (const Vector& s : fixed.states) CHECK((s - vec({1, 1, 1})).norm() < 1e-15);

    CHECK(simulate_autonomous([](const Vector& x) { return x; }, x0, 0).states.size() == 1);
    CHECK_THROWS_AS(simulate_autonomous([](const Vector& x) { return x; }, x0, -1), InvalidInput);
}

TEST_CASE("divergence guard reports the step") {
    try {
        simulate_autonomous([](const Vector& x) { return Vector(1e4 * x); }, vec({1.0}), 10);
        FAIL("expected DivergedAtStep");
    } catch (const DivergedAtStep& e) {
        CHECK(e.step() == 4);
    }
    try {
        simulate_autonomous([](const Vector& x) { return Vector(x.array() - 1.0); }, vec({1.5, 1.5, 1.5}),
                            5, nonlinear_domain(PositiveSystem{}));
        FAIL("expected DivergedAtStep");
    } catch (const DivergedAtStep& e) {
        CHECK(e.step() == 2);
    }
    CHECK_THROWS_AS(simulate_autonomous([](const Vector& x) { return x; }, vec({-1, 1, 1}), 2,
                                        nonlinear_domain(PositiveSystem{})),
                    InvalidInput);
}

TEST_CASE("simulate_coupled examples") {
    const LinearSystem sys = rotation90();
    const SubspaceChain chain = subspace_chain(sys);
    const Vector x0 = vec({3, 5});

    const TrackingRun same = simulate_coupled(linear_tracker(sys, chain), linear_reference(sys), x0, x0, 6, 1e-8);
    CHECK(same.deadbeat_step == 0);
    CHECK(same.tol_used == 1e-8);

    for (int i = 0; i < 50; ++i) {
        Rng rng = stream_for(40, i);
        const TrackingRun run = simulate_coupled(linear_tracker(sys, chain), linear_reference(sys),
                                                 gaussian_matrix(rng, 2, 1), gaussian_matrix(rng, 2, 1), 6, 1e-8);
        REQUIRE(run.deadbeat_step.has_value());
        CHECK(*run.deadbeat_step <= 3);
    }

    const HomogeneousSystem h;
    const TrackingRun hr = simulate_coupled(nonlinear_tracker(h), nonlinear_reference(h), vec({1, -1, 2}),
                                            vec({-2, 0.5, 1}), 8, 1e-6);
    REQUIRE(hr.deadbeat_step.has_value());
    CHECK(*hr.deadbeat_step <= 3);

    CHECK_THROWS_AS(simulate_coupled(linear_tracker(sys, chain), linear_reference(sys), x0, vec({1, 2, 3}), 3, 1e-8),
                    InvalidInput);
}

TEST_CASE("TrackingRun invariants: lockstep integrity and monotone deadbeat step") {
    for (int i = 0; i < 100; ++i) {
        Rng rng = stream_for(41, i);
        const int n = 2 + i % 7;
        const LinearSystem sys = random_controllable_pair(rng, n, 1 + i % 2, false);
        const SubspaceChain chain = subspace_chain(sys);
        const Vector x0 = gaussian_matrix(rng, n, 1);
        const Vector xh0 = gaussian_matrix(rng, n, 1);
        const int N = default_horizon(n);
        const TrackingRun run = simulate_coupled(linear_tracker(sys, chain), linear_reference(sys), x0, xh0, N, 1e-8);
        const Trajectory alone = simulate_autonomous(linear_reference(sys), x0, N);
        for (int k = 0; k <= N; ++k) CHECK(run.reference.states[k] == alone.states[k]);
        REQUIRE(run.deadbeat_step.has_value());
        for (int k = *run.deadbeat_step; k <= N; ++k)
            CHECK(relative_gap(run.tracker.states[k], run.reference.states[k]) <= 1e-8);
        if (*run.deadbeat_step > 0) {
            const int k = *run.deadbeat_step - 1;
            CHECK(relative_gap(run.tracker.states[k], run.reference.states[k]) > 1e-8);
        }
        CHECK(*run.deadbeat_step <= chain.horizon());
        CHECK(chain.horizon() <= n + 1);
    }
}

TEST_CASE("first_deadbeat_step and max_gap_from") {
    Trajectory a{1, {vec({0}), vec({1}), vec({2}), vec({3})}};
    Trajectory b{1, {vec({5}), vec({1}), vec({9}), vec({3})}};
    CHECK(first_deadbeat_step(a, b, 1e-12) == 3);
    CHECK(first_deadbeat_step(a, a, 1e-12) == 0);
    Trajectory c{1, {vec({0}), vec({1}), vec({2}), vec({4})}};
    CHECK_FALSE(first_deadbeat_step(a, c, 1e-12).has_value());

    TrackingRun run{a, b, 3, 1e-12};
    CHECK(run.max_gap_from(3) == 0.0);
    CHECK(run.max_gap_from(2) == doctest::Approx(7.0 / 3.0));
    CHECK(run.max_gap_from(10) == 0.0);
}

TEST_CASE("regulation_run examples") {
    const LinearSystem sys = rotation90();
    Matrix K(1, 2);
    K << 0, 1;
    CHECK(regulation_run(sys.A, sys.B, K, Vector::Zero(2), 4, 1e-8).first_zero_step == 0);
    const RegulationRun r = regulation_run(sys.A, sys.B, K, vec({0.4, -1.3}), 4, 1e-8);
    REQUIRE(r.first_zero_step.has_value());
    CHECK(*r.first_zero_step <= 2);

    for (int i = 0; i < 20; ++i) {
        Rng rng = stream_for(42, i);
        const LinearSystem s = random_controllable_pair(rng, 6, 1, true);
        const RegulationRun rr =
            regulation_run(s.A, s.B, deadbeat_gain(s).K, gaussian_matrix(rng, 6, 1), 12, 1e-8);
        REQUIRE(rr.first_zero_step.has_value());
        CHECK(*rr.first_zero_step <= 6);
    }
    CHECK_THROWS_AS(regulation_run(sys.A, sys.B, Matrix::Zero(1, 3), vec({1, 1}), 3, 1e-8), InvalidInput);
}

TEST_CASE("CSV export") {
    Trajectory a{2, {vec({0.1, 2}), vec({1.0 / 3.0, -4})}};
    Trajectory b{2, {vec({5, 6}), vec({7, 8})}};
    std::ostringstream os;
    write_tracking_csv(os, TrackingRun{a, b, std::nullopt, 1e-8});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "k,x1,x2,xhat1,xhat2");
    std::getline(is, line);
    CHECK(line == "0,0.10000000000000001,2,5,6");
    std::getline(is, line);
    CHECK(line == "1,0.33333333333333331,-4,7,8");
    // 17 significant digits recover the double exactly.
    CHECK(std::stod("0.33333333333333331") == 1.0 / 3.0);
}

TEST_CASE("batch family names") {
    for (auto f : {BatchFamily::Gain, BatchFamily::GainDual, BatchFamily::Tracker, BatchFamily::Homogeneous,
                   BatchFamily::Positive})
        CHECK(parse_batch_family(to_string(f)) == f);
    CHECK_FALSE(parse_batch_family("bogus").has_value());
}

TEST_CASE("batch_experiment") {
    BatchConfig empty;
    empty.count = 0;
    const BatchSummary e = batch_experiment(empty);
    CHECK(e.runs == 0);
    CHECK(e.step_histogram.empty());

    for (auto fam : {BatchFamily::Gain, BatchFamily::GainDual, BatchFamily::Tracker, BatchFamily::Homogeneous,
                     BatchFamily::Positive}) {
        BatchConfig cfg;
        cfg.family = fam;
        cfg.count = 40;
        cfg.seed = 77;
        cfg.inputs = fam == BatchFamily::Tracker ? 2 : 1;
        const BatchSummary s1 = batch_experiment(cfg);
        cfg.threads = 3;
        const BatchSummary s3 = batch_experiment(cfg);
        CHECK(s1 == s3);
        CHECK(s1 == batch_experiment(cfg));
        CHECK(s1.runs == 40);
        CHECK(s1.passes == 40);
        CHECK(s1.failures == 0);
    }

    BatchConfig bad;
    bad.count = 3;
    bad.n_min = 1;
    CHECK_THROWS_AS(batch_experiment(bad), InvalidInput);
}

TEST_CASE("batch: per-run errors are tallied, not propagated") {
    BatchConfig cfg;
    cfg.family = BatchFamily::Tracker;
    cfg.count = 5;
    cfg.horizon = 2;  // too short to observe the guarantee for n >= 2 in most runs
    cfg.tracking_tol = 1e-300;
    const BatchSummary s = batch_experiment(cfg);
    CHECK(s.runs == 5);
    CHECK(s.passes + s.failures == 5);
}

TEST_CASE("BatchSummary::merge is associative and commutative") {
    BatchSummary a{3, 2, 1, 0, 0.5, {{1, 2}, {2, 1}}};
    BatchSummary b{2, 2, 0, 0, 0.1, {{2, 2}}};
    BatchSummary c{1, 0, 1, 1, 0.9, {}};
    BatchSummary ab = a;
    ab.merge(b);
    BatchSummary ab_c = ab;
    ab_c.merge(c);
    BatchSummary bc = b;
    bc.merge(c);
    BatchSummary a_bc = a;
    a_bc.merge(bc);
    CHECK(ab_c == a_bc);
    BatchSummary ba = b;
    ba.merge(a);
    CHECK(ab == ba);
    CHECK(ab_c.runs == 6);
    CHECK(ab_c.max_residual == 0.9);
    CHECK(ab_c.step_histogram.at(2) == 3);
}
