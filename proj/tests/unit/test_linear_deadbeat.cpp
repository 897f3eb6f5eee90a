#include <cmath>

#include <doctest.h>

#include "deadbeat/deadbeat.hpp"
#include "support/oracles.hpp"

using namespace deadbeat;

namespace {

LinearSystem rotation_system(double theta) {
    return {oracle::rotation(theta), oracle::e1_column(2), SystemForm::Factored};
}

LinearSystem diag23() {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 2.0;
    A(1, 1) = 3.0;
    return {A, oracle::e1_column(2), SystemForm::Factored};
}

LinearSystem shift_system() {
    Matrix A(2, 2);
    A << 0, 1, 0, 0;
    Matrix B(2, 1);
    B << 0, 1;
    return {A, B, SystemForm::Factored};
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("LinearSystem validation") {
    CHECK_THROWS_AS((LinearSystem{Matrix::Zero(2, 3), Matrix::Zero(2, 1)}.validate()), InvalidInput);
    CHECK_THROWS_AS((LinearSystem{Matrix::Zero(2, 2), Matrix::Zero(3, 1)}.validate()), InvalidInput);
    CHECK_THROWS_AS((LinearSystem{Matrix::Zero(2, 2), Matrix::Zero(2, 0)}.validate()), InvalidInput);
    Matrix bad = Matrix::Identity(2, 2);
    bad(1, 1) = INFINITY;
    CHECK_THROWS_AS((LinearSystem{bad, Matrix::Zero(2, 1)}.validate()), InvalidInput);
}

TEST_CASE("pbh_test examples") {
    CHECK(pbh_test(rotation_system(M_PI / 3)).pass);

    const PbhResult d = pbh_test(diag23());
    CHECK_FALSE(d.pass);
    REQUIRE(d.failing_eigenvalue.has_value());
    CHECK(d.failing_eigenvalue->real() == doctest::Approx(3.0));
    CHECK(d.failing_eigenvalue->imag() == doctest::Approx(0.0));

    CHECK(pbh_test({Matrix::Zero(3, 3), Matrix::Zero(3, 1)}).pass);
}

TEST_CASE("subspace_chain examples") {
    const SubspaceChain rot = subspace_chain(rotation_system(M_PI / 2));
    CHECK(rot.dims()[0] == 1);
    CHECK(rot.dims()[1] == 2);
    CHECK(rot.reaches_full_space());
    CHECK(rot.stabilized_at == 1);
    CHECK(rot.horizon() == 2);

    const SubspaceChain d = subspace_chain(diag23(), 5);
    for (int dim : d.dims()) CHECK(dim == 1);
    CHECK_FALSE(d.reaches_full_space());
    CHECK(d.stabilized_at == 0);

    const SubspaceChain id = subspace_chain({oracle::rotation(0.3), Matrix::Identity(2, 2)});
    CHECK(id.dims()[0] == 2);
    CHECK(id.stabilized_at == 0);

    CHECK_THROWS_AS(subspace_chain(diag23(), -1), InvalidInput);
}

TEST_CASE("geometric_controllable examples") {
    CHECK(geometric_controllable(rotation_system(M_PI / 3)));
    CHECK_FALSE(geometric_controllable(diag23()));
    Rng rng = stream_for(20, 0);
    CHECK(geometric_controllable({gaussian_matrix(rng, 4, 4), Matrix::Identity(4, 4)}));
}

TEST_CASE("analyze_controllability assembles both verdicts") {
    const ControllabilityReport r = analyze_controllability(diag23());
    CHECK_FALSE(r.pbh_pass);
    CHECK_FALSE(r.geometric_pass);
    CHECK(r.chain_dims.size() == 3);
    REQUIRE(r.failing_eigenvalue.has_value());
    CHECK(r.failing_eigenvalue->real() == doctest::Approx(3.0));
    CHECK(analyze_controllability(rotation_system(1.0)).geometric_pass);
}

TEST_CASE("deadbeat_gain: rotation gives [1, -cot θ]") {
    for (double theta : {M_PI / 6, M_PI / 4, M_PI / 3, M_PI / 2, 2 * M_PI / 3}) {
        const GainResult g = deadbeat_gain(rotation_system(theta));
        CHECK(std::abs(g.K2(0, 0) - 1.0) <= 1e-10);
        CHECK(std::abs(g.K2(0, 1) + std::cos(theta) / std::sin(theta)) <= 1e-10);
        CHECK(g.nilpotency_residual <= 1e-12);
    }
    const GainResult g = deadbeat_gain(rotation_system(M_PI / 3));
    CHECK(g.K2(0, 1) == doctest::Approx(-0.5773502692).epsilon(1e-9));
}

TEST_CASE("deadbeat_gain: rotation π/2 closed loop") {
    const LinearSystem sys = rotation_system(M_PI / 2);
    const GainResult g = deadbeat_gain(sys);
    CHECK(std::abs(g.K2(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(g.K2(0, 1)) < 1e-12);
    CHECK(std::abs(g.K(0, 0)) < 1e-12);
    CHECK(std::abs(g.K(0, 1) - 1.0) < 1e-12);
    const Matrix M = sys.A * (Matrix::Identity(2, 2) - sys.B * g.K2);
    Matrix expected(2, 2);
    expected << 0, 1, 0, 0;
    CHECK((M - expected).norm() < 1e-12);
}

TEST_CASE("deadbeat_gain: error taxonomy") {
    CHECK_THROWS_AS(deadbeat_gain(shift_system()), SingularA);
    CHECK_THROWS_AS(deadbeat_gain(diag23()), Uncontrollable);
    CHECK_THROWS_AS(deadbeat_gain_dual(diag23()), Uncontrollable);
    const LinearSystem two{oracle::rotation(1.0), Matrix::Identity(2, 2)};
    CHECK_THROWS_AS(deadbeat_gain(two), UnsupportedInputWidth);
    CHECK_THROWS_AS(deadbeat_gain_dual(two), UnsupportedInputWidth);
}

TEST_CASE("deadbeat_gain: n = 1 returns K2 = 1/B") {
    const LinearSystem s{Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 4.0)};
    for (const GainResult& g : {deadbeat_gain(s), deadbeat_gain_dual(s)}) {
        CHECK(g.K2(0, 0) == doctest::Approx(0.25));
        CHECK(g.K(0, 0) == doctest::Approx(0.175));
        CHECK(g.nilpotency_residual == 0.0);
    }
    const LinearSystem zeroA{Matrix::Zero(1, 1), Matrix::Constant(1, 1, 2.0)};
    CHECK(deadbeat_gain(zeroA).K2(0, 0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(deadbeat_gain({Matrix::Constant(1, 1, 2.0), Matrix::Zero(1, 1)}), Uncontrollable);
}

TEST_CASE("deadbeat_gain_dual examples") {
    const GainResult s = deadbeat_gain_dual(shift_system());
    CHECK(s.nilpotency_residual <= 1e-10);

    const GainResult r = deadbeat_gain_dual(rotation_system(M_PI / 2));
    CHECK(std::abs(r.K2(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(r.K2(0, 1)) < 1e-12);
}

TEST_CASE("primal, dual and Ackermann gains agree; n = 5 example") {
    for (int i = 0; i < 50; ++i) {
        Rng rng = stream_for(21, i);
        const int n = i == 0 ? 5 : 2 + i % 7;
        const LinearSystem sys = random_controllable_pair(rng, n, 1, true);
        const GainResult p = deadbeat_gain(sys);
        const GainResult d = deadbeat_gain_dual(sys);
        const Matrix Kack = oracle::ackermann_gain(sys.A, sys.B);
        CHECK(oracle::rel_diff(p.K, Kack) <= 1e-8);
        CHECK(oracle::rel_diff(d.K, Kack) <= 1e-8);
        CHECK(oracle::rel_diff(p.K2, d.K2) <= 1e-8);
        CHECK(p.nilpotency_residual <= 1e-8);
        CHECK(d.nilpotency_residual <= 1e-8);
    }
}

TEST_CASE("verify_nilpotent") {
    CHECK(verify_nilpotent(Matrix::Zero(3, 3)) == 0.0);
    CHECK(verify_nilpotent(Matrix::Identity(1, 1)) == doctest::Approx(1.0));
    CHECK(verify_nilpotent(Matrix::Identity(4, 4)) > 1e-3);
    Rng rng = stream_for(22, 0);
    for (int n = 2; n <= 8; ++n) {
        const Matrix U = gaussian_matrix(rng, n, n).triangularView<Eigen::StrictlyUpper>();
        CHECK(verify_nilpotent(U) <= 1e-12);
    }
    CHECK_THROWS_AS(verify_nilpotent(Matrix::Zero(2, 3)), InvalidInput);
}

TEST_CASE("convert_gain") {
    Matrix K2(1, 2);
    K2 << 1, 0;
    const Matrix K = convert_gain(K2, oracle::rotation(M_PI / 2));
    CHECK(std::abs(K(0, 0)) < 1e-15);
    CHECK(K(0, 1) == doctest::Approx(1.0));
    CHECK(convert_gain(Matrix::Zero(1, 3), Matrix::Identity(3, 3)).isZero());
    CHECK_THROWS_AS(convert_gain(Matrix::Zero(1, 2), Matrix::Identity(3, 3)), InvalidInput);

    // Nilpotency of A − BK and A(I − BK₂) go together for deadbeat gains.
    for (int i = 0; i < 30; ++i) {
        Rng rng = stream_for(23, i);
        const LinearSystem sys = random_controllable_pair(rng, 2 + i % 7, 1, true);
        const GainResult g = deadbeat_gain(sys);
        const auto n = sys.A.rows();
        const double standard = verify_nilpotent(sys.A - sys.B * convert_gain(g.K2, sys.A));
        const double factored = verify_nilpotent(sys.A * (Matrix::Identity(n, n) - sys.B * g.K2));
        CHECK(std::abs(standard - factored) <= 1e-12);
    }
}

TEST_CASE("class_at_level") {
    const LinearSystem sys = rotation_system(M_PI / 2);
    const SubspaceChain chain = subspace_chain(sys);
    const Vector x = vec2(3, 5);
    const AffineSet c0 = class_at_level(x, 0, chain);
    CHECK(equal(c0.direction(), column_space(sys.B)));
    CHECK(c0.contains(x));
    CHECK(class_at_level(Vector::Zero(2), 0, chain).point().norm() == 0.0);
    CHECK(class_at_level(x, 2, chain).direction().dim() == 2);
    CHECK_THROWS_AS(class_at_level(x, 9, chain), InvalidInput);
    CHECK_THROWS_AS(class_at_level(x, -1, chain), InvalidInput);
}

TEST_CASE("minus_class_at_level") {
    const LinearSystem sys = rotation_system(M_PI / 2);
    const SubspaceChain chain = subspace_chain(sys);
    const Vector x = vec2(3, 5);

    const AffineSet top = minus_class_at_level(x, 1, sys, chain);
    CHECK(top.direction().dim() == 0);
    CHECK((top.point() - x).norm() == 0.0);

    const AffineSet l0 = minus_class_at_level(x, 0, sys, chain);
    Matrix e2(2, 1);
    e2 << 0, 1;
    CHECK(equal(l0.direction(), column_space(e2)));
    CHECK(l0.contains(x));

    const LinearSystem ident{Matrix::Identity(3, 3), oracle::e1_column(3)};
    const SubspaceChain ic = subspace_chain(ident);
    CHECK(equal(minus_class_at_level(Vector::Ones(3), 0, ident, ic).direction(), ic.levels[0]));

    CHECK_THROWS_AS(minus_class_at_level(x, 2, sys, chain), InvalidInput);
    CHECK_THROWS_AS(minus_class_at_level(x, -50, sys, chain), InvalidInput);
}

TEST_CASE("pi_level examples") {
    const LinearSystem sys = rotation_system(M_PI / 2);
    const SubspaceChain chain = subspace_chain(sys);
    const Vector x = vec2(3, 5);
    CHECK(pi_level(x, x, sys, chain) == 1);
    CHECK(pi_level(x + sys.B * 2.5, x, sys, chain) == 1);
    CHECK(pi_level(vec2(1, 1), x, sys, chain) == 0);

    const SubspaceChain dc = subspace_chain(diag23());
    CHECK_THROWS_AS(pi_level(vec2(1, 1), x, diag23(), dc), NotControllable);
}

TEST_CASE("linear_tracker_step examples") {
    const LinearSystem sys = rotation_system(M_PI / 2);
    const SubspaceChain chain = subspace_chain(sys);
    const Vector xhat = vec2(1, 1);
    const Vector x = vec2(3, 5);
    const Vector next = linear_tracker_step(xhat, x, sys, chain);
    CHECK((next - vec2(1, -3)).norm() < 1e-12);
    Matrix K2(1, 2);
    K2 << 1, 0;
    CHECK((next - oracle::gain_step(sys.A, sys.B, K2, xhat, x)).norm() < 1e-12);
    CHECK((linear_tracker_step(x, x, sys, chain) - sys.A * x).norm() < 1e-12);

    LinearSystem standard = sys;
    standard.form = SystemForm::Standard;
    CHECK_THROWS_AS(linear_tracker_step(xhat, x, standard, chain), InvalidInput);
}

TEST_CASE("to_factored") {
    LinearSystem s = rotation_system(0.4);
    s.form = SystemForm::Standard;
    const LinearSystem f = to_factored(s);
    CHECK(f.form == SystemForm::Factored);
    CHECK((s.A * f.B - s.B).norm() < 1e-14);
    CHECK(to_factored(f).B == f.B);
    LinearSystem singular = shift_system();
    singular.form = SystemForm::Standard;
    CHECK_THROWS_AS(to_factored(singular), SingularA);
}

TEST_CASE("property: PBH and subspace-chain tests agree on random and constructed pairs") {
    int random_controllable = 0;
    for (int i = 0; i < 300; ++i) {
        Rng rng = stream_for(24, i);
        const LinearSystem sys = random_controllable_pair(rng, 2 + i % 7, 1 + i % 3, false);
        const bool pbh = pbh_test(sys).pass;
        CHECK(pbh == geometric_controllable(sys));
        random_controllable += pbh;
    }
    CHECK(random_controllable == 300);
    for (int i = 0; i < 50; ++i) {
        Rng rng = stream_for(25, i);
        const int n = 2 + i % 7;
        const int m = 1 + i % 2;
        const bool zero_modes = i % 5 == 0;
        const LinearSystem sys = random_kalman_split_pair(rng, n, m, std::min(n - 1, m + i % 3), zero_modes);
        const bool geo = geometric_controllable(sys);
        CHECK(pbh_test(sys).pass == geo);
        CHECK(geo == zero_modes);
        if (!geo)
            for (int d : subspace_chain(sys).dims()) CHECK(d <= n - 1);
    }
}

TEST_CASE("property: chain nesting and stabilization") {
    for (int i = 0; i < 200; ++i) {
        Rng rng = stream_for(26, i);
        const int n = 2 + i % 7;
        const LinearSystem sys = i % 2 == 0 ? random_controllable_pair(rng, n, 1 + i % 3, false)
                                            : random_kalman_split_pair(rng, n, 1, n / 2, i % 4 == 1);
        const SubspaceChain c = subspace_chain(sys, n + 2);
        REQUIRE(c.stabilized_at.has_value());
        CHECK(*c.stabilized_at <= n);
        for (std::size_t k = 0; k + 1 < c.levels.size(); ++k) {
            CHECK(equal(intersect(c.levels[k + 1], c.levels[k]), c.levels[k]));
            if (static_cast<int>(k) >= *c.stabilized_at) CHECK(equal(c.levels[k + 1], c.levels[k]));
        }
    }
}

TEST_CASE("property: π is 1 once ψ(k) ∈ [φ(k)]₀ and the next step is exact") {
    for (int i = 0; i < 100; ++i) {
        Rng rng = stream_for(27, i);
        const int n = 2 + i % 7;
        const LinearSystem sys = random_controllable_pair(rng, n, 1 + i % 2, false);
        const SubspaceChain chain = subspace_chain(sys);
        const Vector x = gaussian_matrix(rng, n, 1);
        const Vector xhat = x + sys.B * gaussian_matrix(rng, sys.input_dim(), 1);
        CHECK(pi_level(xhat, x, sys, chain) == 1);
        const Vector next = linear_tracker_step(xhat, x, sys, chain);
        CHECK((next - sys.A * x).norm() <= 1e-8 * (1.0 + (sys.A * x).norm()));
    }
}

TEST_CASE("property: closed-loop regulation reaches the origin in n steps") {
    for (int i = 0; i < 100; ++i) {
        Rng rng = stream_for(28, i);
        const int n = 2 + i % 7;
        const LinearSystem sys = random_controllable_pair(rng, n, 1, true);
        const Matrix K = deadbeat_gain(sys).K;
        const Vector x0 = gaussian_matrix(rng, n, 1);
        Vector x = x0;
        for (int k = 0; k < n; ++k) x = (sys.A - sys.B * K) * x;
        CHECK(x.norm() <= 1e-8 * (1.0 + x0.norm()));
    }
}
