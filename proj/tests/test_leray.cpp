#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "camel/errors.hpp"
#include "camel/leray.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace camel;
using testing::line_lift;
using testing::random_frame;
using testing::random_lift;

namespace {

constexpr double kPi = std::numbers::pi;

int floor_index(double th, double thp) { return static_cast<int>(std::floor((th - thp) / kPi)) + 1; }

LagrangianLift vertical_lift(int n) { return make_lift(vertical_frame(n), 0.0); }

LagrangianLift product_lift(const Vec& th) { return make_lift(product_tangent_frame(th), 2.0 * th.sum()); }

} // namespace

TEST_CASE("lift_path examples")
{
    const FrameCurve still = [](double) { return vertical_frame(1); };
    for(const auto& l : lift_path(sample_curve(still, 0.0, 1.0, 10), 0.0)) {
        CHECK(l.alpha == 0.0);
        CHECK(std::abs(l.w.w(0, 0) - 1.0) < 1e-15);
    }

    const FrameCurve quarter = [](double t) { return circle_tangent_line(t); };
    LagrangianPath path = sample_curve(quarter, 0.0, kPi / 2, 2);
    path.generator = quarter;
    CHECK(lift_path(path, 0.0).back().alpha == doctest::Approx(kPi).epsilon(1e-12));

    LagrangianPath loop = sample_curve(quarter, 0.0, 2 * kPi, 3);
    loop.generator = quarter;
    const auto lifts = lift_path(loop, 0.0);
    CHECK(lifts.back().alpha - lifts.front().alpha == doctest::Approx(4 * kPi).epsilon(1e-12));
}

TEST_CASE("lift_path refuses coarse sample-only paths")
{
    const FrameCurve quarter = [](double t) { return circle_tangent_line(t); };
    LagrangianPath coarse = sample_curve(quarter, 0.0, 2 * kPi, 3);
    coarse.generator = nullptr;
    CHECK_THROWS_AS(lift_path(coarse, 0.0), RefinementError);
    LagrangianPath fine = sample_curve(quarter, 0.0, 2 * kPi, 64);
    fine.generator = nullptr;
    CHECK(lift_path(fine, 0.0).back().alpha == doctest::Approx(4 * kPi).epsilon(1e-12));
    coarse.generator = quarter;
    CHECK(lift_path(coarse, 0.0).back().alpha == doctest::Approx(4 * kPi).epsilon(1e-12));
    CHECK_THROWS_AS(lift_path(sample_curve(quarter, 0.0, 1.0, 4), 1.0), std::invalid_argument);
}

TEST_CASE("deck action")
{
    const LagrangianLift I = vertical_lift(2);
    CHECK(deck_act(0, I).alpha == I.alpha);
    CHECK(deck_act(1, I).alpha == doctest::Approx(2 * kPi));
    CHECK((deck_act(1, I).w.w - I.w.w).norm() == 0.0);
    CHECK(deck_act(2, deck_act(-2, I)).alpha == doctest::Approx(I.alpha));
}

TEST_CASE("principal_log_trace examples")
{
    CHECK(std::abs(principal_log_trace(CMat::Identity(3, 3))) == 0.0);
    const cplx v = principal_log_trace(CMat::Constant(1, 1, cplx(0.0, 1.0)));
    CHECK(std::abs(v - cplx(0.0, kPi / 2)) < 1e-15);
    CHECK_THROWS_AS(principal_log_trace(CMat::Constant(1, 1, -1.0)), BranchError);
}

TEST_CASE("principal_log_trace agrees with the resolvent integral")
{
    std::mt19937_64 rng(41);
    int checked = 0;
    while(checked < 30) {
        const CMat U = random_unitary(3, rng);
        const CMat M = U * U.transpose();
        Eigen::ComplexEigenSolver<CMat> es(M);
        if((es.eigenvalues().array() + 1.0).abs().minCoeff() < 0.1)
            continue;
        CHECK(std::abs(principal_log_trace(M) - oracle::trace_log_quadrature(M)) < 1e-6);
        ++checked;
    }
}

TEST_CASE("transversal Leray index examples")
{
    const LagrangianLift b = line_lift(0.0);
    CHECK(leray_index_transversal(line_lift(kPi / 2), b) == 1);
    CHECK(leray_index_transversal(line_lift(-kPi / 4), b) == 0);
    CHECK_THROWS_AS(leray_index_transversal(b, b), std::invalid_argument);

    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for(int k = 0; k < 100; ++k) {
        Vec t(2), tp(2);
        t << u(rng), u(rng);
        tp << u(rng), u(rng);
        if(!transversal(product_lift(t).w, product_lift(tp).w))
            continue;
        const int direct = floor_index(t(0), tp(0)) + floor_index(t(1), tp(1));
        CHECK(leray_index_transversal(product_lift(t), product_lift(tp)) == direct);
    }
}

TEST_CASE("inert examples")
{
    const LagrangianFrame v = vertical_frame(1);
    CHECK(inert(v, v, v) == 1);
    std::mt19937_64 rng(47);
    for(int n = 1; n <= 3; ++n) {
        for(int k = 0; k < 50; ++k) {
            const LagrangianFrame a = random_frame(n, rng), b = random_frame(n, rng), c = random_frame(n, rng);
            CHECK(2 * inert(a, b, c) == signature(a, b, c) + n);
            CHECK(inert(souriau_w(a), souriau_w(b), souriau_w(c)) == inert(a, b, c));
        }
    }
    const LagrangianFrame l0 = circle_tangent_line(0.0), l1 = circle_tangent_line(kPi / 3),
                          l2 = circle_tangent_line(2 * kPi / 3);
    CHECK(inert(l0, l1, l2) == (testing::brute_signature(l0, l1, l2) + 1) / 2);
}

TEST_CASE("Leray index examples")
{
    std::mt19937_64 rng(53);
    for(int n = 1; n <= 3; ++n) {
        const LagrangianLift a = random_lift(n, rng);
        CHECK(leray_index(a, a) == n);
    }
    for(int k = -3; k <= 3; ++k)
        CHECK(leray_index(line_lift(0.7 + k * kPi), line_lift(0.7)) == k + 1);
    for(int n = 1; n <= 3; ++n) {
        for(int k = 0; k < 40; ++k) {
            const LagrangianFrame fb = random_frame(n, rng);
            const LagrangianFrame fa = testing::frame_meeting(fb, k % (n + 1), rng);
            const LagrangianLift a = lift_near(souriau_w(fa), 3.0), b = lift_near(souriau_w(fb), -1.0);
            CHECK(leray_index(a, b) + leray_index(b, a) == n + intersection_dim(a.w, b.w));
        }
    }
}

TEST_CASE("n = 1 closed form on a grid and on the degenerate lattice")
{
    const int N = 60;
    for(int i = 0; i < N; ++i) {
        for(int j = 0; j < N; ++j) {
            const double th = -2 * kPi + 4 * kPi * (i + 0.5) / N, thp = -2 * kPi + 4 * kPi * (j + 0.37) / N;
            CHECK(leray_index(line_lift(th), line_lift(thp)) == floor_index(th, thp));
        }
    }
    for(int k = -3; k <= 3; ++k)
        CHECK(leray_index(line_lift(-1.1 + k * kPi), line_lift(-1.1)) == k + 1);
}

TEST_CASE("cocycle and deck shifts on random lifts")
{
    std::mt19937_64 rng(59);
    std::uniform_int_distribution<int> kk(-3, 3);
    for(int n = 1; n <= 3; ++n) {
        for(int k = 0; k < 300; ++k) {
            LagrangianLift a = random_lift(n, rng), b = random_lift(n, rng), c = random_lift(n, rng);
            if(k % 3 == 1)
                b = lift_near(souriau_w(testing::frame_meeting(frame_from_souriau(a.w), 1, rng)), b.alpha);
            if(k % 3 == 2)
                c = lift_near(souriau_w(testing::frame_meeting(frame_from_souriau(b.w), n, rng)), c.alpha + 1.0);
            CHECK(leray_index(a, b) - leray_index(a, c) + leray_index(b, c) == inert(a.w, b.w, c.w));
            const int s = kk(rng), t = kk(rng);
            CHECK(leray_index(deck_act(s, a), deck_act(t, b)) == leray_index(a, b) + s - t);
        }
    }
}

TEST_CASE("auxiliary planes do not change the index")
{
    std::mt19937_64 rng(61);
    for(int n = 1; n <= 3; ++n) {
        const LagrangianLift a = random_lift(n, rng);
        const LagrangianLift b = lift_near(souriau_w(testing::frame_meeting(frame_from_souriau(a.w), 1, rng)), 2.0);
        const int ref = leray_index(a, b);
        for(std::uint64_t seed = 1; seed <= 10; ++seed) {
            std::mt19937_64 aux(seed);
            CHECK(leray_index(a, b, aux) == ref);
        }
    }
}

TEST_CASE("symplectic invariance along a common path")
{
    std::mt19937_64 rng(67);
    for(int n = 1; n <= 2; ++n) {
        for(int k = 0; k < 30; ++k) {
            const Mat A = random_symmetric(2 * n, rng, 1.0);
            const Mat JA = standard_j(n) * A;
            const auto s = [&](double tau) { return Mat((tau * JA).exp()); };
            const LagrangianLift a = random_lift(n, rng), b = random_lift(n, rng);
            const LagrangianLift sa = transport_lift(a, s, 0.0, 1.0), sb = transport_lift(b, s, 0.0, 1.0);
            CHECK((sa.w.w - souriau_w(transform_frame(s(1.0), frame_from_souriau(a.w))).w).norm() < 1e-9);
            CHECK(leray_index(sa, sb) == leray_index(a, b));
        }
    }
}

TEST_CASE("Maslov loop index")
{
    const FrameCurve circle = [](double t) { return circle_tangent_line(t); };
    CHECK(maslov_loop_index(sample_curve(circle, 0.0, 2 * kPi, 16)) == 2);
    const FrameCurve still = [](double) { return vertical_frame(2); };
    CHECK(maslov_loop_index(sample_curve(still, 0.0, 1.0, 4)) == 0);
    const FrameCurve torus = [](double t) {
        Vec th(2);
        th << 2 * kPi * t, 4 * kPi * t;
        return product_tangent_frame(th);
    };
    const int m = maslov_loop_index(sample_curve(torus, 0.0, 1.0, 64));
    CHECK(m == 6);
    CHECK(m % 2 == 0);
    CHECK_THROWS_AS(maslov_loop_index(sample_curve(circle, 0.0, 1.0, 16)), std::invalid_argument);
}

TEST_CASE("argument index on the circle cover")
{
    const FrameCurve circle = [](double t) { return circle_tangent_line(t); };
    const LagrangianLift base = vertical_lift(1);
    const auto path = lift_path(sample_curve(circle, 0.0, 1.2, 16), 0.0);
    CHECK(argument_index(path, base) == 1);
    const auto around = lift_path(sample_curve(circle, 0.0, 1.2 + 2 * kPi, 64), 0.0);
    CHECK(argument_index(around, base) == 3);
}

TEST_CASE("change of base for the argument index")
{
    std::mt19937_64 rng(71);
    for(int n = 1; n <= 3; ++n) {
        for(int k = 0; k < 50; ++k) {
            const LagrangianLift z = random_lift(n, rng), alpha = random_lift(n, rng), beta = random_lift(n, rng);
            const int lhs = leray_index(z, alpha) - leray_index(z, beta);
            CHECK(lhs == inert(alpha.w, beta.w, z.w) - leray_index(alpha, beta));
        }
    }
}
