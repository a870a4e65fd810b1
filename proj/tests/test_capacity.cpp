#include <doctest.h>

#include <cmath>
#include <numbers>

#include "camel/capacity.hpp"
#include "camel/errors.hpp"

using namespace camel;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

ShadowOptions small_run(std::uint64_t seed = 0)
{
    ShadowOptions o;
    o.grid_res = 256;
    o.samples = 200000;
    o.seed = seed;
    return o;
}

} // namespace

TEST_CASE("ellipsoid capacity")
{
    CHECK(ellipsoid_capacity(EllipsoidSpec(v2(1.0, 2.0))) == doctest::Approx(kPi));
    CHECK(ellipsoid_capacity(EllipsoidSpec(v2(2.0, 1.0))) == doctest::Approx(kPi));
    CHECK(ellipsoid_capacity(EllipsoidSpec::ball(3, 1.5)) == doctest::Approx(kPi * 2.25));
    CHECK(EllipsoidSpec(v2(3.0, 0.5)).radii(0) == 0.5);
    CHECK_THROWS_AS(EllipsoidSpec(v2(1.0, 0.0)), std::invalid_argument);
    CHECK(ellipsoid_capacity(EllipsoidSpec(v2(0.8, 1.9))) <= ellipsoid_capacity(EllipsoidSpec(v2(0.9, 2.0))));
    CHECK(cylinder_capacity(2.0) == doctest::Approx(4 * kPi));
}

TEST_CASE("ball volume")
{
    CHECK(ball_volume(1, 1.0) == doctest::Approx(kPi));
    CHECK(ball_volume(2, 1.0) == doctest::Approx(kPi * kPi / 2));
    CHECK(ball_volume(3, 1.0) == doctest::Approx(kPi * kPi * kPi / 6));
    double fact = 1.0;
    for(int n = 1; n <= 6; ++n) {
        fact *= n;
        const double R = 0.3 + 0.2 * n;
        CHECK(ball_volume(n, R) ==
              doctest::Approx(std::pow(ellipsoid_capacity(EllipsoidSpec::ball(n, R)), n) / fact).epsilon(1e-14));
    }
    CHECK_THROWS_AS(ball_volume(0, 1.0), std::invalid_argument);
}

TEST_CASE("symplectomorphism stages")
{
    SymplectomorphismSpec id;
    id.n = 2;
    const PhasePoint z(v2(0.3, -0.2), v2(1.1, 0.4));
    const PhasePoint w = apply_symplectomorphism(id, z);
    CHECK((w.x - z.x).norm() == 0.0);

    std::mt19937_64 rng(5);
    SymplectomorphismSpec lin;
    lin.n = 2;
    const Mat S = random_symplectic(2, rng);
    lin.stages.emplace_back(LinearStage{S});
    CHECK((apply_symplectomorphism(lin, z).stacked() - S * z.stacked()).norm() < 1e-14);

    // V = x1^2/2 + 3 x1 x2, grad V = (x1 + 3 x2, 3 x1)
    Polynomial V(2);
    V.add_term({2, 0}, 0.5);
    V.add_term({1, 1}, 3.0);
    SymplectomorphismSpec sh;
    sh.n = 2;
    sh.stages.emplace_back(XShearStage{V});
    const PhasePoint u = apply_symplectomorphism(sh, z);
    CHECK(u.p(0) == doctest::Approx(1.1 + 0.3 - 0.6));
    CHECK(u.p(1) == doctest::Approx(0.4 + 0.9));
    CHECK((u.x - z.x).norm() == 0.0);

    SymplectomorphismSpec bad;
    bad.n = 1;
    bad.stages.emplace_back(LinearStage{2.0 * Mat::Identity(2, 2)});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(apply_symplectomorphism(sh, PhasePoint(Vec::Ones(1), Vec::Ones(1))), std::invalid_argument);
}

TEST_CASE("composite Jacobians are symplectic")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for(int n = 1; n <= 3; ++n) {
        for(std::uint64_t seed = 0; seed < 20; ++seed) {
            const SymplectomorphismSpec f = random_symplectomorphism(n, seed);
            Vec x(n), p(n);
            for(int j = 0; j < n; ++j) {
                x(j) = u(rng);
                p(j) = u(rng);
            }
            const PhasePoint z(x, p);
            const Mat Jac = symplectomorphism_jacobian(f, z);
            CHECK(symplecticity_defect(Jac) <= 1e-9 * std::max(1.0, Jac.squaredNorm()));
            // Central differences of the map.
            const double h = 1e-6;
            Mat fd(2 * n, 2 * n);
            for(int c = 0; c < 2 * n; ++c) {
                Vec a = z.stacked(), b = z.stacked();
                a(c) += h;
                b(c) -= h;
                fd.col(c) = (apply_symplectomorphism(f, PhasePoint::from_stacked(a)).stacked() -
                             apply_symplectomorphism(f, PhasePoint::from_stacked(b)).stacked()) /
                            (2 * h);
            }
            CHECK((fd - Jac).norm() <= 1e-5 * std::max(1.0, Jac.norm()));
        }
    }
}

TEST_CASE("shadow of the identity and of area-preserving maps in n = 1")
{
    SymplectomorphismSpec id;
    id.n = 1;
    CHECK(shadow_area(id, 1.0, 1, small_run()).area == doctest::Approx(kPi).epsilon(0.02));
    SymplectomorphismSpec sq;
    sq.n = 1;
    Mat D = Mat::Zero(2, 2);
    D(0, 0) = 2.0;
    D(1, 1) = 0.5;
    sq.stages.emplace_back(LinearStage{D});
    CHECK(shadow_area(sq, 1.0, 1, small_run()).area == doctest::Approx(kPi).epsilon(0.03));
    for(std::uint64_t seed = 0; seed < 5; ++seed) {
        const SymplectomorphismSpec f = random_symplectomorphism(1, seed);
        const ShadowEstimate e = shadow_area(f, 1.0, 1, small_run(seed));
        CHECK(e.area >= kPi * 0.9);
    }
}

TEST_CASE("shadow areas: identity in n = 2 and a few random maps")
{
    SymplectomorphismSpec id;
    id.n = 2;
    const auto all = shadow_areas(id, 1.0, small_run());
    REQUIRE(all.size() == 4);
    CHECK(all[0].conjugate());
    CHECK(all[1].conjugate());
    CHECK_FALSE(all[2].conjugate());
    for(const auto& e : all)
        CHECK(e.area == doctest::Approx(kPi).epsilon(0.02));
    for(std::uint64_t seed = 100; seed < 105; ++seed) {
        const auto es = shadow_areas(random_symplectomorphism(2, seed), 1.0, small_run(seed));
        CHECK(es[0].area >= kPi * 0.95);
        CHECK(es[1].area >= kPi * 0.95);
    }
}

TEST_CASE("shadow estimates are deterministic and match between serial and parallel kernels")
{
    const SymplectomorphismSpec f = random_symplectomorphism(2, 7);
    ShadowOptions a = small_run(3), b = small_run(3);
    a.exec = Exec::serial;
    b.exec = Exec::parallel;
    const auto ra = shadow_areas(f, 1.0, a), rb = shadow_areas(f, 1.0, b), rc = shadow_areas(f, 1.0, b);
    REQUIRE(ra.size() == rb.size());
    for(std::size_t k = 0; k < ra.size(); ++k) {
        CHECK(ra[k].occupied_cells == rb[k].occupied_cells);
        CHECK(ra[k].area == rb[k].area);
        CHECK(rb[k].area == rc[k].area);
    }
    CHECK_THROWS_AS(shadow_area(f, 1.0, 3, a), std::invalid_argument);
    CHECK_THROWS_AS(shadow_area(f, -1.0, 1, a), std::invalid_argument);
}

TEST_CASE("orbit actions and ground energies")
{
    CHECK(ground_energy(Vec::Ones(1), 1.0) == 0.5);
    Vec w(3);
    w << 1, 2, 3;
    CHECK(ground_energy(w, 1.0) == 3.0);
    CHECK(ground_energy(Vec::Ones(1), 2.0) == 1.0);
    CHECK(minimal_orbit_action(1.0) == doctest::Approx(kPi));
    CHECK(minimal_orbit_action(2.0) == doctest::Approx(2 * kPi));
    CHECK(minimal_orbit_action(0.7) == doctest::Approx(ellipsoid_capacity(EllipsoidSpec::ball(2, std::sqrt(0.7)))));

    const TorusSpec t1(Vec::Ones(1));
    CHECK(loop_action(t1, {0}) == 0.0);
    CHECK(loop_action(t1, {1}) == doctest::Approx(kPi));
    const TorusSpec t2(v2(1.0, std::sqrt(3.0)));
    CHECK(loop_action(t2, {1, 2}) == doctest::Approx(7 * kPi));
    CHECK_THROWS_AS(loop_action(t2, {1}), std::invalid_argument);
}

TEST_CASE("loop action is the enclosed area, minus oint p dx for increasing angles")
{
    const TorusSpec t(v2(1.0, std::sqrt(3.0)));
    const std::vector<int> mu{1, 2};
    const int N = 4000;
    double pdx = 0.0;
    for(int k = 0; k < N; ++k) {
        const double a = 2 * kPi * (k + 0.5) / N;
        for(int j = 0; j < 2; ++j) {
            const double r = t.circle_radii(j), th = mu[j] * a, dth = mu[j] * 2 * kPi / N;
            pdx += r * std::sin(th) * (-r * std::sin(th) * dth);
        }
    }
    CHECK(-pdx == doctest::Approx(loop_action(t, mu)).epsilon(1e-9));
}

TEST_CASE("torus loop Maslov indices are 2 sum mu")
{
    const TorusSpec t(Vec::Constant(3, 1.0));
    CHECK(torus_loop_maslov(t, {1, 0, 0}) == 2);
    CHECK(torus_loop_maslov(t, {1, 2, 0}) == 6);
    CHECK(torus_loop_maslov(t, {-1, 2, 3}) == 8);
    CHECK(torus_loop_maslov(t, {3, 3, 3}) == 18);
    CHECK(torus_loop_maslov(t, {-3, 3, -2}) == -4);
    CHECK(torus_loop_maslov(TorusSpec(Vec::Ones(1), 2), {1}) == 2);
}

TEST_CASE("Keller-Maslov check")
{
    CHECK(keller_maslov_check(TorusSpec(Vec::Constant(1, std::sqrt(3.0))), 1.0).passed);
    const auto bad = keller_maslov_check(TorusSpec(Vec::Constant(1, std::sqrt(2.0))), 1.0);
    CHECK_FALSE(bad.passed);
    CHECK(bad.rows[0].residual == doctest::Approx(0.5));
    CHECK(keller_maslov_check(TorusSpec(v2(1.0, std::sqrt(5.0))), 1.0).passed);
    CHECK_FALSE(keller_maslov_check(TorusSpec(v2(1.0, std::sqrt(4.0))), 1.0).passed);
    CHECK(keller_maslov_check(TorusSpec(Vec::Constant(1, std::sqrt(0.6))), 0.2).passed);
}

TEST_CASE("quantization ladder on a fine scan")
{
    for(int k = 1; k <= 1000; ++k) {
        const double r2 = k / 100.0;
        const bool pass = keller_maslov_check(TorusSpec(Vec::Constant(1, std::sqrt(r2))), 1.0).passed;
        CHECK(pass == (k % 200 == 100));
    }
}

TEST_CASE("oscillator levels")
{
    CHECK(oscillator_levels(TorusSpec(Vec::Ones(1)), Vec::Ones(1), 1.0) == doctest::Approx(0.5));
    CHECK(oscillator_levels(TorusSpec(Vec::Constant(1, std::sqrt(3.0))), Vec::Ones(1), 1.0) == doctest::Approx(1.5));
    CHECK(oscillator_levels(TorusSpec(v2(1.0, 1.0)), v2(1.0, 2.0), 1.0) == doctest::Approx(1.5));
    Vec w(2);
    w << 1.5, 0.5;
    CHECK(oscillator_levels(TorusSpec(v2(std::sqrt(5.0), std::sqrt(3.0))), w, 1.0) ==
          doctest::Approx(1.5 * 2.5 + 0.5 * 1.5));
    CHECK_THROWS_AS(oscillator_levels(TorusSpec(Vec::Constant(1, std::sqrt(2.0))), Vec::Ones(1), 1.0),
                    std::invalid_argument);
}
