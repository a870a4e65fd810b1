#include <doctest.h>

#include <cmath>
#include <numbers>

#include "camel/errors.hpp"
#include "camel/waveform.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace camel;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

CoverPoint at(double th) { return {Vec::Constant(1, th)}; }

ManifoldSpec circle(double r) { return TorusSpec(Vec::Constant(1, r)); }

HamiltonianSpec harmonic1() { return HamiltonianSpec::harmonic(Vec::Ones(1)); }

double rel_l2(const CVec& a, const CVec& b) { return (a - b).norm() / b.norm(); }

} // namespace

TEST_CASE("circle phase examples")
{
    CHECK(circle_phase(0.0, 1.0) == 0.0);
    CHECK(circle_phase(kPi, 1.0) == doctest::Approx(-kPi / 2));
    CHECK(circle_phase(2 * kPi, 2.0) == doctest::Approx(-4 * kPi));
    CHECK_THROWS_AS(circle_phase(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("phase derivative is p dx/dtheta")
{
    const ManifoldSpec m = circle(1.4);
    const double h = 1e-6;
    for(double th : {-2.0, 0.3, 1.7, 4.0}) {
        const double dphi = (phase_function(m, at(th + h)) - phase_function(m, at(th - h))) / (2 * h);
        const double dx = (manifold_point(m, at(th + h)).x(0) - manifold_point(m, at(th - h)).x(0)) / (2 * h);
        CHECK(dphi == doctest::Approx(manifold_point(m, at(th)).p(0) * dx).epsilon(1e-7));
    }
}

TEST_CASE("cover phase along paths")
{
    const double r = 1.2;
    const ManifoldSpec m = circle(r);
    CHECK(cover_phase(m, {at(0.7), at(0.7)}) == 0.0);
    CHECK(cover_phase(m, {at(0.0), at(2.3)}) == doctest::Approx(circle_phase(2.3, r)).epsilon(1e-12));
    CHECK(cover_phase(m, {at(0.4), at(0.4 + 2 * kPi)}) == doctest::Approx(-kPi * r * r).epsilon(1e-12));
    const double direct = cover_phase(m, {at(0.0), at(3.0)});
    const double wiggly = cover_phase(m, {at(0.0), at(5.0), at(-1.0), at(3.0)});
    CHECK(wiggly == doctest::Approx(direct).epsilon(1e-12));
    CHECK_THROWS_AS(cover_phase(m, {}), std::invalid_argument);

    Polynomial phi(2);
    phi.add_term({2, 0}, 0.5);
    phi.add_term({1, 1}, -0.3);
    phi.add_term({0, 3}, 0.2);
    Vec x0 = Vec::Zero(2), x1(2), x2(2);
    x1 << 1.0, -0.5;
    x2 << 0.2, 0.9;
    const ManifoldSpec g = GraphSpec(phi, x0);
    CHECK(cover_phase(g, {{x0}, {x1}, {x2}}) == doctest::Approx(phi.value(x2) - phi.value(x0)).epsilon(1e-12));
}

TEST_CASE("circle argument index")
{
    CHECK(circle_argument_index(0.0) == 1);
    CHECK(circle_argument_index(-0.1) == 0);
    CHECK(circle_argument_index(kPi + 0.1) == 2);
    CHECK(circle_argument_index(-kPi - 0.1) == -1);
    const ManifoldSpec m = circle(0.8);
    const LagrangianLift base = make_lift(vertical_frame(1), 0.0);
    for(double th : {-5.0, -2.0, 0.5, 2.9, 3.5, 8.0})
        CHECK(argument_index_on_manifold(m, at(th), base) == circle_argument_index(th));
}

TEST_CASE("torus loops shift the argument index by the Maslov index")
{
    Vec r(2);
    r << 1.0, 0.5;
    const ManifoldSpec m = TorusSpec(r);
    const LagrangianLift base = make_lift(vertical_frame(2), 0.0);
    Vec th(2);
    th << 0.4, 1.9;
    Vec one = th, both = th;
    one(0) += 2 * kPi;
    both.array() += 2 * kPi;
    const int m0 = argument_index_on_manifold(m, {th}, base);
    CHECK(argument_index_on_manifold(m, {one}, base) - m0 == 2);
    CHECK(argument_index_on_manifold(m, {both}, base) - m0 == 4);
}

TEST_CASE("chart transition index")
{
    std::mt19937_64 rng(7);
    for(int n = 1; n <= 3; ++n) {
        for(int k = 0; k < 40; ++k) {
            const LagrangianLift a = testing::random_lift(n, rng), b = testing::random_lift(n, rng),
                                 z = testing::random_lift(n, rng);
            const LagrangianFrame lz = frame_from_souriau(z.w);
            CHECK(chart_transition_index(a, b, lz) == leray_index(z, a) - leray_index(z, b));
        }
    }
}

TEST_CASE("square root of a de Rham form")
{
    const ManifoldSpec m = circle(1.0);
    const LagrangianLift base = make_lift(vertical_frame(1), 0.0);
    CHECK(sqrt_de_rham(0.0, m, at(1.0), base) == cplx(0.0));
    for(double th : {0.5, 2.0, 4.0}) {
        const cplx up = sqrt_de_rham(0.25, m, at(th), base, +1);
        CHECK(std::abs(up - 0.5 * ipow(circle_argument_index(th))) < 1e-15);
        CHECK(std::abs(sqrt_de_rham(0.25, m, at(th), base, -1) - up * (-kI)) < 1e-15);
    }
    CHECK_THROWS_AS(sqrt_de_rham(-1.0, m, at(1.0), base), std::invalid_argument);
    CHECK_THROWS_AS(sqrt_de_rham(1.0, m, at(1.0), base, 2), std::invalid_argument);
}

TEST_CASE("quantization of circles and tori")
{
    CHECK(is_quantized(circle(1.0), 1.0));
    CHECK(is_quantized(circle(std::sqrt(3.0)), 1.0));
    CHECK_FALSE(is_quantized(circle(std::sqrt(2.0)), 1.0));
    CHECK(is_quantized(circle(std::sqrt(0.5)), 0.5));
    Vec r(2);
    r << 1.0, std::sqrt(5.0);
    CHECK(is_quantized(TorusSpec(r), 1.0));
    r(1) = 2.0;
    CHECK_FALSE(is_quantized(TorusSpec(r), 1.0));
    Polynomial phi(1);
    phi.add_term({3}, 1.0);
    CHECK(is_quantized(GraphSpec(phi, Vec::Zero(1)), 0.3));
    CHECK_THROWS_AS(is_quantized(circle(1.0), 0.0), std::invalid_argument);
}

TEST_CASE("deck phase defect")
{
    for(double r2 : {1.0, 3.0, 5.0})
        CHECK(std::abs(deck_phase_defect(TorusSpec(Vec::Constant(1, std::sqrt(r2))), 1.0, 1) - 1.0) < 1e-12);
    for(double r2 : {0.7, 2.0, 4.4}) {
        const cplx want = std::exp(kI * (-kPi * r2 + kPi));
        CHECK(std::abs(deck_phase_defect(TorusSpec(Vec::Constant(1, std::sqrt(r2))), 1.0, 1) - want) < 1e-12);
    }
    CHECK_THROWS_AS(deck_phase_defect(TorusSpec(Vec::Ones(1)), 1.0, 2), std::invalid_argument);
}

TEST_CASE("waveform values are single-valued exactly when quantized")
{
    for(double r2 : {1.0, 2.0, 3.0}) {
        const Waveform psi = Waveform::make(circle(std::sqrt(r2)), 1.0);
        const double th = 0.8;
        const cplx jump = psi.evaluate(at(th + 2 * kPi)) / psi.evaluate(at(th));
        CHECK(std::abs(jump - deck_phase_defect(TorusSpec(Vec::Constant(1, std::sqrt(r2))), 1.0, 1)) < 1e-12);
        CHECK((std::abs(jump - 1.0) < 1e-12) == is_quantized(psi.manifold, 1.0));
    }
}

TEST_CASE("evolution under the oscillator rotates the labels")
{
    const double r = std::sqrt(3.0), hbar = 1.0, E = 1.5;
    const Waveform psi = Waveform::make(circle(r), hbar);
    const auto labels = circle_labels(0.0, 2 * kPi, 48);
    const WaveformSnapshot s0 = sample_waveform(psi, labels);
    const WaveformSnapshot same = evolve(s0, harmonic1(), 0.0);
    for(std::size_t k = 0; k < labels.size(); ++k)
        CHECK(same.samples[k].value(hbar) == s0.samples[k].value(hbar));

    const auto H = harmonic1();
    for(double t : {0.7, 2.0, 2 * kPi}) {
        const WaveformSnapshot st = evolve(s0, H, t, 200);
        double err = 0.0;
        for(std::size_t k = 0; k < labels.size(); ++k) {
            const double th = labels[k].coords(0);
            const cplx want = std::exp(-kI * E * t / hbar) * psi.evaluate(at(th - t));
            err = std::max(err, std::abs(st.samples[k].value(hbar) - want));
            CHECK((st.samples[k].z.stacked() - manifold_point(psi.manifold, at(th - t)).stacked()).norm() < 1e-10);
        }
        CHECK(err < 1e-9);
        CHECK(total_mass(st, 2 * kPi) == doctest::Approx(1.0).epsilon(1e-14));
    }

    const WaveformSnapshot full = evolve(s0, H, 2 * kPi, 400);
    for(std::size_t k = 0; k < labels.size(); ++k) {
        const cplx ratio = full.samples[k].value(hbar) / s0.samples[k].value(hbar);
        CHECK(std::abs(ratio - std::exp(-kI * E * 2.0 * kPi / hbar)) < 1e-9);
    }
}

TEST_CASE("evolution composes and does not depend on the kernel")
{
    Vec w(1);
    w << 1.0;
    const auto H = HamiltonianSpec::quartic(w, 0.5);
    const Waveform psi = Waveform::make(circle(1.0), 1.0);
    const WaveformSnapshot s0 = sample_waveform(psi, circle_labels(0.0, 2 * kPi, 24));
    const WaveformSnapshot direct = evolve(s0, H, 1.5, 600);
    const WaveformSnapshot two = evolve(evolve(s0, H, 0.6, 240), H, 1.5, 360);
    const WaveformSnapshot ser = evolve(s0, H, 1.5, 600, Exec::serial);
    for(std::size_t k = 0; k < s0.samples.size(); ++k) {
        CHECK((direct.samples[k].z.stacked() - two.samples[k].z.stacked()).norm() < 1e-8);
        CHECK(std::abs(direct.samples[k].value(1.0) - two.samples[k].value(1.0)) < 1e-7);
        CHECK(direct.samples[k].index == two.samples[k].index);
        CHECK(direct.samples[k].value(1.0) == ser.samples[k].value(1.0));
        CHECK(direct.samples[k].index == ser.samples[k].index);
    }
}

TEST_CASE("graph shadows are the waveform itself")
{
    Polynomial phi(1);
    phi.add_term({2}, 0.3);
    phi.add_term({3}, -0.1);
    Waveform psi = Waveform::make(GraphSpec(phi, Vec::Zero(1)), 0.5);
    const Vec xs = Vec::LinSpaced(41, -2.0, 2.0);
    const Shadow sh = shadow(psi, xs);
    for(Eigen::Index i = 0; i < xs.size(); ++i) {
        CHECK(sh.values(i) == psi.evaluate(at(xs(i))));
        CHECK(sh.branch_count[i] == 1);
        CHECK_FALSE(sh.caustic[i]);
    }
    psi.density = [](const CoverPoint&) { return 0.0; };
    CHECK(shadow(psi, xs).values.norm() == 0.0);
}

TEST_CASE("circle shadows")
{
    const double r = 1.5;
    const Waveform psi = Waveform::make(circle(r), 1.0);
    Vec xs(5);
    xs << -r, -0.5, 0.0, r, 2.0;
    const Shadow sh = shadow(psi, xs);
    CHECK(sh.caustic[0]);
    CHECK(sh.caustic[3]);
    CHECK(sh.values(0) == cplx(0.0));
    CHECK(sh.branch_count[1] == 2);
    CHECK(sh.branch_count[4] == 0);
    CHECK(sh.values(4) == cplx(0.0));

    // Two branches theta and 2 pi - theta with |dtheta/dx| = (r^2 - x^2)^{-1/2}.
    const double x = -0.5, th = std::acos(x / r);
    const double amp = std::sqrt(1.0 / (2 * kPi) / std::sqrt(r * r - x * x));
    const cplx want = amp * (std::exp(kI * circle_phase(th, r)) * ipow(1) +
                             std::exp(kI * circle_phase(2 * kPi - th, r)) * ipow(2));
    CHECK(std::abs(sh.values(1) - want) < 1e-12);
}

TEST_CASE("snapshot shadows converge to the closed form")
{
    const double r = 1.0;
    const Waveform psi = Waveform::make(circle(r), 1.0);
    const Vec xs = Vec::LinSpaced(9, -0.8, 0.8);
    const Shadow exact = shadow(psi, xs);
    double prev = 1e300;
    for(int M : {64, 256, 1024}) {
        const WaveformSnapshot s = sample_waveform(psi, circle_labels(0.0, 2 * kPi, M));
        const Shadow approx = shadow(s, xs, 2 * kPi);
        const double err = (approx.values - exact.values).cwiseAbs().maxCoeff();
        CHECK(err < prev);
        prev = err;
        for(Eigen::Index i = 0; i < xs.size(); ++i)
            CHECK(approx.branch_count[i] == 2);
    }
    CHECK(prev < 1e-5);

    // After evolution the circle is the same set; the shadow picks up e^{-iEt}.
    const double t = 1.1;
    const WaveformSnapshot st = evolve(sample_waveform(psi, circle_labels(0.0, 2 * kPi, 1024)), harmonic1(), t, 100);
    const Shadow moved = shadow(st, xs, 2 * kPi);
    // With r^2 = hbar the waveform is single-valued, so relabelling the circle changes nothing.
    CHECK((moved.values - std::exp(-kI * 0.5 * t) * exact.values).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("Van Vleck Gaussian against exact kernels")
{
    const GaussianPacket g{0.5, 0.8, 0.7};
    const Vec xs = Vec::LinSpaced(400, -6.0, 6.0);
    const auto H = harmonic1();
    for(double t : {0.3, 1.2, 2.5}) {
        const CVec vv = van_vleck_gaussian(g, H, 0.7, 0.0, t, xs);
        CHECK(rel_l2(vv, oracle::mehler_gaussian(g.x0, g.p0, g.sigma, 1.0, 1.0, 0.7, t, xs)) < 1e-9);
    }
    const auto F = HamiltonianSpec::free_particle(1);
    for(double t : {0.5, 3.0}) {
        const CVec vv = van_vleck_gaussian(g, F, 1.0, 0.0, t, xs);
        CHECK(rel_l2(vv, oracle::free_gaussian(g.x0, g.p0, g.sigma, 1.0, 1.0, t, xs)) < 1e-9);
    }
    const CVec same = van_vleck_gaussian(g, H, 1.0, 0.0, 0.0, xs);
    for(Eigen::Index i = 0; i < xs.size(); i += 37) {
        const double d = xs(i) - g.x0;
        const cplx want = std::exp(kI * g.p0 * d - d * d / (2 * g.sigma * g.sigma));
        CHECK(std::abs(same(i) - want) < 1e-12);
    }
    CHECK_THROWS_AS(van_vleck_gaussian(g, HamiltonianSpec::quartic(Vec::Ones(1), 0.1), 1.0, 0.0, 1.0, xs),
                    std::invalid_argument);
}

TEST_CASE("Van Vleck propagation of real phases")
{
    const double k = 0.6, hbar = 0.9;
    InitialWave1D chirp;
    chirp.phi = [k](double x) { return 0.5 * k * x * x; };
    chirp.dphi = [k](double x) { return k * x; };
    chirp.ddphi = [k](double) { return k; };
    chirp.amp = [](double) { return 1.0; };
    const Vec xs = Vec::LinSpaced(101, -3.0, 3.0);
    const auto F = HamiltonianSpec::free_particle(1);
    for(double t : {0.5, 2.0})
        CHECK(rel_l2(van_vleck_propagate(chirp, F, hbar, 0.0, t, xs), oracle::free_chirp(k, 1.0, hbar, t, xs)) <
              1e-10);
    const CVec ser = van_vleck_propagate(chirp, F, hbar, 0.0, 1.0, xs, 200, Exec::serial);
    CHECK((ser - van_vleck_propagate(chirp, F, hbar, 0.0, 1.0, xs, 200, Exec::parallel)).norm() == 0.0);

    const CVec same = van_vleck_propagate(chirp, F, hbar, 0.0, 0.0, xs);
    for(Eigen::Index i = 0; i < xs.size(); i += 10)
        CHECK(std::abs(same(i) - std::exp(kI * chirp.phi(xs(i)) / hbar)) < 1e-12);

    // Plane phase under the oscillator focuses at t = pi/2.
    InitialWave1D flat;
    flat.phi = [](double) { return 0.0; };
    flat.dphi = [](double) { return 0.0; };
    flat.ddphi = [](double) { return 0.0; };
    flat.amp = [](double x) { return std::exp(-x * x); };
    CHECK_NOTHROW(van_vleck_propagate(flat, harmonic1(), 1.0, 0.0, 1.0, xs));
    CHECK_THROWS_AS(van_vleck_propagate(flat, harmonic1(), 1.0, 0.0, 2.0, xs), CausticError);
}

TEST_CASE("Morse index counts conjugate points")
{
    const auto H = harmonic1();
    const Vec xp = Vec::Zero(1), pp = Vec::Ones(1);
    CHECK(morse_index(H, xp, pp, 0.0, 1.0) == 0);
    CHECK(morse_index(H, xp, pp, 0.0, 4.0) == 1);
    CHECK(morse_index(H, xp, pp, 0.0, 7.0) == 2);
    const MorseReport rep = morse_report(H, xp, pp, 0.0, 4.0);
    CHECK(rep.sign_changes == 1);
    CHECK(rep.det_end == doctest::Approx(std::sin(4.0)).epsilon(1e-9));
    CHECK(morse_index(HamiltonianSpec::free_particle(1), xp, pp, 0.0, 10.0) == 0);
    CHECK_THROWS_AS(morse_index(H, xp, pp, 0.0, kPi), CausticError);
    CHECK_THROWS_AS(morse_index(H, xp, pp, 0.0, 0.0), CausticError);

    Vec w(2);
    w << 1.0, 2.0;
    const auto H2 = HamiltonianSpec::harmonic(w);
    // Conjugate times before t = 5: pi/2 and 3 pi/2 once, pi twice.
    CHECK(morse_index(H2, Vec::Zero(2), Vec::Ones(2), 0.0, 5.0) == 4);
}

TEST_CASE("oscillator levels from single-valued waveforms")
{
    const auto e = oscillator_spectrum_from_waveforms(1.0, 3);
    REQUIRE(e.size() == 4);
    for(int N = 0; N <= 3; ++N)
        CHECK(e[N] == doctest::Approx(N + 0.5).epsilon(1e-12));
    const auto e2 = oscillator_spectrum_from_waveforms(2.0, 3);
    for(int N = 0; N <= 3; ++N)
        CHECK(e2[N] == doctest::Approx(2.0 * e[N]).epsilon(1e-12));
    const auto d = oscillator_spectrum_from_waveforms(1.0, 3, SpectrumRule::density_only);
    REQUIRE(d.size() == 4);
    for(int N = 0; N <= 3; ++N)
        CHECK(d[N] == doctest::Approx(N + 1.0).epsilon(1e-12));
    CHECK_THROWS_AS(oscillator_spectrum_from_waveforms(1.0, -1), std::invalid_argument);
}

TEST_CASE("argument index of a transported graph against caustic and Morse counts")
{
    // Harmonic flow of p = k x: dx/dx' = cos s + k sin s, dx/dp' = sin s.
    const auto H = harmonic1();
    for(double k : {0.0, 0.8, -0.5}) {
        Polynomial phi(1);
        phi.add_term({2}, 0.5 * k);
        const Waveform psi = Waveform::make(GraphSpec(phi, Vec::Zero(1)), 1.0);
        const WaveformSnapshot s0 = sample_waveform(psi, {at(0.3)});
        for(double t : {0.5, 2.0, 3.0, 4.5, 6.0, 8.0}) {
            const WaveformSnapshot st = evolve(s0, H, t, 400);
            int caustics = 0;
            for(int j = -2; j <= 4; ++j) {
                const double s = std::atan(-1.0 / k) + j * kPi;
                caustics += s > 0.0 && s < t;
            }
            if(k == 0.0)
                caustics = static_cast<int>(std::floor(t / kPi + 0.5));
            CHECK(st.samples[0].index - s0.samples[0].index == -caustics);
            const int morse = morse_index(H, Vec::Constant(1, 0.3), Vec::Constant(1, 0.3 * k), 0.0, t);
            CHECK(morse == static_cast<int>(std::floor(t / kPi)));
        }
    }
}
