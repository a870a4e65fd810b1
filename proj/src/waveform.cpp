#include "camel/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "camel/errors.hpp"

namespace camel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

constexpr double kGLNodes[5] = {0.5 - 0.5 * 0.9061798459386640, 0.5 - 0.5 * 0.5384693101056831, 0.5,
                                0.5 + 0.5 * 0.5384693101056831, 0.5 + 0.5 * 0.9061798459386640};
constexpr double kGLWeights[5] = {0.5 * 0.2369268850561891, 0.5 * 0.4786286704993665,
                                  0.5 * 0.5688888888888889, 0.5 * 0.4786286704993665,
                                  0.5 * 0.2369268850561891};

void check_coords(const ManifoldSpec& m, const CoverPoint& c)
{
    if(c.coords.size() != manifold_dim(m))
        throw std::invalid_argument("cover point has wrong dimension");
}

const TorusSpec& require_circle(const ManifoldSpec& m, const char* what)
{
    const auto* t = std::get_if<TorusSpec>(&m);
    if(!t || t->circles() != 1 || t->flat_dims != 0)
        throw std::invalid_argument(std::string(what) + ": manifold must be a circle");
    return *t;
}

} // namespace

GraphSpec::GraphSpec(Polynomial p, Vec base) : phi(std::move(p)), x0(std::move(base))
{
    if(phi.nvars() < 1)
        throw std::invalid_argument("GraphSpec: phase polynomial needs at least one variable");
    if(x0.size() == 0)
        x0 = Vec::Zero(phi.nvars());
    if(x0.size() != phi.nvars())
        throw std::invalid_argument("GraphSpec: base point has wrong dimension");
}

int manifold_dim(const ManifoldSpec& m)
{
    return std::visit([](const auto& s) { return s.dim(); }, m);
}

CoverPoint base_cover_point(const ManifoldSpec& m)
{
    if(const auto* g = std::get_if<GraphSpec>(&m))
        return {g->x0};
    return {Vec::Zero(manifold_dim(m))};
}

PhasePoint manifold_point(const ManifoldSpec& m, const CoverPoint& c)
{
    check_coords(m, c);
    if(const auto* t = std::get_if<TorusSpec>(&m))
        return torus_point(*t, c.coords.head(t->circles()), c.coords.tail(t->flat_dims));
    const auto& g = std::get<GraphSpec>(m);
    return {c.coords, g.phi.gradient(c.coords)};
}

LagrangianFrame tangent_frame(const ManifoldSpec& m, const CoverPoint& c)
{
    check_coords(m, c);
    if(const auto* t = std::get_if<TorusSpec>(&m))
        return torus_tangent_frame(*t, c.coords.head(t->circles()));
    const auto& g = std::get<GraphSpec>(m);
    const int n = g.dim();
    return {Mat::Identity(n, n), g.phi.hessian(c.coords)};
}

LagrangianLift base_tangent_lift(const ManifoldSpec& m)
{
    const CoverPoint b = base_cover_point(m);
    const LagrangianFrame F = tangent_frame(m, b);
    double alpha = 0.0;
    if(const auto* t = std::get_if<TorusSpec>(&m)) {
        alpha = -kPi * t->flat_dims;
    } else {
        Eigen::SelfAdjointEigenSolver<Mat> es(F.P, Eigen::EigenvaluesOnly);
        for(Eigen::Index j = 0; j < es.eigenvalues().size(); ++j)
            alpha += 2.0 * std::atan(es.eigenvalues()(j)) - kPi;
    }
    return make_lift(F, alpha);
}

LagrangianLift tangent_lift(const ManifoldSpec& m, const CoverPoint& c)
{
    check_coords(m, c);
    const CoverPoint b = base_cover_point(m);
    const Vec d = c.coords - b.coords;
    const FrameCurve curve = [&](double s) { return tangent_frame(m, CoverPoint{b.coords + s * d}); };
    const int segs = std::max(64, static_cast<int>(std::ceil(8.0 * d.lpNorm<Eigen::Infinity>())));
    return lift_along(curve, 0.0, 1.0, base_tangent_lift(m), segs);
}

double circle_phase(double theta, double r)
{
    if(!(r > 0.0))
        throw std::invalid_argument("circle_phase: radius must be positive");
    return 0.5 * r * r * (std::sin(theta) * std::cos(theta) - theta);
}

int circle_argument_index(double theta) { return static_cast<int>(std::floor(theta / kPi)) + 1; }

double phase_function(const ManifoldSpec& m, const CoverPoint& c)
{
    check_coords(m, c);
    if(const auto* t = std::get_if<TorusSpec>(&m)) {
        double s = 0.0;
        for(int j = 0; j < t->circles(); ++j)
            s += circle_phase(c.coords(j), t->circle_radii(j));
        return s;
    }
    return std::get<GraphSpec>(m).phi.value(c.coords);
}

double cover_phase(const ManifoldSpec& m, const std::vector<CoverPoint>& path)
{
    if(path.empty())
        throw std::invalid_argument("cover_phase: empty path");
    for(const auto& c : path)
        check_coords(m, c);
    // p . dx/ds along the straight cover segment a + s d.
    auto integrand = [&](const Vec& q, const Vec& d) {
        if(const auto* t = std::get_if<TorusSpec>(&m)) {
            double s = 0.0;
            for(int j = 0; j < t->circles(); ++j) {
                const double r = t->circle_radii(j), sn = std::sin(q(j));
                s += -r * r * sn * sn * d(j);
            }
            return s;
        }
        return std::get<GraphSpec>(m).phi.gradient(q).dot(d);
    };
    double acc = 0.0;
    for(std::size_t k = 1; k < path.size(); ++k) {
        const Vec a = path[k - 1].coords;
        const Vec d = path[k].coords - a;
        const int sub = std::max(1, static_cast<int>(std::ceil(d.norm() / 0.1)));
        for(int s = 0; s < sub; ++s)
            for(int q = 0; q < 5; ++q) {
                const double u = (s + kGLNodes[q]) / sub;
                acc += kGLWeights[q] / sub * integrand(Vec(a + u * d), d);
            }
    }
    return acc;
}

int argument_index_on_manifold(const ManifoldSpec& m, const CoverPoint& c, const LagrangianLift& base)
{
    return leray_index(tangent_lift(m, c), base);
}

int chart_transition_index(const LagrangianLift& alpha, const LagrangianLift& beta, const LagrangianFrame& lz)
{
    return inert(frame_from_souriau(alpha.w), frame_from_souriau(beta.w), lz) - leray_index(alpha, beta);
}

cplx sqrt_de_rham(double amplitude, const ManifoldSpec& m, const CoverPoint& c, const LagrangianLift& base,
                  int orientation)
{
    if(!(amplitude >= 0.0))
        throw std::invalid_argument("sqrt_de_rham: amplitude must be non-negative");
    if(orientation != 1 && orientation != -1)
        throw std::invalid_argument("sqrt_de_rham: orientation must be +1 or -1");
    const LagrangianLift ref = orientation == 1 ? base : deck_act(1, base);
    const int idx = leray_index(tangent_lift(m, c), ref);
    return ipow(idx) * std::sqrt(amplitude);
}

bool is_quantized(const ManifoldSpec& m, double hbar, double tol)
{
    if(!(hbar > 0.0))
        throw std::invalid_argument("is_quantized: hbar must be positive");
    if(const auto* t = std::get_if<TorusSpec>(&m))
        return keller_maslov_check(*t, hbar, tol).passed;
    return true;
}

cplx deck_phase_defect(const TorusSpec& t, double hbar, int generator)
{
    if(generator < 1 || generator > t.circles())
        throw std::invalid_argument("deck_phase_defect: generator index out of range");
    std::vector<int> e(t.circles(), 0);
    e[generator - 1] = 1;
    const double r = t.circle_radii(generator - 1);
    const double action = -kPi * r * r;
    const int maslov = torus_loop_maslov(t, e);
    return std::exp(kI * (action / hbar + 0.5 * kPi * maslov));
}

Waveform Waveform::make(ManifoldSpec m, double hbar)
{
    if(!(hbar > 0.0))
        throw std::invalid_argument("Waveform: hbar must be positive");
    Waveform w;
    const int n = manifold_dim(m);
    double rho = 1.0;
    if(const auto* t = std::get_if<TorusSpec>(&m))
        rho = std::pow(2.0 * kPi, -t->circles());
    w.manifold = std::move(m);
    w.hbar = hbar;
    w.base = make_lift(vertical_frame(n), 0.0);
    w.density = [rho](const CoverPoint&) { return rho; };
    return w;
}

double Waveform::phase(const CoverPoint& c) const { return phase_offset + phase_function(manifold, c); }

int Waveform::index(const CoverPoint& c) const { return argument_index_on_manifold(manifold, c, base); }

cplx Waveform::evaluate(const CoverPoint& c) const
{
    const double rho = density(c);
    if(!(rho >= 0.0))
        throw std::invalid_argument("Waveform: density must be non-negative");
    return std::exp(kI * phase(c) / hbar) * ipow(index(c)) * std::sqrt(rho);
}

cplx WaveSample::value(double hbar) const
{
    return std::exp(kI * phase / hbar) * ipow(index) * std::sqrt(density);
}

WaveformSnapshot sample_waveform(const Waveform& psi, const std::vector<CoverPoint>& labels, double time)
{
    WaveformSnapshot snap;
    snap.hbar = psi.hbar;
    snap.time = time;
    snap.base = psi.base;
    snap.samples.reserve(labels.size());
    for(const auto& c : labels) {
        WaveSample s;
        s.label = c;
        s.z = manifold_point(psi.manifold, c);
        s.lift = tangent_lift(psi.manifold, c);
        s.index = leray_index(s.lift, psi.base);
        s.phase = psi.phase(c);
        s.density = psi.density(c);
        if(!(s.density >= 0.0))
            throw std::invalid_argument("sample_waveform: density must be non-negative");
        snap.samples.push_back(std::move(s));
    }
    return snap;
}

std::vector<CoverPoint> circle_labels(double theta0, double theta1, int count)
{
    if(count < 1)
        throw std::invalid_argument("circle_labels: count must be positive");
    std::vector<CoverPoint> out;
    out.reserve(count);
    for(int k = 0; k < count; ++k)
        out.push_back({Vec::Constant(1, theta0 + (theta1 - theta0) * k / count)});
    return out;
}

WaveformSnapshot evolve(const WaveformSnapshot& psi, const HamiltonianSpec& H, double t, int steps, Exec exec)
{
    WaveformSnapshot out = psi;
    out.time = t;
    if(t == psi.time)
        return out;
    for_each_index(static_cast<long>(psi.samples.size()), exec, [&](long k) {
        const WaveSample& s = psi.samples[k];
        WaveSample& o = out.samples[k];
        const Trajectory tr = integrate(H, s.z, psi.time, t, steps);
        o.z = tr.end();
        o.phase = s.phase + tr.action.back();
        o.lift = transport_lift(s.lift, jacobian_curve(H, s.z, psi.time), psi.time, t);
        o.index = leray_index(o.lift, psi.base);
    });
    return out;
}

double total_mass(const WaveformSnapshot& psi, double label_span)
{
    if(psi.samples.empty())
        return 0.0;
    double s = 0.0;
    for(const auto& w : psi.samples)
        s += w.density;
    return s * label_span / static_cast<double>(psi.samples.size());
}

Shadow shadow(const Waveform& psi, const Vec& x_grid, double caustic_tol)
{
    Shadow sh;
    const Eigen::Index N = x_grid.size();
    sh.positions = x_grid;
    sh.values = CVec::Zero(N);
    sh.branch_count.assign(N, 0);
    sh.caustic.assign(N, false);

    if(const auto* g = std::get_if<GraphSpec>(&psi.manifold)) {
        if(g->dim() != 1)
            throw std::invalid_argument("shadow: graph waveforms must be one-dimensional");
        for(Eigen::Index i = 0; i < N; ++i) {
            const CoverPoint c{Vec::Constant(1, x_grid(i))};
            sh.values(i) = psi.evaluate(c);
            sh.branch_count[i] = 1;
        }
        return sh;
    }
    const TorusSpec& t = require_circle(psi.manifold, "shadow");
    const double r = t.circle_radii(0);
    for(Eigen::Index i = 0; i < N; ++i) {
        const double x = x_grid(i);
        if(std::abs(std::abs(x) - r) <= caustic_tol * r) {
            sh.caustic[i] = true;
            continue;
        }
        if(std::abs(x) > r)
            continue;
        const double th = std::acos(x / r);
        const double jac = 1.0 / std::sqrt(r * r - x * x);
        for(double theta : {th, 2.0 * kPi - th}) {
            const CoverPoint c{Vec::Constant(1, theta)};
            const double rho = psi.density(c) * jac;
            sh.values(i) += std::exp(kI * psi.phase(c) / psi.hbar) * ipow(psi.index(c)) * std::sqrt(rho);
        }
        sh.branch_count[i] = 2;
    }
    return sh;
}

Shadow shadow(const WaveformSnapshot& psi, const Vec& x_grid, double label_span, double caustic_tol)
{
    const std::size_t M = psi.samples.size();
    if(M < 2)
        throw std::invalid_argument("shadow: snapshot needs at least two samples");
    for(const auto& s : psi.samples)
        if(s.z.dim() != 1)
            throw std::invalid_argument("shadow: snapshot shadows are one-dimensional");
    const double ds = label_span / static_cast<double>(M);
    Shadow sh;
    const Eigen::Index N = x_grid.size();
    sh.positions = x_grid;
    sh.values = CVec::Zero(N);
    sh.branch_count.assign(N, 0);
    sh.caustic.assign(N, false);
    for(Eigen::Index i = 0; i < N; ++i) {
        const double x = x_grid(i);
        for(std::size_t k = 0; k < M; ++k) {
            const WaveSample& a = psi.samples[k];
            const WaveSample& b = psi.samples[(k + 1) % M];
            const double xa = a.z.x(0), xb = b.z.x(0);
            const bool hit = (xa <= x && x < xb) || (xb <= x && x < xa);
            if(!hit)
                continue;
            const double dxds = (xb - xa) / ds;
            if(std::abs(dxds) <= caustic_tol) {
                sh.caustic[i] = true;
                continue;
            }
            // On the closing segment the first sample is continued across the
            // loop, so its phase and index come from the last sample.
            double pb = b.phase;
            int ib = b.index;
            if(k + 1 == M) {
                pb = a.phase + 0.5 * (a.z.p(0) + b.z.p(0)) * (xb - xa);
                ib = leray_index(lift_near(b.lift.w, a.lift.alpha), psi.base);
            }
            // p linear along the segment for the phase, central differences
            // for dx/ds at the ends.
            const double f = (x - xa) / (xb - xa);
            const double pa = a.z.p(0), px = (1.0 - f) * pa + f * b.z.p(0);
            const double phase = a.phase + 0.5 * (pa + px) * (x - xa) +
                                 f * (pb - a.phase - 0.5 * (pa + b.z.p(0)) * (xb - xa));
            const double da = (xb - psi.samples[(k + M - 1) % M].z.x(0)) / (2.0 * ds);
            const double db = (psi.samples[(k + 2) % M].z.x(0) - xa) / (2.0 * ds);
            double dx = (1.0 - f) * da + f * db;
            if(dx * dxds <= 0.0)
                dx = dxds;
            const double rho = ((1.0 - f) * a.density + f * b.density) / std::abs(dx);
            const int idx = f < 0.5 ? a.index : ib;
            sh.values(i) += std::exp(kI * phase / psi.hbar) * ipow(idx) * std::sqrt(rho);
            ++sh.branch_count[i];
        }
    }
    return sh;
}

CVec van_vleck_propagate(const InitialWave1D& psi0, const HamiltonianSpec& H, double hbar, double tp, double t,
                         const Vec& x_grid, int steps, Exec exec)
{
    if(H.dim() != 1)
        throw std::invalid_argument("van_vleck_propagate: only n = 1 is supported");
    if(!(hbar > 0.0))
        throw std::invalid_argument("van_vleck_propagate: hbar must be positive");
    if(!psi0.phi || !psi0.dphi || !psi0.ddphi || !psi0.amp)
        throw std::invalid_argument("van_vleck_propagate: initial data incomplete");
    const Eigen::Index N = x_grid.size();
    CVec out(N);
    if(t == tp) {
        for(Eigen::Index i = 0; i < N; ++i)
            out(i) = std::exp(kI * psi0.phi(x_grid(i)) / hbar) * psi0.amp(x_grid(i));
        return out;
    }

    struct Eval {
        double F, D, action;
    };
    auto eval = [&](double xp, double x) {
        const Trajectory tr = integrate(H, PhasePoint(Vec::Constant(1, xp), Vec::Constant(1, psi0.dphi(xp))),
                                        tp, t, steps);
        const Mat& S = tr.jacobians.back();
        return Eval{tr.end().x(0) - x, S(0, 0) + S(0, 1) * psi0.ddphi(xp), tr.action.back()};
    };

    constexpr long kBlock = 64;
    const long blocks = (static_cast<long>(N) + kBlock - 1) / kBlock;
    for_each_index(blocks, exec, [&](long b) {
        const long lo = b * kBlock, hi = std::min<long>(N, lo + kBlock);
        double xp = x_grid(lo);
        for(long i = lo; i < hi; ++i) {
            const double x = x_grid(i);
            Eval e = eval(xp, x);
            for(int it = 0; it < 60 && std::abs(e.F) > 1e-13 * (1.0 + std::abs(x)); ++it) {
                if(std::abs(e.D) <= 1e-12)
                    throw CausticError("van_vleck_propagate: conjugate point inside the window; "
                                       "use the multi-branch sum");
                const double step = -e.F / e.D;
                double lam = 1.0;
                Eval en = e;
                double xn = xp;
                for(int ls = 0; ls < 40; ++ls) {
                    xn = xp + lam * step;
                    en = eval(xn, x);
                    if(std::abs(en.F) < std::abs(e.F))
                        break;
                    lam *= 0.5;
                }
                xp = xn;
                e = en;
            }
            if(std::abs(e.F) > 1e-9 * (1.0 + std::abs(x)))
                throw NumericalError("van_vleck_propagate: source point not found");
            if(!(e.D > 0.0))
                throw CausticError("van_vleck_propagate: dx/dx' changed sign inside the window; "
                                   "use the multi-branch sum");
            out(i) = std::exp(kI * (psi0.phi(xp) + e.action) / hbar) * psi0.amp(xp) / std::sqrt(e.D);
        }
    });
    return out;
}

CVec van_vleck_gaussian(const GaussianPacket& g, const HamiltonianSpec& H, double hbar, double tp, double t,
                        const Vec& x_grid, Exec exec)
{
    if(H.dim() != 1 || !H.is_quadratic())
        throw std::invalid_argument("van_vleck_gaussian: needs a quadratic Hamiltonian with n = 1");
    if(!(hbar > 0.0) || !(g.sigma > 0.0))
        throw std::invalid_argument("van_vleck_gaussian: hbar and sigma must be positive");
    const Mat M = H.quadratic_matrix();
    const double c0 = H.quadratic_constant();
    const Mat JM = standard_j(1) * M;
    const cplx phi2 = kI * hbar / (g.sigma * g.sigma);
    auto Phi = [&](cplx x) { return g.p0 * (x - g.x0) + 0.5 * phi2 * (x - g.x0) * (x - g.x0); };
    auto dPhi = [&](cplx x) { return g.p0 + phi2 * (x - g.x0); };

    const double T = t - tp;
    const Mat E = (T * JM).exp();
    const double A = E(0, 0), B = E(0, 1);

    // D(tau) = A(tau) + B(tau) Phi'' with the argument followed from D = 1.
    const int track = 512;
    double arg = 0.0;
    cplx prev = 1.0;
    for(int k = 1; k <= track; ++k) {
        const Mat Ek = (T * k / track * JM).exp();
        const cplx D = Ek(0, 0) + Ek(0, 1) * phi2;
        arg += std::arg(D / prev);
        prev = D;
    }
    const cplx Dend = A + B * phi2;
    const cplx prefactor = std::polar(1.0 / std::sqrt(std::abs(Dend)), -0.5 * arg);

    const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(T) / 0.05)));
    const double hs = T / sub;
    const Mat Esub = (hs * JM).exp();
    Mat Enode[5];
    for(int q = 0; q < 5; ++q)
        Enode[q] = (kGLNodes[q] * hs * JM).exp();
    auto lagrangian = [&](const Eigen::Vector2cd& z) {
        const Eigen::Vector2cd gz = M.cast<cplx>() * z;
        return z(1) * gz(1) - 0.5 * (z(0) * gz(0) + z(1) * gz(1)) - c0;
    };

    const Eigen::Index N = x_grid.size();
    CVec out(N);
    for_each_index(static_cast<long>(N), exec, [&](long i) {
        const double x = x_grid(i);
        cplx xp = x;
        for(int it = 0; it < 20; ++it) {
            const cplx F = A * xp + B * dPhi(xp) - x;
            xp -= F / Dend;
            if(std::abs(F) <= 1e-15 * (1.0 + std::abs(x)))
                break;
        }
        Eigen::Vector2cd z(xp, dPhi(xp));
        cplx S = Phi(xp);
        if(T != 0.0) {
            for(int s = 0; s < sub; ++s) {
                for(int q = 0; q < 5; ++q)
                    S += hs * kGLWeights[q] * lagrangian(Enode[q].cast<cplx>() * z);
                z = Esub.cast<cplx>() * z;
            }
        }
        out(i) = std::exp(kI * S / hbar) * prefactor;
    });
    return out;
}

MorseReport morse_report(const HamiltonianSpec& H, const Vec& xp, const Vec& pp, double tp, double t)
{
    const int n = H.dim();
    if(xp.size() != n || pp.size() != n)
        throw std::invalid_argument("morse_index: dimension mismatch");
    MorseReport rep;
    if(t == tp)
        throw CausticError("morse_index: endpoint t = t' is conjugate");
    const PhasePoint z0(xp, pp);
    const auto s = jacobian_curve(H, z0, tp);
    const LagrangianFrame vp = vertical_frame(n);
    const FrameCurve curve = [&](double tau) { return transform_frame(s(tau), vp); };
    const LagrangianLift start = make_lift(vp, 0.0);

    const SouriauPoint wend = souriau_w(curve(t));
    if(intersection_dim(wend, start.w, 1e-9) > 0)
        throw CausticError("morse_index: endpoint is conjugate to the start");

    const double delta = 1e-6 * (t - tp);
    const LagrangianLift ref = lift_along(curve, tp, tp + delta, start, 1);
    const int segs = std::max(64, static_cast<int>(std::ceil(16.0 * std::abs(t - tp))));
    const LagrangianLift end = lift_along(curve, tp, t, start, segs);
    rep.index = leray_index(ref, start) - leray_index(end, start);

    const int samples = std::max(256, static_cast<int>(std::ceil(64.0 * std::abs(t - tp))));
    const Trajectory tr = integrate(H, z0, tp, t, samples);
    double prev = 0.0;
    for(std::size_t k = 1; k < tr.size(); ++k) {
        const double d = tr.jacobians[k].topRightCorner(n, n).determinant();
        if(k > 1 && ((prev > 0.0 && d < 0.0) || (prev < 0.0 && d > 0.0)))
            ++rep.sign_changes;
        if(d != 0.0)
            prev = d;
    }
    rep.det_end = tr.jacobians.back().topRightCorner(n, n).determinant();
    return rep;
}

int morse_index(const HamiltonianSpec& H, const Vec& xp, const Vec& pp, double tp, double t)
{
    return morse_report(H, xp, pp, tp, t).index;
}

std::vector<double> oscillator_spectrum_from_waveforms(double hbar, int N_max, SpectrumRule rule)
{
    if(!(hbar > 0.0))
        throw std::invalid_argument("oscillator_spectrum: hbar must be positive");
    if(N_max < 0)
        throw std::invalid_argument("oscillator_spectrum: N_max must be non-negative");
    std::vector<double> levels;
    const int wanted = N_max + 1;
    const long kmax = 200L * (wanted + 2);
    for(long k = 1; k <= kmax && static_cast<int>(levels.size()) < wanted; ++k) {
        const double r2 = static_cast<double>(k) * hbar / 100.0;
        bool pass;
        if(rule == SpectrumRule::waveform) {
            pass = is_quantized(TorusSpec(Vec::Constant(1, std::sqrt(r2))), hbar);
        } else {
            const double v = r2 / (2.0 * hbar);
            pass = std::abs(v - std::round(v)) <= 1e-8;
        }
        if(pass)
            levels.push_back(0.5 * r2);
    }
    return levels;
}

} // namespace camel
