#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "camel/capacity.hpp"
#include "camel/flow.hpp"
#include "camel/leray.hpp"

namespace camel {

/// Graph p = grad Phi(x) of a polynomial phase; the base point is x0.
struct GraphSpec {
    Polynomial phi;
    Vec x0;

    GraphSpec() = default;
    GraphSpec(Polynomial p, Vec base);
    int dim() const { return phi.nvars(); }
};

using ManifoldSpec = std::variant<TorusSpec, GraphSpec>;

int manifold_dim(const ManifoldSpec& m);

/// Point of the universal cover in unwrapped coordinates: circle angles
/// followed by flat coordinates for tori, x for graphs.
struct CoverPoint {
    Vec coords;
};

CoverPoint base_cover_point(const ManifoldSpec& m);
PhasePoint manifold_point(const ManifoldSpec& m, const CoverPoint& c);
LagrangianFrame tangent_frame(const ManifoldSpec& m, const CoverPoint& c);

/// Lift of the tangent plane at the base point. Circle factors contribute
/// 2 theta, flat factors and graph directions 2 atan(a) - pi per eigenvalue a
/// of the second derivative; this is the lift continuous with R^n_p.
LagrangianLift base_tangent_lift(const ManifoldSpec& m);

/// Lift of the tangent plane at c reached along the straight path from the
/// base point in cover coordinates.
LagrangianLift tangent_lift(const ManifoldSpec& m, const CoverPoint& c);

/// (r^2/2)(sin theta cos theta - theta)
double circle_phase(double theta, double r);

/// floor(theta / pi) + 1
int circle_argument_index(double theta);

/// Closed-form primitive of p dx on the cover: int_{z0}^{z} p dx for tori,
/// Phi(x) for graphs.
double phase_function(const ManifoldSpec& m, const CoverPoint& c);

/// int p dx along the polyline through the cover points (5-point
/// Gauss-Legendre per segment).
double cover_phase(const ManifoldSpec& m, const std::vector<CoverPoint>& path);

/// m(l_inf(z), base) with the tangent lift carried from the base point.
int argument_index_on_manifold(const ManifoldSpec& m, const CoverPoint& c, const LagrangianLift& base);

/// m_{alpha beta}(z) = m_alpha - m_beta = Inert(l_alpha, l_beta, l(z)) - m(alpha, beta).
int chart_transition_index(const LagrangianLift& alpha, const LagrangianLift& beta,
                           const LagrangianFrame& lz);

/// i^m sqrt(amplitude), with m = m(l_inf(z), base) for orientation +1 and
/// m(l_inf(z), deck(1, base)) for orientation -1.
cplx sqrt_de_rham(double amplitude, const ManifoldSpec& m, const CoverPoint& c, const LagrangianLift& base,
                  int orientation = +1);

/// Single-valuedness condition on every generator loop. Graphs are always
/// quantized.
bool is_quantized(const ManifoldSpec& m, double hbar, double tol = 1e-8);

/// exp(i[(1/hbar) oint p dx + (pi/2) m]) for the j-th generator (1-based)
/// traversed with increasing angle.
cplx deck_phase_defect(const TorusSpec& t, double hbar, int generator);

/// e^{i phi/hbar} sqrt(mu) with mu = rho in the manifold's parameter chart.
struct Waveform {
    ManifoldSpec manifold;
    double hbar = 1.0;
    LagrangianLift base;
    std::function<double(const CoverPoint&)> density;
    double phase_offset = 0.0;

    /// Uniform density, base R^n_p.
    static Waveform make(ManifoldSpec m, double hbar);

    double phase(const CoverPoint& c) const;
    int index(const CoverPoint& c) const;
    cplx evaluate(const CoverPoint& c) const;
};

struct WaveSample {
    CoverPoint label;
    PhasePoint z;
    LagrangianLift lift;
    int index = 0;
    double phase = 0.0;
    double density = 0.0;

    cplx value(double hbar) const;
};

/// A waveform sampled on labels, carried by the flow.
struct WaveformSnapshot {
    double hbar = 1.0;
    double time = 0.0;
    LagrangianLift base;
    std::vector<WaveSample> samples;
};

WaveformSnapshot sample_waveform(const Waveform& psi, const std::vector<CoverPoint>& labels, double time = 0.0);

/// Labels theta_k = theta0 + k (theta1 - theta0) / count, k < count (circle).
std::vector<CoverPoint> circle_labels(double theta0, double theta1, int count);

/// Moves every sample along the flow from psi.time to t: the point by the
/// trajectory, the phase by int p dx - H dt, the tangent lift along the
/// monodromy path; the density stays attached to its label.
WaveformSnapshot evolve(const WaveformSnapshot& psi, const HamiltonianSpec& H, double t, int steps = 64,
                        Exec exec = Exec::parallel);

/// sum rho over labels times the label spacing (uniform labels on a loop).
double total_mass(const WaveformSnapshot& psi, double label_span);

struct Shadow {
    Vec positions;
    CVec values;
    std::vector<int> branch_count;
    std::vector<bool> caustic;
};

/// x-chart expression of a circle or n = 1 graph waveform, summed over the
/// branches above each x. Points within caustic_tol of a turning point are
/// flagged and left at zero.
Shadow shadow(const Waveform& psi, const Vec& x_grid, double caustic_tol = 1e-9);

/// Shadow of a sampled closed curve (n = 1): branches are the polyline
/// segments crossing x, the density converted by |ds/dx|.
Shadow shadow(const WaveformSnapshot& psi, const Vec& x_grid, double label_span, double caustic_tol = 1e-6);

/// Real initial data e^{i Phi/hbar} a on the line.
struct InitialWave1D {
    std::function<double(double)> phi, dphi, ddphi, amp;
};

/// e^{i S/hbar} Psi(x', t') |dx/dx'|^{-1/2} at each grid point. x' is found by
/// damped Newton seeded from the previous grid point (blocks of 64 points are
/// independent). Throws CausticError when dx/dx' has changed sign.
CVec van_vleck_propagate(const InitialWave1D& psi0, const HamiltonianSpec& H, double hbar, double tp, double t,
                         const Vec& x_grid, int steps = 200, Exec exec = Exec::parallel);

/// Gaussian e^{i p0 (x - x0)/hbar - (x - x0)^2 / 2 sigma^2}.
struct GaussianPacket {
    double x0 = 0.0;
    double p0 = 0.0;
    double sigma = 1.0;
};

/// The same formula with the Gaussian written as a complex phase
/// Phi = p0 (x - x0) + i hbar (x - x0)^2 / 2 sigma^2: complex source point,
/// complex action, prefactor (A + B Phi'')^{-1/2} on the branch continuous
/// from 1. Quadratic H only (n = 1).
CVec van_vleck_gaussian(const GaussianPacket& g, const HamiltonianSpec& H, double hbar, double tp, double t,
                        const Vec& x_grid, Exec exec = Exec::parallel);

struct MorseReport {
    /// Conjugate points in (t', t) with multiplicity, from the lifted path of
    /// the vertical plane (p-convex H).
    int index = 0;
    /// Sign changes of det dx/dp' on a uniform sampling.
    int sign_changes = 0;
    double det_end = 0.0;
};

/// Throws CausticError when t itself is conjugate to t'.
MorseReport morse_report(const HamiltonianSpec& H, const Vec& xp, const Vec& pp, double tp, double t);
int morse_index(const HamiltonianSpec& H, const Vec& xp, const Vec& pp, double tp, double t);

enum class SpectrumRule { waveform, density_only };

/// Scans r^2 = k hbar / 100 and returns r^2 / 2 for the first N_max + 1 circles
/// passing the rule: single-valued waveforms, or the density-only condition
/// oint p dx in 2 pi hbar Z (r > 0).
std::vector<double> oscillator_spectrum_from_waveforms(double hbar, int N_max,
                                                       SpectrumRule rule = SpectrumRule::waveform);

} // namespace camel
