#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "camel/symplectic.hpp"

namespace camel {

/// Point (w, alpha) of the universal cover of the Lagrangian Grassmannian,
/// det w = e^{i alpha}.
struct LagrangianLift {
    SouriauPoint w;
    double alpha = 0.0;

    int dim() const { return w.dim(); }
    bool is_valid(double tol = 1e-8) const;
};

/// Principal argument of det w, in (-pi, pi].
double arg_det(const SouriauPoint& w);

/// Lift of the plane spanned by F with the given alpha. Throws
/// std::invalid_argument when e^{i alpha} is not det w(F).
LagrangianLift make_lift(const LagrangianFrame& F, double alpha, double tol = 1e-8);
LagrangianLift make_lift(const SouriauPoint& w, double alpha, double tol = 1e-8);

/// The lift of w whose alpha is closest to alpha_hint.
LagrangianLift lift_near(const SouriauPoint& w, double alpha_hint);

/// Curve t -> frame. Used for adaptive refinement.
using FrameCurve = std::function<LagrangianFrame(double)>;

/// Sampled path of Lagrangian planes. With a generator the lift refines
/// adaptively between samples; without one each step must already be short.
struct LagrangianPath {
    std::vector<LagrangianFrame> samples;
    std::vector<double> times;
    FrameCurve generator;
};

/// Samples of curve at the given times.
LagrangianPath sample_curve(const FrameCurve& curve, const std::vector<double>& times);
LagrangianPath sample_curve(const FrameCurve& curve, double t0, double t1, int steps);

/// Continuous lift of a path starting at alpha0 (which must be an argument of
/// det w at the first sample).
///
/// Generator paths bisect each interval until |d arg det w| < pi/4 with a
/// midpoint consistency check. Sample-only paths throw RefinementError when
/// a step reaches |d arg det w| >= pi/2, since larger true steps alias.
std::vector<LagrangianLift> lift_path(const LagrangianPath& path, double alpha0);

/// Lift of curve(t1) reached from start (a lift of curve(t0)) by continuity.
LagrangianLift lift_along(const FrameCurve& curve, double t0, double t1,
                          const LagrangianLift& start, int min_segments = 64);

/// Deck transformation (w, alpha) -> (w, alpha + 2 pi k).
LagrangianLift deck_act(int k, const LagrangianLift& l);

/// Tr Log M on the principal branch, sum of ln|l| + i arg l over eigenvalues.
/// Throws BranchError when an eigenvalue lies within tol of the closed
/// negative real axis.
cplx principal_log_trace(const CMat& M, double tol = kSpectralTol);

/// (1/2pi)(alpha - alpha' + i Tr Log(-w w'^{-1})) + n/2 for transversal planes.
/// Throws std::invalid_argument on non-transversal input and IntegralityError
/// when the value misses an integer by more than kIntegralityTol.
int leray_index_transversal(const LagrangianLift& a, const LagrangianLift& b);

/// Index of inertia 1/2 (sigma + n + dim(a,b) - dim(a,c) + dim(b,c)).
int inert(const LagrangianFrame& a, const LagrangianFrame& b, const LagrangianFrame& c,
          double tol = kSpectralTol);
int inert(const SouriauPoint& a, const SouriauPoint& b, const SouriauPoint& c,
          double tol = kSpectralTol);

/// Random plane transversal to both a and b with spectral margin, lifted with
/// alpha in [0, 2 pi).
LagrangianLift auxiliary_lift(const SouriauPoint& a, const SouriauPoint& b, std::mt19937_64& rng,
                              double margin = 1e-3, int max_tries = 200);

/// Leray index on all pairs. Non-transversal pairs go through a random
/// auxiliary c: m(a,c) - m(b,c) + Inert(a,b,c). A second auxiliary is always
/// evaluated and a disagreement throws NumericalError.
int leray_index(const LagrangianLift& a, const LagrangianLift& b, std::mt19937_64& rng);
/// Same with a fixed internal seed.
int leray_index(const LagrangianLift& a, const LagrangianLift& b);

/// Winding (1/2pi)(arg det w(end) - arg det w(start)) of a closed path.
int maslov_loop_index(const LagrangianPath& loop);

/// m(endpoint of the lifted tangent path, base).
int argument_index(const std::vector<LagrangianLift>& tangent_lift_path,
                   const LagrangianLift& base);

/// Moves a lift along s(tau) l for tau in [tau0, tau1]; s(tau0) must fix the
/// plane of the starting lift (usually s(tau0) = I).
LagrangianLift transport_lift(const LagrangianLift& start, const std::function<Mat(double)>& s,
                              double tau0, double tau1, int min_segments = 64);

} // namespace camel
