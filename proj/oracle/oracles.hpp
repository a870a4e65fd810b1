#pragma once

#include "camel/linalg.hpp"

/// Closed forms and quadratures used to check the library from outside.
namespace oracle {

using camel::CMat;
using camel::CVec;
using camel::cplx;
using camel::Vec;

/// S(x, x'; t) = m w / (2 sin wt) ((x^2 + x'^2) cos wt - 2 x x').
double harmonic_action(double x, double xp, double t, double omega, double mass = 1.0);

/// S(x, x'; t) = m (x - x')^2 / 2t.
double free_action(double x, double xp, double t, double mass = 1.0);

/// Exact evolution of e^{i p0 (x - x0)/hbar - (x - x0)^2 / 2 sigma^2} under
/// (p^2 + m^2 w^2 x^2) / 2m, from the Mehler kernel (0 < wt < pi).
CVec mehler_gaussian(double x0, double p0, double sigma, double omega, double mass, double hbar, double t,
                     const Vec& x);

/// Same Gaussian under p^2 / 2m, from the free kernel (t > 0).
CVec free_gaussian(double x0, double p0, double sigma, double mass, double hbar, double t, const Vec& x);

/// Exact free evolution of the chirp e^{i k x^2 / 2 hbar} (1 + kt/m > 0).
CVec free_chirp(double k, double mass, double hbar, double t, const Vec& x);

/// Tr Log M = int_0^inf Tr[(l I + M)^{-1} (M - I)] / (1 + l) dl by adaptive
/// Gauss-Kronrod after l = tan s.
cplx trace_log_quadrature(const CMat& M, double tol = 1e-13);

} // namespace oracle
