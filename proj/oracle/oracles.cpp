#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

namespace {

constexpr cplx kI{0.0, 1.0};

// Kernel sqrt(g / 2 pi i hbar) exp(i (a x^2 + b x'^2 - 2 g x x') / 2 hbar)
// applied to the Gaussian.
CVec quadratic_kernel_gaussian(double a, double b, double g, double x0, double p0, double sigma, double hbar,
                               const Vec& x)
{
    const double s2 = sigma * sigma;
    const cplx A = -kI * b / (2.0 * hbar) + 1.0 / (2.0 * s2);
    const cplx pref = std::sqrt(g / (2.0 * std::numbers::pi * kI * hbar)) * std::sqrt(std::numbers::pi / A);
    CVec out(x.size());
    for(Eigen::Index k = 0; k < x.size(); ++k) {
        const double xx = x(k);
        const cplx B = -kI * g * xx / hbar + kI * p0 / hbar + x0 / s2;
        const cplx C = kI * a * xx * xx / (2.0 * hbar) - kI * p0 * x0 / hbar - x0 * x0 / (2.0 * s2);
        out(k) = pref * std::exp(B * B / (4.0 * A) + C);
    }
    return out;
}

} // namespace

double harmonic_action(double x, double xp, double t, double omega, double mass)
{
    const double s = std::sin(omega * t), c = std::cos(omega * t);
    return mass * omega / (2.0 * s) * ((x * x + xp * xp) * c - 2.0 * x * xp);
}

double free_action(double x, double xp, double t, double mass) { return mass * (x - xp) * (x - xp) / (2.0 * t); }

CVec mehler_gaussian(double x0, double p0, double sigma, double omega, double mass, double hbar, double t,
                     const Vec& x)
{
    const double s = std::sin(omega * t), c = std::cos(omega * t);
    const double g = mass * omega / s;
    return quadratic_kernel_gaussian(g * c, g * c, g, x0, p0, sigma, hbar, x);
}

CVec free_gaussian(double x0, double p0, double sigma, double mass, double hbar, double t, const Vec& x)
{
    const double g = mass / t;
    return quadratic_kernel_gaussian(g, g, g, x0, p0, sigma, hbar, x);
}

CVec free_chirp(double k, double mass, double hbar, double t, const Vec& x)
{
    const double d = 1.0 + k * t / mass;
    CVec out(x.size());
    for(Eigen::Index j = 0; j < x.size(); ++j)
        out(j) = std::exp(kI * k * x(j) * x(j) / (2.0 * hbar * d)) / std::sqrt(d);
    return out;
}

cplx trace_log_quadrature(const CMat& M, double tol)
{
    const Eigen::Index n = M.rows();
    const CMat I = CMat::Identity(n, n);
    auto integrand = [&](double s) {
        const double l = std::tan(s), sec2 = 1.0 + l * l;
        const cplx tr = (l * I + M).partialPivLu().solve(M - I).trace();
        return tr * sec2 / (1.0 + l);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double half_pi = 0.5 * std::numbers::pi;
    const double re = GK::integrate([&](double s) { return integrand(s).real(); }, 0.0, half_pi, 20, tol);
    const double im = GK::integrate([&](double s) { return integrand(s).imag(); }, 0.0, half_pi, 20, tol);
    return {re, im};
}

} // namespace oracle
