#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "camel/leray.hpp"
#include "camel/parallel.hpp"
#include "camel/polynomial.hpp"
#include "camel/symplectic.hpp"

namespace camel {

enum class HamiltonianKind { quadratic, harmonic, free, quartic, magnetic, reparameterized };

std::string to_string(HamiltonianKind k);

/// Declarative Hamiltonian on R^2n.
///
///   quadratic       1/2 z^T M z + c0
///   harmonic        sum (p_j^2 + m_j^2 w_j^2 x_j^2) / 2m_j
///   free            sum p_j^2 / 2m_j
///   quartic         |p|^2/2 + sum w_j^2 x_j^2 / 2 + (lambda/4) |x|^4
///   magnetic        sum (p_j - A_j(x,t))^2 / 2m_j + U(x,t), with
///                   A_j(x,t) = (1 + kappa t) a_j(x), U(x,t) = (1 + kappa t) u(x)
///   reparameterized g(H_base) for a polynomial g with g' > 0 on the orbit
class HamiltonianSpec {
public:
    static HamiltonianSpec quadratic(Mat M, double c0 = 0.0);
    static HamiltonianSpec harmonic(Vec omega, Vec mass = Vec());
    static HamiltonianSpec free_particle(int n, Vec mass = Vec());
    static HamiltonianSpec quartic(Vec omega, double lambda);
    static HamiltonianSpec magnetic(std::vector<Polynomial> A, Polynomial U, Vec mass = Vec(),
                                    double kappa = 0.0);
    /// g(E) = sum_k coeffs(k) E^k
    static HamiltonianSpec reparameterized(const HamiltonianSpec& base, Vec coeffs);

    HamiltonianKind kind() const { return kind_; }
    int dim() const { return n_; }
    bool time_dependent() const;
    /// True when H is a quadratic form plus a constant; the flow is then linear.
    bool is_quadratic() const;
    /// M with H = 1/2 z^T M z + constant (only when is_quadratic()).
    Mat quadratic_matrix() const;
    double quadratic_constant() const;
    /// H = T(p) + V(x) with T = |p|^2/2.
    bool is_separable() const { return kind_ == HamiltonianKind::quartic; }

    double value(const Vec& z, double t = 0.0) const;
    Vec gradient(const Vec& z, double t = 0.0) const;
    Mat hessian(const Vec& z, double t = 0.0) const;

    double value(const PhasePoint& z, double t = 0.0) const { return value(z.stacked(), t); }

    // Parameters, for serialization.
    const Vec& omega() const { return omega_; }
    const Vec& mass() const { return mass_; }
    double lambda() const { return lambda_; }
    double kappa() const { return kappa_; }
    const std::vector<Polynomial>& vector_potential() const { return A_; }
    const Polynomial& scalar_potential() const { return U_; }
    const Vec& reparam_coeffs() const { return g_; }
    const HamiltonianSpec* base() const { return base_.get(); }

    // Separable pieces (quartic only).
    double kinetic(const double* p) const;
    double potential(const double* x) const;
    void grad_potential(const double* x, double* g) const;
    Mat hess_potential(const Vec& x) const;

private:
    HamiltonianKind kind_ = HamiltonianKind::quadratic;
    int n_ = 1;
    Mat M_;
    double c0_ = 0.0;
    Vec omega_, mass_;
    double lambda_ = 0.0, kappa_ = 0.0;
    std::vector<Polynomial> A_;
    Polynomial U_;
    Vec g_;
    std::shared_ptr<const HamiltonianSpec> base_;
};

enum class Integrator { automatic, exact_linear, yoshida4, implicit_midpoint };

/// Time samples of a trajectory with its monodromy matrices and the
/// accumulated action int p dx - H dt (action[0] = 0).
struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    std::vector<Mat> jacobians;
    std::vector<double> action;

    std::size_t size() const { return times.size(); }
    const PhasePoint& end() const { return points.back(); }
};

/// Throws DivergenceError if the state becomes non-finite or exceeds 1e12.
Trajectory integrate(const HamiltonianSpec& H, const PhasePoint& z0, double t0, double t1, int steps,
                     Integrator method = Integrator::automatic);

/// Monodromy s(tau) of the flow from t0 along the trajectory through z0.
/// Exact for quadratic H; otherwise each call integrates with step <= max_step,
/// continuing from the previous call when that one is closer. The returned
/// function keeps state and must not be shared between threads.
std::function<Mat(double)> jacobian_curve(const HamiltonianSpec& H, const PhasePoint& z0, double t0,
                                          double max_step = 1e-3);

/// Max of |f_{t,t'} f_{t',t''} z0 - f_{t,t''} z0| and the same residual of the
/// Jacobians. steps applies to the t'' -> t leg; the other legs get
/// proportional counts.
double chapman_kolmogorov_residual(const HamiltonianSpec& H, const PhasePoint& z0, double t,
                                   double tp, double tpp, int steps);

struct ActionResult {
    double action = 0.0;
    PhasePoint end;
    Mat jacobian;
};

/// int p dx - H dt along the trajectory from (x', p') at t' to time t.
ActionResult action_integral(const HamiltonianSpec& H, const Vec& xp, const Vec& pp, double tp,
                             double t, int steps);

/// Initial momentum p' with x(t) = x for the trajectory leaving x' at t'.
/// Newton on the dx/dp' block; CausticError when that block is singular.
Vec solve_boundary_momentum(const HamiltonianSpec& H, const Vec& xp, const Vec& x, double tp,
                            double t, const Vec& p_guess, int steps, double tol = 1e-13,
                            int max_iter = 50);

/// S(x, x'; t, t') with x' and t' fixed, on the grid xs x ts (rows index t).
struct ActionGrid {
    Vec xs;
    Vec ts;
    Mat S;
    double xprime = 0.0;
    double tprime = 0.0;
};

/// n = 1 only. Each point solves a boundary problem and integrates the action.
ActionGrid sample_action_grid(const HamiltonianSpec& H, double xprime, double tprime, const Vec& xs,
                              const Vec& ts, int steps, Exec exec = Exec::parallel);

struct HJResidual {
    double residual = 0.0;
    double hx = 0.0;
    double ht = 0.0;
    int order = 4;
};

/// max over interior points of |dS/dt + H(x, dS/dx, t)| with central
/// differences of the given order (2, 4 or 6). Uniform grids only.
HJResidual hamilton_jacobi_residual(const HamiltonianSpec& H, const ActionGrid& grid, int order = 4);

struct GeneratingFunctionReport {
    bool passed = false;
    /// Some sample had |det dx/dp'| <= caustic_tol.
    bool caustic = false;
    double min_abs_det = 0.0;
    double max_momentum_error = 0.0;
    int samples = 0;
};

/// At random (x', p') in [-1, 1]^2n checks det dx/dp' != 0 and that finite
/// differences of S reproduce p = dS/dx and p' = -dS/dx'.
GeneratingFunctionReport generating_function_check(const HamiltonianSpec& H, double tp, double t,
                                                   int samples, std::uint64_t seed = 0,
                                                   int steps = 200, double fd_step = 1e-4,
                                                   double tol = 1e-5, double caustic_tol = 1e-8);

/// phi0 + int p dx - H dt along the trajectory through z from t' to t.
double phase_transport(double phi0, const HamiltonianSpec& H, const PhasePoint& z, double tp,
                       double t, int steps);

/// For homogeneous quadratic H the action between z' and z = f(z') is
/// (p.x - p'.x') / 2.
double quadratic_action_shortcut(const PhasePoint& zp, const PhasePoint& z);

struct OrbitComparison {
    /// max |z_K(t_k) - z_H(g'(E) t_k)| over the samples.
    double matched_distance = 0.0;
    /// Symmetric Hausdorff distance between the sampled orbits, each point
    /// measured against the other orbit's polyline.
    double hausdorff_distance = 0.0;
    double rate = 1.0;
};

/// Compares the orbit of H through z0 with the orbit of K = g(H): same point
/// set, time rescaled by g'(H(z0)).
OrbitComparison shared_level_set_orbit_check(const HamiltonianSpec& H, const Vec& g_coeffs,
                                             const PhasePoint& z0, double T, int steps);

} // namespace camel
