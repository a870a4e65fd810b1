#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "camel/parallel.hpp"
#include "camel/polynomial.hpp"
#include "camel/symplectic.hpp"

namespace camel {

/// Ellipsoid sum_j (x_j^2 + p_j^2) / R_j^2 <= 1 around center. Radii are
/// stored in ascending order.
struct EllipsoidSpec {
    Vec radii;
    PhasePoint center;

    EllipsoidSpec() = default;
    explicit EllipsoidSpec(Vec r);
    EllipsoidSpec(Vec r, PhasePoint c);

    int dim() const { return static_cast<int>(radii.size()); }
    static EllipsoidSpec ball(int n, double R);
};

/// pi R_1^2
double ellipsoid_capacity(const EllipsoidSpec& e);

/// Symplectic area of the cylinder x_j^2 + p_j^2 <= R^2: pi R^2.
double cylinder_capacity(double R);

/// pi^n R^{2n} / n!
double ball_volume(int n, double R);

/// (S^1)^k x R^{n-k}: circles of radii r_j in the (x_j, p_j) planes, flat
/// factor along the remaining x axes.
struct TorusSpec {
    Vec circle_radii;
    int flat_dims = 0;

    TorusSpec() = default;
    TorusSpec(Vec radii, int flat = 0);

    int circles() const { return static_cast<int>(circle_radii.size()); }
    int dim() const { return circles() + flat_dims; }
};

/// Point of the torus at angles theta (flat coordinates y).
PhasePoint torus_point(const TorusSpec& t, const Vec& theta, const Vec& y = Vec());
/// Tangent plane of the torus at angles theta.
LagrangianFrame torus_tangent_frame(const TorusSpec& t, const Vec& theta);

struct LinearStage {
    Mat S;
};
/// (x, p) -> (x, p + grad V(x))
struct XShearStage {
    Polynomial V;
};
/// (x, p) -> (x + grad T(p), p)
struct PShearStage {
    Polynomial T;
};
using Stage = std::variant<LinearStage, XShearStage, PShearStage>;

/// Composite map applied stage by stage in order.
struct SymplectomorphismSpec {
    int n = 1;
    std::vector<Stage> stages;

    /// Throws std::invalid_argument when a stage has the wrong size or a
    /// linear stage is not symplectic.
    void validate(double tol = 1e-8) const;
};

PhasePoint apply_symplectomorphism(const SymplectomorphismSpec& f, const PhasePoint& z);
/// Jacobian of the composite by the chain rule.
Mat symplectomorphism_jacobian(const SymplectomorphismSpec& f, const PhasePoint& z);

/// 3 to 7 stages alternating exp(J A) with random x- or p-shears whose
/// polynomials have degree 2..4 and coefficients uniform in [-0.5, 0.5].
SymplectomorphismSpec random_symplectomorphism(int n, std::uint64_t seed);

/// How points of B(R) are drawn. `boundary` samples the sphere S^{2n-1}(R):
/// a projection of f(B) equals the projection of f(S), and for n >= 2 the
/// sphere projects onto a conjugate plane far more evenly than the volume
/// does. `automatic` picks volume for n = 1 and boundary otherwise.
enum class BallSampling { automatic, volume, boundary };

struct ShadowOptions {
    int grid_res = 512;
    long samples = 1000000;
    std::uint64_t seed = 0;
    BallSampling sampling = BallSampling::automatic;
    /// Count an empty cell whose four neighbours are occupied.
    bool fill_holes = true;
    Exec exec = Exec::parallel;
};

/// Occupied area of a projection onto the (x_i, p_k) plane (1-based).
struct ShadowEstimate {
    int plane_x = 1;
    int plane_p = 1;
    double area = 0.0;
    int grid_res = 0;
    long occupied_cells = 0;
    long samples = 0;
    std::uint64_t seed = 0;
    double cell_area = 0.0;

    bool conjugate() const { return plane_x == plane_p; }
    int plane_index() const { return plane_x; }
};

/// Shadow of f(B(R)) on the conjugate plane (x_j, p_j).
ShadowEstimate shadow_area(const SymplectomorphismSpec& f, double R, int j,
                           const ShadowOptions& opt = {});

/// Shadows on every (x_i, p_k) plane from one set of samples; conjugate planes
/// first (i = k = 1..n), then the mixed control planes.
std::vector<ShadowEstimate> shadow_areas(const SymplectomorphismSpec& f, double R,
                                         const ShadowOptions& opt = {});

/// sum_j hbar omega_j / 2
double ground_energy(const Vec& omegas, double hbar);

/// h / 2 = pi hbar
double minimal_orbit_action(double hbar);

/// sum_j mu_j pi r_j^2
double loop_action(const TorusSpec& t, const std::vector<int>& mu);

/// Maslov index of the loop of tangent planes along the winding vector mu.
int torus_loop_maslov(const TorusSpec& t, const std::vector<int>& mu);

struct KellerMaslovRow {
    int generator = 0;
    double radius = 0.0;
    double action = 0.0;
    int maslov = 0;
    /// action / (2 pi hbar) - maslov / 4
    double value = 0.0;
    double residual = 0.0;
    bool passed = false;
};

struct KellerMaslovReport {
    bool passed = false;
    std::vector<KellerMaslovRow> rows;
};

/// Checks (1/2 pi hbar) oint p dx - m/4 in Z on each generator loop.
KellerMaslovReport keller_maslov_check(const TorusSpec& t, double hbar, double tol = 1e-8);

/// sum_j omega_j r_j^2 / 2 on a quantized torus; throws std::invalid_argument
/// otherwise.
double oscillator_levels(const TorusSpec& t, const Vec& omegas, double hbar, double tol = 1e-8);

} // namespace camel
