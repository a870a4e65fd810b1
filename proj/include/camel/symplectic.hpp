#pragma once

#include <random>

#include "camel/linalg.hpp"

namespace camel {

/// A point (x, p) of the phase space R^n_x x R^n_p.
struct PhasePoint {
    Vec x;
    Vec p;

    PhasePoint() = default;
    PhasePoint(Vec x_, Vec p_);

    int dim() const { return static_cast<int>(x.size()); }
    /// (x, p) stacked into a 2n vector.
    Vec stacked() const;
    static PhasePoint from_stacked(const Vec& z);
};

/// Omega(z, z') = p.x' - p'.x
double symplectic_form(const PhasePoint& z, const PhasePoint& zp);

/// J = [[0, I], [-I, 0]]; Hamilton's equations read dz/dt = J grad H.
Mat standard_j(int n);

/// Gram matrix of Omega in (x, p) coordinates, so Omega(z, z') = z^T A z'.
/// Equals J^T.
Mat omega_matrix(int n);

/// Frobenius norm of S^T J S - J.
double symplecticity_defect(const Mat& S);

bool is_symplectic_matrix(const Mat& S, double tol = 1e-9);

/// Columns of [X; P] span an n-dimensional plane of R^2n.
struct LagrangianFrame {
    Mat X;
    Mat P;

    LagrangianFrame() = default;
    LagrangianFrame(Mat X_, Mat P_);

    int dim() const { return static_cast<int>(X.rows()); }
    Mat stacked() const;
    static LagrangianFrame from_stacked(const Mat& F);
};

bool is_lagrangian_frame(const LagrangianFrame& F, double tol = 1e-9);

/// Loewdin orthonormalization F (F^T F)^{-1/2}: same span, orthonormal
/// columns, and frames that are already orthonormal come back unchanged.
LagrangianFrame orthonormalize_frame(const LagrangianFrame& F);

/// Image s(l) of the plane under a linear map of R^2n.
LagrangianFrame transform_frame(const Mat& S, const LagrangianFrame& F);

/// Vertical plane R^n_p (X = 0, P = I).
LagrangianFrame vertical_frame(int n);
/// Horizontal plane R^n_x (X = I, P = 0).
LagrangianFrame horizontal_frame(int n);
/// n = 1 line l(theta) tangent to the unit circle at e^{i theta}.
LagrangianFrame circle_tangent_line(double theta);
/// Block-diagonal frame of independent n = 1 lines l(theta_j).
LagrangianFrame product_tangent_frame(const Vec& thetas);

/// Symmetric unitary matrix w representing a Lagrangian plane.
struct SouriauPoint {
    CMat w;

    int dim() const { return static_cast<int>(w.rows()); }
    cplx det() const { return w.determinant(); }
    bool is_valid(double tol = 1e-8) const;
};

/// w(l) = u u^T with u = P - iX built from an orthonormal frame of l.
SouriauPoint souriau_w(const LagrangianFrame& F);

/// Plane u(R^n_p) for a unitary u: P = Re u, X = -Im u.
LagrangianFrame frame_from_unitary(const CMat& u);

/// Inverse of souriau_w. Diagonalizes w by a real orthogonal matrix and takes
/// u = O D^{1/2}.
LagrangianFrame frame_from_souriau(const SouriauPoint& w);

/// Eigenvalues of w (w')^{-1}; they lie on the unit circle.
CVec relative_spectrum(const SouriauPoint& w, const SouriauPoint& wp);

/// No eigenvalue of w (w')^{-1} within tol of 1.
bool transversal(const SouriauPoint& w, const SouriauPoint& wp, double tol = kSpectralTol);

/// dim(l cap l'): multiplicity of the eigenvalue 1 of w (w')^{-1}.
int intersection_dim(const SouriauPoint& w, const SouriauPoint& wp, double tol = kSpectralTol);

/// sigma(l, l', l''): signature of Omega(z,z') + Omega(z',z'') + Omega(z'',z)
/// on l + l' + l''. Eigenvalues with |lambda| <= tol count as zero.
int signature(const LagrangianFrame& a, const LagrangianFrame& b, const LagrangianFrame& c,
              double tol = kSpectralTol);

/// exp(J A) with A symmetric, entries uniform in [-scale, scale].
Mat random_symplectic(int n, std::mt19937_64& rng, double scale = 1.0);

/// Symmetric matrix with entries uniform in [-scale, scale].
Mat random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0);

/// Haar-ish unitary from the QR factorization of a complex Gaussian matrix.
CMat random_unitary(int n, std::mt19937_64& rng);

} // namespace camel
