#include "camel/symplectic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace camel {

namespace {

void require_same_dim(int a, int b, const char* what)
{
    if(a != b)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
}

} // namespace

PhasePoint::PhasePoint(Vec x_, Vec p_) : x(std::move(x_)), p(std::move(p_))
{
    if(x.size() != p.size())
        throw std::invalid_argument("PhasePoint: x and p must have the same length");
}

Vec PhasePoint::stacked() const
{
    Vec z(2 * x.size());
    z << x, p;
    return z;
}

PhasePoint PhasePoint::from_stacked(const Vec& z)
{
    if(z.size() % 2 != 0)
        throw std::invalid_argument("PhasePoint: stacked vector has odd length");
    const Eigen::Index n = z.size() / 2;
    return {z.head(n), z.tail(n)};
}

double symplectic_form(const PhasePoint& z, const PhasePoint& zp)
{
    require_same_dim(z.dim(), zp.dim(), "symplectic_form");
    return z.p.dot(zp.x) - zp.p.dot(z.x);
}

Mat standard_j(int n)
{
    Mat J = Mat::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n).setIdentity();
    J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return J;
}

Mat omega_matrix(int n) { return standard_j(n).transpose(); }

double symplecticity_defect(const Mat& S)
{
    if(S.rows() != S.cols() || S.rows() % 2 != 0)
        throw std::invalid_argument("symplectic matrix must be square with even dimension");
    const Mat J = standard_j(static_cast<int>(S.rows() / 2));
    return (S.transpose() * J * S - J).norm();
}

bool is_symplectic_matrix(const Mat& S, double tol) { return symplecticity_defect(S) <= tol; }

LagrangianFrame::LagrangianFrame(Mat X_, Mat P_) : X(std::move(X_)), P(std::move(P_))
{
    if(X.rows() != X.cols() || P.rows() != P.cols() || X.rows() != P.rows())
        throw std::invalid_argument("LagrangianFrame: X and P must be n x n");
}

Mat LagrangianFrame::stacked() const
{
    Mat F(2 * X.rows(), X.cols());
    F << X, P;
    return F;
}

LagrangianFrame LagrangianFrame::from_stacked(const Mat& F)
{
    if(F.rows() != 2 * F.cols())
        throw std::invalid_argument("LagrangianFrame: stacked frame must be 2n x n");
    const Eigen::Index n = F.cols();
    return {F.topRows(n), F.bottomRows(n)};
}

bool is_lagrangian_frame(const LagrangianFrame& F, double tol)
{
    const Mat S = F.stacked();
    Eigen::JacobiSVD<Mat> svd(S);
    if(svd.singularValues().minCoeff() <= tol)
        return false;
    return (F.X.transpose() * F.P - F.P.transpose() * F.X).norm() <= tol;
}

LagrangianFrame orthonormalize_frame(const LagrangianFrame& F)
{
    const Mat S = F.stacked();
    Eigen::SelfAdjointEigenSolver<Mat> es(S.transpose() * S);
    const Vec& ev = es.eigenvalues();
    if(ev.minCoeff() <= 1e-24 * std::max(1.0, ev.maxCoeff()))
        throw std::invalid_argument("orthonormalize_frame: rank-deficient frame");
    const Mat inv_sqrt = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                         es.eigenvectors().transpose();
    return LagrangianFrame::from_stacked(S * inv_sqrt);
}

LagrangianFrame transform_frame(const Mat& S, const LagrangianFrame& F)
{
    require_same_dim(static_cast<int>(S.rows()), 2 * F.dim(), "transform_frame");
    return LagrangianFrame::from_stacked(S * F.stacked());
}

LagrangianFrame vertical_frame(int n) { return {Mat::Zero(n, n), Mat::Identity(n, n)}; }

LagrangianFrame horizontal_frame(int n) { return {Mat::Identity(n, n), Mat::Zero(n, n)}; }

LagrangianFrame circle_tangent_line(double theta)
{
    Mat X(1, 1), P(1, 1);
    X(0, 0) = -std::sin(theta);
    P(0, 0) = std::cos(theta);
    return {X, P};
}

LagrangianFrame product_tangent_frame(const Vec& thetas)
{
    const Eigen::Index n = thetas.size();
    Mat X = Mat::Zero(n, n), P = Mat::Zero(n, n);
    for(Eigen::Index j = 0; j < n; ++j) {
        X(j, j) = -std::sin(thetas(j));
        P(j, j) = std::cos(thetas(j));
    }
    return {X, P};
}

bool SouriauPoint::is_valid(double tol) const
{
    const Eigen::Index n = w.rows();
    if(w.cols() != n)
        return false;
    return (w - w.transpose()).norm() <= tol &&
           (w * w.adjoint() - CMat::Identity(n, n)).norm() <= tol;
}

SouriauPoint souriau_w(const LagrangianFrame& F)
{
    if(!is_lagrangian_frame(F, 1e-8 * std::max(1.0, F.stacked().norm())))
        throw std::invalid_argument("souriau_w: not a Lagrangian frame");
    const LagrangianFrame Q = orthonormalize_frame(F);
    const CMat u = Q.P.cast<cplx>() - cplx(0.0, 1.0) * Q.X.cast<cplx>();
    return {u * u.transpose()};
}

LagrangianFrame frame_from_unitary(const CMat& u) { return {-u.imag(), u.real()}; }

LagrangianFrame frame_from_souriau(const SouriauPoint& sp)
{
    const CMat& w = sp.w;
    const Eigen::Index n = w.rows();
    // Re w and Im w are commuting real symmetric matrices; a generic real
    // combination of them has the common orthogonal eigenbasis.
    constexpr double mix = 0.7548776662466927;
    const Mat A = w.real() + mix * w.imag();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
    const Mat& O = es.eigenvectors();
    const CMat D = O.transpose().cast<cplx>() * w * O.cast<cplx>();
    CMat u = O.cast<cplx>();
    for(Eigen::Index j = 0; j < n; ++j)
        u.col(j) *= std::sqrt(D(j, j) / std::abs(D(j, j)));
    return frame_from_unitary(u);
}

CVec relative_spectrum(const SouriauPoint& w, const SouriauPoint& wp)
{
    require_same_dim(w.dim(), wp.dim(), "relative_spectrum");
    Eigen::ComplexEigenSolver<CMat> es(w.w * wp.w.adjoint(), false);
    return es.eigenvalues();
}

int intersection_dim(const SouriauPoint& w, const SouriauPoint& wp, double tol)
{
    const CVec ev = relative_spectrum(w, wp);
    int k = 0;
    for(Eigen::Index j = 0; j < ev.size(); ++j)
        if(std::abs(ev(j) - 1.0) <= tol)
            ++k;
    return k;
}

bool transversal(const SouriauPoint& w, const SouriauPoint& wp, double tol)
{
    return intersection_dim(w, wp, tol) == 0;
}

int signature(const LagrangianFrame& a, const LagrangianFrame& b, const LagrangianFrame& c,
              double tol)
{
    require_same_dim(a.dim(), b.dim(), "signature");
    require_same_dim(a.dim(), c.dim(), "signature");
    const int n = a.dim();
    const Mat Fa = orthonormalize_frame(a).stacked();
    const Mat Fb = orthonormalize_frame(b).stacked();
    const Mat Fc = orthonormalize_frame(c).stacked();
    const Mat A = omega_matrix(n);

    // Q(z,z',z'') = Omega(z,z') + Omega(z',z'') + Omega(z'',z) in frame coordinates.
    const Mat ab = 0.5 * Fa.transpose() * A * Fb;
    const Mat bc = 0.5 * Fb.transpose() * A * Fc;
    const Mat ca = 0.5 * Fc.transpose() * A * Fa;
    Mat G = Mat::Zero(3 * n, 3 * n);
    G.block(0, n, n, n) = ab;
    G.block(n, 0, n, n) = ab.transpose();
    G.block(n, 2 * n, n, n) = bc;
    G.block(2 * n, n, n, n) = bc.transpose();
    G.block(2 * n, 0, n, n) = ca;
    G.block(0, 2 * n, n, n) = ca.transpose();

    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    int sig = 0;
    for(Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        const double ev = es.eigenvalues()(j);
        if(ev > tol)
            ++sig;
        else if(ev < -tol)
            --sig;
    }
    return sig;
}

Mat random_symmetric(int n, std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> U(-scale, scale);
    Mat A(n, n);
    for(int i = 0; i < n; ++i)
        for(int j = i; j < n; ++j)
            A(i, j) = A(j, i) = U(rng);
    return A;
}

Mat random_symplectic(int n, std::mt19937_64& rng, double scale)
{
    const Mat A = random_symmetric(2 * n, rng, scale);
    const Mat H = standard_j(n) * A;
    return H.exp();
}

CMat random_unitary(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0.0, 1.0);
    CMat Z(n, n);
    for(int i = 0; i < n; ++i)
        for(int j = 0; j < n; ++j)
            Z(i, j) = cplx(N(rng), N(rng));
    Eigen::HouseholderQR<CMat> qr(Z);
    CMat Q = qr.householderQ() * CMat::Identity(n, n);
    const CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for(int j = 0; j < n; ++j) {
        const cplx d = R(j, j);
        if(std::abs(d) > 0)
            Q.col(j) *= d / std::abs(d);
    }
    return Q;
}

} // namespace camel
