#pragma once

#include <random>

#include <Eigen/Dense>

#include "camel/leray.hpp"
#include "camel/symplectic.hpp"

namespace testing {

using namespace camel;

inline LagrangianFrame random_frame(int n, std::mt19937_64& rng) { return frame_from_unitary(random_unitary(n, rng)); }

inline LagrangianLift random_lift(int n, std::mt19937_64& rng, double spread = 8.0)
{
    std::uniform_real_distribution<double> u(-spread, spread);
    return lift_near(souriau_w(random_frame(n, rng)), u(rng));
}

/// Frame sharing k directions with b: the first k columns of b's orthonormal
/// frame and n - k random directions of a symplectic image.
inline LagrangianFrame frame_meeting(const LagrangianFrame& b, int k, std::mt19937_64& rng)
{
    const int n = b.dim();
    const LagrangianFrame ob = orthonormalize_frame(b);
    // Rotate the plane about the span of its first k columns.
    CMat u(n, n);
    for(int c = 0; c < n; ++c)
        for(int r = 0; r < n; ++r)
            u(r, c) = cplx(ob.P(r, c), -ob.X(r, c));
    std::uniform_real_distribution<double> ang(0.3, 2.8);
    CMat d = CMat::Identity(n, n);
    for(int j = k; j < n; ++j)
        d(j, j) = std::exp(cplx(0.0, ang(rng)));
    return frame_from_unitary(u * d);
}

/// l(theta) in n = 1 with alpha = 2 theta.
inline LagrangianLift line_lift(double theta)
{
    return make_lift(circle_tangent_line(theta), 2.0 * theta);
}

/// rank [F F'] by full-pivot LU.
inline int stacked_rank(const LagrangianFrame& a, const LagrangianFrame& b)
{
    const int n = a.dim();
    Mat M(2 * n, 2 * n);
    M << a.stacked(), b.stacked();
    Eigen::FullPivLU<Mat> lu(M);
    lu.setThreshold(1e-9);
    return static_cast<int>(lu.rank());
}

/// Signature of Omega(z,z') + Omega(z',z'') + Omega(z'',z) in frame
/// coordinates, assembled block by block.
inline int brute_signature(const LagrangianFrame& a, const LagrangianFrame& b, const LagrangianFrame& c,
                           double tol = 1e-9)
{
    const int n = a.dim();
    Mat A = Mat::Zero(2 * n, 2 * n);
    A.topRightCorner(n, n) = -Mat::Identity(n, n);
    A.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    const Mat Fa = orthonormalize_frame(a).stacked(), Fb = orthonormalize_frame(b).stacked(),
              Fc = orthonormalize_frame(c).stacked();
    Mat G = Mat::Zero(3 * n, 3 * n);
    G.block(0, n, n, n) = 0.5 * Fa.transpose() * A * Fb;
    G.block(n, 2 * n, n, n) = 0.5 * Fb.transpose() * A * Fc;
    G.block(2 * n, 0, n, n) = 0.5 * Fc.transpose() * A * Fa;
    const Mat S = G + G.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    int s = 0;
    for(Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        s += es.eigenvalues()(i) > tol ? 1 : es.eigenvalues()(i) < -tol ? -1 : 0;
    return s;
}

} // namespace testing
