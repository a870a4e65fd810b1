#include "camel/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "camel/errors.hpp"

namespace camel {

namespace {

constexpr double kBlowUp = 1e12;

// Gauss-Legendre, 5 points on [0, 1].
constexpr double kGLNodes[5] = {0.5 - 0.5 * 0.9061798459386640, 0.5 - 0.5 * 0.5384693101056831, 0.5,
                                0.5 + 0.5 * 0.5384693101056831, 0.5 + 0.5 * 0.9061798459386640};
constexpr double kGLWeights[5] = {0.5 * 0.2369268850561891, 0.5 * 0.4786286704993665,
                                  0.5 * 0.5688888888888889, 0.5 * 0.4786286704993665,
                                  0.5 * 0.2369268850561891};

Vec default_mass(const Vec& mass, Eigen::Index n)
{
    if(mass.size() == 0)
        return Vec::Ones(n);
    if(mass.size() != n)
        throw std::invalid_argument("HamiltonianSpec: mass vector has wrong length");
    for(Eigen::Index j = 0; j < n; ++j)
        if(!(mass(j) > 0.0))
            throw std::invalid_argument("HamiltonianSpec: masses must be positive");
    return mass;
}

bool state_ok(const Vec& z) { return z.allFinite() && z.norm() <= kBlowUp; }

void check_state(const Vec& z, double t_last)
{
    if(!state_ok(z))
        throw DivergenceError("integrate: state diverged after t = " + std::to_string(t_last), t_last);
}

// d-th derivative of sum_k c_k E^k.
double poly_eval(const Vec& c, double E, int deriv)
{
    double s = 0.0;
    for(Eigen::Index k = c.size() - 1; k >= deriv; --k) {
        double f = 1.0;
        for(int d = 0; d < deriv; ++d)
            f *= static_cast<double>(k - d);
        s = s * E + f * c(k);
    }
    return s;
}

} // namespace

std::string to_string(HamiltonianKind k)
{
    switch(k) {
    case HamiltonianKind::quadratic: return "quadratic";
    case HamiltonianKind::harmonic: return "harmonic";
    case HamiltonianKind::free: return "free";
    case HamiltonianKind::quartic: return "quartic";
    case HamiltonianKind::magnetic: return "magnetic";
    case HamiltonianKind::reparameterized: return "reparameterized";
    }
    return "unknown";
}

HamiltonianSpec HamiltonianSpec::quadratic(Mat M, double c0)
{
    if(M.rows() != M.cols() || M.rows() % 2 != 0 || M.rows() == 0)
        throw std::invalid_argument("HamiltonianSpec: quadratic matrix must be 2n x 2n");
    if((M - M.transpose()).norm() > 1e-12 * std::max(1.0, M.norm()))
        throw std::invalid_argument("HamiltonianSpec: quadratic matrix must be symmetric");
    HamiltonianSpec h;
    h.kind_ = HamiltonianKind::quadratic;
    h.n_ = static_cast<int>(M.rows() / 2);
    h.M_ = 0.5 * (M + M.transpose());
    h.c0_ = c0;
    return h;
}

HamiltonianSpec HamiltonianSpec::harmonic(Vec omega, Vec mass)
{
    const Eigen::Index n = omega.size();
    if(n < 1)
        throw std::invalid_argument("HamiltonianSpec: harmonic needs at least one frequency");
    for(Eigen::Index j = 0; j < n; ++j)
        if(!(omega(j) > 0.0))
            throw std::invalid_argument("HamiltonianSpec: frequencies must be positive");
    HamiltonianSpec h;
    h.kind_ = HamiltonianKind::harmonic;
    h.n_ = static_cast<int>(n);
    h.omega_ = omega;
    h.mass_ = default_mass(mass, n);
    h.M_ = Mat::Zero(2 * n, 2 * n);
    for(Eigen::Index j = 0; j < n; ++j) {
        h.M_(j, j) = h.mass_(j) * omega(j) * omega(j);
        h.M_(n + j, n + j) = 1.0 / h.mass_(j);
    }
    return h;
}

HamiltonianSpec HamiltonianSpec::free_particle(int n, Vec mass)
{
    if(n < 1)
        throw std::invalid_argument("HamiltonianSpec: n must be positive");
    HamiltonianSpec h;
    h.kind_ = HamiltonianKind::free;
    h.n_ = n;
    h.mass_ = default_mass(mass, n);
    h.M_ = Mat::Zero(2 * n, 2 * n);
    for(int j = 0; j < n; ++j)
        h.M_(n + j, n + j) = 1.0 / h.mass_(j);
    return h;
}

HamiltonianSpec HamiltonianSpec::quartic(Vec omega, double lambda)
{
    if(omega.size() < 1)
        throw std::invalid_argument("HamiltonianSpec: quartic needs at least one frequency");
    if(!(lambda >= 0.0))
        throw std::invalid_argument("HamiltonianSpec: quartic coupling must be non-negative");
    HamiltonianSpec h;
    h.kind_ = HamiltonianKind::quartic;
    h.n_ = static_cast<int>(omega.size());
    h.omega_ = omega;
    h.lambda_ = lambda;
    return h;
}

HamiltonianSpec HamiltonianSpec::magnetic(std::vector<Polynomial> A, Polynomial U, Vec mass, double kappa)
{
    const int n = static_cast<int>(A.size());
    if(n < 1)
        throw std::invalid_argument("HamiltonianSpec: magnetic needs one potential component per axis");
    for(const auto& a : A)
        if(a.nvars() != n)
            throw std::invalid_argument("HamiltonianSpec: vector potential has wrong arity");
    if(U.nvars() == 0)
        U = Polynomial(n);
    if(U.nvars() != n)
        throw std::invalid_argument("HamiltonianSpec: scalar potential has wrong arity");
    HamiltonianSpec h;
    h.kind_ = HamiltonianKind::magnetic;
    h.n_ = n;
    h.A_ = std::move(A);
    h.U_ = std::move(U);
    h.mass_ = default_mass(mass, n);
    h.kappa_ = kappa;
    return h;
}

HamiltonianSpec HamiltonianSpec::reparameterized(const HamiltonianSpec& base, Vec coeffs)
{
    if(coeffs.size() < 2)
        throw std::invalid_argument("HamiltonianSpec: reparameterization needs degree >= 1");
    HamiltonianSpec h;
    h.kind_ = HamiltonianKind::reparameterized;
    h.n_ = base.n_;
    h.g_ = coeffs;
    h.base_ = std::make_shared<const HamiltonianSpec>(base);
    return h;
}

bool HamiltonianSpec::time_dependent() const
{
    switch(kind_) {
    case HamiltonianKind::magnetic: return kappa_ != 0.0;
    case HamiltonianKind::reparameterized: return base_->time_dependent();
    default: return false;
    }
}

bool HamiltonianSpec::is_quadratic() const
{
    switch(kind_) {
    case HamiltonianKind::quadratic:
    case HamiltonianKind::harmonic:
    case HamiltonianKind::free: return true;
    case HamiltonianKind::reparameterized: {
        bool affine = true;
        for(Eigen::Index k = 2; k < g_.size(); ++k)
            affine = affine && g_(k) == 0.0;
        return affine && base_->is_quadratic();
    }
    default: return false;
    }
}

Mat HamiltonianSpec::quadratic_matrix() const
{
    if(!is_quadratic())
        throw std::logic_error("quadratic_matrix: Hamiltonian is not quadratic");
    if(kind_ == HamiltonianKind::reparameterized)
        return g_(1) * base_->quadratic_matrix();
    return M_;
}

double HamiltonianSpec::quadratic_constant() const
{
    if(!is_quadratic())
        throw std::logic_error("quadratic_constant: Hamiltonian is not quadratic");
    if(kind_ == HamiltonianKind::reparameterized)
        return g_(0) + g_(1) * base_->quadratic_constant();
    return c0_;
}

double HamiltonianSpec::kinetic(const double* p) const
{
    double s = 0.0;
    for(int j = 0; j < n_; ++j)
        s += 0.5 * p[j] * p[j];
    return s;
}

double HamiltonianSpec::potential(const double* x) const
{
    double r2 = 0.0, q = 0.0;
    for(int j = 0; j < n_; ++j) {
        r2 += x[j] * x[j];
        q += 0.5 * omega_(j) * omega_(j) * x[j] * x[j];
    }
    return q + 0.25 * lambda_ * r2 * r2;
}

void HamiltonianSpec::grad_potential(const double* x, double* g) const
{
    double r2 = 0.0;
    for(int j = 0; j < n_; ++j)
        r2 += x[j] * x[j];
    for(int j = 0; j < n_; ++j)
        g[j] = omega_(j) * omega_(j) * x[j] + lambda_ * r2 * x[j];
}

Mat HamiltonianSpec::hess_potential(const Vec& x) const
{
    const double r2 = x.squaredNorm();
    Mat Hs = lambda_ * (r2 * Mat::Identity(n_, n_) + 2.0 * x * x.transpose());
    for(int j = 0; j < n_; ++j)
        Hs(j, j) += omega_(j) * omega_(j);
    return Hs;
}

double HamiltonianSpec::value(const Vec& z, double t) const
{
    if(z.size() != 2 * n_)
        throw std::invalid_argument("HamiltonianSpec: state has wrong length");
    switch(kind_) {
    case HamiltonianKind::quadratic:
    case HamiltonianKind::harmonic:
    case HamiltonianKind::free: return 0.5 * z.dot(M_ * z) + c0_;
    case HamiltonianKind::quartic: return kinetic(z.data() + n_) + potential(z.data());
    case HamiltonianKind::magnetic: {
        const double f = 1.0 + kappa_ * t;
        const Vec x = z.head(n_);
        double s = f * U_.value(x);
        for(int j = 0; j < n_; ++j) {
            const double pi = z(n_ + j) - f * A_[j].value(x);
            s += 0.5 * pi * pi / mass_(j);
        }
        return s;
    }
    case HamiltonianKind::reparameterized: return poly_eval(g_, base_->value(z, t), 0);
    }
    return 0.0;
}

Vec HamiltonianSpec::gradient(const Vec& z, double t) const
{
    if(z.size() != 2 * n_)
        throw std::invalid_argument("HamiltonianSpec: state has wrong length");
    const int n = n_;
    switch(kind_) {
    case HamiltonianKind::quadratic:
    case HamiltonianKind::harmonic:
    case HamiltonianKind::free: return M_ * z;
    case HamiltonianKind::quartic: {
        Vec g(2 * n);
        grad_potential(z.data(), g.data());
        g.tail(n) = z.tail(n);
        return g;
    }
    case HamiltonianKind::magnetic: {
        const double f = 1.0 + kappa_ * t;
        const Vec x = z.head(n);
        Vec g = Vec::Zero(2 * n);
        g.head(n) = f * U_.gradient(x);
        for(int j = 0; j < n; ++j) {
            const double v = (z(n + j) - f * A_[j].value(x)) / mass_(j);
            g(n + j) = v;
            g.head(n) -= v * f * A_[j].gradient(x);
        }
        return g;
    }
    case HamiltonianKind::reparameterized:
        return poly_eval(g_, base_->value(z, t), 1) * base_->gradient(z, t);
    }
    return Vec();
}

Mat HamiltonianSpec::hessian(const Vec& z, double t) const
{
    if(z.size() != 2 * n_)
        throw std::invalid_argument("HamiltonianSpec: state has wrong length");
    const int n = n_;
    switch(kind_) {
    case HamiltonianKind::quadratic:
    case HamiltonianKind::harmonic:
    case HamiltonianKind::free: return M_;
    case HamiltonianKind::quartic: {
        Mat Hs = Mat::Zero(2 * n, 2 * n);
        Hs.topLeftCorner(n, n) = hess_potential(z.head(n));
        Hs.bottomRightCorner(n, n).setIdentity();
        return Hs;
    }
    case HamiltonianKind::magnetic: {
        const double f = 1.0 + kappa_ * t;
        const Vec x = z.head(n);
        Mat Hs = Mat::Zero(2 * n, 2 * n);
        Hs.topLeftCorner(n, n) = f * U_.hessian(x);
        for(int j = 0; j < n; ++j) {
            const double v = (z(n + j) - f * A_[j].value(x)) / mass_(j);
            const Vec da = f * A_[j].gradient(x);
            Hs.topLeftCorner(n, n) += da * da.transpose() / mass_(j) - v * f * A_[j].hessian(x);
            Hs(n + j, n + j) = 1.0 / mass_(j);
            Hs.block(n + j, 0, 1, n) = -da.transpose() / mass_(j);
            Hs.block(0, n + j, n, 1) = -da / mass_(j);
        }
        return Hs;
    }
    case HamiltonianKind::reparameterized: {
        const double E = base_->value(z, t);
        const Vec g = base_->gradient(z, t);
        return poly_eval(g_, E, 2) * g * g.transpose() + poly_eval(g_, E, 1) * base_->hessian(z, t);
    }
    }
    return Mat();
}

namespace {

Trajectory start_trajectory(const PhasePoint& z0, double t0, int steps)
{
    Trajectory tr;
    tr.times.reserve(steps + 1);
    tr.points.reserve(steps + 1);
    tr.jacobians.reserve(steps + 1);
    tr.action.reserve(steps + 1);
    tr.times.push_back(t0);
    tr.points.push_back(z0);
    tr.jacobians.push_back(Mat::Identity(2 * z0.dim(), 2 * z0.dim()));
    tr.action.push_back(0.0);
    return tr;
}

void integrate_linear(const HamiltonianSpec& H, Trajectory& tr, double t0, double h, int steps)
{
    const int n = H.dim();
    const Mat M = H.quadratic_matrix();
    const double c0 = H.quadratic_constant();
    const Mat JM = standard_j(n) * M;
    const Mat E = (h * JM).exp();

    const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(h) / 0.05)));
    const double hs = h / sub;
    const Mat Esub = (hs * JM).exp();
    Mat Enode[5];
    for(int q = 0; q < 5; ++q)
        Enode[q] = (kGLNodes[q] * hs * JM).exp();
    auto lagrangian = [&](const Vec& z) {
        const Vec g = M * z;
        return z.tail(n).dot(g.tail(n)) - 0.5 * z.dot(g) - c0;
    };

    Vec z = tr.points.back().stacked();
    Mat S = tr.jacobians.back();
    double A = tr.action.back();
    for(int k = 1; k <= steps; ++k) {
        Vec zs = z;
        for(int s = 0; s < sub; ++s) {
            for(int q = 0; q < 5; ++q)
                A += hs * kGLWeights[q] * lagrangian(Enode[q] * zs);
            zs = Esub * zs;
        }
        const Vec zn = E * z;
        check_state(zn, tr.times.back());
        z = zn;
        S = E * S;
        tr.times.push_back(t0 + h * k);
        tr.points.push_back(PhasePoint::from_stacked(z));
        tr.jacobians.push_back(S);
        tr.action.push_back(A);
    }
}

void integrate_yoshida(const HamiltonianSpec& H, Trajectory& tr, double t0, double h, int steps)
{
    const int n = H.dim();
    const double cbrt2 = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - cbrt2);
    const double w0 = -cbrt2 * w1;
    const double ws[3] = {w1, w0, w1};

    Vec z = tr.points.back().stacked();
    Mat S = tr.jacobians.back();
    double A = tr.action.back();
    Vec g(n);
    auto drift = [&](double c) {
        A += c * H.kinetic(z.data() + n);
        z.head(n) += c * z.tail(n);
        S.topRows(n) += c * S.bottomRows(n);
    };
    auto kick = [&](double c) {
        H.grad_potential(z.data(), g.data());
        A -= c * H.potential(z.data());
        S.bottomRows(n) -= c * H.hess_potential(z.head(n)) * S.topRows(n);
        z.tail(n) -= c * g;
    };
    for(int k = 1; k <= steps; ++k) {
        for(double w : ws) {
            const double c = w * h;
            drift(0.5 * c);
            kick(c);
            drift(0.5 * c);
        }
        check_state(z, tr.times.back());
        tr.times.push_back(t0 + h * k);
        tr.points.push_back(PhasePoint::from_stacked(z));
        tr.jacobians.push_back(S);
        tr.action.push_back(A);
    }
}

void integrate_midpoint(const HamiltonianSpec& H, Trajectory& tr, double t0, double h, int steps)
{
    const int n = H.dim();
    const Mat J = standard_j(n);
    const Mat I = Mat::Identity(2 * n, 2 * n);

    Vec z = tr.points.back().stacked();
    Mat S = tr.jacobians.back();
    double A = tr.action.back();
    for(int k = 1; k <= steps; ++k) {
        const double t = t0 + h * (k - 1);
        const double tm = t + 0.5 * h;
        Vec z1 = z + h * J * H.gradient(z, t);
        bool converged = false;
        for(int it = 0; it < 60; ++it) {
            const Vec m = 0.5 * (z + z1);
            const Vec F = z1 - z - h * J * H.gradient(m, tm);
            const Mat dF = I - 0.5 * h * J * H.hessian(m, tm);
            const Vec dz = dF.partialPivLu().solve(F);
            z1 -= dz;
            if(!state_ok(z1))
                break;
            if(dz.norm() <= 1e-15 * (1.0 + z1.norm())) {
                converged = true;
                break;
            }
        }
        if(!converged && state_ok(z1)) {
            const Vec m = 0.5 * (z + z1);
            const Vec F = z1 - z - h * J * H.gradient(m, tm);
            converged = F.norm() <= 1e-12 * (1.0 + z1.norm());
        }
        check_state(z1, t);
        if(!converged)
            throw DivergenceError("integrate: implicit midpoint did not converge after t = " +
                                      std::to_string(t),
                                  t);
        const Vec m = 0.5 * (z + z1);
        const Mat Ahalf = 0.5 * h * J * H.hessian(m, tm);
        S = (I - Ahalf).partialPivLu().solve((I + Ahalf) * S);
        A += m.tail(n).dot(z1.head(n) - z.head(n)) - h * H.value(m, tm);
        z = z1;
        tr.times.push_back(t0 + h * k);
        tr.points.push_back(PhasePoint::from_stacked(z));
        tr.jacobians.push_back(S);
        tr.action.push_back(A);
    }
}

} // namespace

Trajectory integrate(const HamiltonianSpec& H, const PhasePoint& z0, double t0, double t1, int steps,
                     Integrator method)
{
    if(z0.dim() != H.dim())
        throw std::invalid_argument("integrate: initial point has wrong dimension");
    if(steps < 1)
        throw std::invalid_argument("integrate: steps must be positive");
    if(!std::isfinite(t0) || !std::isfinite(t1))
        throw std::invalid_argument("integrate: times must be finite");
    check_state(z0.stacked(), t0);
    if(t1 == t0)
        return start_trajectory(z0, t0, 0);

    if(method == Integrator::automatic)
        method = H.is_quadratic()   ? Integrator::exact_linear
                 : H.is_separable() ? Integrator::yoshida4
                                    : Integrator::implicit_midpoint;
    if(method == Integrator::exact_linear && !H.is_quadratic())
        throw std::invalid_argument("integrate: exact linear flow needs a quadratic Hamiltonian");
    if(method == Integrator::yoshida4 && !H.is_separable())
        throw std::invalid_argument("integrate: splitting needs a separable Hamiltonian");

    Trajectory tr = start_trajectory(z0, t0, steps);
    const double h = (t1 - t0) / steps;
    switch(method) {
    case Integrator::exact_linear: integrate_linear(H, tr, t0, h, steps); break;
    case Integrator::yoshida4: integrate_yoshida(H, tr, t0, h, steps); break;
    default: integrate_midpoint(H, tr, t0, h, steps); break;
    }
    tr.times.back() = t1;
    return tr;
}

std::function<Mat(double)> jacobian_curve(const HamiltonianSpec& H, const PhasePoint& z0, double t0,
                                          double max_step)
{
    if(H.is_quadratic()) {
        const Mat JM = standard_j(H.dim()) * H.quadratic_matrix();
        return [JM, t0](double t) -> Mat { return ((t - t0) * JM).exp(); };
    }
    // The last evaluated state is kept so monotone sweeps integrate each
    // stretch once.
    struct Cache {
        double t;
        PhasePoint z;
        Mat S;
    };
    auto cache = std::make_shared<Cache>(Cache{t0, z0, Mat::Identity(2 * H.dim(), 2 * H.dim())});
    return [H, z0, t0, max_step, cache](double t) -> Mat {
        if(t == t0)
            return Mat::Identity(2 * H.dim(), 2 * H.dim());
        Cache from{t0, z0, Mat::Identity(2 * H.dim(), 2 * H.dim())};
        if((cache->t - t0) * (t - t0) > 0.0 && std::abs(t - cache->t) < std::abs(t - t0))
            from = *cache;
        if(t == from.t)
            return from.S;
        const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t - from.t) / max_step)));
        const Trajectory tr = integrate(H, from.z, from.t, t, steps);
        *cache = {t, tr.end(), tr.jacobians.back() * from.S};
        return cache->S;
    };
}

double chapman_kolmogorov_residual(const HamiltonianSpec& H, const PhasePoint& z0, double t, double tp,
                                   double tpp, int steps)
{
    const double total = std::abs(t - tpp);
    auto leg_steps = [&](double a, double b) {
        if(total == 0.0)
            return 1;
        return std::max(1, static_cast<int>(std::lround(steps * std::abs(b - a) / total)));
    };
    const Trajectory l1 = integrate(H, z0, tpp, tp, leg_steps(tpp, tp));
    const Trajectory l2 = integrate(H, l1.end(), tp, t, leg_steps(tp, t));
    const Trajectory direct = integrate(H, z0, tpp, t, std::max(1, steps));
    const double state = (l2.end().stacked() - direct.end().stacked()).norm();
    const double jac = (l2.jacobians.back() * l1.jacobians.back() - direct.jacobians.back()).norm();
    return std::max(state, jac);
}

ActionResult action_integral(const HamiltonianSpec& H, const Vec& xp, const Vec& pp, double tp, double t,
                             int steps)
{
    const Trajectory tr = integrate(H, PhasePoint(xp, pp), tp, t, steps);
    return {tr.action.back(), tr.end(), tr.jacobians.back()};
}

Vec solve_boundary_momentum(const HamiltonianSpec& H, const Vec& xp, const Vec& x, double tp, double t,
                            const Vec& p_guess, int steps, double tol, int max_iter)
{
    const int n = H.dim();
    if(xp.size() != n || x.size() != n || p_guess.size() != n)
        throw std::invalid_argument("solve_boundary_momentum: dimension mismatch");
    if(t == tp)
        throw CausticError("solve_boundary_momentum: t = t' has no boundary solution");
    Vec p = p_guess;
    auto residual = [&](const Vec& q, Mat* B) {
        const Trajectory tr = integrate(H, PhasePoint(xp, q), tp, t, steps);
        if(B)
            *B = tr.jacobians.back().topRightCorner(n, n);
        return Vec(tr.end().x - x);
    };
    Mat B;
    Vec r = residual(p, &B);
    for(int it = 0; it < max_iter; ++it) {
        if(r.norm() <= tol * (1.0 + x.norm()))
            return p;
        Eigen::FullPivLU<Mat> lu(B);
        if(lu.rank() < n || std::abs(lu.determinant()) <= 1e-14 * std::max(1.0, B.norm()))
            throw CausticError("solve_boundary_momentum: dx/dp' is singular");
        const Vec dp = -lu.solve(r);
        double lam = 1.0;
        Vec pn, rn;
        Mat Bn;
        for(int ls = 0; ls < 30; ++ls) {
            pn = p + lam * dp;
            try {
                rn = residual(pn, &Bn);
                if(rn.norm() < r.norm() || rn.norm() <= tol * (1.0 + x.norm()))
                    break;
            } catch(const DivergenceError&) {
            }
            lam *= 0.5;
        }
        if(rn.size() == 0)
            throw NumericalError("solve_boundary_momentum: line search failed");
        p = pn;
        r = rn;
        B = Bn;
    }
    if(r.norm() <= 1e3 * tol * (1.0 + x.norm()))
        return p;
    throw NumericalError("solve_boundary_momentum: Newton did not converge");
}

ActionGrid sample_action_grid(const HamiltonianSpec& H, double xprime, double tprime, const Vec& xs,
                              const Vec& ts, int steps, Exec exec)
{
    if(H.dim() != 1)
        throw std::invalid_argument("sample_action_grid: only n = 1 is supported");
    ActionGrid g;
    g.xs = xs;
    g.ts = ts;
    g.xprime = xprime;
    g.tprime = tprime;
    g.S.resize(ts.size(), xs.size());
    const Vec xpv = Vec::Constant(1, xprime);

    auto row = [&](Eigen::Index i) {
        const double t = ts(i);
        Vec p = Vec::Constant(1, (xs(0) - xprime) / (t - tprime));
        for(Eigen::Index j = 0; j < xs.size(); ++j) {
            const Vec x = Vec::Constant(1, xs(j));
            p = solve_boundary_momentum(H, xpv, x, tprime, t, p, steps);
            g.S(i, j) = action_integral(H, xpv, p, tprime, t, steps).action;
        }
    };
    for_each_index(static_cast<long>(ts.size()), exec, row);
    return g;
}

HJResidual hamilton_jacobi_residual(const HamiltonianSpec& H, const ActionGrid& grid, int order)
{
    if(H.dim() != 1)
        throw std::invalid_argument("hamilton_jacobi_residual: only n = 1 is supported");
    static const double c2[] = {0.5};
    static const double c4[] = {2.0 / 3.0, -1.0 / 12.0};
    static const double c6[] = {0.75, -0.15, 1.0 / 60.0};
    const double* c = nullptr;
    int hw = 0;
    switch(order) {
    case 2: c = c2; hw = 1; break;
    case 4: c = c4; hw = 2; break;
    case 6: c = c6; hw = 3; break;
    default: throw std::invalid_argument("hamilton_jacobi_residual: order must be 2, 4 or 6");
    }
    const Eigen::Index nt = grid.ts.size(), nx = grid.xs.size();
    if(nt < 2 * hw + 1 || nx < 2 * hw + 1)
        throw std::invalid_argument("hamilton_jacobi_residual: grid too coarse for the stencil");
    if(grid.S.rows() != nt || grid.S.cols() != nx)
        throw std::invalid_argument("hamilton_jacobi_residual: S has wrong shape");
    const double hx = (grid.xs(nx - 1) - grid.xs(0)) / (nx - 1);
    const double ht = (grid.ts(nt - 1) - grid.ts(0)) / (nt - 1);
    for(Eigen::Index j = 1; j < nx; ++j)
        if(std::abs(grid.xs(j) - grid.xs(j - 1) - hx) > 1e-9 * std::abs(hx))
            throw std::invalid_argument("hamilton_jacobi_residual: x grid is not uniform");
    for(Eigen::Index i = 1; i < nt; ++i)
        if(std::abs(grid.ts(i) - grid.ts(i - 1) - ht) > 1e-9 * std::abs(ht))
            throw std::invalid_argument("hamilton_jacobi_residual: t grid is not uniform");

    HJResidual out;
    out.hx = hx;
    out.ht = ht;
    out.order = order;
    Vec z(2);
    for(Eigen::Index i = hw; i < nt - hw; ++i) {
        for(Eigen::Index j = hw; j < nx - hw; ++j) {
            double dSdt = 0.0, dSdx = 0.0;
            for(int k = 1; k <= hw; ++k) {
                dSdt += c[k - 1] * (grid.S(i + k, j) - grid.S(i - k, j));
                dSdx += c[k - 1] * (grid.S(i, j + k) - grid.S(i, j - k));
            }
            dSdt /= ht;
            dSdx /= hx;
            z << grid.xs(j), dSdx;
            out.residual = std::max(out.residual, std::abs(dSdt + H.value(z, grid.ts(i))));
        }
    }
    return out;
}

GeneratingFunctionReport generating_function_check(const HamiltonianSpec& H, double tp, double t,
                                                   int samples, std::uint64_t seed, int steps,
                                                   double fd_step, double tol, double caustic_tol)
{
    if(samples < 1)
        throw std::invalid_argument("generating_function_check: samples must be positive");
    if(t == tp)
        throw std::invalid_argument("generating_function_check: need t != t'");
    const int n = H.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    GeneratingFunctionReport rep;
    rep.samples = samples;
    rep.min_abs_det = std::numeric_limits<double>::infinity();

    for(int s = 0; s < samples; ++s) {
        Vec xp(n), pp(n);
        for(int j = 0; j < n; ++j) {
            xp(j) = U(rng);
            pp(j) = U(rng);
        }
        const ActionResult ar = action_integral(H, xp, pp, tp, t, steps);
        const double d = ar.jacobian.topRightCorner(n, n).determinant();
        rep.min_abs_det = std::min(rep.min_abs_det, std::abs(d));
        if(std::abs(d) <= caustic_tol) {
            rep.caustic = true;
            continue;
        }
        const Vec x = ar.end.x, p = ar.end.p;
        auto S = [&](const Vec& xe, const Vec& xpe) {
            const Vec q = solve_boundary_momentum(H, xpe, xe, tp, t, pp, steps);
            return action_integral(H, xpe, q, tp, t, steps).action;
        };
        for(int i = 0; i < n; ++i) {
            Vec e = Vec::Zero(n);
            e(i) = fd_step;
            const double dx = (S(x + e, xp) - S(x - e, xp)) / (2.0 * fd_step);
            const double dxp = (S(x, xp + e) - S(x, xp - e)) / (2.0 * fd_step);
            rep.max_momentum_error = std::max(rep.max_momentum_error, std::abs(dx - p(i)));
            rep.max_momentum_error = std::max(rep.max_momentum_error, std::abs(dxp + pp(i)));
        }
    }
    rep.passed = !rep.caustic && rep.max_momentum_error <= tol;
    return rep;
}

double phase_transport(double phi0, const HamiltonianSpec& H, const PhasePoint& z, double tp, double t,
                       int steps)
{
    return phi0 + integrate(H, z, tp, t, steps).action.back();
}

double quadratic_action_shortcut(const PhasePoint& zp, const PhasePoint& z)
{
    if(zp.dim() != z.dim())
        throw std::invalid_argument("quadratic_action_shortcut: dimension mismatch");
    return 0.5 * (z.p.dot(z.x) - zp.p.dot(zp.x));
}

OrbitComparison shared_level_set_orbit_check(const HamiltonianSpec& H, const Vec& g_coeffs,
                                             const PhasePoint& z0, double T, int steps)
{
    if(H.time_dependent())
        throw std::invalid_argument("shared_level_set_orbit_check: H must be autonomous");
    const HamiltonianSpec K = HamiltonianSpec::reparameterized(H, g_coeffs);
    OrbitComparison out;
    out.rate = poly_eval(g_coeffs, H.value(z0), 1);
    if(!(out.rate > 0.0))
        throw std::invalid_argument("shared_level_set_orbit_check: g' must be positive on the orbit");
    const Trajectory tk = integrate(K, z0, 0.0, T, steps);
    const Trajectory th = integrate(H, z0, 0.0, out.rate * T, steps);

    for(std::size_t k = 0; k < tk.size(); ++k)
        out.matched_distance = std::max(out.matched_distance,
                                        (tk.points[k].stacked() - th.points[k].stacked()).norm());

    auto to_polyline = [](const Vec& q, const Trajectory& tr) {
        double best = std::numeric_limits<double>::infinity();
        for(std::size_t k = 0; k + 1 < tr.size(); ++k) {
            const Vec a = tr.points[k].stacked(), b = tr.points[k + 1].stacked();
            const Vec ab = b - a;
            const double L2 = ab.squaredNorm();
            const double s = L2 > 0.0 ? std::clamp((q - a).dot(ab) / L2, 0.0, 1.0) : 0.0;
            best = std::min(best, (a + s * ab - q).norm());
        }
        if(tr.size() == 1)
            best = (tr.points[0].stacked() - q).norm();
        return best;
    };
    for(const auto& q : tk.points)
        out.hausdorff_distance = std::max(out.hausdorff_distance, to_polyline(q.stacked(), th));
    for(const auto& q : th.points)
        out.hausdorff_distance = std::max(out.hausdorff_distance, to_polyline(q.stacked(), tk));
    return out;
}

} // namespace camel
