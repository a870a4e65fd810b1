#include "camel/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <omp.h>

#include "camel/errors.hpp"
#include "camel/leray.hpp"

namespace camel {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(const Vec& v, const char* what)
{
    for(Eigen::Index j = 0; j < v.size(); ++j)
        if(!(v(j) > 0.0) || !std::isfinite(v(j)))
            throw std::invalid_argument(std::string(what) + ": radii must be positive and finite");
}

// Polynomial laid out for the sampling loop: exponents contiguous, no
// allocation during evaluation.
struct FlatPoly {
    int n = 0;
    int maxdeg = 0;
    std::vector<double> coeff;
    std::vector<int> exps;

    explicit FlatPoly(const Polynomial& p) : n(p.nvars()), maxdeg(p.degree())
    {
        for(const auto& t : p.terms()) {
            coeff.push_back(t.coeff);
            exps.insert(exps.end(), t.exponents.begin(), t.exponents.end());
        }
    }

    // pw must hold n * (maxdeg + 1) doubles.
    void gradient(const double* x, double* g, double* pw) const
    {
        const int stride = maxdeg + 1;
        for(int j = 0; j < n; ++j) {
            pw[j * stride] = 1.0;
            for(int k = 1; k <= maxdeg; ++k)
                pw[j * stride + k] = pw[j * stride + k - 1] * x[j];
        }
        for(int j = 0; j < n; ++j)
            g[j] = 0.0;
        const std::size_t nt = coeff.size();
        for(std::size_t t = 0; t < nt; ++t) {
            const int* e = &exps[t * n];
            for(int i = 0; i < n; ++i) {
                if(e[i] == 0)
                    continue;
                double m = coeff[t] * e[i];
                for(int j = 0; j < n; ++j)
                    m *= pw[j * stride + e[j] - (j == i ? 1 : 0)];
                g[i] += m;
            }
        }
    }
};

struct FlatStage {
    int kind = 0; // 0 linear, 1 x-shear, 2 p-shear
    std::vector<double> S; // row-major 2n x 2n
    FlatPoly poly{Polynomial()};
};

struct FlatMap {
    int n = 1;
    int maxdeg = 0;
    std::vector<FlatStage> stages;

    explicit FlatMap(const SymplectomorphismSpec& f) : n(f.n)
    {
        for(const auto& st : f.stages) {
            FlatStage fs;
            if(const auto* L = std::get_if<LinearStage>(&st)) {
                fs.kind = 0;
                fs.S.resize(4 * n * n);
                for(int r = 0; r < 2 * n; ++r)
                    for(int c = 0; c < 2 * n; ++c)
                        fs.S[r * 2 * n + c] = L->S(r, c);
            } else if(const auto* X = std::get_if<XShearStage>(&st)) {
                fs.kind = 1;
                fs.poly = FlatPoly(X->V);
            } else {
                fs.kind = 2;
                fs.poly = FlatPoly(std::get<PShearStage>(st).T);
            }
            maxdeg = std::max(maxdeg, fs.poly.maxdeg);
            stages.push_back(std::move(fs));
        }
    }

    std::size_t scratch_size() const { return 4 * n + n * (maxdeg + 1); }

    // z holds (x, p); scratch from scratch_size().
    void apply(double* z, double* scratch) const
    {
        const int m = 2 * n;
        double* tmp = scratch;
        double* g = scratch + m;
        double* pw = scratch + 2 * m;
        for(const auto& st : stages) {
            if(st.kind == 0) {
                for(int r = 0; r < m; ++r) {
                    double s = 0.0;
                    for(int c = 0; c < m; ++c)
                        s += st.S[r * m + c] * z[c];
                    tmp[r] = s;
                }
                std::copy(tmp, tmp + m, z);
            } else if(st.kind == 1) {
                st.poly.gradient(z, g, pw);
                for(int j = 0; j < n; ++j)
                    z[n + j] += g[j];
            } else {
                st.poly.gradient(z + n, g, pw);
                for(int j = 0; j < n; ++j)
                    z[j] += g[j];
            }
        }
    }
};

void check_map(const SymplectomorphismSpec& f, int n)
{
    if(f.n != n)
        throw std::invalid_argument("symplectomorphism: dimension mismatch");
}

std::mt19937_64 partition_rng(std::uint64_t seed, std::size_t part)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(part), 0x5a3du};
    return std::mt19937_64(seq);
}

} // namespace

EllipsoidSpec::EllipsoidSpec(Vec r) : EllipsoidSpec(r, PhasePoint(Vec::Zero(r.size()), Vec::Zero(r.size()))) {}

EllipsoidSpec::EllipsoidSpec(Vec r, PhasePoint c) : radii(std::move(r)), center(std::move(c))
{
    if(radii.size() < 1)
        throw std::invalid_argument("EllipsoidSpec: need at least one radius");
    require_positive(radii, "EllipsoidSpec");
    if(center.dim() != radii.size())
        throw std::invalid_argument("EllipsoidSpec: center dimension mismatch");
    std::sort(radii.data(), radii.data() + radii.size());
}

EllipsoidSpec EllipsoidSpec::ball(int n, double R) { return EllipsoidSpec(Vec::Constant(n, R)); }

double ellipsoid_capacity(const EllipsoidSpec& e) { return kPi * e.radii(0) * e.radii(0); }

double cylinder_capacity(double R)
{
    if(!(R > 0.0))
        throw std::invalid_argument("cylinder_capacity: radius must be positive");
    return kPi * R * R;
}

double ball_volume(int n, double R)
{
    if(n < 1 || !(R > 0.0))
        throw std::invalid_argument("ball_volume: need n >= 1 and R > 0");
    double v = 1.0;
    for(int k = 1; k <= n; ++k)
        v *= kPi * R * R / k;
    return v;
}

TorusSpec::TorusSpec(Vec radii, int flat) : circle_radii(std::move(radii)), flat_dims(flat)
{
    if(circle_radii.size() < 1)
        throw std::invalid_argument("TorusSpec: need at least one circle factor");
    if(flat_dims < 0)
        throw std::invalid_argument("TorusSpec: flat_dims must be non-negative");
    require_positive(circle_radii, "TorusSpec");
}

PhasePoint torus_point(const TorusSpec& t, const Vec& theta, const Vec& y)
{
    const int k = t.circles(), n = t.dim();
    if(theta.size() != k)
        throw std::invalid_argument("torus_point: angle vector has wrong length");
    if(y.size() != 0 && y.size() != t.flat_dims)
        throw std::invalid_argument("torus_point: flat coordinate vector has wrong length");
    Vec x = Vec::Zero(n), p = Vec::Zero(n);
    for(int j = 0; j < k; ++j) {
        x(j) = t.circle_radii(j) * std::cos(theta(j));
        p(j) = t.circle_radii(j) * std::sin(theta(j));
    }
    if(y.size() > 0)
        x.tail(t.flat_dims) = y;
    return {x, p};
}

LagrangianFrame torus_tangent_frame(const TorusSpec& t, const Vec& theta)
{
    const int k = t.circles(), n = t.dim();
    if(theta.size() != k)
        throw std::invalid_argument("torus_tangent_frame: angle vector has wrong length");
    Mat X = Mat::Zero(n, n), P = Mat::Zero(n, n);
    for(int j = 0; j < k; ++j) {
        X(j, j) = -std::sin(theta(j));
        P(j, j) = std::cos(theta(j));
    }
    for(int j = k; j < n; ++j)
        X(j, j) = 1.0;
    return {X, P};
}

void SymplectomorphismSpec::validate(double tol) const
{
    if(n < 1)
        throw std::invalid_argument("symplectomorphism: n must be positive");
    for(const auto& st : stages) {
        if(const auto* L = std::get_if<LinearStage>(&st)) {
            if(L->S.rows() != 2 * n || L->S.cols() != 2 * n)
                throw std::invalid_argument("symplectomorphism: linear stage has wrong size");
            if(!is_symplectic_matrix(L->S, tol))
                throw std::invalid_argument("symplectomorphism: linear stage is not symplectic");
        } else {
            const Polynomial& P = std::holds_alternative<XShearStage>(st)
                                      ? std::get<XShearStage>(st).V
                                      : std::get<PShearStage>(st).T;
            if(P.nvars() != n)
                throw std::invalid_argument("symplectomorphism: shear polynomial has wrong arity");
        }
    }
}

PhasePoint apply_symplectomorphism(const SymplectomorphismSpec& f, const PhasePoint& z)
{
    check_map(f, z.dim());
    Vec x = z.x, p = z.p;
    for(const auto& st : f.stages) {
        if(const auto* L = std::get_if<LinearStage>(&st)) {
            Vec s(2 * f.n);
            s << x, p;
            s = L->S * s;
            x = s.head(f.n);
            p = s.tail(f.n);
        } else if(const auto* X = std::get_if<XShearStage>(&st)) {
            p += X->V.gradient(x);
        } else {
            x += std::get<PShearStage>(st).T.gradient(p);
        }
    }
    return {x, p};
}

Mat symplectomorphism_jacobian(const SymplectomorphismSpec& f, const PhasePoint& z)
{
    check_map(f, z.dim());
    const int n = f.n;
    Mat Jac = Mat::Identity(2 * n, 2 * n);
    Vec x = z.x, p = z.p;
    for(const auto& st : f.stages) {
        Mat D = Mat::Identity(2 * n, 2 * n);
        if(const auto* L = std::get_if<LinearStage>(&st)) {
            D = L->S;
            Vec s(2 * n);
            s << x, p;
            s = L->S * s;
            x = s.head(n);
            p = s.tail(n);
        } else if(const auto* X = std::get_if<XShearStage>(&st)) {
            D.bottomLeftCorner(n, n) = X->V.hessian(x);
            p += X->V.gradient(x);
        } else {
            const Polynomial& T = std::get<PShearStage>(st).T;
            D.topRightCorner(n, n) = T.hessian(p);
            x += T.gradient(p);
        }
        Jac = D * Jac;
    }
    return Jac;
}

SymplectomorphismSpec random_symplectomorphism(int n, std::uint64_t seed)
{
    if(n < 1)
        throw std::invalid_argument("random_symplectomorphism: n must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nstages(3, 7), degree(2, 4), coin(0, 1);
    SymplectomorphismSpec f;
    f.n = n;
    const int k = nstages(rng);
    for(int s = 0; s < k; ++s) {
        if(s % 2 == 0) {
            f.stages.emplace_back(LinearStage{random_symplectic(n, rng, 1.0)});
        } else {
            const int d = degree(rng);
            Polynomial P = Polynomial::random(n, d, rng, 0.5);
            if(coin(rng) == 0)
                f.stages.emplace_back(XShearStage{std::move(P)});
            else
                f.stages.emplace_back(PShearStage{std::move(P)});
        }
    }
    return f;
}

std::vector<ShadowEstimate> shadow_areas(const SymplectomorphismSpec& f, double R,
                                         const ShadowOptions& opt)
{
    f.validate();
    if(!(R > 0.0))
        throw std::invalid_argument("shadow_area: radius must be positive");
    if(opt.grid_res < 1 || opt.samples < 1)
        throw std::invalid_argument("shadow_area: grid_res and samples must be positive");

    const int n = f.n, m = 2 * n;
    const long N = opt.samples;
    BallSampling mode = opt.sampling;
    if(mode == BallSampling::automatic)
        mode = n == 1 ? BallSampling::volume : BallSampling::boundary;

    const FlatMap map(f);
    std::vector<double> pts(static_cast<std::size_t>(N) * m);
    const long P = static_cast<long>(kSamplePartitions);
    const bool par = opt.exec == Exec::parallel;

    auto fill_partition = [&](long part) {
        std::mt19937_64 rng = partition_rng(opt.seed, static_cast<std::size_t>(part));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> scratch(map.scratch_size());
        const long lo = N * part / P, hi = N * (part + 1) / P;
        for(long s = lo; s < hi; ++s) {
            double* z = &pts[static_cast<std::size_t>(s) * m];
            double r2 = 0.0;
            for(int c = 0; c < m; ++c) {
                z[c] = normal(rng);
                r2 += z[c] * z[c];
            }
            double scale = R / std::sqrt(r2);
            if(mode == BallSampling::volume)
                scale *= std::pow(unif(rng), 1.0 / m);
            for(int c = 0; c < m; ++c)
                z[c] *= scale;
            map.apply(z, scratch.data());
        }
    };

    if(par) {
#pragma omp parallel for schedule(dynamic, 1)
        for(long part = 0; part < P; ++part)
            fill_partition(part);
    } else {
        for(long part = 0; part < P; ++part)
            fill_partition(part);
    }

    std::vector<double> lo(m, std::numeric_limits<double>::infinity());
    std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
    for(long s = 0; s < N; ++s) {
        const double* z = &pts[static_cast<std::size_t>(s) * m];
        for(int c = 0; c < m; ++c) {
            if(!std::isfinite(z[c]))
                throw NumericalError("shadow_area: map produced a non-finite point");
            lo[c] = std::min(lo[c], z[c]);
            hi[c] = std::max(hi[c], z[c]);
        }
    }

    const int res = opt.grid_res;
    const std::size_t cells = static_cast<std::size_t>(res) * res;
    std::vector<ShadowEstimate> out;
    auto plane = [&](int i, int k) {
        ShadowEstimate est;
        est.plane_x = i + 1;
        est.plane_p = k + 1;
        est.grid_res = res;
        est.samples = N;
        est.seed = opt.seed;
        const int cx = i, cp = n + k;
        const double wx = hi[cx] - lo[cx], wp = hi[cp] - lo[cp];
        if(!(wx > 0.0) || !(wp > 0.0)) {
            out.push_back(est);
            return;
        }
        const double hx = wx / res, hp = wp / res;
        auto cell_of = [&](const double* z) {
            const int a = std::min(res - 1, static_cast<int>((z[cx] - lo[cx]) / hx));
            const int b = std::min(res - 1, static_cast<int>((z[cp] - lo[cp]) / hp));
            return static_cast<std::size_t>(a) * res + b;
        };

        std::vector<unsigned char> grid(cells, 0);
        if(par) {
            const int T = max_threads();
            std::vector<std::vector<unsigned char>> local(T);
#pragma omp parallel num_threads(T)
            {
                auto& g = local[omp_get_thread_num()];
                g.assign(cells, 0);
#pragma omp for schedule(static)
                for(long s = 0; s < N; ++s)
                    g[cell_of(&pts[static_cast<std::size_t>(s) * m])] = 1;
            }
            for(const auto& g : local)
                if(!g.empty())
                    for(std::size_t c = 0; c < cells; ++c)
                        grid[c] |= g[c];
        } else {
            for(long s = 0; s < N; ++s)
                grid[cell_of(&pts[static_cast<std::size_t>(s) * m])] = 1;
        }

        long occ = 0;
        for(int a = 0; a < res; ++a) {
            for(int b = 0; b < res; ++b) {
                const std::size_t c = static_cast<std::size_t>(a) * res + b;
                if(grid[c]) {
                    ++occ;
                } else if(opt.fill_holes && a > 0 && b > 0 && a < res - 1 && b < res - 1 &&
                          grid[c - 1] && grid[c + 1] && grid[c - res] && grid[c + res]) {
                    ++occ;
                }
            }
        }
        est.occupied_cells = occ;
        est.cell_area = hx * hp;
        est.area = occ * est.cell_area;
        out.push_back(est);
    };

    for(int j = 0; j < n; ++j)
        plane(j, j);
    for(int i = 0; i < n; ++i)
        for(int k = 0; k < n; ++k)
            if(i != k)
                plane(i, k);
    return out;
}

ShadowEstimate shadow_area(const SymplectomorphismSpec& f, double R, int j, const ShadowOptions& opt)
{
    if(j < 1 || j > f.n)
        throw std::invalid_argument("shadow_area: plane index out of range");
    return shadow_areas(f, R, opt)[j - 1];
}

double ground_energy(const Vec& omegas, double hbar)
{
    if(!(hbar > 0.0))
        throw std::invalid_argument("ground_energy: hbar must be positive");
    require_positive(omegas, "ground_energy");
    return 0.5 * hbar * omegas.sum();
}

double minimal_orbit_action(double hbar)
{
    if(!(hbar > 0.0))
        throw std::invalid_argument("minimal_orbit_action: hbar must be positive");
    return kPi * hbar;
}

double loop_action(const TorusSpec& t, const std::vector<int>& mu)
{
    if(static_cast<int>(mu.size()) != t.circles())
        throw std::invalid_argument("loop_action: winding vector has wrong length");
    double s = 0.0;
    for(int j = 0; j < t.circles(); ++j)
        s += mu[j] * kPi * t.circle_radii(j) * t.circle_radii(j);
    return s;
}

int torus_loop_maslov(const TorusSpec& t, const std::vector<int>& mu)
{
    if(static_cast<int>(mu.size()) != t.circles())
        throw std::invalid_argument("torus_loop_maslov: winding vector has wrong length");
    Vec dir(t.circles());
    int turns = 0;
    for(int j = 0; j < t.circles(); ++j) {
        dir(j) = 2.0 * kPi * mu[j];
        turns += std::abs(mu[j]);
    }
    // Each eigenvalue of w turns twice per winding; 16 samples per turn.
    const FrameCurve curve = [&](double s) { return torus_tangent_frame(t, s * dir); };
    return maslov_loop_index(sample_curve(curve, 0.0, 1.0, std::max(8, 32 * turns)));
}

KellerMaslovReport keller_maslov_check(const TorusSpec& t, double hbar, double tol)
{
    if(!(hbar > 0.0))
        throw std::invalid_argument("keller_maslov_check: hbar must be positive");
    KellerMaslovReport rep;
    rep.passed = true;
    for(int j = 0; j < t.circles(); ++j) {
        std::vector<int> e(t.circles(), 0);
        e[j] = 1;
        KellerMaslovRow row;
        row.generator = j + 1;
        row.radius = t.circle_radii(j);
        row.action = loop_action(t, e);
        row.maslov = torus_loop_maslov(t, e);
        row.value = row.action / (2.0 * kPi * hbar) - 0.25 * row.maslov;
        row.residual = std::abs(row.value - std::round(row.value));
        row.passed = row.residual <= tol;
        rep.passed = rep.passed && row.passed;
        rep.rows.push_back(row);
    }
    return rep;
}

double oscillator_levels(const TorusSpec& t, const Vec& omegas, double hbar, double tol)
{
    if(omegas.size() != t.circles())
        throw std::invalid_argument("oscillator_levels: one frequency per circle factor required");
    require_positive(omegas, "oscillator_levels");
    if(!keller_maslov_check(t, hbar, tol).passed)
        throw std::invalid_argument("oscillator_levels: torus is not quantized");
    double e = 0.0;
    for(int j = 0; j < t.circles(); ++j)
        e += 0.5 * omegas(j) * t.circle_radii(j) * t.circle_radii(j);
    return e;
}

} // namespace camel
