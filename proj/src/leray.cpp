#include "camel/leray.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "camel/errors.hpp"

namespace camel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double round_to_integer(double v, const char* what)
{
    const double r = std::round(v);
    if(!std::isfinite(v) || std::abs(v - r) > kIntegralityTol)
        throw IntegralityError(std::string(what) + ": value " + std::to_string(v) +
                               " is not an integer");
    return r;
}

double step_arg(cplx da, cplx db) { return std::arg(db * std::conj(da)); }

struct Bisector {
    const FrameCurve& curve;
    static constexpr double kStep = std::numbers::pi / 4;
    static constexpr int kMaxDepth = 40;

    // Returns the alpha increment between ta and tb.
    double increment(double ta, cplx da, double tb, cplx db, int depth) const
    {
        const double tm = 0.5 * (ta + tb);
        const cplx dm = souriau_w(curve(tm)).det();
        const double d = step_arg(da, db);
        const double d1 = step_arg(da, dm);
        const double d2 = step_arg(dm, db);
        if(std::abs(d) < kStep && std::abs(d1) < kStep && std::abs(d2) < kStep &&
           std::abs(d1 + d2 - d) < 1e-6)
            return d1 + d2;
        if(depth >= kMaxDepth)
            throw RefinementError("lift: refinement depth exceeded near t = " + std::to_string(tm));
        return increment(ta, da, tm, dm, depth + 1) + increment(tm, dm, tb, db, depth + 1);
    }
};

} // namespace

bool LagrangianLift::is_valid(double tol) const
{
    return w.is_valid(tol) && std::abs(w.det() - std::polar(1.0, alpha)) <= tol;
}

double arg_det(const SouriauPoint& w) { return std::arg(w.det()); }

LagrangianLift make_lift(const SouriauPoint& w, double alpha, double tol)
{
    if(std::abs(w.det() - std::polar(1.0, alpha)) > tol)
        throw std::invalid_argument("make_lift: alpha is not an argument of det w");
    return {w, alpha};
}

LagrangianLift make_lift(const LagrangianFrame& F, double alpha, double tol)
{
    return make_lift(souriau_w(F), alpha, tol);
}

LagrangianLift lift_near(const SouriauPoint& w, double alpha_hint)
{
    const double a = arg_det(w);
    return {w, a + kTwoPi * std::round((alpha_hint - a) / kTwoPi)};
}

LagrangianPath sample_curve(const FrameCurve& curve, const std::vector<double>& times)
{
    LagrangianPath path;
    path.times = times;
    path.generator = curve;
    path.samples.reserve(times.size());
    for(double t : times)
        path.samples.push_back(curve(t));
    return path;
}

LagrangianPath sample_curve(const FrameCurve& curve, double t0, double t1, int steps)
{
    if(steps < 1)
        throw std::invalid_argument("sample_curve: steps must be positive");
    std::vector<double> times(steps + 1);
    for(int k = 0; k <= steps; ++k)
        times[k] = t0 + (t1 - t0) * k / steps;
    return sample_curve(curve, times);
}

std::vector<LagrangianLift> lift_path(const LagrangianPath& path, double alpha0)
{
    if(path.samples.empty())
        throw std::invalid_argument("lift_path: empty path");
    if(path.generator && path.times.size() != path.samples.size())
        throw std::invalid_argument("lift_path: times and samples differ in length");

    std::vector<LagrangianLift> out;
    out.reserve(path.samples.size());
    out.push_back(make_lift(souriau_w(path.samples.front()), alpha0));

    for(std::size_t k = 1; k < path.samples.size(); ++k) {
        const SouriauPoint wk = souriau_w(path.samples[k]);
        const cplx da = out.back().w.det();
        const cplx db = wk.det();
        double inc;
        if(path.generator) {
            inc = Bisector{path.generator}.increment(path.times[k - 1], da, path.times[k], db, 0);
        } else {
            inc = step_arg(da, db);
            if(std::abs(inc) >= std::numbers::pi / 2)
                throw RefinementError("lift_path: step " + std::to_string(k) +
                                      " too coarse (|d arg det w| = " +
                                      std::to_string(std::abs(inc)) + ")");
        }
        out.push_back({wk, out.back().alpha + inc});
    }
    return out;
}

LagrangianLift lift_along(const FrameCurve& curve, double t0, double t1,
                          const LagrangianLift& start, int min_segments)
{
    const SouriauPoint w0 = souriau_w(curve(t0));
    if((w0.w - start.w.w).norm() > 1e-8)
        throw std::invalid_argument("lift_along: start lift does not lie over curve(t0)");
    const int segs = std::max(1, min_segments);
    LagrangianLift cur{w0, start.alpha};
    const Bisector bis{curve};
    for(int k = 1; k <= segs; ++k) {
        const double ta = t0 + (t1 - t0) * (k - 1) / segs;
        const double tb = t0 + (t1 - t0) * k / segs;
        const SouriauPoint wb = souriau_w(curve(tb));
        cur.alpha += bis.increment(ta, cur.w.det(), tb, wb.det(), 0);
        cur.w = wb;
    }
    return cur;
}

LagrangianLift deck_act(int k, const LagrangianLift& l) { return {l.w, l.alpha + kTwoPi * k}; }

cplx principal_log_trace(const CMat& M, double tol)
{
    if(M.rows() != M.cols())
        throw std::invalid_argument("principal_log_trace: matrix must be square");
    Eigen::ComplexEigenSolver<CMat> es(M, false);
    cplx acc = 0.0;
    for(Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        const cplx l = es.eigenvalues()(j);
        const double r = std::abs(l);
        if(r <= tol || std::abs(l / r + 1.0) <= tol)
            throw BranchError("principal_log_trace: eigenvalue on the branch cut");
        acc += cplx(std::log(r), std::arg(l));
    }
    return acc;
}

int leray_index_transversal(const LagrangianLift& a, const LagrangianLift& b)
{
    if(a.dim() != b.dim())
        throw std::invalid_argument("leray_index_transversal: dimension mismatch");
    if(!transversal(a.w, b.w))
        throw std::invalid_argument("leray_index_transversal: planes are not transversal");
    const int n = a.dim();
    const cplx tl = principal_log_trace(-a.w.w * b.w.w.adjoint());
    const double v = (a.alpha - b.alpha + (cplx(0.0, 1.0) * tl).real()) / kTwoPi + 0.5 * n;
    return static_cast<int>(round_to_integer(v, "leray_index_transversal"));
}

int inert(const SouriauPoint& a, const SouriauPoint& b, const SouriauPoint& c, double tol)
{
    return inert(frame_from_souriau(a), frame_from_souriau(b), frame_from_souriau(c), tol);
}

int inert(const LagrangianFrame& a, const LagrangianFrame& b, const LagrangianFrame& c, double tol)
{
    const SouriauPoint wa = souriau_w(a), wb = souriau_w(b), wc = souriau_w(c);
    const int n = a.dim();
    const int sig = signature(a, b, c, tol);
    const int ddim =
        intersection_dim(wa, wb, tol) - intersection_dim(wa, wc, tol) + intersection_dim(wb, wc, tol);
    const int twice = sig + n + ddim;
    if(twice % 2 != 0)
        throw IntegralityError("inert: sigma + n + boundary dim is odd");
    return twice / 2;
}

LagrangianLift auxiliary_lift(const SouriauPoint& a, const SouriauPoint& b, std::mt19937_64& rng,
                              double margin, int max_tries)
{
    const int n = a.dim();
    auto far_from_one = [margin](const CVec& ev) {
        for(Eigen::Index j = 0; j < ev.size(); ++j)
            if(std::abs(ev(j) - 1.0) <= margin)
                return false;
        return true;
    };
    for(int attempt = 0; attempt < max_tries; ++attempt) {
        const CMat u = random_unitary(n, rng);
        const SouriauPoint wc{u * u.transpose()};
        if(far_from_one(relative_spectrum(a, wc)) && far_from_one(relative_spectrum(b, wc))) {
            double al = arg_det(wc);
            if(al < 0)
                al += kTwoPi;
            return {wc, al};
        }
    }
    throw NumericalError("auxiliary_lift: no transversal auxiliary plane found");
}

int leray_index(const LagrangianLift& a, const LagrangianLift& b, std::mt19937_64& rng)
{
    if(a.dim() != b.dim())
        throw std::invalid_argument("leray_index: dimension mismatch");
    if(transversal(a.w, b.w))
        return leray_index_transversal(a, b);

    const LagrangianFrame fa = frame_from_souriau(a.w);
    const LagrangianFrame fb = frame_from_souriau(b.w);
    auto via = [&](const LagrangianLift& c) {
        return leray_index_transversal(a, c) - leray_index_transversal(b, c) +
               inert(fa, fb, frame_from_souriau(c.w));
    };
    const int m1 = via(auxiliary_lift(a.w, b.w, rng));
    const int m2 = via(auxiliary_lift(a.w, b.w, rng));
    if(m1 != m2)
        throw NumericalError("leray_index: value depends on the auxiliary plane (" +
                             std::to_string(m1) + " vs " + std::to_string(m2) + ")");
    return m1;
}

int leray_index(const LagrangianLift& a, const LagrangianLift& b)
{
    std::mt19937_64 rng(0x1e7a7u);
    return leray_index(a, b, rng);
}

int maslov_loop_index(const LagrangianPath& loop)
{
    if(loop.samples.size() < 2)
        throw std::invalid_argument("maslov_loop_index: loop needs at least two samples");
    const SouriauPoint w0 = souriau_w(loop.samples.front());
    const SouriauPoint w1 = souriau_w(loop.samples.back());
    if((w0.w - w1.w).norm() > 1e-8)
        throw std::invalid_argument("maslov_loop_index: path is not closed");
    const double a0 = arg_det(w0);
    const auto lifts = lift_path(loop, a0);
    return static_cast<int>(
        round_to_integer((lifts.back().alpha - a0) / kTwoPi, "maslov_loop_index"));
}

int argument_index(const std::vector<LagrangianLift>& tangent_lift_path, const LagrangianLift& base)
{
    if(tangent_lift_path.empty())
        throw std::invalid_argument("argument_index: empty tangent path");
    return leray_index(tangent_lift_path.back(), base);
}

LagrangianLift transport_lift(const LagrangianLift& start, const std::function<Mat(double)>& s,
                              double tau0, double tau1, int min_segments)
{
    const LagrangianFrame f = frame_from_souriau(start.w);
    const FrameCurve curve = [&](double tau) { return transform_frame(s(tau), f); };
    const LagrangianLift at0 = lift_near(souriau_w(curve(tau0)), start.alpha);
    if((at0.w.w - start.w.w).norm() > 1e-8)
        throw std::invalid_argument("transport_lift: s(tau0) moves the starting plane");
    return lift_along(curve, tau0, tau1, at0, min_segments);
}

} // namespace camel
