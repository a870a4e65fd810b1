#include "camel/polynomial.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace camel {

namespace {

double ipow_real(double x, int e)
{
    double r = 1.0;
    for(int k = 0; k < e; ++k)
        r *= x;
    return r;
}

} // namespace

int Polynomial::degree() const
{
    int d = 0;
    for(const auto& t : terms_)
        d = std::max(d, std::accumulate(t.exponents.begin(), t.exponents.end(), 0));
    return d;
}

void Polynomial::add_term(std::vector<int> exponents, double coeff)
{
    if(static_cast<int>(exponents.size()) != nvars_)
        throw std::invalid_argument("Polynomial: exponent vector has wrong length");
    for(int e : exponents)
        if(e < 0)
            throw std::invalid_argument("Polynomial: negative exponent");
    terms_.push_back({std::move(exponents), coeff});
}

double Polynomial::value(const double* x) const
{
    double s = 0.0;
    for(const auto& t : terms_) {
        double m = t.coeff;
        for(int j = 0; j < nvars_; ++j)
            m *= ipow_real(x[j], t.exponents[j]);
        s += m;
    }
    return s;
}

void Polynomial::gradient(const double* x, double* g) const
{
    std::fill(g, g + nvars_, 0.0);
    for(const auto& t : terms_) {
        for(int i = 0; i < nvars_; ++i) {
            const int ei = t.exponents[i];
            if(ei == 0)
                continue;
            double m = t.coeff * ei;
            for(int j = 0; j < nvars_; ++j)
                m *= ipow_real(x[j], t.exponents[j] - (j == i ? 1 : 0));
            g[i] += m;
        }
    }
}

void Polynomial::hessian(const double* x, double* h) const
{
    const int n = nvars_;
    std::fill(h, h + n * n, 0.0);
    std::vector<int> e;
    for(const auto& t : terms_) {
        for(int a = 0; a < n; ++a) {
            for(int b = a; b < n; ++b) {
                e = t.exponents;
                double c = t.coeff * e[a];
                --e[a];
                c *= e[b];
                --e[b];
                if(c == 0.0)
                    continue;
                for(int j = 0; j < n; ++j)
                    c *= ipow_real(x[j], e[j]);
                h[a * n + b] += c;
                if(a != b)
                    h[b * n + a] += c;
            }
        }
    }
}

double Polynomial::value(const Vec& x) const
{
    if(x.size() != nvars_)
        throw std::invalid_argument("Polynomial: argument has wrong length");
    return value(x.data());
}

Vec Polynomial::gradient(const Vec& x) const
{
    if(x.size() != nvars_)
        throw std::invalid_argument("Polynomial: argument has wrong length");
    Vec g(nvars_);
    gradient(x.data(), g.data());
    return g;
}

Mat Polynomial::hessian(const Vec& x) const
{
    if(x.size() != nvars_)
        throw std::invalid_argument("Polynomial: argument has wrong length");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> h(nvars_, nvars_);
    hessian(x.data(), h.data());
    return h;
}

Polynomial Polynomial::diagonal_quadratic(const Vec& c)
{
    const int n = static_cast<int>(c.size());
    Polynomial p(n);
    for(int j = 0; j < n; ++j) {
        std::vector<int> e(n, 0);
        e[j] = 2;
        p.add_term(e, 0.5 * c(j));
    }
    return p;
}

Polynomial Polynomial::random(int nvars, int max_degree, std::mt19937_64& rng, double scale)
{
    if(nvars < 1 || max_degree < 2)
        throw std::invalid_argument("Polynomial::random: need nvars >= 1 and degree >= 2");
    std::uniform_real_distribution<double> U(-scale, scale);
    Polynomial p(nvars);
    std::vector<int> e(nvars, 0);
    // Enumerate exponent vectors of total degree 2..max_degree in lexicographic order.
    std::function<void(int, int)> rec = [&](int j, int left) {
        if(j == nvars - 1) {
            e[j] = left;
            p.add_term(e, U(rng));
            return;
        }
        for(int k = left; k >= 0; --k) {
            e[j] = k;
            rec(j + 1, left - k);
        }
    };
    for(int d = 2; d <= max_degree; ++d)
        rec(0, d);
    return p;
}

} // namespace camel
