#pragma once

#include <random>
#include <vector>

#include "camel/linalg.hpp"

namespace camel {

/// Real polynomial in n variables, stored as a list of monomials.
class Polynomial {
public:
    struct Term {
        std::vector<int> exponents;
        double coeff = 0.0;
    };

    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    int nvars() const { return nvars_; }
    int degree() const;
    const std::vector<Term>& terms() const { return terms_; }

    /// Adds coeff * prod x_j^{e_j}.
    void add_term(std::vector<int> exponents, double coeff);

    double value(const double* x) const;
    void gradient(const double* x, double* g) const;
    /// Row-major n x n Hessian.
    void hessian(const double* x, double* h) const;

    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    Mat hessian(const Vec& x) const;

    /// sum_j c_j x_j^2 / 2
    static Polynomial diagonal_quadratic(const Vec& c);
    /// Every monomial of total degree 2..max_degree with coefficients uniform
    /// in [-scale, scale].
    static Polynomial random(int nvars, int max_degree, std::mt19937_64& rng, double scale = 0.5);

private:
    int nvars_ = 0;
    std::vector<Term> terms_;
};

} // namespace camel
