#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "denjoy/errors.hpp"

namespace denjoy {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double golden = 0.61803398874989484820;  // (sqrt 5 - 1)/2

// Neumaier's compensated summation.
class KahanSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double frac(double x) {
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

// Signed distance on R/Z, in (-1/2, 1/2].
inline double circle_diff(double x, double y) {
    double d = frac(x - y);
    return d > 0.5 ? d - 1.0 : d;
}

inline double circle_dist(double x, double y) { return std::abs(circle_diff(x, y)); }

// Root of a monotone function on a bracket [lo, hi]; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol = 0.0, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0) == (fhi < 0)) throw internal_error("bisect: bracket does not change sign");
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= xtol) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Polynomials with real coefficients, lowest degree first.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline Poly poly_add(Poly a, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

inline Poly poly_scale(Poly a, double s) {
    for (auto& c : a) c *= s;
    return a;
}

inline double poly_eval(const Poly& p, double x) {
    double r = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) r = r * x + p[i];
    return r;
}

// p(x + s) as a polynomial in x.
inline Poly poly_shift(const Poly& p, double s) {
    Poly r{0.0};
    for (std::size_t i = p.size(); i-- > 0;) r = poly_add(poly_mul(r, Poly{s, 1.0}), Poly{p[i]});
    r.resize(std::max<std::size_t>(p.size(), 1));
    return r;
}

// C(x - c, k) as a polynomial in x.
inline Poly binomial_poly(double c, int k) {
    Poly r{1.0};
    for (int i = 0; i < k; ++i) r = poly_scale(poly_mul(r, Poly{-c - i, 1.0}), 1.0 / (i + 1));
    return r;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

// Number of points of Z^q with l1-norm exactly n.
inline double lattice_shell(int q, long n) {
    if (q == 0) return n == 0 ? 1.0 : 0.0;
    if (n == 0) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= std::min<long>(q, n); ++k)
        s += std::ldexp(binomial(q, k), k) * binomial(int(n - 1), k - 1);
    return s;
}

// lattice_shell(q, n) as a polynomial in n, valid for n >= 1.
inline Poly lattice_shell_poly(int q) {
    if (q == 0) return Poly{0.0};
    Poly r{0.0};
    for (int k = 1; k <= q; ++k)
        r = poly_add(r, poly_scale(binomial_poly(1.0, k - 1), std::ldexp(binomial(q, k), k)));
    return r;
}

// Number of points of Z^q with l1-norm at most n, as a polynomial in n >= 0.
inline Poly lattice_ball_poly(int q) {
    Poly r{1.0};
    for (int k = 1; k <= q; ++k)
        r = poly_add(r, poly_scale(binomial_poly(0.0, k), std::ldexp(binomial(q, k), k)));
    return r;
}

// Sum over t >= 0 of P(t) / ((t + a)^d * log(t + a)^(1+eps)), with deg P <= d - 1 and a > 1.
// Direct summation up to a cutoff, then an Euler-Maclaurin tail whose integral
// is taken in the variable u = log(t + a) where the integrand is bounded.
inline double log_power_series(const Poly& P, double a, int d, double eps, long cutoff = 4096) {
    if (a <= 1.0) throw domain_error("log_power_series: shift must exceed 1");
    if (int(P.size()) > d) throw domain_error("log_power_series: polynomial degree too high");
    auto term = [&](double t) {
        const double y = t + a;
        return poly_eval(P, t) / (std::pow(y, d) * std::pow(std::log(y), 1.0 + eps));
    };
    KahanSum sum;
    for (long t = 0; t < cutoff; ++t) sum.add(term(double(t)));

    const double K = double(cutoff);
    // P(y - a) y / y^d with y = e^u, expanded through y^(k+1-d) <= 1.
    const Poly Q = poly_shift(P, -a);
    auto integrand = [&](double u) {
        double s = 0.0;
        for (std::size_t k = 0; k < Q.size(); ++k)
            s += Q[k] * std::exp((double(k) + 1.0 - d) * u);
        return s / std::pow(u, 1.0 + eps);
    };
    boost::math::quadrature::exp_sinh<double> quad;
    const double integral =
        quad.integrate(integrand, std::log(K + a), std::numeric_limits<double>::infinity(), 1e-13);
    const double h = std::max(1.0, 1e-3 * K);
    const double dterm = (term(K + h) - term(K - h)) / (2 * h);
    sum.add(integral);
    sum.add(0.5 * term(K));
    sum.add(-dterm / 12.0);
    return sum.value();
}

}  // namespace denjoy
