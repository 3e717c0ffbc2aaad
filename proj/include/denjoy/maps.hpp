#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "denjoy/errors.hpp"
#include "denjoy/numeric.hpp"

namespace denjoy {

inline constexpr double domain_tol = 1e-12;

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

// ---------------------------------------------------------------------------
// Yoccoz family: phi_a(u) = a/2 + (a/pi) atan(a u), an increasing bijection R -> (0, a),
// and the transfer maps phi_{a,b} = phi_b o phi_a^{-1} : [0,a] -> [0,b].

inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw domain_error(std::string(what) + ": non-finite argument");
}

inline double yoccoz_phi(double a, double u) {
    require_finite(a, "yoccoz_phi");
    require_finite(u, "yoccoz_phi");
    if (a <= 0) throw domain_error("yoccoz_phi: a must be positive");
    // atan(z) = -pi/2 - atan(1/z) for z < 0 keeps the left tail free of cancellation.
    const double z = a * u;
    if (z < -1.0) return -(a / pi) * std::atan(1.0 / z);
    return a / 2 + (a / pi) * std::atan(z);
}

inline double yoccoz_phi_inv(double a, double x) {
    require_finite(a, "yoccoz_phi_inv");
    require_finite(x, "yoccoz_phi_inv");
    if (a <= 0) throw domain_error("yoccoz_phi_inv: a must be positive");
    if (!(x > 0 && x < a)) throw domain_error("yoccoz_phi_inv: x outside (0, a)");
    // tan(pi (x/a - 1/2)) = -cot(pi x / a), evaluated from the nearer endpoint.
    if (x == a / 2) return 0.0;
    if (x < a / 2) return -1.0 / (a * std::tan(pi * x / a));
    return 1.0 / (a * std::tan(pi * (a - x) / a));
}

namespace detail {
// Transfer on the left half [0, a/2], written as (b/pi) atan((a/b) tan(pi x / a)).
inline double transfer_half(double a, double b, double x) {
    if (x <= 0) return 0.0;
    const double v = std::tan(pi * x / a);
    if (v < 0) return b / 2;  // pi x / a rounded past pi/2 at the midpoint
    return (b / pi) * std::atan((a / b) * v);
}
inline double transfer_half_deriv(double a, double b, double x) {
    const double v = std::tan(pi * x / a);
    const double k = (a * a) / (b * b);
    return (1 + v * v) / (1 + k * v * v);
}
inline double transfer_half_second(double a, double b, double x) {
    const double v = std::tan(pi * x / a);
    const double k = (a * a) / (b * b);
    const double q = 1 + k * v * v;
    return 2 * v * (1 - k) * (pi / a) * (1 + v * v) / (q * q);
}
inline void check_transfer_args(double a, double b, double x) {
    require_finite(a, "yoccoz_transfer");
    require_finite(b, "yoccoz_transfer");
    require_finite(x, "yoccoz_transfer");
    if (a <= 0 || b <= 0) throw domain_error("yoccoz_transfer: lengths must be positive");
    if (x < -domain_tol * a || x > a * (1 + domain_tol))
        throw domain_error("yoccoz_transfer: x outside [0, a]");
}
}  // namespace detail

inline double yoccoz_transfer(double a, double b, double x) {
    detail::check_transfer_args(a, b, x);
    if (x <= 0) return 0.0;
    if (x >= a) return b;
    if (x <= a / 2) return detail::transfer_half(a, b, x);
    return b - detail::transfer_half(a, b, a - x);
}

inline double yoccoz_transfer_deriv(double a, double b, double x) {
    detail::check_transfer_args(a, b, x);
    if (x <= 0 || x >= a) return 1.0;
    return detail::transfer_half_deriv(a, b, x <= a / 2 ? x : a - x);
}

inline double yoccoz_transfer_second(double a, double b, double x) {
    detail::check_transfer_args(a, b, x);
    if (x <= 0 || x >= a) return 0.0;
    if (x <= a / 2) return detail::transfer_half_second(a, b, x);
    return -detail::transfer_half_second(a, b, a - x);
}

// The bound (6 pi / a)|b/a - 1| on |phi''_{a,b}| only holds for moderate length ratios:
// numerically it is valid for 0.1221 <= b/a <= 2.4975 and fails outside (the true
// supremum grows like (b/a)^3 for large ratios). Gap systems only use ratios near 1.
inline constexpr double second_deriv_ratio_lo = 0.1221;
inline constexpr double second_deriv_ratio_hi = 2.4975;

inline double second_deriv_bound(double a, double b) {
    if (!(a > 0 && b > 0) || !std::isfinite(a) || !std::isfinite(b))
        throw domain_error("second_deriv_bound: lengths must be positive");
    return (6 * pi / a) * std::abs(b / a - 1);
}

struct SecondDerivCheck {
    double max_sampled = 0.0;  // largest |phi''| seen by central differences
    double bound = 0.0;
    bool ok = true;
};

// Samples phi''_{a,b} by central differences of the closed-form derivative.
inline SecondDerivCheck verify_second_deriv_bound(double a, double b, int samples = 1000) {
    SecondDerivCheck r;
    r.bound = second_deriv_bound(a, b);
    const double h = 1e-6 * a;
    for (int i = 1; i < samples; ++i) {
        const double x = a * i / samples;
        const double lo = std::max(0.0, x - h), hi = std::min(a, x + h);
        const double s = (yoccoz_transfer_deriv(a, b, hi) - yoccoz_transfer_deriv(a, b, lo)) / (hi - lo);
        r.max_sampled = std::max(r.max_sampled, std::abs(s));
    }
    r.ok = r.max_sampled <= r.bound * (1 + 1e-3);
    return r;
}

// The equivariant map between two intervals: x -> J.lo + phi_{|I|,|J|}(x - I.lo).
inline double gap_transfer(const Interval& I, const Interval& J, double x) {
    return J.lo + yoccoz_transfer(I.length(), J.length(), x - I.lo);
}
inline double gap_transfer_deriv(const Interval& I, const Interval& J, double x) {
    return yoccoz_transfer_deriv(I.length(), J.length(), x - I.lo);
}

// ---------------------------------------------------------------------------
// Orientation-preserving maps of the circle R/Z or of a compact interval.
// Circle maps are represented by a degree-one lift on R.

enum class MapKind { rotation, mobius, affine, yoccoz_gap, piecewise, word };

class MapImpl {
public:
    virtual ~MapImpl() = default;
    virtual MapKind kind() const = 0;
    // Circle: lift evaluated for x in [0,1). Interval: the value.
    virtual double value(double x) const = 0;
    virtual double inverse_value(double y) const = 0;
    virtual double deriv(double x) const = 0;
    virtual double log_deriv(double x) const { return std::log(deriv(x)); }
    virtual std::string describe() const = 0;
};

class Diffeo {
public:
    Diffeo() = default;
    Diffeo(std::shared_ptr<const MapImpl> impl, bool circle, Interval dom = {0.0, 1.0})
        : impl_(std::move(impl)), circle_(circle), dom_(dom) {}

    bool is_circle() const { return circle_; }
    const Interval& domain() const { return dom_; }
    MapKind kind() const { return impl_->kind(); }
    const MapImpl& impl() const { return *impl_; }
    const std::shared_ptr<const MapImpl>& impl_ptr() const { return impl_; }
    std::string describe() const { return impl_->describe(); }

    // Lift on R for circle maps (F(x+1) = F(x)+1); plain value for interval maps.
    double lift(double x) const {
        if (!circle_) return (*this)(x);
        const double fl = std::floor(x);
        double r = x - fl;
        if (r >= 1.0) r = 0.0;
        return impl_->value(r) + fl;
    }
    double lift_inv(double y) const {
        if (!circle_) return eval_inv(y);
        // F^{-1}(y + k) = F^{-1}(y) + k, and the unit-lift inverse takes y in [F(0), F(0)+1).
        const double base = impl_->value(0.0);
        const double k = std::floor(y - base);
        return impl_->inverse_value(y - k) + k;
    }

    double operator()(double x) const { return eval(x); }
    double eval(double x) const {
        if (circle_) return frac(impl_->value(frac(x)));
        return clamp_out(impl_->value(check_in(x)));
    }
    double eval_inv(double y) const {
        if (circle_) return frac(lift_inv(frac(y)));
        return clamp_out(impl_->inverse_value(check_in(y)));
    }
    double deriv(double x) const { return impl_->deriv(circle_ ? frac(x) : check_in(x)); }
    double log_deriv(double x) const { return impl_->log_deriv(circle_ ? frac(x) : check_in(x)); }

    Diffeo inverse() const;

private:
    double check_in(double x) const {
        if (!std::isfinite(x)) throw domain_error("map evaluated at a non-finite point");
        const double tol = domain_tol * std::max(1.0, dom_.length());
        if (x < dom_.lo - tol || x > dom_.hi + tol) {
            std::ostringstream os;
            os.precision(17);
            os << "point " << x << " outside domain [" << dom_.lo << ", " << dom_.hi << "] of "
               << impl_->describe();
            throw domain_error(os.str());
        }
        return std::min(std::max(x, dom_.lo), dom_.hi);
    }
    double clamp_out(double y) const { return std::min(std::max(y, dom_.lo), dom_.hi); }

    std::shared_ptr<const MapImpl> impl_;
    bool circle_ = true;
    Interval dom_{0.0, 1.0};
};

// ---------------------------------------------------------------------------

class RotationImpl final : public MapImpl {
public:
    explicit RotationImpl(double theta) : theta_(theta) {}
    MapKind kind() const override { return MapKind::rotation; }
    double value(double x) const override { return x + theta_; }
    double inverse_value(double y) const override { return y - theta_; }
    double deriv(double) const override { return 1.0; }
    double log_deriv(double) const override { return 0.0; }
    std::string describe() const override { return "rotation(" + std::to_string(theta_) + ")"; }
    double angle() const { return theta_; }

private:
    double theta_;
};

inline Diffeo rotation(double theta) {
    require_finite(theta, "rotation");
    return Diffeo(std::make_shared<RotationImpl>(frac(theta)), true);
}

inline Diffeo identity_circle() { return rotation(0.0); }

// Real 2x2 matrix acting projectively. On the circle, x in [0,1) is the line at angle pi*x
// and the derivative is det(A)/|A v|^2. On an interval it is x -> (a x + b)/(c x + d).
struct Mat2 {
    double a = 1, b = 0, c = 0, d = 1;
    double det() const { return a * d - b * c; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 inverse() const {
        const double D = det();
        return {d / D, -b / D, -c / D, a / D};
    }
    Mat2 normalized() const {
        const double s = std::sqrt(std::abs(det()));
        return {a / s, b / s, c / s, d / s};
    }
    double trace() const { return a + d; }
};

inline Mat2 rotation_matrix(double angle) {
    return {std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle)};
}

class MobiusCircleImpl final : public MapImpl {
public:
    // `unimodular` skips renormalization for products of det-1 factors, whose entries can be large
    // enough that recomputing the determinant would cancel catastrophically.
    explicit MobiusCircleImpl(Mat2 m, bool unimodular = false)
        : m_(unimodular ? m : m.normalized()), inv_{m_.d, -m_.b, -m_.c, m_.a} {
        base_ = angle_of(m_.a, m_.c);
        inv_base_ = angle_of(inv_.a, inv_.c);
    }
    MapKind kind() const override { return MapKind::mobius; }
    double value(double x) const override { return apply(m_, base_, x); }
    // y in [F(0), F(0)+1); the answer lies in [0, 1).
    double inverse_value(double y) const override {
        double x = frac(apply(inv_, inv_base_, frac(y)));
        const double miss = apply(m_, base_, x) - y;
        if (miss > 0.5) x -= 1.0;
        if (miss < -0.5) x += 1.0;
        return x;
    }
    double deriv(double x) const override {
        const double t = pi * x;
        const double vx = m_.a * std::cos(t) + m_.b * std::sin(t);
        const double vy = m_.c * std::cos(t) + m_.d * std::sin(t);
        return 1.0 / (vx * vx + vy * vy);
    }
    double log_deriv(double x) const override {
        const double t = pi * x;
        const double vx = m_.a * std::cos(t) + m_.b * std::sin(t);
        const double vy = m_.c * std::cos(t) + m_.d * std::sin(t);
        return -std::log(vx * vx + vy * vy);
    }
    std::string describe() const override {
        std::ostringstream os;
        os << "mobius[" << m_.a << ' ' << m_.b << "; " << m_.c << ' ' << m_.d << ']';
        return os.str();
    }
    const Mat2& matrix() const { return m_; }

private:
    // Direction angle of (x, y) in units of pi, reduced to [0, 1).
    static double angle_of(double x, double y) { return frac(std::atan2(y, x) / pi); }

    // Lift of the projective action for x in [0,1): the image angle is the base
    // angle plus the counterclockwise sweep from A e0 to A v(x), which is below pi.
    static double apply(const Mat2& m, double base, double x) {
        const double t = pi * x;
        const double c = std::cos(t), s = std::sin(t);
        const double vx = m.a * c + m.b * s, vy = m.c * c + m.d * s;
        const double cross = s;  // det(m) sin(t) with det(m) = 1, without cancellation
        const double dot = m.a * vx + m.c * vy;
        double sweep = std::atan2(cross, dot);
        if (sweep < 0) sweep = 0;  // only reachable through rounding at x = 0
        return base + sweep / pi;
    }

    Mat2 m_, inv_;
    double base_, inv_base_;
};

class MobiusIntervalImpl final : public MapImpl {
public:
    MobiusIntervalImpl(Mat2 m, Interval dom) : m_(m.normalized()), inv_(m_.inverse()) {
        if (m.det() <= 0) throw domain_error("interval Mobius map must preserve orientation");
        for (double x : {dom.lo, dom.hi})
            if (m_.c * x + m_.d == 0) throw domain_error("interval Mobius map has a pole on its domain");
        if ((m_.c * dom.lo + m_.d > 0) != (m_.c * dom.hi + m_.d > 0))
            throw domain_error("interval Mobius map has a pole on its domain");
    }
    MapKind kind() const override { return MapKind::mobius; }
    double value(double x) const override { return (m_.a * x + m_.b) / (m_.c * x + m_.d); }
    double inverse_value(double y) const override { return (inv_.a * y + inv_.b) / (inv_.c * y + inv_.d); }
    double deriv(double x) const override {
        const double q = m_.c * x + m_.d;
        return 1.0 / (q * q);
    }
    double log_deriv(double x) const override { return -2.0 * std::log(std::abs(m_.c * x + m_.d)); }
    std::string describe() const override {
        std::ostringstream os;
        os << "mobius(" << m_.a << "x+" << m_.b << ")/(" << m_.c << "x+" << m_.d << ')';
        return os.str();
    }
    const Mat2& matrix() const { return m_; }

private:
    Mat2 m_, inv_;
};

inline Diffeo mobius_circle(const Mat2& m) {
    if (!(m.det() > 0)) throw domain_error("mobius_circle: determinant must be positive");
    return Diffeo(std::make_shared<MobiusCircleImpl>(m), true);
}

inline Diffeo mobius_circle_unimodular(const Mat2& m) {
    return Diffeo(std::make_shared<MobiusCircleImpl>(m, true), true);
}

inline Diffeo mobius_interval(const Mat2& m, Interval dom = {0.0, 1.0}) {
    return Diffeo(std::make_shared<MobiusIntervalImpl>(m, dom), false, dom);
}

class AffineImpl final : public MapImpl {
public:
    AffineImpl(double slope, double offset) : s_(slope), o_(offset) {}
    MapKind kind() const override { return MapKind::affine; }
    double value(double x) const override { return s_ * x + o_; }
    double inverse_value(double y) const override { return (y - o_) / s_; }
    double deriv(double) const override { return s_; }
    std::string describe() const override {
        return "affine(" + std::to_string(s_) + ", " + std::to_string(o_) + ")";
    }
    double slope() const { return s_; }
    double offset() const { return o_; }

private:
    double s_, o_;
};

// Affine maps live on an interval; a unit slope affine map may also be used on the circle.
inline Diffeo affine(double slope, double offset, Interval dom = {0.0, 1.0}) {
    if (!(slope > 0) || !std::isfinite(slope) || !std::isfinite(offset))
        throw domain_error("affine: slope must be positive and finite");
    return Diffeo(std::make_shared<AffineImpl>(slope, offset), false, dom);
}

// Closed-form pieces; a missing inverse is solved by bisection on the monotone bracket.
struct Piece {
    double lo, hi;
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::function<double(double)> inverse;  // optional
};

class PiecewiseImpl final : public MapImpl {
public:
    explicit PiecewiseImpl(std::vector<Piece> pieces, std::string name)
        : pieces_(std::move(pieces)), name_(std::move(name)) {
        if (pieces_.empty()) throw domain_error("piecewise map needs at least one piece");
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            if (!(pieces_[i].hi > pieces_[i].lo)) throw domain_error("piecewise map: empty piece");
            if (i > 0 && pieces_[i].lo != pieces_[i - 1].hi)
                throw domain_error("piecewise map: pieces must tile the domain");
            images_.push_back(pieces_[i].value(pieces_[i].lo));
        }
        images_.push_back(pieces_.back().value(pieces_.back().hi));
    }
    MapKind kind() const override { return MapKind::piecewise; }
    double value(double x) const override {
        const auto& p = locate(x);
        return p.value(x);
    }
    double deriv(double x) const override { return locate(x).deriv(x); }
    double inverse_value(double y) const override {
        std::size_t i = 0;
        while (i + 1 < pieces_.size() && y >= images_[i + 1]) ++i;
        const Piece& p = pieces_[i];
        if (p.inverse) return p.inverse(y);
        if (y <= images_[i]) return p.lo;
        if (y >= images_[i + 1]) return p.hi;
        return bisect([&](double x) { return p.value(x) - y; }, p.lo, p.hi, 0.0);
    }
    std::string describe() const override { return name_; }

private:
    const Piece& locate(double x) const {
        for (const auto& p : pieces_)
            if (x < p.hi) return p;
        return pieces_.back();
    }
    std::vector<Piece> pieces_;
    std::vector<double> images_;
    std::string name_;
};

inline Diffeo piecewise(std::vector<Piece> pieces, bool circle, std::string name = "piecewise") {
    const Interval dom{pieces.front().lo, pieces.back().hi};
    return Diffeo(std::make_shared<PiecewiseImpl>(std::move(pieces), std::move(name)), circle, dom);
}

// Increasing piecewise-linear interpolant through (xs[k], ys[k]). For circle maps xs spans
// [0,1] and ys is a lift with ys.back() = ys.front() + 1.
class PiecewiseLinearImpl final : public MapImpl {
public:
    PiecewiseLinearImpl(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        if (xs_.size() < 2 || xs_.size() != ys_.size())
            throw domain_error("piecewise-linear map needs matching node lists");
        for (std::size_t i = 1; i < xs_.size(); ++i)
            if (!(xs_[i] > xs_[i - 1]) || !(ys_[i] > ys_[i - 1]))
                throw domain_error("piecewise-linear map must be strictly increasing");
    }
    MapKind kind() const override { return MapKind::piecewise; }
    double value(double x) const override { return interp(xs_, ys_, x); }
    double inverse_value(double y) const override { return interp(ys_, xs_, y); }
    double deriv(double x) const override {
        const std::size_t i = cell(xs_, x);
        return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    }
    std::string describe() const override { return "piecewise-linear(" + std::to_string(xs_.size()) + " nodes)"; }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }

private:
    static std::size_t cell(const std::vector<double>& v, double x) {
        auto it = std::upper_bound(v.begin(), v.end(), x);
        std::size_t i = it == v.begin() ? 0 : std::size_t(it - v.begin()) - 1;
        return std::min(i, v.size() - 2);
    }
    static double interp(const std::vector<double>& u, const std::vector<double>& w, double x) {
        const std::size_t i = cell(u, x);
        const double t = (x - u[i]) / (u[i + 1] - u[i]);
        return w[i] + t * (w[i + 1] - w[i]);
    }
    std::vector<double> xs_, ys_;
};

inline Diffeo piecewise_linear(std::vector<double> xs, std::vector<double> ys, bool circle) {
    const Interval dom{xs.front(), xs.back()};
    return Diffeo(std::make_shared<PiecewiseLinearImpl>(std::move(xs), std::move(ys)), circle, dom);
}

// ---------------------------------------------------------------------------
// Words. Factors are listed in composition order: {a, b, c} is a o b o c, so the
// last factor is applied first.

struct Letter {
    Diffeo map;
    int exponent = 1;  // +1 or -1
};

class WordImpl final : public MapImpl {
public:
    WordImpl(std::vector<Letter> letters, bool circle) : letters_(std::move(letters)), circle_(circle) {
        for (const auto& l : letters_) {
            if (l.exponent != 1 && l.exponent != -1) throw domain_error("word exponents must be +1 or -1");
            if (l.map.is_circle() != circle_) throw domain_error("word mixes circle and interval maps");
        }
    }
    MapKind kind() const override { return MapKind::word; }
    double value(double x) const override {
        for (std::size_t i = letters_.size(); i-- > 0;) x = apply(letters_[i], x);
        return x;
    }
    double inverse_value(double y) const override {
        for (const auto& l : letters_) y = apply({l.map, -l.exponent}, y);
        return y;
    }
    double deriv(double x) const override { return std::exp(log_deriv(x)); }
    double log_deriv(double x) const override {
        double s = 0.0;
        for (std::size_t i = letters_.size(); i-- > 0;) {
            const auto& l = letters_[i];
            const double xr = circle_ ? frac(x) : x;
            if (l.exponent == 1) {
                s += l.map.log_deriv(xr);
            } else {
                s -= l.map.log_deriv(l.map.eval_inv(xr));
            }
            x = apply(l, x);
        }
        return s;
    }
    std::string describe() const override { return "word(" + std::to_string(letters_.size()) + " letters)"; }
    const std::vector<Letter>& letters() const { return letters_; }

private:
    double apply(const Letter& l, double x) const {
        if (circle_) return l.exponent == 1 ? l.map.lift(x) : l.map.lift_inv(x);
        return l.exponent == 1 ? l.map.eval(x) : l.map.eval_inv(x);
    }
    std::vector<Letter> letters_;
    bool circle_;
};

inline Diffeo word(std::vector<Letter> letters) {
    if (letters.empty()) throw domain_error("word: empty letter list");
    const bool circle = letters.front().map.is_circle();
    const Interval dom = letters.front().map.domain();
    return Diffeo(std::make_shared<WordImpl>(std::move(letters), circle), circle, dom);
}

inline Diffeo compose(const Diffeo& outer, const Diffeo& inner) { return word({{outer, 1}, {inner, 1}}); }

inline Diffeo Diffeo::inverse() const {
    switch (kind()) {
        case MapKind::rotation:
            return rotation(-static_cast<const RotationImpl&>(*impl_).angle());
        case MapKind::affine: {
            const auto& a = static_cast<const AffineImpl&>(*impl_);
            return affine(1.0 / a.slope(), -a.offset() / a.slope(), dom_);
        }
        case MapKind::mobius:
            if (circle_) {
                const Mat2& m = static_cast<const MobiusCircleImpl&>(*impl_).matrix();
                return mobius_circle_unimodular({m.d, -m.b, -m.c, m.a});
            }
            return mobius_interval(static_cast<const MobiusIntervalImpl&>(*impl_).matrix().inverse(), dom_);
        default:
            return word({{*this, -1}});
    }
}

// Matrix of a Mobius map or of a word made only of Mobius letters; false otherwise.
inline bool mobius_matrix(const Diffeo& f, Mat2& out) {
    if (f.kind() == MapKind::mobius) {
        out = f.is_circle() ? static_cast<const MobiusCircleImpl&>(f.impl()).matrix()
                            : static_cast<const MobiusIntervalImpl&>(f.impl()).matrix();
        return true;
    }
    if (f.kind() != MapKind::word) return false;
    Mat2 acc;
    for (const auto& l : static_cast<const WordImpl&>(f.impl()).letters()) {
        Mat2 m;
        if (!mobius_matrix(l.map, m)) return false;
        acc = (acc * (l.exponent == 1 ? m : m.inverse())).normalized();
    }
    out = acc;
    return true;
}

// ---------------------------------------------------------------------------

struct RotationNumber {
    double value = 0.0;
    double error_bound = 0.0;
};

inline RotationNumber rotation_number(const Diffeo& f, long n_iter = 1000, double x0 = 0.0) {
    if (!f.is_circle()) throw domain_error("rotation_number: circle map required");
    if (n_iter < 1000) throw domain_error("rotation_number: at least 1000 iterations required");
    double x = x0;
    for (long i = 0; i < n_iter; ++i) x = f.lift(x);
    return {frac((x - x0) / double(n_iter)), 1.0 / double(n_iter)};
}

}  // namespace denjoy
