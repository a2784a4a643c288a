#include "pipeflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pipeflow/errors.hpp"

namespace pipeflow::num {

double newton_bisect(const std::function<std::pair<double, double>(double)>& f,
                     double lo, double hi, double x0, const RootOptions& opt) {
    auto [flo, dlo] = f(lo);
    (void)dlo;
    if (flo == 0.0) return lo;
    auto [fhi, dhi] = f(hi);
    (void)dhi;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw SolverDomainError("newton_bisect: endpoints do not bracket a root");

    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < opt.max_iter; ++it) {
        auto [fx, dfx] = f(x);
        if (std::abs(fx) <= opt.f_tol) return x;
        if (fx * flo < 0.0) {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }
        double step = (dfx != 0.0) ? x - fx / dfx : lo - 1.0;
        if (step <= lo || step >= hi || !std::isfinite(step))
            step = 0.5 * (lo + hi);
        if (std::abs(step - x) <= opt.x_tol * std::max(1.0, std::abs(x))) {
            x = step;
            auto [fv, dv] = f(x);
            (void)dv;
            if (std::abs(fv) <= std::max(opt.f_tol, 1e2 * opt.f_tol)) return x;
        }
        x = step;
    }
    return x;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              const RootOptions& opt) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw SolverDomainError("bisect: endpoints do not bracket a root");
    for (int it = 0; it < opt.max_iter * 4; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0 || hi - lo <= opt.x_tol * std::max(1.0, std::abs(mid)))
            return mid;
        if (fm * flo < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa,
                   double b, double fb, double m, double fm, double whole,
                   double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

double OdeSolution::value_at(double xq) const {
    if (x.size() == 1) return y.front();
    bool fwd = x.back() >= x.front();
    std::size_t i = 0;
    if (fwd) {
        auto it = std::upper_bound(x.begin(), x.end(), xq);
        i = (it == x.begin()) ? 0 : (std::size_t)(it - x.begin()) - 1;
    } else {
        auto it = std::upper_bound(x.begin(), x.end(), xq, std::greater<>());
        i = (it == x.begin()) ? 0 : (std::size_t)(it - x.begin()) - 1;
    }
    i = std::min(i, x.size() - 2);
    double h = x[i + 1] - x[i];
    if (h == 0.0) return y[i];
    double s = (xq - x[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    return h00 * y[i] + h10 * h * yp[i] + h01 * y[i + 1] + h11 * h * yp[i + 1];
}

double OdeSolution::slope_at(double xq) const {
    if (x.size() == 1) return yp.front();
    bool fwd = x.back() >= x.front();
    std::size_t i = 0;
    if (fwd) {
        auto it = std::upper_bound(x.begin(), x.end(), xq);
        i = (it == x.begin()) ? 0 : (std::size_t)(it - x.begin()) - 1;
    } else {
        auto it = std::upper_bound(x.begin(), x.end(), xq, std::greater<>());
        i = (it == x.begin()) ? 0 : (std::size_t)(it - x.begin()) - 1;
    }
    i = std::min(i, x.size() - 2);
    double h = x[i + 1] - x[i];
    if (h == 0.0) return yp[i];
    double s = (xq - x[i]) / h;
    double d00 = (6 * s * s - 6 * s) / h;
    double d10 = 3 * s * s - 4 * s + 1;
    double d01 = (6 * s - 6 * s * s) / h;
    double d11 = 3 * s * s - 2 * s;
    return d00 * y[i] + d10 * yp[i] + d01 * y[i + 1] + d11 * yp[i + 1];
}

OdeSolution integrate_ode(const std::function<double(double, double)>& f,
                          double x0, double x1, double y0, double rel_tol,
                          double abs_tol,
                          const std::function<void(double, double)>& guard) {
    // Dormand-Prince 5(4) coefficients.
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeSolution sol;
    double dir = (x1 >= x0) ? 1.0 : -1.0;
    double span = std::abs(x1 - x0);
    double x = x0, y = y0;
    double k1 = f(x, y);
    if (guard) guard(x, y);
    sol.x.push_back(x);
    sol.y.push_back(y);
    sol.yp.push_back(k1);
    if (span == 0.0) return sol;

    double h = dir * std::min(span, std::max(1e-8, 0.05 * span));
    const double h_min = 1e-14 * std::max(1.0, span);
    int steps = 0;
    const int max_steps = 2000000;

    while (dir * (x1 - x) > 0.0) {
        if (++steps > max_steps)
            throw SolverDomainError("integrate_ode: step limit exceeded");
        if (dir * (x + h - x1) > 0.0) h = x1 - x;

        double k2 = f(x + c2 * h, y + h * a21 * k1);
        double k3 = f(x + c3 * h, y + h * (a31 * k1 + a32 * k2));
        double k4 = f(x + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        double k5 =
            f(x + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        double k6 = f(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 +
                                      a64 * k4 + a65 * k5));
        double y5 =
            y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        double k7 = f(x + h, y5);
        double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 +
                          e7 * k7);
        double scale = abs_tol + rel_tol * std::max(std::abs(y), std::abs(y5));
        double ratio = std::abs(err) / scale;

        if (ratio <= 1.0) {
            x += h;
            y = y5;
            k1 = k7;
            if (guard) guard(x, y);
            sol.x.push_back(x);
            sol.y.push_back(y);
            sol.yp.push_back(k1);
        }
        double fac = (ratio > 0.0) ? 0.9 * std::pow(ratio, -0.2) : 5.0;
        fac = std::clamp(fac, 0.2, 5.0);
        h *= fac;
        if (std::abs(h) < h_min)
            throw SolverDomainError("integrate_ode: step size underflow");
    }
    return sol;
}

CubicSpline::CubicSpline(std::vector<double> xs, std::vector<double> ys)
    : x_(std::move(xs)), y_(std::move(ys)) {
    std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw ConfigError("CubicSpline: need at least two nodes");
    m_.assign(n, 0.0);
    if (n == 2) return;
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
        a[i] = hl;
        b[i] = 2.0 * (hl + hr);
        c[i] = hr;
        d[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
    }
    // Thomas solve on interior nodes, natural boundary (m_0 = m_{n-1} = 0).
    for (std::size_t i = 2; i + 1 < n; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    if (n >= 3) {
        m_[n - 2] = d[n - 2] / b[n - 2];
        for (std::size_t i = n - 3; i >= 1; --i) {
            m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
            if (i == 1) break;
        }
    }
}

std::size_t CubicSpline::segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = (it == x_.begin()) ? 0 : (std::size_t)(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double CubicSpline::eval(double x) const {
    std::size_t i = segment(x);
    double h = x_[i + 1] - x_[i];
    double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::deriv(double x) const {
    std::size_t i = segment(x);
    double h = x_[i + 1] - x_[i];
    double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           ((3 * B * B - 1) * m_[i + 1] - (3 * A * A - 1) * m_[i]) * h / 6.0;
}

double CubicSpline::deriv2(double x) const {
    std::size_t i = segment(x);
    double h = x_[i + 1] - x_[i];
    double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return A * m_[i] + B * m_[i + 1];
}

Pchip::Pchip(std::vector<double> xs, std::vector<double> ys)
    : x_(std::move(xs)), y_(std::move(ys)) {
    std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw ConfigError("Pchip: need two nodes");
    d_.assign(n, 0.0);
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        slope[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    d_[0] = slope[0];
    d_[n - 1] = slope[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (slope[i - 1] * slope[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            double w1 = 2.0 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
            double w2 = (x_[i + 1] - x_[i]) + 2.0 * (x_[i] - x_[i - 1]);
            d_[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
        }
    }
}

double Pchip::eval(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = (it == x_.begin()) ? 0 : (std::size_t)(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    double h = x_[i + 1] - x_[i];
    double s = (x - x_[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace pipeflow::num
