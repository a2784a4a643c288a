#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace pipeflow::num {

struct RootOptions {
    double x_tol = 1e-14;
    double f_tol = 1e-13;
    int max_iter = 200;
};

/// Root of f on [lo, hi] given f(lo) and f(hi) of opposite (or zero) sign.
/// `f` returns (value, derivative); Newton steps are taken when they stay
/// inside the current bracket, bisection otherwise.
double newton_bisect(const std::function<std::pair<double, double>(double)>& f,
                     double lo, double hi, double x0,
                     const RootOptions& opt = {});

/// Plain bisection for derivative-free residuals.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              const RootOptions& opt = {});

/// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth = 48);

/// Dense ODE output: accepted nodes plus slopes, evaluated in between by
/// cubic Hermite interpolation.
struct OdeSolution {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yp;

    double front_x() const { return x.front(); }
    double back_x() const { return x.back(); }
    double front_y() const { return y.front(); }
    double back_y() const { return y.back(); }
    double value_at(double xq) const;
    double slope_at(double xq) const;
};

/// Adaptive Dormand-Prince 5(4) for a scalar ODE y' = f(x, y) from x0 to x1
/// (either direction). `guard` is invoked at every accepted node and may
/// throw to abort the integration.
OdeSolution integrate_ode(const std::function<double(double, double)>& f,
                          double x0, double x1, double y0, double rel_tol,
                          double abs_tol,
                          const std::function<void(double, double)>& guard = {});

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> xs, std::vector<double> ys);
    double eval(double x) const;
    double deriv(double x) const;
    double deriv2(double x) const;

private:
    std::size_t segment(double x) const;
    std::vector<double> x_, y_, m_; // m_ = second derivatives at nodes
};

/// Monotonicity-preserving C1 piecewise-cubic interpolant
/// (Fritsch-Carlson slopes).
class Pchip {
public:
    Pchip() = default;
    Pchip(std::vector<double> xs, std::vector<double> ys);
    double eval(double x) const;

private:
    std::vector<double> x_, y_, d_;
};

std::uint64_t fnv1a(std::string_view s);

} // namespace pipeflow::num
