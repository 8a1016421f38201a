#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "charfront/linalg.hpp"

namespace charfront {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
};

LinearFit linear_fit(const Vec& x, const Vec& y);

// Slope of log|y| against log|x|, skipping non-positive entries.
LinearFit loglog_fit(const Vec& x, const Vec& y);

// Second-order derivative of samples on a non-uniform grid.
Vec gradient(const Vec& t, const Vec& y);
Vec cumulative_trapezoid(const Vec& t, const Vec& f);

Vec linspace(double a, double b, std::size_t n);
Vec geomspace(double a, double b, std::size_t n);

// Root of f on [a, b] with f(a) f(b) <= 0; Newton steps when df is supplied and
// the step stays inside the bracket, bisection otherwise.
double bracketed_root(const std::function<double(double)>& f,
                      const std::function<double(double)>& df, double a, double b,
                      double xtol = 1e-15, int max_iter = 200);

// Golden-section minimization of f on [a, b] down to a bracket of width tol.
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol);

// Gauss-Legendre rule of order q on [0, 1].
struct QuadratureRule {
    Vec nodes;
    Vec weights;
};
const QuadratureRule& gauss_legendre_unit(int q);

// Monotone piecewise cubic (Fritsch-Carlson) slopes for data y on knots x.
void pchip_slopes(const double* x, const double* y, std::size_t n, double* d,
                  std::size_t stride = 1);

// Evaluate a monotone cubic on interval k (x[k] <= xq <= x[k+1]).
inline double hermite_eval(double x0, double x1, double y0, double y1, double d0, double d1,
                           double xq) {
    const double h = x1 - x0;
    const double s = (xq - x0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * d1;
}

// Index k with x[k] <= xq < x[k+1], clamped to [0, n-2].
std::size_t locate(const double* x, std::size_t n, double xq);

// 1-D monotone cubic interpolant with clamped extrapolation.
class Pchip {
public:
    Pchip() = default;
    Pchip(Vec x, Vec y);
    double operator()(double xq) const;
    double derivative(double xq) const;
    const Vec& knots() const { return x_; }
    const Vec& values() const { return y_; }

private:
    Vec x_, y_, d_;
};

}  // namespace charfront
