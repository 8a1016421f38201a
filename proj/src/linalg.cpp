#include "charfront/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "charfront/errors.hpp"

namespace charfront {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const Vec& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Vec Matrix::column(std::size_t j) const {
    Vec v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

Vec Matrix::row(std::size_t i) const {
    return Vec(data_.begin() + static_cast<long>(i * cols_),
               data_.begin() + static_cast<long>((i + 1) * cols_));
}

void Matrix::set_column(std::size_t j, const Vec& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vec operator*(const Matrix& a, const Vec& x) {
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
    return c;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) *= s;
    return c;
}

Vec operator+(const Vec& a, const Vec& b) {
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Vec operator-(const Vec& a, const Vec& b) {
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

Vec operator*(double s, const Vec& a) {
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = s * a[i];
    return c;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

LU::LU(const Matrix& a) : lu_(a), piv_(a.rows()) {
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) piv_[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu_(i, k)) > best) best = std::abs(lu_(i, k)), p = i;
        if (best == 0.0) {
            singular_ = true;
            continue;
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
            std::swap(piv_[k], piv_[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu_(i, k) / lu_(k, k);
            lu_(i, k) = f;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
        }
    }
}

Vec LU::solve(const Vec& b) const {
    if (singular_) throw std::runtime_error("LU: singular matrix");
    const std::size_t n = lu_.rows();
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[piv_[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu_(ii, j) * x[j];
        x[ii] /= lu_(ii, ii);
    }
    return x;
}

Matrix LU::inverse() const {
    const std::size_t n = lu_.rows();
    Matrix inv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vec e(n, 0.0);
        e[j] = 1.0;
        inv.set_column(j, solve(e));
    }
    return inv;
}

Vec solve(const Matrix& a, const Vec& b) { return LU(a).solve(b); }
Matrix inverse(const Matrix& a) { return LU(a).inverse(); }

namespace {

void hessenberg(Matrix& h) {
    const std::size_t n = h.rows();
    if (n < 3) return;
    const double tiny = std::numeric_limits<double>::epsilon() * 1e-3 * std::max(h.max_abs(), 1e-300);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) scale = std::max(scale, std::abs(h(i, k)));
        if (scale <= tiny) {
            for (std::size_t i = k + 1; i < n; ++i) h(i, k) = 0.0;
            continue;
        }
        double alpha = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) alpha += h(i, k) * h(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;
        if (h(k + 1, k) > 0) alpha = -alpha;
        Vec v(n, 0.0);
        v[k + 1] = h(k + 1, k) - alpha;
        for (std::size_t i = k + 2; i < n; ++i) v[i] = h(i, k);
        const double vv = dot(v, v);
        if (vv == 0.0) continue;
        // H <- P H P with P = I - 2 v v^T / (v^T v)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h(i, j);
            s *= 2.0 / vv;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j];
            s *= 2.0 / vv;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

// Eigenvalues of [[a, b], [c, d]]; false if complex.
bool eig2(double a, double b, double c, double d, double& l1, double& l2) {
    const double half = 0.5 * (a - d);
    const double disc = half * half + b * c;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), 1e-300});
    if (disc < -1e-14 * scale * scale) return false;
    const double r = std::sqrt(std::max(disc, 0.0));
    const double m = 0.5 * (a + d);
    l1 = m - r;
    l2 = m + r;
    return true;
}

}  // namespace

Vec real_eigenvalues(const Matrix& a) {
    const std::size_t n = a.rows();
    Vec out;
    out.reserve(n);
    if (n == 0) return out;
    if (n == 1) return {a(0, 0)};
    Matrix h = a;
    hessenberg(h);
    const double eps = std::numeric_limits<double>::epsilon();
    const double anorm = std::max(h.max_abs(), 1e-300);
    long hi = static_cast<long>(n) - 1;
    int iter = 0;
    while (hi >= 0) {
        if (hi == 0) {
            out.push_back(h(0, 0));
            break;
        }
        long l = hi;
        while (l > 0) {
            const double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
            if (std::abs(h(l, l - 1)) <= eps * (s == 0.0 ? anorm : s)) break;
            --l;
        }
        if (l == hi) {
            out.push_back(h(hi, hi));
            --hi;
            iter = 0;
            continue;
        }
        if (l == hi - 1) {
            double l1, l2;
            if (!eig2(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi), l1, l2))
                throw Error(ErrorCode::NonHyperbolic, "complex eigenvalue pair");
            out.push_back(l1);
            out.push_back(l2);
            hi -= 2;
            iter = 0;
            continue;
        }
        if (++iter > 60 * static_cast<int>(n))
            throw Error(ErrorCode::NonHyperbolic, "QR iteration did not converge");
        double mu;
        double l1, l2;
        const double a11 = h(hi - 1, hi - 1), a12 = h(hi - 1, hi), a21 = h(hi, hi - 1),
                     a22 = h(hi, hi);
        if (iter % 11 == 0) {
            mu = a22 + 0.75 * std::abs(a21);
        } else if (eig2(a11, a12, a21, a22, l1, l2)) {
            mu = (std::abs(l1 - a22) < std::abs(l2 - a22)) ? l1 : l2;
        } else {
            mu = 0.5 * (a11 + a22);
        }
        const std::size_t lo = static_cast<std::size_t>(l), up = static_cast<std::size_t>(hi);
        for (std::size_t k = lo; k <= up; ++k) h(k, k) -= mu;
        std::vector<double> cs(up - lo), sn(up - lo);
        for (std::size_t k = lo; k < up; ++k) {
            const double x = h(k, k), y = h(k + 1, k);
            const double r = std::hypot(x, y);
            const double c = r == 0.0 ? 1.0 : x / r, s = r == 0.0 ? 0.0 : y / r;
            cs[k - lo] = c;
            sn[k - lo] = s;
            for (std::size_t j = k; j <= up; ++j) {
                const double t1 = h(k, j), t2 = h(k + 1, j);
                h(k, j) = c * t1 + s * t2;
                h(k + 1, j) = -s * t1 + c * t2;
            }
        }
        for (std::size_t k = lo; k < up; ++k) {
            const double c = cs[k - lo], s = sn[k - lo];
            const std::size_t imax = std::min(k + 2, up);
            for (std::size_t i = lo; i <= imax; ++i) {
                const double t1 = h(i, k), t2 = h(i, k + 1);
                h(i, k) = c * t1 + s * t2;
                h(i, k + 1) = -s * t1 + c * t2;
            }
        }
        for (std::size_t k = lo; k <= up; ++k) h(k, k) += mu;
    }
    std::sort(out.begin(), out.end());
    return out;
}

EigenSystem eigensystem(const Matrix& a, double gap_tol) {
    const std::size_t n = a.rows();
    EigenSystem es;
    es.lambdas = real_eigenvalues(a);
    const double scale = 1.0 + a.max_abs();
    for (std::size_t k = 1; k < n; ++k)
        if (es.lambdas[k] - es.lambdas[k - 1] < gap_tol * scale)
            throw Error(ErrorCode::NonHyperbolic, "repeated eigenvalue");
    es.rights = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = es.lambdas[k];
        double gap = std::numeric_limits<double>::infinity();
        if (k > 0) gap = std::min(gap, lam - es.lambdas[k - 1]);
        if (k + 1 < n) gap = std::min(gap, es.lambdas[k + 1] - lam);
        double shift = 1e-10 * scale;
        if (std::isfinite(gap)) shift = std::min(shift, 1e-3 * gap);
        Matrix m = a;
        for (std::size_t i = 0; i < n; ++i) m(i, i) -= lam + shift;
        LU lu(m);
        if (lu.singular()) {
            for (std::size_t i = 0; i < n; ++i) m(i, i) -= shift;
            lu = LU(m);
        }
        Vec x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i);
        for (int it = 0; it < 3; ++it) {
            x = lu.solve(x);
            const double nx = norm2(x);
            for (double& xi : x) xi /= nx;
        }
        std::size_t imax = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(x[i]) > std::abs(x[imax]) * (1.0 + 1e-12)) imax = i;
        if (x[imax] < 0)
            for (double& xi : x) xi = -xi;
        es.rights.set_column(k, x);
    }
    es.lefts = inverse(es.rights);
    // Rayleigh polish with the bi-orthonormal pair.
    for (std::size_t k = 0; k < n; ++k) {
        const Vec ar = a * es.rights.column(k);
        es.lambdas[k] = dot(es.lefts.row(k), ar);
    }
    return es;
}

}  // namespace charfront
