// Closed-form 2x2 linear algebra. Every matrix in the bivariate model is
// 2x2, so nothing heavier than this is needed anywhere in the library.
#pragma once

#include <array>
#include <cmath>
#include <optional>

namespace dtaboot {

struct Vec2 {
    double a{0.0};
    double b{0.0};

    Vec2 operator+(const Vec2& o) const { return {a + o.a, b + o.b}; }
    Vec2 operator-(const Vec2& o) const { return {a - o.a, b - o.b}; }
    Vec2 operator*(double s) const { return {a * s, b * s}; }
    Vec2& operator+=(const Vec2& o) { a += o.a; b += o.b; return *this; }
    double dot(const Vec2& o) const { return a * o.a + b * o.b; }
    bool finite() const { return std::isfinite(a) && std::isfinite(b); }
};

struct Mat2 {
    // row-major: [m00 m01; m10 m11]
    double m00{0.0}, m01{0.0}, m10{0.0}, m11{0.0};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diagonal(double d0, double d1) { return {d0, 0.0, 0.0, d1}; }
    static Mat2 symmetric(double d0, double off, double d1) { return {d0, off, off, d1}; }

    double det() const { return m00 * m11 - m01 * m10; }
    double trace() const { return m00 + m11; }

    Mat2 operator+(const Mat2& o) const { return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11}; }
    Mat2 operator-(const Mat2& o) const { return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11}; }
    Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }
    Mat2& operator+=(const Mat2& o) { m00 += o.m00; m01 += o.m01; m10 += o.m10; m11 += o.m11; return *this; }

    Mat2 operator*(const Mat2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    Vec2 operator*(const Vec2& v) const { return {m00 * v.a + m01 * v.b, m10 * v.a + m11 * v.b}; }

    Mat2 transposed() const { return {m00, m10, m01, m11}; }

    bool finite() const {
        return std::isfinite(m00) && std::isfinite(m01) && std::isfinite(m10) && std::isfinite(m11);
    }

    // Inverse; nullopt when the determinant is zero or non-finite.
    std::optional<Mat2> inverse() const {
        const double d = det();
        if (d == 0.0 || !std::isfinite(d)) return std::nullopt;
        const double inv = 1.0 / d;
        return Mat2{m11 * inv, -m01 * inv, -m10 * inv, m00 * inv};
    }

    // x with A x = v, via the explicit inverse.
    std::optional<Vec2> solve(const Vec2& v) const {
        auto inv = inverse();
        if (!inv) return std::nullopt;
        return (*inv) * v;
    }

    // quadratic form v' A v
    double quad_form(const Vec2& v) const {
        return v.a * (m00 * v.a + m01 * v.b) + v.b * (m10 * v.a + m11 * v.b);
    }

    // Lower Cholesky factor of a symmetric positive definite matrix.
    std::optional<Mat2> cholesky() const {
        if (!(m00 > 0.0)) return std::nullopt;
        const double l00 = std::sqrt(m00);
        const double l10 = m10 / l00;
        const double rest = m11 - l10 * l10;
        if (!(rest > 0.0)) return std::nullopt;
        return Mat2{l00, 0.0, l10, std::sqrt(rest)};
    }

};

// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
// symmetric 2x2 matrix, closed form.
struct SymEigen {
    std::array<double, 2> values;
    Mat2 vectors; // column k is the eigenvector for values[k]
};

inline SymEigen eigen_sym(const Mat2& m) {
    const double off = 0.5 * (m.m01 + m.m10);
    const double mean = 0.5 * (m.m00 + m.m11);
    const double half_diff = 0.5 * (m.m00 - m.m11);
    const double radius = std::sqrt(half_diff * half_diff + off * off);
    const double lo = mean - radius, hi = mean + radius;
    double vx, vy; // eigenvector for hi
    if (radius == 0.0) {
        vx = 1.0; vy = 0.0;
    } else if (std::abs(half_diff + radius) >= std::abs(off)) {
        vx = half_diff + radius; vy = off;
    } else {
        vx = off; vy = radius - half_diff;
    }
    const double norm = std::sqrt(vx * vx + vy * vy);
    vx /= norm; vy /= norm;
    // eigenvector for lo is the perpendicular
    return SymEigen{{lo, hi}, Mat2{-vy, vx, vx, vy}};
}

// Square root usable for sampling: Cholesky when PD, otherwise clip negative
// eigenvalues to zero and return V * sqrt(diag(lambda)). For M = R R' draws
// mu + R z have covariance M (z standard normal pair).
inline Mat2 sampling_root(const Mat2& sym) {
    if (auto chol = sym.cholesky()) return *chol;
    const SymEigen eig = eigen_sym(sym);
    const double s0 = std::sqrt(std::max(eig.values[0], 0.0));
    const double s1 = std::sqrt(std::max(eig.values[1], 0.0));
    const Mat2& v = eig.vectors;
    return Mat2{v.m00 * s0, v.m01 * s1, v.m10 * s0, v.m11 * s1};
}

} // namespace dtaboot
