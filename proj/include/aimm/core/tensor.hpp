#pragma once

#include <array>
#include <cmath>

namespace aimm {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    Vec2 operator-() const { return {-x, -y}; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    // z-component of the 2D cross product
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    Vec2 perp() const { return {-y, x}; }  // rotate +90 degrees
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// Dense 2x2 matrix, row major.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    Mat2() = default;
    Mat2(double a, double b, double c, double d) : a11(a), a12(b), a21(c), a22(d) {}

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 outer(Vec2 u, Vec2 v) { return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y}; }
    static Mat2 rotation(double theta) {
        double c = std::cos(theta), s = std::sin(theta);
        return {c, -s, s, c};
    }

    Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
    Mat2 operator-(const Mat2& o) const { return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22}; }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    Mat2& operator+=(const Mat2& o) { a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22; return *this; }

    Mat2 transposed() const { return {a11, a21, a12, a22}; }
    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }
    Mat2 inverse() const {
        double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
    Mat2 sym() const {
        double off = 0.5 * (a12 + a21);
        return {a11, off, off, a22};
    }
    double frobenius() const { return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22); }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// Symmetric 2x2 tensor stored as (xx, yy, xy).
struct Sym2 {
    double xx = 0.0, yy = 0.0, xy = 0.0;

    Sym2() = default;
    Sym2(double xx_, double yy_, double xy_) : xx(xx_), yy(yy_), xy(xy_) {}

    static Sym2 identity() { return {1.0, 1.0, 0.0}; }
    static Sym2 outer(Vec2 v) { return {v.x * v.x, v.y * v.y, v.x * v.y}; }
    static Sym2 from(const Mat2& m) { return {m.a11, m.a22, 0.5 * (m.a12 + m.a21)}; }

    Mat2 full() const { return {xx, xy, xy, yy}; }

    Sym2 operator+(Sym2 o) const { return {xx + o.xx, yy + o.yy, xy + o.xy}; }
    Sym2 operator-(Sym2 o) const { return {xx - o.xx, yy - o.yy, xy - o.xy}; }
    Sym2 operator*(double s) const { return {xx * s, yy * s, xy * s}; }
    Sym2& operator+=(Sym2 o) { xx += o.xx; yy += o.yy; xy += o.xy; return *this; }
    Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

    double trace() const { return xx + yy; }
    double det() const { return xx * yy - xy * xy; }
    Sym2 inverse() const {
        double d = det();
        return {yy / d, xx / d, -xy / d};
    }
    // double contraction A : B
    double ddot(Sym2 o) const { return xx * o.xx + yy * o.yy + 2.0 * xy * o.xy; }
    double quad(Vec2 v) const { return xx * v.x * v.x + yy * v.y * v.y + 2.0 * xy * v.x * v.y; }

    // Eigen-decomposition of a symmetric 2x2: eigenvalues l1 >= l2 with
    // orthonormal eigenvectors. Stable for nearly-isotropic tensors.
    void eigen(double& l1, double& l2, Vec2& v1, Vec2& v2) const {
        double tr = trace();
        double diff = xx - yy;
        double disc = std::sqrt(diff * diff + 4.0 * xy * xy);
        l1 = 0.5 * (tr + disc);
        l2 = 0.5 * (tr - disc);
        if (disc <= 1e-300 || (std::abs(xy) < 1e-15 * (std::abs(xx) + std::abs(yy) + 1e-300) &&
                               std::abs(diff) < 1e-15 * (std::abs(xx) + std::abs(yy)))) {
            v1 = {1.0, 0.0};
            v2 = {0.0, 1.0};
            return;
        }
        // eigenvector for l1: pick the better-conditioned formula
        Vec2 c1{xx - l2, xy}, c2{xy, yy - l2};
        v1 = (c1.norm2() >= c2.norm2()) ? c1 : c2;
        double n = v1.norm();
        if (n < 1e-300) {
            v1 = {1.0, 0.0};
        } else {
            v1 = v1 / n;
        }
        v2 = v1.perp();
    }

    static Sym2 from_eigen(double l1, double l2, Vec2 v1) {
        Vec2 v2 = v1.perp();
        return {l1 * v1.x * v1.x + l2 * v2.x * v2.x,
                l1 * v1.y * v1.y + l2 * v2.y * v2.y,
                l1 * v1.x * v1.y + l2 * v2.x * v2.y};
    }
};

inline Sym2 operator*(double s, Sym2 m) { return m * s; }

}  // namespace aimm
