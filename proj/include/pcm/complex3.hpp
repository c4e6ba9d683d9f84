// 3x3 complex Hermitian linear algebra on fixed-size types.
//
// Everything in this header is sized for the three polarimetric channels
// (HH, HV, VV); no general N-dimensional code lives here.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace pcm {

using cplx = std::complex<double>;

struct NotPositiveDefinite : std::runtime_error {
    NotPositiveDefinite() : std::runtime_error("matrix is not positive definite") {}
};

/// One pixel vector: complex returns (HH, HV, VV).
struct Vec3c {
    std::array<cplx, 3> v{};

    cplx& operator[](int i) { return v[i]; }
    const cplx& operator[](int i) const { return v[i]; }
};

inline double squared_norm(const Vec3c& z) {
    return std::norm(z[0]) + std::norm(z[1]) + std::norm(z[2]);
}

/// General (non-Hermitian) 3x3 complex matrix. Used for the structure
/// transforms and for test scaffolding; not part of any hot loop.
struct Mat3c {
    std::array<std::array<cplx, 3>, 3> m{};

    cplx& operator()(int i, int j) { return m[i][j]; }
    const cplx& operator()(int i, int j) const { return m[i][j]; }

    static Mat3c identity() {
        Mat3c r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
        return r;
    }

    static Mat3c diagonal(cplx a, cplx b, cplx c) {
        Mat3c r;
        r(0, 0) = a;
        r(1, 1) = b;
        r(2, 2) = c;
        return r;
    }

    Mat3c adjoint() const {
        Mat3c r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = std::conj(m[j][i]);
        return r;
    }

    friend Mat3c operator*(const Mat3c& a, const Mat3c& b) {
        Mat3c r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                cplx s = 0.0;
                for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
                r(i, j) = s;
            }
        return r;
    }

    friend Vec3c operator*(const Mat3c& a, const Vec3c& z) {
        Vec3c r;
        for (int i = 0; i < 3; ++i)
            r[i] = a(i, 0) * z[0] + a(i, 1) * z[1] + a(i, 2) * z[2];
        return r;
    }
};

/// Hermitian 3x3 matrix stored as real diagonal plus strict lower triangle,
/// so Hermitian symmetry holds by construction rather than by arithmetic.
class Herm3 {
public:
    Herm3() = default;

    static Herm3 diagonal(double a, double b, double c) {
        Herm3 r;
        r.d_ = {a, b, c};
        return r;
    }

    static Herm3 identity() { return diagonal(1.0, 1.0, 1.0); }

    /// Build from explicit diagonal and strict lower entries l(i>j).
    static Herm3 from_lower(double d0, double d1, double d2, cplx l10, cplx l20, cplx l21) {
        Herm3 r;
        r.d_ = {d0, d1, d2};
        r.l10_ = l10;
        r.l20_ = l20;
        r.l21_ = l21;
        return r;
    }

    /// Take the Hermitian part of a general matrix (diagonal imaginary parts
    /// and upper-triangle deviations are discarded).
    static Herm3 from_mat(const Mat3c& m) {
        return from_lower(m(0, 0).real(), m(1, 1).real(), m(2, 2).real(),
                          0.5 * (m(1, 0) + std::conj(m(0, 1))),
                          0.5 * (m(2, 0) + std::conj(m(0, 2))),
                          0.5 * (m(2, 1) + std::conj(m(1, 2))));
    }

    cplx operator()(int i, int j) const {
        if (i == j) return d_[i];
        if (i > j) return lower(i, j);
        return std::conj(lower(j, i));
    }

    double diag(int i) const { return d_[i]; }

    Mat3c to_mat() const {
        Mat3c r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(i, j);
        return r;
    }

    double trace() const { return d_[0] + d_[1] + d_[2]; }

    friend Herm3 operator*(double s, const Herm3& m) {
        return from_lower(s * m.d_[0], s * m.d_[1], s * m.d_[2], s * m.l10_, s * m.l20_,
                          s * m.l21_);
    }

    Herm3 add_scaled_identity(double delta) const {
        return from_lower(d_[0] + delta, d_[1] + delta, d_[2] + delta, l10_, l20_, l21_);
    }

    double max_abs_diff(const Herm3& o) const {
        double r = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j <= i; ++j) r = std::max(r, std::abs((*this)(i, j) - o(i, j)));
        return r;
    }

private:
    cplx lower(int i, int j) const {
        if (i == 1 && j == 0) return l10_;
        if (i == 2 && j == 0) return l20_;
        return l21_;
    }

    std::array<double, 3> d_{};
    cplx l10_{}, l20_{}, l21_{};
};

/// Lower-triangular Cholesky factor with real positive diagonal.
struct Lower3 {
    std::array<double, 3> d{};  // diagonal
    cplx l10{}, l20{}, l21{};   // strict lower triangle

    double log_det_herm() const {
        // log det of L L-dagger
        return 2.0 * (std::log(d[0]) + std::log(d[1]) + std::log(d[2]));
    }

    /// Solve L x = z (forward substitution).
    Vec3c forward_solve(const Vec3c& z) const {
        Vec3c x;
        x[0] = z[0] / d[0];
        x[1] = (z[1] - l10 * x[0]) / d[1];
        x[2] = (z[2] - l20 * x[0] - l21 * x[1]) / d[2];
        return x;
    }

    /// Solve L-dagger x = z (backward substitution).
    Vec3c backward_solve(const Vec3c& z) const {
        Vec3c x;
        x[2] = z[2] / d[2];
        x[1] = (z[1] - std::conj(l21) * x[2]) / d[1];
        x[0] = (z[0] - std::conj(l10) * x[1] - std::conj(l20) * x[2]) / d[0];
        return x;
    }

    Herm3 multiply_adjoint() const {
        // L L-dagger, exact lower-triangle reconstruction
        return Herm3::from_lower(d[0] * d[0], std::norm(l10) + d[1] * d[1],
                                 std::norm(l20) + std::norm(l21) + d[2] * d[2], l10 * d[0],
                                 l20 * d[0], l21 * d[1] + l20 * std::conj(l10));
    }
};

inline constexpr double kCholeskyPivotFloor = 1e-14;

/// Cholesky factorization m = L L-dagger. Throws NotPositiveDefinite when a
/// pivot falls at or below the floor; this is the project-wide PD test.
inline Lower3 cholesky(const Herm3& m) {
    Lower3 L;
    double p0 = m.diag(0);
    if (p0 <= kCholeskyPivotFloor) throw NotPositiveDefinite{};
    L.d[0] = std::sqrt(p0);
    L.l10 = m(1, 0) / L.d[0];
    L.l20 = m(2, 0) / L.d[0];
    double p1 = m.diag(1) - std::norm(L.l10);
    if (p1 <= kCholeskyPivotFloor) throw NotPositiveDefinite{};
    L.d[1] = std::sqrt(p1);
    L.l21 = (m(2, 1) - L.l20 * std::conj(L.l10)) / L.d[1];
    double p2 = m.diag(2) - std::norm(L.l20) - std::norm(L.l21);
    if (p2 <= kCholeskyPivotFloor) throw NotPositiveDefinite{};
    L.d[2] = std::sqrt(p2);
    return L;
}

inline bool is_positive_definite(const Herm3& m) {
    try {
        (void)cholesky(m);
        return true;
    } catch (const NotPositiveDefinite&) {
        return false;
    }
}

inline double log_det(const Herm3& m) { return cholesky(m).log_det_herm(); }

/// z-dagger m^{-1} z via Cholesky solves; real and nonnegative.
inline double quad_form(const Vec3c& z, const Herm3& m) {
    const Vec3c y = cholesky(m).forward_solve(z);
    return squared_norm(y);
}

}  // namespace pcm
