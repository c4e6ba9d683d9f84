// The four polarimetric covariance structure classes: membership
// constraints, block-diagonalizing transforms, Gaussian log-PDF, and the
// structure-constrained weighted ML estimators used by the EM M-step (and,
// with unit weights, as the null-hypothesis MLEs).
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcm/complex3.hpp"

namespace pcm {

struct DegenerateWeights : std::runtime_error {
    DegenerateWeights() : std::runtime_error("total sample weight is numerically zero") {}
};

struct RankDeficient : std::runtime_error {
    RankDeficient() : std::runtime_error("weighted estimate is not positive definite") {}
};

/// Covariance structure class, indexed 1..4:
/// 1 = unconstrained reciprocal medium, 2 = reflection symmetry,
/// 3 = rotation symmetry, 4 = azimuth symmetry.
enum class Structure : int {
    unconstrained = 1,
    reflection = 2,
    rotation = 3,
    azimuth = 4,
};

inline constexpr std::array<Structure, 4> kAllStructures = {
    Structure::unconstrained, Structure::reflection, Structure::rotation, Structure::azimuth};

inline constexpr int index_of(Structure c) { return static_cast<int>(c); }

inline constexpr Structure structure_from_index(int i) { return static_cast<Structure>(i); }

/// Number of unknown real parameters of each structure class.
inline constexpr int param_count(Structure c) {
    switch (c) {
        case Structure::unconstrained: return 9;
        case Structure::reflection: return 5;
        case Structure::rotation: return 3;
        case Structure::azimuth: return 2;
    }
    return 0;
}

inline constexpr double kLog3Pi = 3.0 * 1.1447298858494001741434273513531;  // 3 log(pi)

/// Zero-mean circular complex Gaussian log-density at z with covariance C.
inline double log_pdf(const Vec3c& z, const Herm3& C) {
    const Lower3 L = cholesky(C);
    return -kLog3Pi - L.log_det_herm() - squared_norm(L.forward_solve(z));
}

/// Gaussian log-density with the Cholesky factor precomputed; this is the
/// form every per-sample loop uses.
struct GaussianPdf {
    Lower3 L;
    double log_det;

    explicit GaussianPdf(const Herm3& C) : L(cholesky(C)), log_det(L.log_det_herm()) {}

    double operator()(const Vec3c& z) const {
        return -kLog3Pi - log_det - squared_norm(L.forward_solve(z));
    }
};

/// Constant matrices that block-diagonalize the structured forms:
///   U C2 U+              -> [2x2 PD block, scalar]
///   V E T C3 T+ E V+     -> [scalar, 2x2 real centrosymmetric block]
///   E T C4 T+ E          -> diag(b, c, c)
struct TransformSet {
    Mat3c U, T, E, V;
};

inline const TransformSet& transforms() {
    static const TransformSet t = [] {
        TransformSet s;
        s.U = Mat3c::identity();
        s.U(1, 1) = s.U(2, 2) = 0.0;
        s.U(1, 2) = s.U(2, 1) = 1.0;
        const double r = 1.0 / std::numbers::sqrt2;
        s.T(0, 0) = r;
        s.T(0, 2) = r;
        s.T(1, 1) = 1.0;
        s.T(2, 0) = r;
        s.T(2, 2) = -r;
        s.E = Mat3c::diagonal(1.0, 1.0, r);
        s.V = Mat3c::diagonal(1.0, cplx(0.0, 1.0), 1.0);
        return s;
    }();
    return t;
}

namespace detail {

// (E T z): ((z0+z2)/sqrt2, z1, (z0-z2)/2)
inline Vec3c apply_et(const Vec3c& z) {
    const double r = 1.0 / std::numbers::sqrt2;
    Vec3c y;
    y[0] = r * (z[0] + z[2]);
    y[1] = z[1];
    y[2] = 0.5 * (z[0] - z[2]);
    return y;
}

// (V E T z): ((z0+z2)/sqrt2, j z1, (z0-z2)/2)
inline Vec3c apply_vet(const Vec3c& z) {
    Vec3c x = apply_et(z);
    x[1] = cplx(-x[1].imag(), x[1].real());
    return x;
}

// F^{-1} for the class-3 chain (T+ E^{-1} V+), cached.
inline const Mat3c& class3_back_transform() {
    static const Mat3c b = transforms().T.adjoint() *
                           Mat3c::diagonal(1.0, 1.0, std::numbers::sqrt2) *
                           transforms().V.adjoint();
    return b;
}

// T+ E^{-1} for the class-4 chain.
inline const Mat3c& class4_back_transform() {
    static const Mat3c b =
        transforms().T.adjoint() * Mat3c::diagonal(1.0, 1.0, std::numbers::sqrt2);
    return b;
}

inline Herm3 pd_safeguard(const Herm3& m) {
    // Jitter once if a pivot is below the safeguard threshold, then give up.
    const double floor = 1e-12;
    auto pivot_ok = [&](const Herm3& c) {
        try {
            Lower3 L = cholesky(c);
            return L.d[0] * L.d[0] > floor && L.d[1] * L.d[1] > floor && L.d[2] * L.d[2] > floor;
        } catch (const NotPositiveDefinite&) {
            return false;
        }
    };
    if (pivot_ok(m)) return m;
    const Herm3 jittered = m.add_scaled_identity(1e-10 * m.trace() / 3.0);
    if (pivot_ok(jittered)) return jittered;
    throw RankDeficient{};
}

}  // namespace detail

/// True iff C satisfies the zero/equality/realness constraints of the given
/// structure class within tol. Class 1 accepts any Hermitian PD matrix.
inline bool is_member(const Herm3& C, Structure c, double tol) {
    const cplx c01 = C(0, 1), c02 = C(0, 2), c12 = C(1, 2);
    switch (c) {
        case Structure::unconstrained: return true;
        case Structure::reflection: return std::abs(c01) <= tol && std::abs(c12) <= tol;
        case Structure::rotation:
            return std::abs(C.diag(0) - C.diag(2)) <= tol && std::abs(c02.imag()) <= tol &&
                   std::abs(c01.real()) <= tol && std::abs(c12 - c01) <= tol &&
                   std::abs(C.diag(1) - 0.5 * (C.diag(0) - c02.real())) <= tol;
        case Structure::azimuth:
            return std::abs(c01) <= tol && std::abs(c12) <= tol &&
                   std::abs(C.diag(0) - C.diag(2)) <= tol && std::abs(c02.imag()) <= tol &&
                   std::abs(C.diag(1) - 0.5 * (C.diag(0) - c02.real())) <= tol;
    }
    return false;
}

/// Weighted constrained ML covariance estimate for one structure class.
/// With unit weights this is the H0 MLE of the class.
inline Herm3 weighted_mle(Structure c, std::span<const Vec3c> z, std::span<const double> w) {
    const std::size_t K = z.size();
    double wsum = 0.0;
    for (double wk : w) wsum += wk;
    if (wsum < 1e-12) throw DegenerateWeights{};

    switch (c) {
        case Structure::unconstrained: {
            double d0 = 0, d1 = 0, d2 = 0;
            cplx l10 = 0, l20 = 0, l21 = 0;
            for (std::size_t k = 0; k < K; ++k) {
                const double q = w[k];
                d0 += q * std::norm(z[k][0]);
                d1 += q * std::norm(z[k][1]);
                d2 += q * std::norm(z[k][2]);
                l10 += q * z[k][1] * std::conj(z[k][0]);
                l20 += q * z[k][2] * std::conj(z[k][0]);
                l21 += q * z[k][2] * std::conj(z[k][1]);
            }
            const double s = 1.0 / wsum;
            return detail::pd_safeguard(
                Herm3::from_lower(s * d0, s * d1, s * d2, s * l10, s * l20, s * l21));
        }
        case Structure::reflection: {
            // U z = (z0, z2, z1): 2x2 block over (HH, VV), scalar over HV
            double a00 = 0, a11 = 0, d = 0;
            cplx a10 = 0;
            for (std::size_t k = 0; k < K; ++k) {
                const double q = w[k];
                a00 += q * std::norm(z[k][0]);
                a11 += q * std::norm(z[k][2]);
                a10 += q * z[k][2] * std::conj(z[k][0]);
                d += q * std::norm(z[k][1]);
            }
            const double s = 1.0 / wsum;
            return detail::pd_safeguard(
                Herm3::from_lower(s * a00, s * d, s * a11, 0.0, s * a10, 0.0));
        }
        case Structure::rotation: {
            double a = 0, beta = 0, gamma = 0;
            for (std::size_t k = 0; k < K; ++k) {
                const double q = w[k];
                const Vec3c x = detail::apply_vet(z[k]);
                a += q * std::norm(x[0]);
                beta += q * 0.5 * (std::norm(x[1]) + std::norm(x[2]));
                gamma += q * (x[1] * std::conj(x[2])).real();
            }
            const double s = 1.0 / wsum;
            Mat3c blk;
            blk(0, 0) = s * a;
            blk(1, 1) = blk(2, 2) = s * beta;
            blk(1, 2) = blk(2, 1) = s * gamma;
            const Mat3c& B = detail::class3_back_transform();
            return detail::pd_safeguard(Herm3::from_mat(B * blk * B.adjoint()));
        }
        case Structure::azimuth: {
            double b = 0, cc = 0;
            for (std::size_t k = 0; k < K; ++k) {
                const double q = w[k];
                const Vec3c y = detail::apply_et(z[k]);
                b += q * std::norm(y[0]);
                cc += q * 0.5 * (std::norm(y[1]) + std::norm(y[2]));
            }
            const double s = 1.0 / wsum;
            const Mat3c blk = Mat3c::diagonal(s * b, s * cc, s * cc);
            const Mat3c& B = detail::class4_back_transform();
            return detail::pd_safeguard(Herm3::from_mat(B * blk * B.adjoint()));
        }
    }
    throw std::logic_error("unreachable structure class");
}

inline Herm3 unit_weight_mle(Structure c, std::span<const Vec3c> z) {
    std::vector<double> w(z.size(), 1.0);
    return weighted_mle(c, z, w);
}

}  // namespace pcm
