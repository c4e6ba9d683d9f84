#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcm/rng.hpp"
#include "pcm/scenario.hpp"
#include "test_support.hpp"

using namespace pcm;
namespace tt = pcm::testing;

TEST_CASE("cholesky of identity and diagonal matrices") {
    const Lower3 li = cholesky(Herm3::identity());
    CHECK(li.d[0] == doctest::Approx(1.0));
    CHECK(li.d[1] == doctest::Approx(1.0));
    CHECK(li.d[2] == doctest::Approx(1.0));
    CHECK(std::abs(li.l10) == 0.0);

    const Lower3 ld = cholesky(Herm3::diagonal(4.0, 1.0, 9.0));
    CHECK(ld.d[0] == doctest::Approx(2.0));
    CHECK(ld.d[1] == doctest::Approx(1.0));
    CHECK(ld.d[2] == doctest::Approx(3.0));
}

TEST_CASE("cholesky of the nominal C1 reproduces it on multiplication") {
    const Herm3& c1 = nominal_matrices()[0];
    const Herm3 back = cholesky(c1).multiply_adjoint();
    CHECK(back.max_abs_diff(c1) < 1e-12);
}

TEST_CASE("cholesky rejects non-PD input") {
    CHECK_THROWS_AS(cholesky(Herm3::diagonal(1.0, -1.0, 1.0)), NotPositiveDefinite);
    // indefinite despite a positive diagonal
    const Herm3 m = Herm3::from_lower(1.0, 1.0, 1.0, cplx(2.0, 0.0), 0.0, 0.0);
    CHECK_THROWS_AS(cholesky(m), NotPositiveDefinite);
}

TEST_CASE("cholesky round-trips random PD matrices") {
    RngStream rng(11);
    for (int i = 0; i < 200; ++i) {
        const Herm3 m = tt::random_structured(Structure::unconstrained, rng);
        CHECK(cholesky(m).multiply_adjoint().max_abs_diff(m) < 1e-10);
    }
}

TEST_CASE("log_det basics and cofactor oracle on C4") {
    CHECK(log_det(Herm3::identity()) == doctest::Approx(0.0));
    const double e = std::exp(1.0);
    CHECK(log_det(Herm3::diagonal(e, e, e)) == doctest::Approx(3.0));

    const Herm3& c4 = nominal_matrices()[3];
    const double oracle = std::log(tt::det3_cofactor(c4.to_mat()).real());
    CHECK(log_det(c4) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(oracle == doctest::Approx(-1.6739764335716716));
}

TEST_CASE("log_det scaling identity") {
    RngStream rng(5);
    for (int i = 0; i < 100; ++i) {
        const Herm3 m = tt::random_structured(Structure::unconstrained, rng);
        const double a = 0.1 + 3.0 * rng.uniform();
        CHECK(log_det(a * m) == doctest::Approx(3.0 * std::log(a) + log_det(m)).epsilon(1e-10));
    }
}

TEST_CASE("quad_form basics and adjugate oracle on C2") {
    Vec3c e0;
    e0[0] = 1.0;
    CHECK(quad_form(e0, Herm3::identity()) == doctest::Approx(1.0));
    CHECK(quad_form(Vec3c{}, Herm3::identity()) == doctest::Approx(0.0));

    Vec3c ones;
    ones[0] = ones[1] = ones[2] = 1.0;
    const Herm3& c2 = nominal_matrices()[1];
    CHECK(quad_form(ones, c2) ==
          doctest::Approx(tt::quad_form_oracle(ones, c2.to_mat())).epsilon(1e-12));
}

TEST_CASE("quad_form is phase invariant") {
    RngStream rng(7);
    for (int i = 0; i < 100; ++i) {
        const Herm3 m = tt::random_structured(Structure::unconstrained, rng);
        Vec3c z;
        for (int j = 0; j < 3; ++j) z[j] = cplx(rng.normal(), rng.normal());
        const double phi = 6.28 * rng.uniform();
        const cplx rot(std::cos(phi), std::sin(phi));
        Vec3c zr;
        for (int j = 0; j < 3; ++j) zr[j] = rot * z[j];
        CHECK(quad_form(zr, m) == doctest::Approx(quad_form(z, m)).epsilon(1e-12));
    }
}

TEST_CASE("rng streams are deterministic and split independently") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c(42);
    auto c1 = c.split(1), c2 = c.split(2), c1b = c.split(1);
    CHECK(c1.next_u64() == c1b.next_u64());
    CHECK(c1.next_u64() != c2.next_u64());
}

TEST_CASE("sample_gaussian is deterministic under a fixed seed") {
    RngStream a(9), b(9);
    const Vec3c za = sample_gaussian(Herm3::identity(), a);
    const Vec3c zb = sample_gaussian(Herm3::identity(), b);
    for (int i = 0; i < 3; ++i) CHECK(za[i] == zb[i]);
}

static Herm3 sample_covariance(const Herm3& m, int n, RngStream& rng) {
    std::vector<Vec3c> z(n);
    for (auto& v : z) v = sample_gaussian(m, rng);
    std::vector<double> w(n, 1.0);
    return weighted_mle(Structure::unconstrained, z, w);
}

TEST_CASE("sample covariance converges to the generator (identity and C3)") {
    RngStream rng(100);
    const Herm3 s1 = sample_covariance(Herm3::identity(), 100000, rng);
    CHECK(s1.max_abs_diff(Herm3::identity()) < 0.05);

    const Herm3& c3 = nominal_matrices()[2];
    const Herm3 s3 = sample_covariance(c3, 100000, rng);
    CHECK(s3.max_abs_diff(c3) < 0.05);
}

TEST_CASE("mean quad_form over Gaussian samples is the dimension") {
    RngStream rng(33);
    const Herm3 m = tt::random_structured(Structure::unconstrained, rng);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += quad_form(sample_gaussian(m, rng), m);
    CHECK(acc / n == doctest::Approx(3.0).epsilon(0.05 / 3.0));
}
