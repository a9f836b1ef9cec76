#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hypokit/certificate.hpp"
#include "hypokit/errors.hpp"
#include "hypokit/exactsolver.hpp"
#include "hypokit/grid.hpp"
#include "hypokit/operators.hpp"
#include "hypokit/rng.hpp"

#include "test_support.hpp"

using namespace hypokit;

namespace {

ProblemParams params(int k, double M, double kappa) {
    ProblemParams p;
    p.k = k;
    p.M = M;
    if (kappa > 0.0) p.kappa = kappa;
    return p;
}

// Independent smallest-eigenvalue for symmetric 3x3 via the trigonometric
// solution of the characteristic cubic.
double min_eig3(const double m[3][3]) {
    const double q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    double b[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = m[i][j] - (i == j ? q : 0.0);
    double p2 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p2 += b[i][j] * b[i][j];
    const double p = std::sqrt(p2 / 6.0);
    if (p < 1e-300) return q;
    double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                 b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                 b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    double r = det / (2.0 * p * p * p);
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}

} // namespace

TEST_CASE("base certificates: k = 0") {
    const auto hypo = build_hypocoercivity_certificate(params(0, 1.0, 1.0));
    CHECK(hypo.levels.empty());
    CHECK(hypo.lambda_final > 0.0);

    const auto herau = build_herau_certificate(params(0, 1.0, 0.0));
    CHECK(herau.levels.empty());
    CHECK(herau.Lambda0 == 2.0);
}

TEST_CASE("k = 1, M = 1 coefficient ratios") {
    const auto cert = build_hypocoercivity_certificate(params(1, 1.0, 1.0));
    REQUIRE(cert.levels.size() == 1);
    const auto& lev = cert.levels[0];
    const double w = lev.omega_mix;
    CHECK(lev.omega_diag[0] == doctest::Approx(64.0 * w).epsilon(1e-15));
    CHECK(lev.omega_diag[1] == doctest::Approx(w / 16.0).epsilon(1e-15));
    // product identity, exact in the rational ratios
    CHECK(lev.ratio_low * lev.ratio_top == Rational(4));
    CHECK(lev.eta == doctest::Approx(1.0 / 64.0));
}

TEST_CASE("K0 closed form at k = 1, M = 1 equals 388") {
    const auto cert = build_herau_certificate(params(1, 1.0, 0.0));
    REQUIRE(cert.levels.size() == 1);
    CHECK(cert.levels[0].K0 == doctest::Approx(388.0).epsilon(1e-14));
}

TEST_CASE("k = 5, M = 100 recursion stays strictly positive") {
    const auto cert = build_hypocoercivity_certificate(params(5, 100.0, 0.5));
    REQUIRE(cert.levels.size() == 5);
    for (const auto& lev : cert.levels) {
        CHECK(lev.omega_mix > 0.0);
        CHECK(lev.lambda_l0 > 0.0);
        for (double w : lev.omega_diag) CHECK(w > 0.0);
    }
    CHECK(cert.lambda_final > 0.0);
}

TEST_CASE("k = 3, M = 10 time-weighted recursion") {
    const auto cert = build_herau_certificate(params(3, 10.0, 0.0));
    REQUIRE(cert.levels.size() == 3);
    for (const auto& lev : cert.levels) {
        CHECK(lev.sigma_mix > 0.0);
        CHECK(lev.Lambda > 0.0);
    }
    CHECK(cert.levels[2].Lambda <= cert.levels[1].Lambda / 2.0 * (1 + 1e-15));
}

TEST_CASE("exact ratio identities and monotone rates, k <= 8, M in {1,10,100}") {
    for (double M : {1.0, 10.0, 100.0}) {
        for (int k = 1; k <= 8; ++k) {
            const auto hypo = build_hypocoercivity_certificate(params(k, M, 1.0));
            const auto herau = build_herau_certificate(params(k, M, 0.0));
            double prev_lambda = 1.0, prev_Lambda = 2.0;
            for (int l = 1; l <= k; ++l) {
                const auto& hl = hypo.levels[l - 1];
                const auto& sl = herau.levels[l - 1];
                const Rational expect_low =
                    Rational(64) * Rational(l) * Rational(l) * Rational::from_double(M);
                CHECK(hl.ratio_low == expect_low);
                CHECK(hl.ratio_low * hl.ratio_top == Rational(4));
                CHECK(sl.ratio_low * sl.ratio_top == Rational(4));
                // sigma_{l,l-1} sigma_{l,l} >= 4 sigma_l^2 (equality by the ratios)
                CHECK(Rational(4) <= sl.ratio_low * sl.ratio_top);
                CHECK(hl.lambda_l0 > 0.0);
                CHECK(hl.lambda_l0 <= prev_lambda);
                CHECK(sl.Lambda > 0.0);
                CHECK(sl.Lambda <= prev_Lambda);
                prev_lambda = hl.lambda_l0;
                prev_Lambda = sl.Lambda;
            }
        }
    }
}

TEST_CASE("missing kappa is a configuration error; bad params rejected") {
    ProblemParams p;
    p.k = 2;
    p.M = 1.0;
    CHECK_THROWS_AS(build_hypocoercivity_certificate(p), ConfigurationError);
    CHECK_NOTHROW(build_herau_certificate(p)); // kappa ignored there
    CHECK_THROWS_AS(build_herau_certificate(params(1, 0.5, 0.0)), ParameterError);
    CHECK_THROWS_AS(build_hypocoercivity_certificate(params(-1, 1.0, 1.0)), ParameterError);
}

TEST_CASE("triangular positivity: pinned instance a = 1, M = 1") {
    const auto inst = TriangularFormInstance::make(1.0, 1.0);
    CHECK(inst.b == doctest::Approx(1.0 / 64.0).epsilon(1e-15));
    CHECK(inst.c == doctest::Approx(1.0 / 1024.0).epsilon(1e-15));
    CHECK(inst.matrix[1][0] == doctest::Approx(-inst.b));
    CHECK(inst.matrix[2][0] == doctest::Approx(-2.0 * inst.c));
    CHECK(inst.matrix[2][1] == doctest::Approx(-2.0 * inst.b));
    const auto res = check_triangular_positivity(inst);
    CHECK(res.passed);
    CHECK(res.criterion_passed);
    CHECK(res.min_eigenvalue >= -1e-12);
}

TEST_CASE("triangular positivity: degenerate scale rejected") {
    CHECK_THROWS_AS(TriangularFormInstance::make(0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(TriangularFormInstance::make(1.0, 0.5), ParameterError);
}

TEST_CASE("triangular positivity: M in {4, 100} and independent eigenvalue oracle") {
    for (double M : {4.0, 100.0}) {
        const auto inst = TriangularFormInstance::make(1.0, M);
        const auto res = check_triangular_positivity(inst);
        CHECK(res.passed);
        CHECK(res.criterion_passed);
        // independent check through the characteristic cubic
        double q[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                q[i][j] = 0.5 * (inst.matrix[i][j] + inst.matrix[j][i]) -
                          (i == j ? inst.diag_bound[i] : 0.0);
        const double oracle = min_eig3(q);
        CHECK(res.min_eigenvalue == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(oracle >= -1e-12);
    }
}

TEST_CASE("triangular positivity: 1000 random instances") {
    CounterRng rng(20240901, 1);
    for (int i = 0; i < 1000; ++i) {
        const double a = 1e3 * rng.uniform(2 * i) + 1e-6;
        const double M = 1.0 + 999.0 * rng.uniform(2 * i + 1);
        const auto res = check_triangular_positivity(TriangularFormInstance::make(a, M));
        REQUIRE(res.passed);
    }
}

TEST_CASE("twisted inner product: trivial cases") {
    const auto cert = build_hypocoercivity_certificate(params(1, 1.0, 1.0));

    NormAggregates too_small(0); // k = 0 aggregates cannot feed a k = 1 norm
    CHECK_THROWS_AS(twisted_hk_inner(too_small, cert), DataError);
    CHECK_THROWS_AS(
        herau_functional(0.5, too_small, build_herau_certificate(params(1, 1.0, 0.0))),
        DataError);

    NormAggregates constant(1);
    constant.seminorm(0, 0) = 1.0;
    CHECK(twisted_hk_inner(constant, cert) == doctest::Approx(1.0));

    NormAggregates diag(1);
    diag.seminorm(0, 0) = 0.0;
    diag.seminorm(0, 1) = 1.0; // || grad_v h ||
    diag.seminorm(1, 0) = 1.0; // || grad_x h ||
    diag.mixed[1] = 0.0;
    const double expect = cert.levels[0].omega_diag[0] + cert.levels[0].omega_diag[1];
    CHECK(twisted_hk_inner(diag, cert) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("twisted inner product on a sampled Hermite function vs direct sum") {
    const auto cert = build_hypocoercivity_certificate(params(2, 1.0, 1.0));
    auto geom = testsup::make_geom(192, 8.0, PotentialSpec::quadratic(1.0));
    auto h = GridFunction::sample(geom, [](const double* x, const double* v) {
        return testsup::hermite(2, x[0]) * testsup::hermite(1, v[0]) *
               std::exp(-(x[0] * x[0] + v[0] * v[0]) / 8.0);
    });
    const auto agg = compute_norm_aggregates(h, 2);
    // direct quadrature of the defining sum, term by term
    double direct = agg.seminorm(0, 0) * agg.seminorm(0, 0);
    for (int l = 1; l <= 2; ++l) {
        for (int i = 0; i <= l; ++i)
            direct += cert.levels[l - 1].omega_diag[i] * agg.seminorm(i, l - i) *
                      agg.seminorm(i, l - i);
        direct += 2.0 * cert.levels[l - 1].omega_mix * agg.mixed[l];
    }
    const double lib = twisted_hk_inner(agg, cert);
    CHECK(std::abs(lib - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("twisted norm equivalence holds on random grid functions") {
    const auto cert = build_hypocoercivity_certificate(params(2, 1.0, 1.0));
    auto geom = testsup::make_geom(128, 7.0, PotentialSpec::quadratic(1.0));
    CounterRng rng(5150, 2);
    for (int inst = 0; inst < 5; ++inst) {
        const double ax = 0.5 + 0.5 * rng.uniform(4 * inst);
        const double av = 0.5 + 0.5 * rng.uniform(4 * inst + 1);
        const double cx = rng.uniform(4 * inst + 2) - 0.5;
        const double cv = rng.uniform(4 * inst + 3) - 0.5;
        auto h = GridFunction::sample(geom, [&](const double* x, const double* v) {
            return (1.0 + 0.3 * x[0] - 0.2 * v[0]) *
                   std::exp(-ax * (x[0] - cx) * (x[0] - cx) -
                            av * (v[0] - cv) * (v[0] - cv));
        });
        const auto agg = compute_norm_aggregates(h, 2);
        const double tw = twisted_hk_inner(agg, cert);
        const double plain = plain_hk_norm_sq(agg, 2);
        CHECK(tw >= cert.norm_equivalence.c1 * plain * (1.0 - 1e-12));
        CHECK(tw <= cert.norm_equivalence.c2 * plain * (1.0 + 1e-12));
    }
}

TEST_CASE("time-weighted functional: limits, pinned value, domain, monotonicity") {
    const auto cert = build_herau_certificate(params(1, 1.0, 0.0));

    NormAggregates unit(1);
    unit.seminorm(0, 0) = 1.0;
    unit.seminorm(0, 1) = 1.0;
    unit.seminorm(1, 0) = 1.0;
    unit.mixed[1] = 0.0;

    // t -> 0+: weighted terms vanish
    CHECK(herau_functional(1e-9, unit, cert) ==
          doctest::Approx(1.0).epsilon(1e-8));
    // t = 1, unit seminorms, zero mixed term
    const double expect = 1.0 + cert.levels[0].sigma_diag[0] + cert.levels[0].sigma_diag[1];
    CHECK(herau_functional(1.0, unit, cert) == doctest::Approx(expect).epsilon(1e-14));

    CHECK_THROWS_AS(herau_functional(0.0, unit, cert), DomainError);
    CHECK_THROWS_AS(herau_functional(1.5, unit, cert), DomainError);

    // increasing any sigma coefficient increases F when the mixed term is >= 0
    auto bumped = cert;
    bumped.levels[0].sigma_diag[0] *= 1.5;
    CHECK(herau_functional(0.5, unit, bumped) > herau_functional(0.5, unit, cert));
    auto bumped2 = cert;
    bumped2.levels[0].sigma_mix *= 1.5;
    NormAggregates mixed_pos = unit;
    mixed_pos.mixed[1] = 0.5;
    CHECK(herau_functional(0.5, mixed_pos, bumped2) >
          herau_functional(0.5, mixed_pos, cert));
}

TEST_CASE("functional is non-increasing along the closed-form Gaussian solution") {
    // Sample the exact solution on a grid at a ladder of times, aggregate the
    // norms by quadrature, and evaluate the time-weighted functional.
    const double w = 1.0;
    const auto cert = build_herau_certificate(params(1, 1.0, 0.0));
    const auto spec_data = SpectralData::make(w);
    GaussianState init(0.0, 1);
    init.mean = {0.3, -0.2};
    init.gamma11 = init.gamma22 = 0.5;
    init.gamma12 = 0.0;
    auto geom = testsup::make_geom(192, 7.0, PotentialSpec::quadratic(w));
    double prev = 1e300;
    for (int step = 1; step <= 10; ++step) {
        const double t = 0.1 * step;
        const auto st = propagate_gaussian(init, spec_data, t);
        const double det = st.gamma11 * st.gamma22 - st.gamma12 * st.gamma12;
        const double i11 = st.gamma22 / det, i12 = -st.gamma12 / det,
                     i22 = st.gamma11 / det;
        const double cg = 1.0 / (w * std::sqrt(det));
        auto h = GridFunction::sample(geom, [&](const double* x, const double* v) {
            const double dx = x[0] - st.mean[0], dv = v[0] - st.mean[1];
            return cg * std::exp(-0.5 * (i11 * dx * dx + 2 * i12 * dx * dv +
                                         i22 * dv * dv) +
                                 0.5 * (w * w * x[0] * x[0] + v[0] * v[0]));
        });
        const auto agg = compute_norm_aggregates(h, 1);
        const double F = herau_functional(t, agg, cert);
        CHECK(F <= prev * (1.0 + 1e-9));
        prev = F;
    }
}

TEST_CASE("certificate JSON carries levels, ratios and metadata") {
    const auto hypo = build_hypocoercivity_certificate(params(2, 10.0, 0.5));
    const auto j = to_json(hypo);
    CHECK(j["levels"].size() == 2);
    CHECK(j["levels"][0].contains("anchors"));
    CHECK(j["levels"][1]["ratio_low_exact"] == "2560/1");
    CHECK(j["metadata"].contains("aggregation"));
    CHECK(j["lambda_final"].get<double>() > 0.0);

    const auto herau = to_json(build_herau_certificate(params(0, 1.0, 0.0)));
    CHECK(herau["Lambda0"] == 2.0);
}
