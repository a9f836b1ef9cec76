// Acceptance suite: one pass/fail line per criterion, with the tolerances
// pinned in code. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hypokit/certificate.hpp"
#include "hypokit/exactsolver.hpp"
#include "hypokit/grid.hpp"
#include "hypokit/meanfield.hpp"
#include "hypokit/operators.hpp"
#include "hypokit/pdesolver.hpp"
#include "hypokit/rng.hpp"

using namespace hypokit;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<bool()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    try {
        ok = body();
    } catch (const std::exception& e) {
        note = std::string(" [exception: ") + e.what() + "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d. %s (%.1f s)%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
                secs, note.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

ProblemParams params(int k, double M, double kappa) {
    ProblemParams p;
    p.k = k;
    p.M = M;
    p.kappa = kappa;
    return p;
}

GridFunction smooth_random(const GeometryPtr& g, unsigned inst) {
    CounterRng rng(424242, inst);
    const double ax = 0.16 + 0.08 * rng.uniform(0);
    const double av = 0.16 + 0.08 * rng.uniform(1);
    const double cx = rng.uniform(2) - 0.5;
    const double cv = rng.uniform(3) - 0.5;
    const double p = rng.uniform(4) - 0.5;
    return GridFunction::sample(g, [=](const double* x, const double* v) {
        return (1.0 + p * x[0] * v[0] + 0.3 * x[0]) *
               std::exp(-ax * (x[0] - cx) * (x[0] - cx) - av * (v[0] - cv) * (v[0] - cv));
    });
}

GridFunction gaussian_density_datum(const GeometryPtr& geom, double w,
                                    const GaussianState& s) {
    const double det = s.gamma11 * s.gamma22 - s.gamma12 * s.gamma12;
    const double i11 = s.gamma22 / det, i12 = -s.gamma12 / det, i22 = s.gamma11 / det;
    const double cg = 1.0 / (w * std::sqrt(det));
    return GridFunction::sample(geom, [&](const double* x, const double* v) {
        const double dx = x[0] - s.mean[0], dv = v[0] - s.mean[1];
        return cg * std::exp(-0.5 * (i11 * dx * dx + 2 * i12 * dx * dv + i22 * dv * dv) +
                             0.5 * (w * w * x[0] * x[0] + v[0] * v[0]));
    });
}

struct PdeCase {
    std::string name;
    PotentialSpec potential;
    double Lx, Lv;
    int n;
    GridFunction h0;
    double M, kappa;
};

PdeCase make_quadratic_case(int n) {
    PdeCase c{"quadratic", PotentialSpec::quadratic(1.0), 7.0, 7.0, n, GridFunction{}, 1.0,
              1.0};
    auto geom = std::make_shared<GridGeometry>(1, n, n, c.Lx, c.Lv, c.potential);
    c.h0 = GridFunction::sample(geom, [](const double* x, const double* v) {
        return 1.0 + std::exp(-((x[0] - 0.5) * (x[0] - 0.5) + v[0] * v[0]) / 1.2);
    });
    return c;
}

PdeCase make_doublewell_case(int n) {
    PdeCase c{"doublewell", PotentialSpec::curie_weiss(1.0, 0.0, 1), 6.0, 7.0, n,
              GridFunction{}, 0.0, 0.0};
    c.M = assumption_constant_M(c.potential);
    c.kappa = estimate_spatial_poincare(c.potential, c.Lx);
    auto geom = std::make_shared<GridGeometry>(1, n, n, c.Lx, c.Lv, c.potential);
    c.h0 = GridFunction::sample(geom, [](const double* x, const double* v) {
        return 1.0 + std::exp(-((x[0] - 0.8) * (x[0] - 0.8) + v[0] * v[0]) / 0.6);
    });
    return c;
}

NormReport run_case(const PdeCase& c, int k, double t_final, int record_every) {
    SolverConfig cfg;
    cfg.potential = c.potential;
    cfg.nx = cfg.nv = c.n;
    cfg.Lx = c.Lx;
    cfg.Lv = c.Lv;
    cfg.t_final = t_final;
    cfg.record_every = record_every;
    const auto run = evolve(c.h0, cfg);
    return norm_timeseries(run, k, build_hypocoercivity_certificate(params(k, c.M, c.kappa)),
                           build_herau_certificate(params(k, c.M, c.kappa)));
}

} // namespace

int main() {
    std::printf("hypokit acceptance suite\n");

    criterion(1, "coefficient families: exact ratios, positive monotone rates, k <= 8", [] {
        for (double M : {1.0, 10.0, 100.0})
            for (int k = 0; k <= 8; ++k) {
                const auto hypo = build_hypocoercivity_certificate(params(k, M, 1.0));
                const auto herau = build_herau_certificate(params(k, M, 1.0));
                if (herau.Lambda0 != 2.0) return false;
                double lam = 1.0, Lam = 2.0;
                for (int l = 1; l <= k; ++l) {
                    const auto& hl = hypo.levels[l - 1];
                    const auto& sl = herau.levels[l - 1];
                    if (!(hl.ratio_low * hl.ratio_top == Rational(4))) return false;
                    if (!(sl.ratio_low * sl.ratio_top == Rational(4))) return false;
                    if (!(Rational(4) <= sl.ratio_low * sl.ratio_top)) return false;
                    if (!(hl.lambda_l0 > 0.0 && hl.lambda_l0 <= lam)) return false;
                    if (!(sl.Lambda > 0.0 && sl.Lambda <= Lam)) return false;
                    lam = hl.lambda_l0;
                    Lam = sl.Lambda;
                }
            }
        return true;
    });

    criterion(2, "triangular quadratic form positive: pinned M and 1000 random draws", [] {
        for (double M : {1.0, 4.0, 100.0}) {
            const auto r = check_triangular_positivity(TriangularFormInstance::make(1.0, M));
            if (!r.passed || r.min_eigenvalue < -1e-12) return false;
        }
        CounterRng rng(20240901, 1);
        for (int i = 0; i < 1000; ++i) {
            const double a = 1e3 * rng.uniform(2 * i) + 1e-6;
            const double M = 1.0 + 999.0 * rng.uniform(2 * i + 1);
            const auto r = check_triangular_positivity(TriangularFormInstance::make(a, M));
            if (!r.passed || r.min_eigenvalue < -1e-12) return false;
        }
        return true;
    });

    criterion(3, "covariance: closed form vs RK4 oracle 1e-8; short-time profile 5%", [] {
        for (double w : {0.3, 0.9, 1.0, 2.0}) {
            const auto spec = SpectralData::make(w);
            for (double t = 0.0; t <= 5.0 + 1e-12; t += 0.25) {
                const auto a = quadratic_covariance(t, spec);
                const auto b = covariance_ode_oracle(t, w, 1e-4);
                if (std::abs(a.gamma11 - b.gamma11) > 1e-8) return false;
                if (std::abs(a.gamma12 - b.gamma12) > 1e-8) return false;
                if (std::abs(a.gamma22 - b.gamma22) > 1e-8) return false;
            }
            const double t = 1e-3;
            const auto s = quadratic_covariance(t, spec);
            if (std::abs(s.gamma11 / (2.0 * t * t * t / 3.0) - 1.0) > 0.05) return false;
            if (std::abs(s.gamma12 / (t * t) - 1.0) > 0.05) return false;
            if (std::abs(s.gamma22 / (2.0 * t) - 1.0) > 0.05) return false;
        }
        return true;
    });

    criterion(4, "short-time sharpness slopes -(k/2+l) +- 0.1 with r^2 >= 0.999", [] {
        struct Case { int k, l; };
        for (const auto& c : {Case{1, 0}, Case{1, 1}, Case{2, 1}, Case{2, 2}}) {
            const auto rep = sharpness_slope(1.0, c.k, c.l, 1e-3, 1e-2, 10);
            const double expect = -(c.k / 2.0 + c.l);
            if (std::abs(rep.slope - expect) > 0.1) return false;
            if (rep.r_squared < 0.999) return false;
        }
        return true;
    });

    auto geom256 = std::make_shared<GridGeometry>(1, 256, 256, 7.0, 7.0,
                                                  PotentialSpec::quadratic(1.0));

    criterion(5, "dissipation identities: direct vs closed form within 1e-5 relative", [&] {
        const auto& pot = geom256->potential();
        for (unsigned inst = 0; inst < 10; ++inst) {
            auto h = smooth_random(geom256, 1000 + inst);
            for (int k = 1; k <= 3; ++k)
                for (int m1 = 0; m1 <= k; ++m1) {
                    const auto t = dissipation_terms(h, pot, k, m1);
                    auto rel = [](double a, double b) {
                        return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
                    };
                    if (rel(t.T_A_direct, t.T_A_closed) > 1e-5) return false;
                    if (rel(t.T_B_direct, t.T_B_closed) > 1e-5) return false;
                    if (rel(t.Tmix_A_direct, t.Tmix_A_closed) > 1e-5) return false;
                    if (rel(t.Tmix_B_direct, t.Tmix_B_closed) > 1e-5) return false;
                }
        }
        return true;
    });

    criterion(6, "dissipation lower bounds: slacks >= -1e-5 with M = max(omega0^4, 1)", [&] {
        const auto& pot = geom256->potential();
        const double M = 1.0;
        for (unsigned inst = 0; inst < 10; ++inst) {
            auto h = smooth_random(geom256, 1000 + inst);
            for (int k = 1; k <= 3; ++k) {
                const auto rep = verify_dissipation_bounds(h, pot, M, k);
                if (rep.min_slack < -1e-5) return false;
            }
        }
        return true;
    });

    const auto quad192 = make_quadratic_case(192);
    const auto dw192 = make_doublewell_case(192);

    criterion(7, "time-weighted functional non-increasing on (0,1], k in {1,2}", [&] {
        for (const auto* c : {&quad192, &dw192})
            for (int k : {1, 2}) {
                const auto rep = run_case(*c, k, 1.0, 25);
                for (std::size_t s = 2; s < rep.times.size(); ++s) {
                    if (!(rep.times[s] <= 1.0)) continue;
                    if (!(rep.herau[s] <= rep.herau[s - 1] * (1.0 + 1e-6))) return false;
                }
            }
        return true;
    });

    criterion(8, "twisted-norm decay: fitted rate above 2 lambda_k; envelope after t=0.1",
              [&] {
        for (const auto* c : {&quad192, &dw192})
            for (int k : {1, 2}) {
                const auto rep = run_case(*c, k, 5.0, 100);
                if (!rep.rate_defined) return false;
                if (!(rep.fitted_decay_rate >= rep.certified_rate)) return false;
                const auto hypo = build_hypocoercivity_certificate(params(k, c->M, c->kappa));
                const double C2 = hypo.norm_equivalence.c2 / hypo.norm_equivalence.c1;
                for (std::size_t s = 0; s < rep.times.size(); ++s) {
                    if (rep.times[s] < 0.1) continue;
                    const double bound = C2 *
                                         std::exp(-rep.certified_rate * rep.times[s]) *
                                         rep.plain_centered.front() * (1.0 + 1e-3);
                    if (!(rep.plain_centered[s] <= bound)) return false;
                }
            }
        return true;
    });

    criterion(9, "mean-field constants: pinned values; gap validity tracks its sign", [] {
        if (std::abs(mean_field_M(1.0, 1.0) - 6060.0) > 1e-9) return false;
        if (std::abs(weighted_poincare_constants(1.0, 0.0, 1.0).M4p - 16.5) > 1e-12)
            return false;
        // validity boundary: scan K across the sign change of the gap expression
        for (double beta : {0.5, 1.0, 2.0}) {
            const double gap0 = std::sqrt(M_PI / beta) * std::exp(beta / 4.0);
            for (double K : {0.5 * gap0 / beta, 0.99 * gap0 / beta, 1.01 * gap0 / beta,
                             2.0 * gap0 / beta}) {
                const auto pk = poincare_kappa({beta, K, 32});
                if (pk.valid != (pk.lambda1 > 0.0)) return false;
            }
        }
        return true;
    });

    criterion(10, "magnetization relaxation rates N-independent within 20%", [] {
        double lo = 1e300, hi = 0.0;
        for (int N : {8, 16, 32, 64}) {
            CurieWeissParams p{0.3, 1.0, N};
            EnsembleConfig cfg;
            cfg.replicas = 32;
            cfg.dt = 1e-3;
            cfg.t_final = 300.0;
            cfg.seed = 7;
            cfg.record_every = 50;
            const auto est = relaxation_estimate(langevin_simulate(p, cfg), 20.0);
            if (est.flagged) return false;
            lo = std::min(lo, est.rate);
            hi = std::max(hi, est.rate);
        }
        return hi / lo <= 1.2;
    });

    criterion(11, "grid evolution matches the closed-form solution to 1e-4 at t = 1", [&] {
        const double w = 1.0;
        GaussianState init(0.0, 1);
        init.mean = {0.3, -0.2};
        init.gamma11 = init.gamma22 = 0.5;
        init.gamma12 = 0.0;
        auto h0 = gaussian_density_datum(geom256, w, init);
        SolverConfig cfg;
        cfg.potential = geom256->potential();
        cfg.t_final = 1.0;
        cfg.record_every = 1 << 30;
        const auto run = evolve(h0, cfg);
        const auto target = propagate_gaussian(init, SpectralData::make(w), 1.0);
        auto exact = gaussian_density_datum(geom256, w, target);
        GridFunction diff = run.snapshots.back();
        for (std::size_t i = 0; i < diff.values.size(); ++i)
            diff.values[i] -= (exact.values[i] - run.background);
        return diff.norm() < 1e-4;
    });

    std::printf("%d of 11 criteria passed\n", 11 - g_failures);
    return g_failures;
}
