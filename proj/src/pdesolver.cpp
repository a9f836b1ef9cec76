#include "hypokit/pdesolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypokit/errors.hpp"
#include "hypokit/linalg.hpp"
#include "hypokit/operators.hpp"
#include "hypokit/parallel.hpp"
#include "hypokit/rng.hpp"

namespace hypokit {

namespace {

// Nodes where the equilibrium density has fallen below this fraction of its
// peak are treated as truncated: they carry no quadrature weight worth
// resolving, and the density-weighted flux stencils become unstable once the
// potential climbs several units per cell, so the solution is pinned to the
// background there.
constexpr double kDensityFloor = 1e-15;

struct Workspace {
    GeometryPtr geom;
    int nx, nv;
    double hx, hv;
    std::vector<double> density;    // exp(-V(x) - v^2/2) per node (unnormalized)
    std::vector<double> inv_density;
    std::vector<char> active;       // inside the density floor and the shells
    std::vector<double> v_speed;    // advection speed along x per v index
    std::vector<double> x_speed;    // advection speed along v per x index: -V'(x)
    BandMatrix cn_lhs;              // I - dt/2 D
    BandMatrix cn_rhs;              // I + dt/2 D

    Workspace(const GeometryPtr& g, const PotentialSpec& V, double dt)
        : geom(g), nx(g->nx()), nv(g->nv()), hx(g->hx()), hv(g->hv()),
          cn_lhs(g->nv(), 3), cn_rhs(g->nv(), 3) {
        density.resize(g->size());
        inv_density.resize(g->size());
        active.assign(g->size(), 1);
        double peak = 0.0;
        for (int i = 0; i < nx; ++i) {
            const double x = g->x_nodes()[i];
            const double ex = std::exp(-V.value(std::span<const double>(&x, 1)));
            for (int j = 0; j < nv; ++j) {
                const double v = g->v_nodes()[j];
                const double d = ex * std::exp(-0.5 * v * v);
                density[i * nv + j] = d;
                inv_density[i * nv + j] = 1.0 / d;
                peak = std::max(peak, d);
            }
        }
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nv; ++j) {
                const bool shell = i < 2 || i > nx - 3 || j < 2 || j > nv - 3;
                if (shell || density[i * nv + j] < kDensityFloor * peak)
                    active[i * nv + j] = 0;
            }
        v_speed = g->v_nodes();
        x_speed.resize(nx);
        for (int i = 0; i < nx; ++i) {
            const double x = g->x_nodes()[i];
            double grad = 0.0;
            V.gradient(std::span<const double>(&x, 1), std::span<double>(&grad, 1));
            x_speed[i] = -grad;
        }
        build_cn(dt);
    }

    // Velocity Ornstein-Uhlenbeck operator in flux form:
    //   D = diag(1/rho) (-G^T R G), G the 4th-order midpoint gradient,
    //   R = diag(rho at midpoints), so D is self-adjoint dissipative in the
    //   rho-weighted inner product and Crank-Nicolson is unconditionally stable.
    void build_cn(double dt) {
        const int n = nv;
        std::vector<double> rho(n), rho_mid(n + 1);
        for (int j = 0; j < n; ++j) rho[j] = std::exp(-0.5 * geom->v_nodes()[j] * geom->v_nodes()[j]);
        for (int m = 0; m <= n; ++m) {
            const double vm = geom->v_nodes()[0] + (m - 0.5) * hv;
            rho_mid[m] = std::exp(-0.5 * vm * vm);
        }
        // G row m (midpoint between nodes m-1 and m) over nodes m-2..m+1:
        // (+1, -27, +27, -1) / (24 h).
        auto gcoef = [&](int m, int node) -> double {
            const int off = node - (m - 2);
            static const double c[4] = {1.0, -27.0, 27.0, -1.0};
            if (off < 0 || off > 3) return 0.0;
            return c[off] / (24.0 * hv);
        };
        for (int i = 0; i < n; ++i)
            for (int j = std::max(0, i - 3); j <= std::min(n - 1, i + 3); ++j) {
                double s = 0.0;
                for (int m = std::max(i - 1, j - 1); m <= std::min(i + 2, j + 2); ++m) {
                    if (m < 0 || m > n) continue;
                    s += gcoef(m, i) * rho_mid[m] * gcoef(m, j);
                }
                const double d_ij = -s / rho[i];
                cn_lhs.at(i, j) = (i == j ? 1.0 : 0.0) - 0.5 * dt * d_ij;
                cn_rhs.at(i, j) = (i == j ? 1.0 : 0.0) + 0.5 * dt * d_ij;
            }
        cn_lhs.factorize();
    }

    void zero_shells(std::vector<double>& u) const {
        for (std::size_t p = 0; p < u.size(); ++p)
            if (!active[p]) u[p] = 0.0;
    }

    // Conservative upwind-biased transport RHS: 4th-order interface
    // interpolation plus a fifth-difference dissipation term.
    void transport_rhs(const std::vector<double>& u, std::vector<double>& out) const {
        auto flux_line = [](const double* q, int n, int stride, double a, double* du) {
            auto Q = [&](int i) -> double {
                return (i < 0 || i >= n) ? 0.0 : q[i * stride];
            };
            const double absa = std::abs(a);
            auto F = [&](int m) -> double { // interface between nodes m-1 and m
                const double central =
                    a * (-Q(m - 2) + 7.0 * Q(m - 1) + 7.0 * Q(m) - Q(m + 1)) / 12.0;
                const double diss =
                    -absa / 60.0 *
                    (Q(m + 2) - 5.0 * Q(m + 1) + 10.0 * Q(m) - 10.0 * Q(m - 1) +
                     5.0 * Q(m - 2) - Q(m - 3));
                return central + diss;
            };
            double fl = F(0);
            for (int i = 0; i < n; ++i) {
                const double fr = F(i + 1);
                du[i * stride] = fr - fl;
                fl = fr;
            }
        };

        std::vector<double> q(u.size());
        for (std::size_t p = 0; p < u.size(); ++p) q[p] = u[p] * density[p];
        out.assign(u.size(), 0.0);

        // x-transport: speed v_j, stride nv along x.
        std::vector<double> work(u.size(), 0.0);
        parallel_for(0, static_cast<std::size_t>(nv), [&](std::size_t j) {
            std::vector<double> du(nx, 0.0);
            std::vector<double> line(nx);
            for (int i = 0; i < nx; ++i) line[i] = q[i * nv + j];
            flux_line(line.data(), nx, 1, v_speed[j], du.data());
            for (int i = 0; i < nx; ++i) work[i * nv + j] = du[i] / hx;
        });
        for (std::size_t p = 0; p < u.size(); ++p) out[p] -= work[p] * inv_density[p];

        // v-transport: speed -V'(x), contiguous lines.
        parallel_for(0, static_cast<std::size_t>(nx), [&](std::size_t i) {
            std::vector<double> du(nv, 0.0);
            flux_line(q.data() + i * nv, nv, 1, x_speed[i], du.data());
            for (int j = 0; j < nv; ++j)
                out[i * nv + j] -= du[j] / hv * inv_density[i * nv + j];
        });
    }

    // Heun step of length tau for the transport sub-flow.
    void transport_step(std::vector<double>& u, double tau) const {
        std::vector<double> k1, k2, u1(u.size());
        transport_rhs(u, k1);
        for (std::size_t p = 0; p < u.size(); ++p) u1[p] = u[p] + tau * k1[p];
        zero_shells(u1);
        transport_rhs(u1, k2);
        for (std::size_t p = 0; p < u.size(); ++p) u[p] += 0.5 * tau * (k1[p] + k2[p]);
        zero_shells(u);
    }

    void velocity_step(std::vector<double>& u) const {
        parallel_for(0, static_cast<std::size_t>(nx), [&](std::size_t i) {
            std::vector<double> line(u.begin() + i * nv, u.begin() + (i + 1) * nv);
            std::vector<double> rhs(nv);
            cn_rhs.multiply(line, rhs);
            cn_lhs.solve(rhs);
            std::copy(rhs.begin(), rhs.end(), u.begin() + i * nv);
        });
        zero_shells(u);
    }
};

} // namespace

double SolverConfig::cfl_limit() const {
    const double hx = 2.0 * Lx / (nx - 1);
    const double hv = 2.0 * Lv / (nv - 1);
    // Transport speeds act only where the solution lives: restrict the force
    // bound to the region above the density floor (the solver pins the rest).
    double vmin = 1e300;
    std::vector<double> vals(nx);
    for (int i = 0; i < nx; ++i) {
        const double x = -Lx + i * hx;
        vals[i] = potential.value(std::span<const double>(&x, 1));
        vmin = std::min(vmin, vals[i]);
    }
    const double cutoff = vmin - std::log(1e-15);
    double max_grad = 0.0;
    for (int i = 0; i < nx; ++i) {
        if (vals[i] > cutoff) continue;
        const double x = -Lx + i * hx;
        double g = 0.0;
        potential.gradient(std::span<const double>(&x, 1), std::span<double>(&g, 1));
        max_grad = std::max(max_grad, std::abs(g));
    }
    double lim = hv * hv / 2.0;
    lim = std::min(lim, hx / std::max(Lv, 1e-30));
    if (max_grad > 0) lim = std::min(lim, hv / max_grad);
    return lim;
}

EvolveResult evolve(const GridFunction& h0, const SolverConfig& cfg) {
    if (h0.geom->d() != 1)
        throw FeasibilityError("evolve: the grid path handles 1D potentials (d = 1)");
    const double limit = cfg.cfl_limit();
    double dt = cfg.dt > 0.0 ? cfg.dt : limit;
    if (dt > limit * (1.0 + 1e-12))
        throw ConfigurationError("evolve: dt violates the stability bound " +
                                 std::to_string(limit));
    if (cfg.t_final <= 0.0) throw ParameterError("evolve: t_final must be > 0");
    if (cfg.record_every < 1) throw ParameterError("evolve: record_every must be >= 1");

    EvolveResult res;
    res.geom = h0.geom;
    // Constant background: the value the datum assumes at the domain edge
    // (average over the outermost shell). Constants are exactly stationary, so
    // only the decaying remainder is marched.
    {
        const int nx = h0.geom->nx(), nv = h0.geom->nv();
        double s = 0.0;
        long cnt = 0;
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nv; ++j)
                if (i == 0 || i == nx - 1 || j == 0 || j == nv - 1) {
                    s += h0.values[i * nv + j];
                    ++cnt;
                }
        res.background = s / cnt;
    }
    GridFunction u = h0;
    for (double& v : u.values) v -= res.background;
    res.mean = res.background + u.quadrature();
    if (u.boundary_max_abs() > 1e-8 * std::max(1.0, u.max_abs()))
        throw ConfigurationError(
            "evolve: initial datum does not decay to a constant at the domain boundary");

    // Land exactly on t_final: shrink the step to an integer divisor.
    const long steps = static_cast<long>(std::ceil(cfg.t_final / dt - 1e-9));
    dt = cfg.t_final / steps;

    Workspace ws(h0.geom, cfg.potential, dt);
    ws.zero_shells(u.values);
    res.times.push_back(0.0);
    res.snapshots.push_back(u);
    double prev_norm = u.norm();
    for (long s = 1; s <= steps; ++s) {
        ws.transport_step(u.values, 0.5 * dt);
        ws.velocity_step(u.values);
        ws.transport_step(u.values, 0.5 * dt);
        const double nn = u.norm();
        if (nn > 10.0 * std::max(prev_norm, 1e-300) && nn > 1e-10)
            throw NumericalError("evolve: norm grew more than 10x in one step at t = " +
                                 std::to_string(s * dt) + "; step too large for this grid");
        prev_norm = nn;
        if (s % cfg.record_every == 0 || s == steps) {
            res.times.push_back(s * dt);
            res.snapshots.push_back(u);
        }
    }
    return res;
}

NormReport norm_timeseries(const EvolveResult& run, int k,
                           const HypocoercivityCertificate& hypo,
                           const HerauCertificate& herau) {
    NormReport rep;
    rep.k = k;
    rep.mean = run.mean;
    rep.times = run.times;
    rep.certified_rate = 2.0 * hypo.lambda_final;
    rep.certified_Lambda = herau.levels.empty() ? herau.Lambda0 : herau.levels.back().Lambda;

    const std::size_t n = run.snapshots.size();
    const double c = run.background;
    const double mean_u = run.mean - run.background; // integral of u_t, conserved
    rep.aggregates.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        NormAggregates agg = compute_norm_aggregates(run.snapshots[s], k);
        const double u_sq = agg.seminorm(0, 0) * agg.seminorm(0, 0);
        const double u_int = run.snapshots[s].quadrature();
        // centered deviation h - mean = u - mean_u; derivatives are unchanged
        agg.seminorm(0, 0) =
            std::sqrt(std::max(0.0, u_sq - 2.0 * mean_u * u_int + mean_u * mean_u));
        const double tw_u = twisted_hk_inner(agg, hypo);
        rep.twisted_centered.push_back(tw_u);
        rep.twisted.push_back(tw_u + run.mean * run.mean);
        rep.plain_centered.push_back(plain_hk_norm_sq(agg, k));
        // the time-weighted functional tracks the full solution h = u + c
        NormAggregates full = agg;
        full.seminorm(0, 0) =
            std::sqrt(std::max(0.0, u_sq + 2.0 * c * u_int + c * c));
        const double t = run.times[s];
        rep.herau.push_back((t > 0.0 && t <= 1.0)
                                ? herau_functional(t, full, herau)
                                : std::numeric_limits<double>::quiet_NaN());
        rep.aggregates.push_back(std::move(agg));
    }

    // Log-linear fit of the centered twisted norm over the final half of the run.
    std::vector<double> ts, ys;
    const double t_half = run.times.back() / 2.0;
    for (std::size_t s = 0; s < n; ++s) {
        if (run.times[s] < t_half) continue;
        if (rep.twisted_centered[s] <= 0.0) { ts.clear(); break; }
        ts.push_back(run.times[s]);
        ys.push_back(std::log(rep.twisted_centered[s]));
    }
    if (ts.size() >= 3) {
        const LineFit f = fit_line(ts, ys);
        rep.fitted_decay_rate = -f.slope;
        rep.rate_defined = true;
    } else {
        rep.fitted_decay_rate = std::numeric_limits<double>::quiet_NaN();
        rep.rate_defined = false;
    }
    return rep;
}

double estimate_spatial_poincare(const PotentialSpec& potential, double L, int n) {
    const double h = 2.0 * L / (n - 1);
    std::vector<double> rho(n), rho_mid(n - 1);
    for (int i = 0; i < n; ++i) {
        const double x = -L + i * h;
        rho[i] = std::exp(-potential.value(std::span<const double>(&x, 1)));
    }
    for (int m = 0; m + 1 < n; ++m) {
        const double x = -L + (m + 0.5) * h;
        rho_mid[m] = std::exp(-potential.value(std::span<const double>(&x, 1)));
    }
    // Symmetric form B = diag(rho)^{-1/2} A diag(rho)^{-1/2}, A the flux-form
    // stiffness; null vector is sqrt(rho). Deflated inverse iteration on B + dI.
    std::vector<double> w0(n);
    double w0n = 0.0;
    for (int i = 0; i < n; ++i) { w0[i] = std::sqrt(rho[i]); w0n += w0[i] * w0[i]; }
    w0n = std::sqrt(w0n);
    for (int i = 0; i < n; ++i) w0[i] /= w0n;

    const double delta = 1e-8;
    std::vector<double> sub(n, 0.0), diag(n, 0.0), super(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? rho_mid[i - 1] : 0.0;
        const double right = i + 1 < n ? rho_mid[i] : 0.0;
        diag[i] = (left + right) / (h * h * rho[i]) + delta;
        if (i > 0) sub[i] = -left / (h * h * std::sqrt(rho[i] * rho[i - 1]));
        if (i + 1 < n) super[i] = -right / (h * h * std::sqrt(rho[i] * rho[i + 1]));
    }

    CounterRng rng(12345, 0);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(i) - 0.5;
    auto deflate = [&](std::vector<double>& x) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += x[i] * w0[i];
        for (int i = 0; i < n; ++i) x[i] -= dot * w0[i];
    };
    auto normalize = [&](std::vector<double>& x) {
        double nn = 0.0;
        for (double xv : x) nn += xv * xv;
        nn = std::sqrt(nn);
        for (double& xv : x) xv /= nn;
    };
    deflate(v);
    normalize(v);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        std::vector<double> rhs = v;
        tridiag_solve(sub, diag, super, rhs);
        deflate(rhs);
        normalize(rhs);
        // Rayleigh quotient of B (without the delta shift).
        double num = 0.0;
        for (int i = 0; i < n; ++i) {
            double bv = (diag[i] - delta) * rhs[i];
            if (i > 0) bv += sub[i] * rhs[i - 1];
            if (i + 1 < n) bv += super[i] * rhs[i + 1];
            num += rhs[i] * bv;
        }
        const double next = num;
        const bool done = it > 4 && std::abs(next - lambda) < 1e-12 * std::max(1.0, next);
        lambda = next;
        v = std::move(rhs);
        if (done) break;
    }
    if (lambda <= 0.0) throw NumericalError("estimate_spatial_poincare: no spectral gap found");
    return 1.0 / lambda;
}

GridFunction rough_initial_datum(const GeometryPtr& geom, unsigned seed, double dt_smooth) {
    CounterRng rng(seed, 7);
    GridFunction h(geom);
    const int nx = geom->nx(), nv = geom->nv();
    for (int i = 2; i < nx - 2; ++i)
        for (int j = 2; j < nv - 2; ++j)
            h.values[i * nv + j] = 2.0 * rng.uniform(i * nv + j) - 1.0;
    // Damp toward the boundary so the datum is grid-admissible.
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nv; ++j) {
            const double x = geom->x_nodes()[i] / geom->Lx();
            const double v = geom->v_nodes()[j] / geom->Lv();
            const double taper = std::exp(-12.0 * (std::pow(x, 8) + std::pow(v, 8)));
            h.values[i * nv + j] *= taper;
        }
    // One velocity diffusion sub-step makes the derivatives finite.
    Workspace ws(geom, geom->potential(), dt_smooth);
    ws.zero_shells(h.values);
    ws.velocity_step(h.values);
    const double mean = h.quadrature();
    for (double& v : h.values) v -= mean;
    ws.zero_shells(h.values);
    return h;
}

} // namespace hypokit
