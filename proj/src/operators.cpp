#include "hypokit/operators.hpp"

#include <array>
#include <cmath>

#include "hypokit/errors.hpp"
#include "hypokit/parallel.hpp"

namespace hypokit {

namespace {

void require_resolution(const GridFunction& h) {
    if (h.geom->nx() < 8 || h.geom->nv() < 8)
        throw ConfigurationError("operators: grid too coarse (< 8 nodes per axis)");
}

/// Pointwise multiply by -d^2V/dx_i dx_j evaluated on the grid.
GridFunction multiply_neg_hessian(const GridFunction& f, const PotentialSpec& V, int i, int j) {
    const auto& g = *f.geom;
    GridFunction out(f.geom);
    const int d = g.d();
    parallel_for(0, f.values.size(), [&](std::size_t flat) {
        int idx[4];
        double x[2];
        g.decode(flat, idx);
        for (int a = 0; a < d; ++a) x[a] = g.axis_coord(a, idx[a]);
        out.values[flat] = -V.hessian(std::span<const double>(x, d), i, j) * f.values[flat];
    });
    return out;
}

/// R h = [C,B] h = -hess V(x) . grad_v h, component i.
GridFunction apply_R_component(const GridFunction& h, const PotentialSpec& V, int i) {
    const auto& g = *h.geom;
    const int d = g.d();
    GridFunction out(h.geom);
    for (int j = 0; j < d; ++j) {
        GridFunction dj = derivative(h, d + j);
        GridFunction term = multiply_neg_hessian(dj, V, i, j);
        axpy(out, 1.0, term);
    }
    return out;
}

/// Repeated 4th-order first derivatives: d_x^i d_v^j h (d = 1 only).
GridFunction mixed_derivative_1d(const GridFunction& h, int i, int j) {
    GridFunction f = h;
    for (int a = 0; a < i; ++a) f = derivative(f, 0);
    for (int a = 0; a < j; ++a) f = derivative(f, 1);
    return f;
}

void require_1d(const GridFunction& h, const char* what) {
    if (h.geom->d() != 1)
        throw FeasibilityError(std::string(what) + ": implemented for d = 1 grids");
}

long double binom(int n, int k) {
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

std::vector<GridFunction> apply_A(const GridFunction& h) {
    require_resolution(h);
    const int d = h.geom->d();
    std::vector<GridFunction> out;
    out.reserve(d);
    for (int j = 0; j < d; ++j) out.push_back(derivative(h, d + j));
    return out;
}

GridFunction apply_Astar(const std::vector<GridFunction>& g, const PotentialSpec&) {
    if (g.empty()) throw DataError("apply_Astar: empty component vector");
    require_resolution(g[0]);
    const int d = g[0].geom->d();
    if (static_cast<int>(g.size()) != d)
        throw DataError("apply_Astar: component count does not match dimension");
    GridFunction out(g[0].geom);
    for (int j = 0; j < d; ++j) {
        GridFunction dj = derivative(g[j], d + j);
        axpy(out, -1.0, dj);
        GridFunction vg = multiply_coordinate(g[j], d + j);
        axpy(out, 1.0, vg);
    }
    return out;
}

GridFunction apply_B(const GridFunction& h, const PotentialSpec& V) {
    require_resolution(h);
    const auto& g = *h.geom;
    const int d = g.d();
    GridFunction out(h.geom);
    for (int j = 0; j < d; ++j) {
        GridFunction dxj = derivative(h, j);
        GridFunction vdx = multiply_coordinate(dxj, d + j);
        axpy(out, 1.0, vdx);
    }
    // - grad V(x) . grad_v h
    std::vector<GridFunction> dv(d);
    for (int j = 0; j < d; ++j) dv[j] = derivative(h, d + j);
    parallel_for(0, out.values.size(), [&](std::size_t flat) {
        int idx[4];
        double x[2], grad[2];
        g.decode(flat, idx);
        for (int a = 0; a < d; ++a) x[a] = g.axis_coord(a, idx[a]);
        V.gradient(std::span<const double>(x, d), std::span<double>(grad, d));
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += grad[j] * dv[j].values[flat];
        out.values[flat] -= s;
    });
    return out;
}

GridFunction apply_L(const GridFunction& h, const PotentialSpec& V) {
    GridFunction out = apply_Astar(apply_A(h), V);
    GridFunction b = apply_B(h, V);
    axpy(out, 1.0, b);
    return out;
}

CommutatorResiduals commutator_residuals(const PotentialSpec& V, const GridFunction& h) {
    require_resolution(h);
    const int d = h.geom->d();
    CommutatorResiduals res;

    // [A,B] h - grad_x h, componentwise.
    GridFunction bh = apply_B(h, V);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < d; ++i) {
        GridFunction abh = derivative(bh, d + i);             // A_i B h
        GridFunction bah = apply_B(derivative(h, d + i), V);  // B A_i h
        GridFunction cx = derivative(h, i);                   // grad_x component
        GridFunction r = abh;
        axpy(r, -1.0, bah);
        axpy(r, -1.0, cx);
        num += r.inner(r);
        den += cx.inner(cx);
    }
    res.AB_res = std::sqrt(num / std::max(den, 1e-300));

    // [C,B] h - (-hess V . grad_v h), componentwise.
    num = den = 0.0;
    for (int i = 0; i < d; ++i) {
        GridFunction cbh = derivative(bh, i);             // C_i B h
        GridFunction bch = apply_B(derivative(h, i), V);  // B C_i h
        GridFunction rh = apply_R_component(h, V, i);
        GridFunction r = cbh;
        axpy(r, -1.0, bch);
        axpy(r, -1.0, rh);
        num += r.inner(r);
        den += rh.inner(rh);
    }
    res.CB_res = std::sqrt(num / std::max(den, 1e-300));
    return res;
}

DissipationTerms dissipation_terms(const GridFunction& h, const PotentialSpec& V, int k,
                                   int m1) {
    require_1d(h, "dissipation_terms");
    if (k < 1 || k > 3) throw FeasibilityError("dissipation_terms: grid path supports 1 <= k <= 3");
    if (m1 < 0 || m1 > k) throw ParameterError("dissipation_terms: need 0 <= m1 <= k");
    const int m2 = k - m1;

    DissipationTerms t;
    GridFunction AAh = apply_Astar(apply_A(h), V);
    GridFunction Bh = apply_B(h, V);

    GridFunction Dh = mixed_derivative_1d(h, m1, m2);
    t.T_A_direct = mixed_derivative_1d(AAh, m1, m2).inner(Dh);
    t.T_B_direct = mixed_derivative_1d(Bh, m1, m2).inner(Dh);

    GridFunction Dmix_lo = mixed_derivative_1d(h, k - 1, 1); // grad_x^{k-1} grad_v h
    GridFunction Dmix_hi = mixed_derivative_1d(h, k, 0);     // grad_x^k h
    t.Tmix_A_direct = mixed_derivative_1d(AAh, k - 1, 1).inner(Dmix_hi) +
                      Dmix_lo.inner(mixed_derivative_1d(AAh, k, 0));
    t.Tmix_B_direct = mixed_derivative_1d(Bh, k - 1, 1).inner(Dmix_hi) +
                      Dmix_lo.inner(mixed_derivative_1d(Bh, k, 0));

    // Closed forms.
    GridFunction Dp1 = mixed_derivative_1d(h, m1, m2 + 1);
    t.T_A_closed = Dp1.inner(Dp1) + m2 * Dh.inner(Dh);

    double tb = 0.0;
    if (m2 >= 1) tb += m2 * mixed_derivative_1d(h, m1 + 1, m2 - 1).inner(Dh);
    for (int l = 1; l <= m1; ++l) {
        GridFunction u = mixed_derivative_1d(h, l - 1, m2 + 1);
        GridFunction w = multiply_neg_hessian(u, V, 0, 0);
        for (int a = 0; a < m1 - l; ++a) w = derivative(w, 0);
        tb += w.inner(Dh);
    }
    t.T_B_closed = tb;

    t.Tmix_A_closed = 2.0 * mixed_derivative_1d(h, k - 1, 2).inner(mixed_derivative_1d(h, k, 1)) +
                      Dmix_lo.inner(Dmix_hi);

    double tmb = Dmix_hi.inner(Dmix_hi);
    for (int l = 1; l <= k - 1; ++l) {
        GridFunction u = mixed_derivative_1d(h, l - 1, 2);
        GridFunction w = multiply_neg_hessian(u, V, 0, 0);
        for (int a = 0; a < k - l - 1; ++a) w = derivative(w, 0);
        tmb += w.inner(Dmix_hi);
    }
    for (int l = 1; l <= k; ++l) {
        GridFunction u = mixed_derivative_1d(h, l - 1, 1);
        GridFunction w = multiply_neg_hessian(u, V, 0, 0);
        for (int a = 0; a < k - l; ++a) w = derivative(w, 0);
        tmb += Dmix_lo.inner(w);
    }
    t.Tmix_B_closed = tmb;
    return t;
}

DissipationBoundReport verify_dissipation_bounds(const GridFunction& h, const PotentialSpec& V, double M, int k) {
    require_1d(h, "verify_dissipation_bounds");
    NormAggregates n = compute_norm_aggregates(h, k);
    const double sM = std::sqrt(M);
    const double Z = n.Z, Wx = n.W_x;

    DissipationBoundReport rep;
    try {
        rep.M_consistent = M >= assumption_constant_M(V) - 1e-12;
    } catch (const ConfigurationError&) {
        rep.M_consistent = true; // tabulated: nothing to check against
    }

    std::vector<DissipationTerms> terms(k + 1);
    for (int i = 0; i <= k; ++i) terms[i] = dissipation_terms(h, V, k, i);

    rep.slack_TA.resize(k + 1);
    for (int i = 0; i <= k; ++i)
        rep.slack_TA[i] = terms[i].T_A_direct - n.W[i] * n.W[i];

    rep.slack_TB.resize(k);
    for (int i = 0; i <= k - 1; ++i) {
        const double rhs = -k * Z * Z - Z * Wx - std::ldexp(1.0, i) * sM * (2.0 * Z * Z + Z * n.W[i]);
        rep.slack_TB[i] = terms[i].T_B_direct - rhs;
    }
    {
        const double rhs = -std::ldexp(1.0, k + 1) * sM * Z * Wx - k * sM * n.W[k] * Wx;
        rep.slack_TB_top = terms[k].T_B_direct - rhs;
    }
    {
        const double rhs = -2.0 * n.W[k - 1] * n.W[k] - Z * Wx;
        rep.slack_Tmix_A = terms[k].Tmix_A_direct - rhs;
    }
    {
        const double rhs = Wx * Wx - std::ldexp(1.0, k) * sM * Z * Wx -
                           (k - 1) * sM * n.W[k - 1] * Wx -
                           std::ldexp(1.0, k) * sM * Z * (2.0 * Z + n.W[k]);
        rep.slack_Tmix_B = terms[k].Tmix_B_direct - rhs;
    }

    double mn = rep.slack_Tmix_A;
    mn = std::min(mn, rep.slack_Tmix_B);
    mn = std::min(mn, rep.slack_TB_top);
    for (double s : rep.slack_TA) mn = std::min(mn, s);
    for (double s : rep.slack_TB) mn = std::min(mn, s);
    rep.min_slack = mn;
    return rep;
}

NormAggregates compute_norm_aggregates(const GridFunction& h, int k) {
    require_resolution(h);
    const auto& g = *h.geom;
    const int d = g.d();
    const int need = 8 + 4 * (k + 1);
    if (g.nx() < need || g.nv() < need)
        throw FeasibilityError("compute_norm_aggregates: grid cannot support k+1 stable "
                               "derivative orders");

    NormAggregates n(k);
    if (d == 1) {
        // f[i][j] = d_x^i d_v^j h, built by repeated first derivatives.
        std::vector<std::vector<GridFunction>> f(k + 2);
        for (int i = 0; i <= k + 1; ++i) {
            f[i].resize(k + 2 - i);
            f[i][0] = (i == 0) ? h : derivative(f[i - 1][0], 0);
            for (int j = 1; j <= k + 1 - i; ++j) f[i][j] = derivative(f[i][j - 1], 1);
        }
        for (int i = 0; i <= k + 1; ++i)
            for (int j = 0; i + j <= k + 1; ++j) n.seminorm(i, j) = f[i][j].norm();
        for (int l = 1; l <= k; ++l) n.mixed[l] = f[l - 1][1].inner(f[l][0]);
    } else {
        if (k > 2)
            throw FeasibilityError("compute_norm_aggregates: d = 2 supports k <= 2");
        // Tensor (ordered-tuple) convention: multi-index terms weighted by
        // their multinomial multiplicities, matching the operator pairings.
        auto field = [&](int a1, int a2, int b1, int b2) {
            GridFunction f = h;
            for (int c = 0; c < a1; ++c) f = derivative(f, 0);
            for (int c = 0; c < a2; ++c) f = derivative(f, 1);
            for (int c = 0; c < b1; ++c) f = derivative(f, 2);
            for (int c = 0; c < b2; ++c) f = derivative(f, 3);
            return f;
        };
        for (int i = 0; i + 0 <= k + 1; ++i)
            for (int j = 0; i + j <= k + 1; ++j) {
                long double s = 0.0L;
                for (int a1 = 0; a1 <= i; ++a1)
                    for (int b1 = 0; b1 <= j; ++b1) {
                        GridFunction f = field(a1, i - a1, b1, j - b1);
                        s += binom(i, a1) * binom(j, b1) * f.inner(f);
                    }
                n.seminorm(i, j) = std::sqrt(static_cast<double>(s));
            }
        for (int l = 1; l <= k; ++l) {
            long double s = 0.0L;
            for (int a1 = 0; a1 <= l - 1; ++a1) {
                const long double mult = binom(l - 1, a1);
                for (int j = 0; j < 2; ++j) {
                    GridFunction u = field(a1, l - 1 - a1, 0, 0);
                    GridFunction uv = derivative(u, 2 + j);
                    GridFunction ux = derivative(u, j);
                    s += mult * uv.inner(ux);
                }
            }
            n.mixed[l] = static_cast<double>(s);
        }
    }
    n.refresh_aggregates();
    return n;
}

} // namespace hypokit
