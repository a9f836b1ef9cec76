#include "hypokit/exactsolver.hpp"

#include <cmath>

#include "hypokit/errors.hpp"
#include "hypokit/linalg.hpp"

namespace hypokit {

namespace {

using cplx = std::complex<double>;

/// (e^{z t} - 1) / z, switching to a 6-term series for small |z| t to avoid
/// cancellation.
cplx expm1_over(cplx z, double t) {
    if (std::abs(z) < 1e-10 || std::abs(z) * t < 1e-6) {
        const cplx zt = z * t;
        cplx s = 1.0, term = 1.0;
        for (int n = 2; n <= 6; ++n) {
            term *= zt / static_cast<double>(n);
            s += term;
        }
        return t * s;
    }
    return (std::exp(z * t) - 1.0) / z;
}

/// Gauss-Hermite nodes/weights for weight e^{-x^2} (Numerical-Recipes style
/// Newton iteration on the Hermite recurrence).
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
    const double EPS = 1e-14, PIM4 = 0.7511255444649425;
    const int MAXIT = 100;
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    double z = 0.0, pp = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];
        for (int it = 0; it < MAXIT; ++it) {
            double p1 = PIM4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= EPS) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
}

/// Dense bivariate polynomial, coefficient of x^i v^j at (i, j).
struct Poly2 {
    int deg = 0;
    std::vector<double> c; // (deg+1)^2

    explicit Poly2(int degree) : deg(degree), c((degree + 1) * (degree + 1), 0.0) {}
    double& at(int i, int j) { return c[i * (deg + 1) + j]; }
    double get(int i, int j) const {
        if (i < 0 || j < 0 || i > deg || j > deg) return 0.0;
        return c[i * (deg + 1) + j];
    }
    double eval(double x, double v) const {
        double s = 0.0;
        for (int i = deg; i >= 0; --i) {
            double row = 0.0;
            for (int j = deg; j >= 0; --j) row = row * v + get(i, j);
            s = s * x + row;
        }
        return s;
    }
};

/// P -> dP/dz_axis + P * (linear form), the derivative recurrence for
/// polynomial-times-Gaussian functions. Linear form: -(A z)_axis + b_axis.
Poly2 derive_poly(const Poly2& p, int axis, const double A[2][2], const double b[2]) {
    Poly2 out(p.deg + 1);
    for (int i = 0; i <= p.deg; ++i)
        for (int j = 0; j <= p.deg; ++j) {
            const double v = p.get(i, j);
            if (v == 0.0) continue;
            // derivative part
            if (axis == 0 && i >= 1) out.at(i - 1, j) += v * i;
            if (axis == 1 && j >= 1) out.at(i, j - 1) += v * j;
            // multiply by b_axis - (A z)_axis
            out.at(i, j) += v * b[axis];
            out.at(i + 1, j) += v * (-A[axis][0]);
            out.at(i, j + 1) += v * (-A[axis][1]);
        }
    return out;
}

struct Cov2 {
    double a11, a12, a22;
    double det() const { return a11 * a22 - a12 * a12; }
};

/// 1D-core seminorm: || d_x^i d_v^j G ||_{L2(mu)} for one (x, v) pair.
double seminorm_1d_core(double t, double mx, double mv, const Cov2& S, double omega0,
                        int i, int j) {
    if (!(t > 0.0)) throw DomainError("gaussian_hk_seminorm: t must be > 0");
    const double det = S.det();
    if (det <= 0.0 || S.a11 <= 0.0)
        throw NumericalError("gaussian_hk_seminorm: covariance not positive definite");

    // Sinv, A = Sinv - Q_mu, B = 2 Sinv - Q_mu
    const double inv11 = S.a22 / det, inv12 = -S.a12 / det, inv22 = S.a11 / det;
    const double q11 = omega0 * omega0, q22 = 1.0;
    const double B11 = 2.0 * inv11 - q11, B12 = 2.0 * inv12, B22 = 2.0 * inv22 - q22;
    if (B11 <= 0.0 || B11 * B22 - B12 * B12 <= 0.0)
        throw FeasibilityError(
            "gaussian_hk_seminorm: |G|^2 d(mu) not integrable at this time; "
            "use the grid PDE path for this regime");

    // Scaled variables z = S_t z' with S_t = diag(t^{3/2}, t^{1/2}).
    const double sx = std::pow(t, 1.5), sv = std::sqrt(t);
    const double A[2][2] = {{(inv11 - q11) * sx * sx, (inv12)*sx * sv},
                            {(inv12)*sx * sv, (inv22 - q22) * sv * sv}};
    const double bx = inv11 * mx + inv12 * mv, bv = inv12 * mx + inv22 * mv;
    const double b[2] = {bx * sx, bv * sv};
    const double Bp11 = B11 * sx * sx, Bp12 = B12 * sx * sv, Bp22 = B22 * sv * sv;

    // Derivative polynomial Q_{i,j} in scaled coordinates.
    Poly2 p(0);
    p.at(0, 0) = 1.0;
    for (int a = 0; a < i; ++a) p = derive_poly(p, 0, A, b);
    for (int a = 0; a < j; ++a) p = derive_poly(p, 1, A, b);

    // Gaussian factor of the squared integrand: exp(-1/2 z' B' z' + 2 b' z').
    // Complete the square: z* = B'^{-1} (2 b').
    const double dB = Bp11 * Bp22 - Bp12 * Bp12;
    const double zs_x = (Bp22 * 2.0 * b[0] - Bp12 * 2.0 * b[1]) / dB;
    const double zs_v = (-Bp12 * 2.0 * b[0] + Bp11 * 2.0 * b[1]) / dB;
    const double c0 = 0.5 * (2.0 * b[0] * zs_x + 2.0 * b[1] * zs_v);

    // Diagonalize B' and integrate with 128-node Gauss-Hermite per axis.
    SymMatrix Bm(2);
    Bm(0, 0) = Bp11;
    Bm(0, 1) = Bm(1, 0) = Bp12;
    Bm(1, 1) = Bp22;
    std::vector<double> ev, evec;
    sym_eigen(Bm, ev, &evec);

    static thread_local std::vector<double> gx, gw;
    if (gx.size() != 128) gauss_hermite(128, gx, gw);

    double integral = 0.0;
    for (int a = 0; a < 128; ++a) {
        const double wa = gw[a];
        const double ya = std::sqrt(2.0) * gx[a] / std::sqrt(ev[0]);
        double inner = 0.0;
        for (int bn = 0; bn < 128; ++bn) {
            const double yb = std::sqrt(2.0) * gx[bn] / std::sqrt(ev[1]);
            const double zx = zs_x + evec[0 * 2 + 0] * ya + evec[0 * 2 + 1] * yb;
            const double zv = zs_v + evec[1 * 2 + 0] * ya + evec[1 * 2 + 1] * yb;
            const double pv = p.eval(zx, zv);
            inner += gw[bn] * pv * pv;
        }
        integral += wa * inner;
    }
    integral *= 2.0 / std::sqrt(ev[0] * ev[1]); // (sqrt(2))^2 substitution factors

    // Prefactors: C_G^2 with C_G = det(S)^{-1/2}/omega0 * exp(-1/2 m' Sinv m),
    // the mu normalization omega0/(2 pi), the scaling Jacobian t^2, and the
    // derivative scaling t^{-(3i+j)}.
    const double mquad = inv11 * mx * mx + 2.0 * inv12 * mx * mv + inv22 * mv * mv;
    const double logCG2 = -std::log(det) - 2.0 * std::log(omega0) - mquad;
    const double logpre = logCG2 + std::log(omega0 / (2.0 * M_PI)) +
                          (2.0 - 3.0 * i - j) * std::log(t) + c0;
    const double val2 = integral * std::exp(logpre);
    return std::sqrt(std::max(0.0, val2));
}

} // namespace

SpectralData SpectralData::make(double omega0) {
    if (omega0 <= 0.0 || std::abs(omega0 - 0.5) < 1e-12)
        throw ParameterError("SpectralData: omega0 must be positive and != 1/2 "
                             "(degenerate eigenvalue case not implemented; "
                             "omega0 = 0 is the zero-potential path)");
    SpectralData s;
    s.omega0 = omega0;
    const cplx disc = std::sqrt(cplx(1.0 - 4.0 * omega0 * omega0, 0.0));
    s.lambda1 = (-1.0 + disc) / 2.0;
    s.lambda2 = (-1.0 - disc) / 2.0;
    s.xi1 = {cplx(1.0), s.lambda1};
    s.xi2 = {cplx(1.0), s.lambda2};
    s.alpha1 = 1.0 / (s.lambda1 - s.lambda2);
    s.alpha2 = -s.alpha1;

    // Reconstruction invariant: Xi^n (0,1)^T = sum_k lambda_k^n alpha_k xi_k, n = 0..2.
    const double xi[2][2] = {{0.0, 1.0}, {-omega0 * omega0, -1.0}};
    double vec[2] = {0.0, 1.0};
    for (int n = 0; n <= 2; ++n) {
        const cplx l1n = std::pow(s.lambda1, n), l2n = std::pow(s.lambda2, n);
        for (int c = 0; c < 2; ++c) {
            const cplx rec = l1n * s.alpha1 * s.xi1[c] + l2n * s.alpha2 * s.xi2[c];
            if (std::abs(rec - vec[c]) > 1e-12)
                throw NumericalError("SpectralData: eigen reconstruction failed");
        }
        const double next[2] = {xi[0][0] * vec[0] + xi[0][1] * vec[1],
                                xi[1][0] * vec[0] + xi[1][1] * vec[1]};
        vec[0] = next[0];
        vec[1] = next[1];
    }
    return s;
}

GaussianState kolmogorov_covariance(double t, double theta, int d,
                                    const std::vector<double>& x0,
                                    const std::vector<double>& v0,
                                    const std::vector<double>& eta) {
    if (theta <= 0.0) throw ParameterError("kolmogorov_covariance: theta must be > 0");
    if (t < 0.0) throw ParameterError("kolmogorov_covariance: t must be >= 0");
    GaussianState s(t, d);
    for (int a = 0; a < d; ++a) {
        const double xa = a < static_cast<int>(x0.size()) ? x0[a] : 0.0;
        const double va = a < static_cast<int>(v0.size()) ? v0[a] : 0.0;
        const double ea = a < static_cast<int>(eta.size()) ? eta[a] : 0.0;
        s.mean[a] = xa + va * t + 0.5 * ea * t * t;
        s.mean[d + a] = va + ea * t;
    }
    s.gamma11 = 2.0 / 3.0 * theta * t * t * t;
    s.gamma12 = theta * t * t;
    s.gamma22 = 2.0 * theta * t;
    return s;
}

GaussianState quadratic_covariance(double t, const SpectralData& spec, int d) {
    if (t < 0.0) throw ParameterError("quadratic_covariance: t must be >= 0");
    GaussianState s(t, d);
    const std::array<std::complex<double>, 2> xs[2] = {spec.xi1, spec.xi2};
    const cplx alphas[2] = {spec.alpha1, spec.alpha2};
    const cplx lambdas[2] = {spec.lambda1, spec.lambda2};
    double g[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
            cplx sum = 0.0;
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    sum += expm1_over(lambdas[k] + lambdas[l], t) * alphas[k] * alphas[l] *
                           xs[k][i] * xs[l][j];
            sum *= 2.0;
            if (std::abs(sum.imag()) > 1e-12)
                throw NumericalError("quadratic_covariance: imaginary residue too large");
            g[i][j] = sum.real();
        }
    s.gamma11 = g[0][0];
    s.gamma12 = g[0][1];
    s.gamma22 = g[1][1];
    return s;
}

GaussianState covariance_ode_oracle(double t, double omega0, double dt,
                                    const GaussianState* initial) {
    if (dt > 1e-3) throw ParameterError("covariance_ode_oracle: dt must be <= 1e-3");
    if (t < 0.0) throw ParameterError("covariance_ode_oracle: t must be >= 0");
    const double w2 = omega0 * omega0;
    // State y = (g11, g12, g22, mx, mv); Lyapunov + mean ODEs for
    // Xi = [[0,1],[-w2,-1]], D = diag(0,1), dGamma/dt = Xi G + G Xi^T + 2D.
    auto rhs = [&](const std::array<double, 5>& y, std::array<double, 5>& f) {
        const double g11 = y[0], g12 = y[1], g22 = y[2];
        f[0] = 2.0 * g12;
        f[1] = g22 - g12 - w2 * g11;
        f[2] = -2.0 * w2 * g12 - 2.0 * g22 + 2.0;
        f[3] = y[4];
        f[4] = -w2 * y[3] - y[4];
    };
    std::array<double, 5> y{0, 0, 0, 0, 0};
    int d = 1;
    if (initial) {
        d = initial->d;
        y = {initial->gamma11, initial->gamma12, initial->gamma22,
             initial->mean.empty() ? 0.0 : initial->mean[0],
             initial->mean.size() > 1 ? initial->mean[d] : 0.0};
    }
    const long steps = static_cast<long>(std::ceil(t / dt));
    const double h = steps > 0 ? t / steps : 0.0;
    std::array<double, 5> k1, k2, k3, k4, tmp;
    for (long s = 0; s < steps; ++s) {
        rhs(y, k1);
        for (int i = 0; i < 5; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (int i = 0; i < 5; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (int i = 0; i < 5; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(tmp, k4);
        for (int i = 0; i < 5; ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    GaussianState out(t, d);
    out.gamma11 = y[0];
    out.gamma12 = y[1];
    out.gamma22 = y[2];
    if (initial) {
        // mean propagation integrated for the first axis pair only
        out.mean[0] = y[3];
        out.mean[d] = y[4];
    }
    return out;
}

GaussianState propagate_gaussian(const GaussianState& initial, const SpectralData& spec,
                                 double t) {
    if (t < 0.0) throw ParameterError("propagate_gaussian: t must be >= 0");
    const cplx l1 = spec.lambda1, l2 = spec.lambda2;
    const cplx det = l2 - l1;
    // e^{Xi t} = V diag(e^{lambda t}) V^{-1} with V = [[1,1],[l1,l2]].
    const cplx e1 = std::exp(l1 * t), e2 = std::exp(l2 * t);
    const cplx E11 = (l2 * e1 - l1 * e2) / det;
    const cplx E12 = (e2 - e1) / det;
    const cplx E21 = l1 * l2 * (e1 - e2) / det;
    const cplx E22 = (l2 * e2 - l1 * e1) / det;
    const double m[2][2] = {{E11.real(), E12.real()}, {E21.real(), E22.real()}};
    for (const auto& e : {E11, E12, E21, E22})
        if (std::abs(e.imag()) > 1e-10)
            throw NumericalError("propagate_gaussian: imaginary residue in e^{Xi t}");

    GaussianState out(t, initial.d);
    const double g0[2][2] = {{initial.gamma11, initial.gamma12},
                             {initial.gamma12, initial.gamma22}};
    double eg[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int a = 0; a < 2; ++a) eg[i][j] += m[i][a] * g0[a][j];
    double gt[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int a = 0; a < 2; ++a) gt[i][j] += eg[i][a] * m[j][a];
    const GaussianState noise = quadratic_covariance(t, spec, initial.d);
    out.gamma11 = gt[0][0] + noise.gamma11;
    out.gamma12 = gt[0][1] + noise.gamma12;
    out.gamma22 = gt[1][1] + noise.gamma22;
    for (int a = 0; a < initial.d; ++a) {
        out.mean[a] = m[0][0] * initial.mean[a] + m[0][1] * initial.mean[initial.d + a];
        out.mean[initial.d + a] =
            m[1][0] * initial.mean[a] + m[1][1] * initial.mean[initial.d + a];
    }
    return out;
}

double gaussian_hk_seminorm(const GaussianState& state, double omega0, int k, int l) {
    if (l < 0 || l > k) throw ParameterError("gaussian_hk_seminorm: need 0 <= l <= k");
    const Cov2 S{state.gamma11, state.gamma12, state.gamma22};
    const int i = l, j = k - l; // x-order, v-order
    if (state.d == 1)
        return seminorm_1d_core(state.t, state.mean[0], state.mean[1], S, omega0, i, j);
    if (state.d != 2) throw ParameterError("gaussian_hk_seminorm: d must be 1 or 2");
    // Product structure: Hilbert-Schmidt sum factorizes over axes with
    // binomial multiplicities.
    long double total = 0.0L;
    auto binom = [](int n, int r) {
        long double b = 1.0L;
        for (int q = 1; q <= r; ++q) b = b * (n - r + q) / q;
        return b;
    };
    for (int a1 = 0; a1 <= i; ++a1)
        for (int b1 = 0; b1 <= j; ++b1) {
            const double s1 = seminorm_1d_core(state.t, state.mean[0], state.mean[2], S,
                                               omega0, a1, b1);
            const double s2 = seminorm_1d_core(state.t, state.mean[1], state.mean[3], S,
                                               omega0, i - a1, j - b1);
            total += binom(i, a1) * binom(j, b1) * static_cast<long double>(s1) * s1 * s2 * s2;
        }
    return std::sqrt(static_cast<double>(total));
}

SlopeReport sharpness_slope(double omega0, int k, int l, double t_min, double t_max,
                            int samples) {
    if (!(t_min > 0.0) || t_max > 0.1 || t_min >= t_max)
        throw DomainError("sharpness_slope: window must satisfy 0 < t_min < t_max <= 0.1");
    if (samples < 8) throw ParameterError("sharpness_slope: need >= 8 samples");
    const SpectralData spec = SpectralData::make(omega0);
    SlopeReport rep;
    std::vector<double> logt, logr;
    for (int s = 0; s < samples; ++s) {
        const double f = static_cast<double>(s) / (samples - 1);
        const double t = t_min * std::pow(t_max / t_min, f);
        const GaussianState datum = quadratic_covariance(t, spec);
        const GaussianState evolved = quadratic_covariance(2.0 * t, spec);
        const double num = gaussian_hk_seminorm(evolved, omega0, k, l);
        const double den = gaussian_hk_seminorm(datum, omega0, 0, 0);
        rep.t_samples.push_back(t);
        rep.ratios.push_back(num / den);
        logt.push_back(std::log(t));
        logr.push_back(std::log(num / den));
    }
    const LineFit fit = fit_line(logt, logr);
    rep.slope = fit.slope;
    rep.r_squared = fit.r_squared;
    return rep;
}

} // namespace hypokit
