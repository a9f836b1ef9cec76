#pragma once

#include <array>
#include <complex>
#include <vector>

namespace hypokit {

/// Mean and block covariance of the Gaussian law of the quadratic-potential
/// evolution at time t. Covariance is [[g11, g12],[g12, g22]] (x) I_d.
struct GaussianState {
    double t = 0.0;
    int d = 1;
    std::vector<double> mean;   // size 2d: x block then v block
    double gamma11 = 0.0;
    double gamma12 = 0.0;
    double gamma22 = 0.0;

    GaussianState() : mean(2, 0.0) {}
    GaussianState(double time, int dim) : t(time), d(dim), mean(2 * dim, 0.0) {}
};

/// Eigen-data of the drift matrix Xi = [[0,1],[-omega0^2,-1]].
struct SpectralData {
    double omega0 = 1.0;
    std::complex<double> lambda1, lambda2;
    std::array<std::complex<double>, 2> xi1, xi2; // eigenvectors (1, lambda_k)
    std::complex<double> alpha1, alpha2;          // alpha1 xi1 + alpha2 xi2 = (0,1)^T

    static SpectralData make(double omega0);
};

/// Zero-potential fundamental-solution covariance: (2 theta t^3/3, theta t^2, 2 theta t),
/// with the constant drift eta folded into the mean.
GaussianState kolmogorov_covariance(double t, double theta, int d = 1,
                                    const std::vector<double>& x0 = {},
                                    const std::vector<double>& v0 = {},
                                    const std::vector<double>& eta = {});

/// Quadratic-potential fundamental-solution covariance by the eigen-sum formula.
GaussianState quadratic_covariance(double t, const SpectralData& spec, int d = 1);

/// Classical RK4 integration of dGamma/dt = Xi Gamma + Gamma Xi^T + 2 diag(0,1)
/// from a given initial state (zero by default); test oracle.
GaussianState covariance_ode_oracle(double t, double omega0, double dt,
                                    const GaussianState* initial = nullptr);

/// Exact propagation of a Gaussian datum: mean -> e^{Xi t} mean,
/// cov -> e^{Xi t} cov e^{Xi^T t} + Gamma(t).
GaussianState propagate_gaussian(const GaussianState& initial, const SpectralData& spec,
                                 double t);

/// || grad_x^l grad_v^{k-l} G(t,.) ||_{L2(mu)} for the density G of the state
/// relative to mu, evaluated by Gauss-Hermite quadrature in the short-time
/// scaled variables x' = t^{-3/2} x, v' = t^{-1/2} v.
double gaussian_hk_seminorm(const GaussianState& state, double omega0, int k, int l);

/// Log-log slope of the short-time seminorm growth of the delta-initialized
/// fundamental solution, normalized by the initial-datum norm as in the
/// sharpness argument (solution G(2t) started from datum G(t)).
struct SlopeReport {
    double slope = 0.0;
    double r_squared = 0.0;
    std::vector<double> t_samples;
    std::vector<double> ratios;
};
SlopeReport sharpness_slope(double omega0, int k, int l, double t_min, double t_max,
                            int samples = 10);

} // namespace hypokit
