#pragma once

#include <vector>

#include "hypokit/certificate.hpp"
#include "hypokit/grid.hpp"
#include "hypokit/norms.hpp"

namespace hypokit {

/// Configuration of the deterministic evolution d/dt h + L h = 0 on a 1D x 1D
/// grid. Strang splitting: half-step transport, full Crank-Nicolson velocity
/// step, half-step transport.
struct SolverConfig {
    PotentialSpec potential;
    int nx = 256;
    int nv = 256;
    double Lx = 7.0;
    double Lv = 7.0;
    double dt = 0.0;          // 0 = largest stable step
    double t_final = 1.0;
    int record_every = 50;

    /// Stability bound min(hx/max|v|, hv/max|grad V|, hv^2/2) on this grid.
    double cfl_limit() const;
};

struct EvolveResult {
    double background = 0.0;           // constant boundary value split off h0
    double mean = 0.0;                 // conserved integral of h0 d(mu)
    std::vector<double> times;
    std::vector<GridFunction> snapshots;  // decaying part u_t = h_t - background
    GeometryPtr geom;
};

/// March h0 forward. The constant background (the value h0 assumes at the
/// domain boundary) rides along unchanged; snapshots hold the decaying part.
EvolveResult evolve(const GridFunction& h0, const SolverConfig& cfg);

/// Norm time series along a run, with the certified quantities attached.
struct NormReport {
    int k = 0;
    double mean = 0.0;
    std::vector<double> times;
    std::vector<NormAggregates> aggregates;  // of the mean-removed solution
    std::vector<double> twisted;             // twisted norm of h (mean^2 included)
    std::vector<double> twisted_centered;    // twisted norm of h - mean
    std::vector<double> plain_centered;      // plain squared H^k norm of h - mean
    std::vector<double> herau;               // F(t) for 0 < t <= 1, NaN outside
    bool rate_defined = false;
    double fitted_decay_rate = 0.0;          // of the squared twisted norm
    double certified_rate = 0.0;             // 2 lambda_k
    double certified_Lambda = 0.0;           // Lambda_k
};

NormReport norm_timeseries(const EvolveResult& run, int k,
                           const HypocoercivityCertificate& hypo,
                           const HerauCertificate& herau);

/// Poincare constant of exp(-V(x)) dx / Z on [-L, L]: 1 / (smallest nonzero
/// eigenvalue of the weighted Laplacian), by deflated inverse iteration.
double estimate_spatial_poincare(const PotentialSpec& potential, double L, int n = 4096);

/// Mean-zero rough initial datum: bounded seeded noise smoothed by one
/// velocity diffusion sub-step, the grid surrogate for L2-rough data.
GridFunction rough_initial_datum(const GeometryPtr& geom, unsigned seed, double dt_smooth);

} // namespace hypokit
