#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace hypokit {

struct CurieWeissParams {
    double beta = 1.0; ///< inverse temperature
    double K = 0.0;    ///< coupling: ferro K > 0, antiferro K < 0
    int N = 1;         ///< particle count

    void validate() const;
};

/// Relative-boundedness constant 2020 (beta^{2/3} + beta^2 + K^4 beta^2),
/// independent of the particle count.
double mean_field_M(double beta, double K);

/// Weighted Poincare constants for the quartic on-site weights.
struct WeightedPoincare {
    double M4p = 0.0;  ///< 2 (3/2 + 1/C + 2 K^2)^2 + 4/beta
    double M4pp = 0.0; ///< 2 C / beta^2
    double M2p = 0.0;  ///< (3/2 + 1/C + 2 K^2)^2 + 2/beta + 1/2
    double M2pp = 0.0; ///< C / beta^2 + 1/2
};
WeightedPoincare weighted_poincare_constants(double beta, double K, double C);

/// Spatial Poincare constant of the mean-field measure, with the
/// phase-transition validity flags.
struct PoincareKappa {
    double kappa = 0.0;
    std::string regime;         // "ferro", "antiferro", "uncoupled"
    bool valid = false;
    double lambda1 = 0.0;       // ferro gap expression sqrt(pi/beta) e^{beta/4} - beta K
    bool large_N_as_written = false; // antiferro condition evaluated with signed K
    bool large_N_abs = false;        // ... and with |K|
    std::string message;
};
PoincareKappa poincare_kappa(const CurieWeissParams& params);

struct EnsembleConfig {
    int replicas = 8;
    double dt = 1e-3;
    double t_final = 100.0;
    std::uint64_t seed = 1;
    int record_every = 50;
    double noise_scale = 1.0;              // 0 tests the deterministic skeleton
    std::vector<double> x0, y0;            // optional explicit initial particles (replica 0 layout,
                                           // reused across replicas)
    std::vector<std::uint64_t> stream_labels; // optional per-particle noise stream labels
    bool record_particles = false;         // keep replica-0 particle paths
};

/// Trajectory summary of the underdamped simulation.
struct TrajectorySummary {
    double dt_sample = 0.0;                 // spacing of recorded samples
    std::vector<double> times;
    std::vector<std::vector<double>> magnetization; // [replica][sample]
    std::vector<std::vector<double>> energy;        // [replica][sample]
    std::vector<std::vector<double>> position_sq;   // (1/N) sum x_i^2
    std::vector<std::vector<double>> velocity_sq;   // (1/N) sum y_i^2
    std::vector<std::vector<double>> particle_paths; // [particle][sample], replica 0 only
    std::vector<double> final_positions;    // replica 0
    std::vector<double> final_velocities;   // replica 0
};

/// BAOAB splitting with the exact Ornstein-Uhlenbeck velocity sub-step
/// (friction 1, diffusion sqrt(2)) for the Curie-Weiss force.
TrajectorySummary langevin_simulate(const CurieWeissParams& params, const EnsembleConfig& cfg);

/// Same integrator with the quadratic force -omega0^2 x (test instance).
TrajectorySummary langevin_simulate_quadratic(double omega0, int N, const EnsembleConfig& cfg);

/// Exponential relaxation rate of the magnetization autocorrelation via a
/// two-pole linear-prediction fit, with bootstrap error bars over replicas.
struct RelaxationEstimate {
    double rate = 0.0;
    double stderr_rate = 0.0;
    double r_squared = 0.0;
    bool flagged = false;   // non-decaying or poor fit (r^2 < 0.8)
};
RelaxationEstimate relaxation_estimate(const TrajectorySummary& traj, double burn_in);

nlohmann::json to_json(const PoincareKappa& pk);

} // namespace hypokit
