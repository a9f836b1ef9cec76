#include "hypokit/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "hypokit/errors.hpp"
#include "hypokit/parallel.hpp"
#include "hypokit/rng.hpp"

namespace hypokit {

void CurieWeissParams::validate() const {
    if (beta <= 0.0) throw ParameterError("CurieWeissParams: beta must be > 0");
    if (N < 1) throw ParameterError("CurieWeissParams: N must be >= 1");
}

double mean_field_M(double beta, double K) {
    if (beta <= 0.0) throw ParameterError("mean_field_M: beta must be > 0");
    return 2020.0 * (std::pow(beta, 2.0 / 3.0) + beta * beta + std::pow(K, 4) * beta * beta);
}

WeightedPoincare weighted_poincare_constants(double beta, double K, double C) {
    if (beta <= 0.0) throw ParameterError("weighted_poincare_constants: beta must be > 0");
    if (C <= 0.0) throw ParameterError("weighted_poincare_constants: C must be > 0");
    const double base = 1.5 + 1.0 / C + 2.0 * K * K;
    WeightedPoincare w;
    w.M4p = 2.0 * base * base + 4.0 / beta;
    w.M4pp = 2.0 * C / (beta * beta);
    w.M2p = base * base + 2.0 / beta + 0.5;
    w.M2pp = C / (beta * beta) + 0.5;
    return w;
}

PoincareKappa poincare_kappa(const CurieWeissParams& params) {
    params.validate();
    const double beta = params.beta, K = params.K;
    PoincareKappa pk;
    const double gap_base = std::sqrt(M_PI / beta) * std::exp(beta / 4.0);
    pk.lambda1 = gap_base - beta * K;
    const double large_n_threshold = 2.0 * std::pow(beta, 1.5) * std::exp(-beta / 4.0) / std::sqrt(M_PI);
    pk.large_N_as_written = params.N >= large_n_threshold * K;
    pk.large_N_abs = params.N >= large_n_threshold * std::abs(K);
    if (K < 0.0) {
        pk.regime = "antiferro";
        pk.kappa = 0.5 * std::sqrt(beta / M_PI) * std::exp(-beta / 4.0);
        pk.valid = pk.large_N_abs;
        pk.message = pk.valid ? "large-N condition satisfied (|K| reading)"
                              : "N below the large-N threshold (|K| reading); "
                                "constant not certified";
    } else if (K > 0.0) {
        pk.regime = "ferro";
        if (pk.lambda1 > 0.0) {
            pk.kappa = 1.0 / pk.lambda1;
            pk.valid = true;
            pk.message = "high-temperature regime, gap positive";
        } else {
            pk.kappa = 0.0;
            pk.valid = false;
            pk.message = "gap expression non-positive: phase-transition regime, "
                         "no N-uniform Poincare constant certified";
        }
    } else {
        pk.regime = "uncoupled";
        pk.kappa = 1.0 / gap_base;
        pk.valid = true;
        pk.message = "K = 0: N-uniform constant";
    }
    return pk;
}

namespace {

struct Force {
    // Curie-Weiss force; quadratic when quad is true.
    bool quad = false;
    double omega0 = 1.0;
    double beta = 1.0, K = 0.0;
    int N = 1;

    void eval(const std::vector<double>& x, std::vector<double>& f) const {
        if (quad) {
            for (int i = 0; i < N; ++i) f[i] = -omega0 * omega0 * x[i];
            return;
        }
        double s = 0.0;
        for (double xi : x) s += xi;
        for (int i = 0; i < N; ++i)
            f[i] = -beta * (x[i] * x[i] * x[i] - x[i] - K / N * (s - x[i]));
    }
    double potential(const std::vector<double>& x) const {
        if (quad) {
            double s = 0.0;
            for (double xi : x) s += xi * xi;
            return 0.5 * omega0 * omega0 * s;
        }
        double onsite = 0.0, sum = 0.0, sumsq = 0.0;
        for (double xi : x) {
            onsite += beta * (xi * xi * xi * xi / 4.0 - xi * xi / 2.0);
            sum += xi;
            sumsq += xi * xi;
        }
        return onsite - beta * K / (2.0 * N) * (sum * sum - sumsq);
    }
};

TrajectorySummary simulate(const Force& force, const EnsembleConfig& cfg, double dt_bound) {
    if (cfg.replicas < 1) throw ParameterError("langevin: need at least one replica");
    if (cfg.dt <= 0.0 || cfg.dt > dt_bound)
        throw ParameterError("langevin: dt must lie in (0, " + std::to_string(dt_bound) + "]");
    const int N = force.N;
    const long steps = static_cast<long>(std::ceil(cfg.t_final / cfg.dt - 1e-9));
    const long n_samples = steps / cfg.record_every + 1;

    TrajectorySummary out;
    out.dt_sample = cfg.dt * cfg.record_every;
    out.times.resize(n_samples);
    for (long s = 0; s < n_samples; ++s) out.times[s] = s * out.dt_sample;
    out.magnetization.assign(cfg.replicas, std::vector<double>(n_samples, 0.0));
    out.energy.assign(cfg.replicas, std::vector<double>(n_samples, 0.0));
    out.position_sq.assign(cfg.replicas, std::vector<double>(n_samples, 0.0));
    out.velocity_sq.assign(cfg.replicas, std::vector<double>(n_samples, 0.0));
    if (cfg.record_particles)
        out.particle_paths.assign(N, std::vector<double>(n_samples, 0.0));

    const double c1 = std::exp(-cfg.dt);
    const double c2 = std::sqrt(1.0 - c1 * c1) * cfg.noise_scale;

    std::vector<std::vector<double>> final_x(cfg.replicas), final_y(cfg.replicas);
    parallel_for(0, static_cast<std::size_t>(cfg.replicas), [&](std::size_t r) {
        std::vector<double> x(N), y(N), f(N);
        std::vector<CounterRng> noise;
        noise.reserve(N);
        for (int p = 0; p < N; ++p) {
            const std::uint64_t label =
                p < static_cast<int>(cfg.stream_labels.size()) ? cfg.stream_labels[p]
                                                               : static_cast<std::uint64_t>(p);
            noise.emplace_back(cfg.seed + 1000003ull * r, label);
        }
        if (static_cast<int>(cfg.x0.size()) == N) {
            x = cfg.x0;
            y = static_cast<int>(cfg.y0.size()) == N ? cfg.y0 : std::vector<double>(N, 0.0);
        } else {
            // Unit-Gaussian start per (seed, replica, particle).
            for (int p = 0; p < N; ++p) {
                CounterRng init(cfg.seed ^ 0xabcdefull, 7777777ull + p + 1000003ull * r);
                x[p] = init.normal(0);
                y[p] = init.normal(1);
            }
        }

        auto record = [&](long sample) {
            double m = 0.0, e = 0.0, xs = 0.0, vs = 0.0;
            for (int p = 0; p < N; ++p) {
                m += x[p];
                e += 0.5 * y[p] * y[p];
                xs += x[p] * x[p];
                vs += y[p] * y[p];
            }
            out.magnetization[r][sample] = m / N;
            out.energy[r][sample] = e + force.potential(x);
            out.position_sq[r][sample] = xs / N;
            out.velocity_sq[r][sample] = vs / N;
            if (cfg.record_particles && r == 0)
                for (int p = 0; p < N; ++p) out.particle_paths[p][sample] = x[p];
        };
        record(0);

        force.eval(x, f);
        for (long s = 1; s <= steps; ++s) {
            // BAOAB
            for (int p = 0; p < N; ++p) y[p] += 0.5 * cfg.dt * f[p];
            for (int p = 0; p < N; ++p) x[p] += 0.5 * cfg.dt * y[p];
            for (int p = 0; p < N; ++p)
                y[p] = c1 * y[p] + c2 * noise[p].normal(static_cast<std::uint64_t>(s));
            for (int p = 0; p < N; ++p) x[p] += 0.5 * cfg.dt * y[p];
            force.eval(x, f);
            for (int p = 0; p < N; ++p) y[p] += 0.5 * cfg.dt * f[p];

            for (int p = 0; p < N; ++p)
                if (std::abs(x[p]) > 1e3)
                    throw NumericalError("langevin: particle blow-up at t = " +
                                         std::to_string(s * cfg.dt) +
                                         "; reduce the step size");
            if (s % cfg.record_every == 0) record(s / cfg.record_every);
        }
        final_x[r] = x;
        final_y[r] = y;
    });
    out.final_positions = final_x[0];
    out.final_velocities = final_y[0];
    return out;
}

} // namespace

TrajectorySummary langevin_simulate(const CurieWeissParams& params, const EnsembleConfig& cfg) {
    params.validate();
    Force f;
    f.quad = false;
    f.beta = params.beta;
    f.K = params.K;
    f.N = params.N;
    const double bound = 1e-3 * std::min(1.0, 1.0 / (params.beta * (1.0 + std::abs(params.K))));
    return simulate(f, cfg, bound);
}

TrajectorySummary langevin_simulate_quadratic(double omega0, int N, const EnsembleConfig& cfg) {
    if (omega0 <= 0.0) throw ParameterError("langevin_simulate_quadratic: omega0 > 0");
    Force f;
    f.quad = true;
    f.omega0 = omega0;
    f.N = N;
    return simulate(f, cfg, 1e-3);
}

RelaxationEstimate relaxation_estimate(const TrajectorySummary& traj, double burn_in) {
    const int R = static_cast<int>(traj.magnetization.size());
    if (R < 2) throw DataError("relaxation_estimate: need >= 2 replicas for error bars");
    const double dt = traj.dt_sample;
    std::size_t start = 0;
    while (start < traj.times.size() && traj.times[start] < burn_in) ++start;
    const std::size_t T = traj.times.size() - start;
    if (T < 64) throw DataError("relaxation_estimate: post-burn-in window too short");

    const std::size_t max_lag = std::min<std::size_t>(T / 4, 4000);

    // Per-replica autocorrelation, then average.
    auto replica_acf = [&](int r) {
        const auto& m = traj.magnetization[r];
        double mean = 0.0;
        for (std::size_t s = start; s < traj.times.size(); ++s) mean += m[s];
        mean /= T;
        std::vector<double> c(max_lag + 1, 0.0);
        for (std::size_t lag = 0; lag <= max_lag; ++lag) {
            double s = 0.0;
            for (std::size_t i = start; i + lag < traj.times.size(); ++i)
                s += (m[i] - mean) * (m[i + lag] - mean);
            c[lag] = s / (T - lag);
        }
        return c;
    };
    std::vector<std::vector<double>> acfs(R);
    for (int r = 0; r < R; ++r) acfs[r] = replica_acf(r);

    // Two-pole linear prediction c[n+2] = a c[n+1] + b c[n] on the normalized
    // averaged autocorrelation; the slowest pole gives the rate. The series is
    // decimated so the pole magnitudes sit well inside the unit circle,
    // otherwise the -log|p| / lag map amplifies regression noise by 1/lag.
    struct TwoPole {
        bool ok = false;
        double rate = -1.0;
        double r_squared = 0.0;
    };
    auto fit_two_pole = [&](const std::vector<int>& replicas) -> TwoPole {
        TwoPole fit;
        std::vector<double> raw(max_lag + 1, 0.0);
        for (int r : replicas)
            for (std::size_t l = 0; l <= max_lag; ++l) raw[l] += acfs[r][l];
        if (raw[0] <= 0.0) return fit;
        const double c0 = raw[0];
        for (double& v : raw) v /= c0;

        // Integrated autocorrelation time sets the lag stride and window.
        double tau = 0.5;
        for (std::size_t l = 1; l <= max_lag; ++l) {
            if (raw[l] < 0.05) break;
            tau += raw[l];
        }
        tau *= dt;
        const std::size_t stride =
            std::max<std::size_t>(1, static_cast<std::size_t>(0.4 * tau / dt));
        std::vector<double> c;
        for (std::size_t l = 0; l * stride <= max_lag; ++l) c.push_back(raw[l * stride]);
        const double step = stride * dt;
        std::size_t L = std::min<std::size_t>(
            c.size() - 1,
            std::max<std::size_t>(8, static_cast<std::size_t>(3.0 * tau / step)));
        if (L < 3) return fit;

        double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
        for (std::size_t nn = 0; nn + 2 <= L; ++nn) {
            s11 += c[nn + 1] * c[nn + 1];
            s12 += c[nn + 1] * c[nn];
            s22 += c[nn] * c[nn];
            r1 += c[nn + 2] * c[nn + 1];
            r2 += c[nn + 2] * c[nn];
        }
        const double det = s11 * s22 - s12 * s12;
        if (std::abs(det) < 1e-300) return fit;
        const double a = (r1 * s22 - r2 * s12) / det;
        const double b = (r2 * s11 - r1 * s12) / det;
        double ssr = 0.0, sst = 0.0, mean = 0.0;
        std::size_t cnt = 0;
        for (std::size_t nn = 0; nn + 2 <= L; ++nn) { mean += c[nn + 2]; ++cnt; }
        mean /= std::max<std::size_t>(1, cnt);
        for (std::size_t nn = 0; nn + 2 <= L; ++nn) {
            const double pred = a * c[nn + 1] + b * c[nn];
            ssr += (c[nn + 2] - pred) * (c[nn + 2] - pred);
            sst += (c[nn + 2] - mean) * (c[nn + 2] - mean);
        }
        fit.r_squared = sst > 0 ? 1.0 - ssr / sst : 0.0;
        const std::complex<double> disc = std::sqrt(std::complex<double>(a * a + 4.0 * b, 0.0));
        const double pmax = std::max(std::abs((a + disc) / 2.0), std::abs((a - disc) / 2.0));
        if (pmax <= 0.0 || pmax >= 1.0) return fit;
        fit.rate = -std::log(pmax) / step;
        fit.ok = true;
        return fit;
    };

    std::vector<int> all(R);
    for (int r = 0; r < R; ++r) all[r] = r;
    RelaxationEstimate est;
    const TwoPole main_fit = fit_two_pole(all);
    est.rate = main_fit.rate;
    est.r_squared = main_fit.r_squared;

    // Bootstrap over replicas.
    CounterRng boot(999331, 17);
    const int B = 100;
    std::vector<double> rates;
    rates.reserve(B);
    std::uint64_t ctr = 0;
    for (int bsamp = 0; bsamp < B; ++bsamp) {
        std::vector<int> pick(R);
        for (int r = 0; r < R; ++r)
            pick[r] = static_cast<int>(boot.uniform(ctr++) * R) % R;
        const TwoPole bf = fit_two_pole(pick);
        if (bf.ok) rates.push_back(bf.rate);
    }
    if (rates.size() >= 2) {
        double mu = 0.0;
        for (double rr : rates) mu += rr;
        mu /= rates.size();
        double var = 0.0;
        for (double rr : rates) var += (rr - mu) * (rr - mu);
        est.stderr_rate = std::sqrt(var / (rates.size() - 1));
    }
    est.flagged = est.rate <= 0.0 || est.r_squared < 0.8;
    return est;
}

nlohmann::json to_json(const PoincareKappa& pk) {
    return nlohmann::json{{"kappa", pk.kappa},
                          {"regime", pk.regime},
                          {"valid", pk.valid},
                          {"lambda1", pk.lambda1},
                          {"large_N_as_written", pk.large_N_as_written},
                          {"large_N_abs_coupling", pk.large_N_abs},
                          {"message", pk.message},
                          {"anchors",
                           {{"kappa_antiferro", "kappa = (1/2) sqrt(beta/pi) e^{-beta/4}"},
                            {"kappa_ferro", "kappa = 1 / (sqrt(pi/beta) e^{beta/4} - beta K)"},
                            {"large_N", "N >= 2 beta^{3/2} K e^{-beta/4} / sqrt(pi)"}}}};
}

} // namespace hypokit
