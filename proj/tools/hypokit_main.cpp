// hypokit command-line driver: every pipeline as a subcommand, emitting JSON
// reports, CSV tables and optional SVG plots, plus a run manifest.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hypokit/certificate.hpp"
#include "hypokit/errors.hpp"
#include "hypokit/exactsolver.hpp"
#include "hypokit/grid.hpp"
#include "hypokit/meanfield.hpp"
#include "hypokit/operators.hpp"
#include "hypokit/pdesolver.hpp"
#include "hypokit/report.hpp"
#include "hypokit/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string out_dir = ".";
    bool plot = false;
};

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw hypokit::DataError("cannot open " + path);
    out << j.dump(2) << "\n";
}

hypokit::PotentialSpec potential_from_flags(const std::string& name, double omega0,
                                            double beta) {
    if (name == "quadratic") return hypokit::PotentialSpec::quadratic(omega0);
    if (name == "doublewell") return hypokit::PotentialSpec::curie_weiss(beta, 0.0, 1);
    throw hypokit::ParameterError("unknown potential '" + name +
                                  "' (expected quadratic or doublewell)");
}

/// Gaussian perturbation datum representable by the closed-form evolution:
/// h0 = 1 + (density of N(mean, cov) relative to mu - 1).
hypokit::GridFunction gaussian_perturbation_datum(const hypokit::GeometryPtr& geom,
                                                  double omega0,
                                                  const hypokit::GaussianState& s) {
    const double det = s.gamma11 * s.gamma22 - s.gamma12 * s.gamma12;
    const double i11 = s.gamma22 / det, i12 = -s.gamma12 / det, i22 = s.gamma11 / det;
    const double cg = 1.0 / (omega0 * std::sqrt(det));
    return hypokit::GridFunction::sample(geom, [&](const double* x, const double* v) {
        const double dx = x[0] - s.mean[0], dv = v[0] - s.mean[1];
        const double quad_p = i11 * dx * dx + 2.0 * i12 * dx * dv + i22 * dv * dv;
        const double quad_mu = omega0 * omega0 * x[0] * x[0] + v[0] * v[0];
        return 1.0 + cg * std::exp(-0.5 * quad_p + 0.5 * quad_mu) - 1.0;
    });
}

int cmd_certificate(int k, double big_m, double kappa, bool has_kappa,
                    const CommonOpts& common) {
    ensure_dir(common.out_dir);
    hypokit::RunManifest manifest(
        "certificate", json{{"k", k}, {"big_m", big_m}, {"kappa", has_kappa ? json(kappa) : json()}});

    hypokit::ProblemParams params;
    params.k = k;
    params.M = big_m;
    if (has_kappa) params.kappa = kappa;
    else params.kappa = 1.0; // final-rate normalization defaults to kappa = 1

    const auto hypo = hypokit::build_hypocoercivity_certificate(params);
    const auto herau = hypokit::build_herau_certificate(params);

    const std::string hypo_path = join_path(common.out_dir, "certificate_hypocoercivity.json");
    const std::string herau_path = join_path(common.out_dir, "certificate_herau.json");
    write_json(hypo_path, hypokit::to_json(hypo));
    write_json(herau_path, hypokit::to_json(herau));
    manifest.add_artifact(hypo_path);
    manifest.add_artifact(herau_path);
    manifest.finalize(join_path(common.out_dir, "manifest_certificate.json"));
    std::cout << "lambda_final = " << hypo.lambda_final << ", Lambda_k = "
              << (herau.levels.empty() ? herau.Lambda0 : herau.levels.back().Lambda) << "\n";
    return 0;
}

int cmd_exact(double omega0, double t_max, int t_steps, int slope_k, int slope_l,
              double window_lo, double window_hi, const CommonOpts& common) {
    ensure_dir(common.out_dir);
    hypokit::RunManifest manifest("exact", json{{"omega0", omega0},
                                                {"t_max", t_max},
                                                {"slope_k", slope_k},
                                                {"slope_l", slope_l}});
    const auto spec = hypokit::SpectralData::make(omega0);

    hypokit::CsvWriter cov({"t", "gamma11", "gamma12", "gamma22"});
    std::vector<double> ts, g11s;
    for (int i = 0; i <= t_steps; ++i) {
        const double t = t_max * i / t_steps;
        const auto st = hypokit::quadratic_covariance(t, spec);
        cov.add_row({t, st.gamma11, st.gamma12, st.gamma22});
        ts.push_back(t);
        g11s.push_back(st.gamma11);
    }
    const std::string cov_path = join_path(common.out_dir, "covariance_table.csv");
    cov.write(cov_path);
    manifest.add_artifact(cov_path);

    json summary{{"omega0", omega0}};
    if (slope_k >= 1) {
        const auto rep = hypokit::sharpness_slope(omega0, slope_k, slope_l, window_lo,
                                                  window_hi);
        summary["slope"] = rep.slope;
        summary["r_squared"] = rep.r_squared;
        summary["expected_slope"] = -(slope_k / 2.0 + slope_l);
        hypokit::CsvWriter sl({"t", "normalized_seminorm"});
        for (std::size_t i = 0; i < rep.t_samples.size(); ++i)
            sl.add_row({rep.t_samples[i], rep.ratios[i]});
        const std::string sl_path = join_path(common.out_dir, "slope_samples.csv");
        sl.write(sl_path);
        manifest.add_artifact(sl_path);
        if (common.plot) {
            const std::string plot_path = join_path(common.out_dir, "slope_loglog.svg");
            hypokit::write_svg_plot(plot_path, "short-time seminorm growth",
                                    {{"normalized seminorm", rep.t_samples, rep.ratios}},
                                    true, true);
            manifest.add_artifact(plot_path);
        }
    }
    const std::string sum_path = join_path(common.out_dir, "exact_summary.json");
    write_json(sum_path, summary);
    manifest.add_artifact(sum_path);
    manifest.finalize(join_path(common.out_dir, "manifest_exact.json"));
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_pde(const std::string& potential_name, double omega0, double beta, int k,
            double t_final, double dt, int nx, int nv, double Lx, double Lv,
            int record_every, double big_m_override, double kappa_override,
            bool dump_snapshots, const CommonOpts& common) {
    ensure_dir(common.out_dir);
    hypokit::RunManifest manifest("pde", json{{"potential", potential_name},
                                              {"omega0", omega0},
                                              {"beta", beta},
                                              {"k", k},
                                              {"t_final", t_final},
                                              {"nx", nx},
                                              {"nv", nv}});
    const auto pot = potential_from_flags(potential_name, omega0, beta);

    hypokit::SolverConfig cfg;
    cfg.potential = pot;
    cfg.nx = nx;
    cfg.nv = nv;
    cfg.Lx = Lx;
    cfg.Lv = Lv;
    cfg.dt = dt;
    cfg.t_final = t_final;
    cfg.record_every = record_every;

    hypokit::ProblemParams params;
    params.k = k;
    params.M = big_m_override > 0 ? big_m_override : hypokit::assumption_constant_M(pot);
    params.kappa = kappa_override > 0
                       ? kappa_override
                       : hypokit::estimate_spatial_poincare(pot, Lx);
    const auto hypo = hypokit::build_hypocoercivity_certificate(params);
    const auto herau = hypokit::build_herau_certificate(params);

    auto geom = std::make_shared<hypokit::GridGeometry>(1, nx, nv, Lx, Lv, pot);
    hypokit::GridFunction h0 = [&] {
        if (potential_name == "quadratic") {
            hypokit::GaussianState init(0.0, 1);
            init.mean = {0.3, -0.2};
            init.gamma11 = 0.5;
            init.gamma12 = 0.0;
            init.gamma22 = 0.5;
            return gaussian_perturbation_datum(geom, omega0, init);
        }
        return hypokit::GridFunction::sample(geom, [&](const double* x, const double* v) {
            return 1.0 + std::exp(-((x[0] - 0.8) * (x[0] - 0.8) + v[0] * v[0]) / 0.6);
        });
    }();

    const auto run = hypokit::evolve(h0, cfg);
    const auto rep = hypokit::norm_timeseries(run, k, hypo, herau);

    hypokit::CsvWriter csv({"t", "l2_centered", "twisted", "twisted_centered",
                            "plain_hk_centered", "herau"});
    for (std::size_t s = 0; s < rep.times.size(); ++s)
        csv.add_row({rep.times[s], rep.aggregates[s].seminorm(0, 0), rep.twisted[s],
                     rep.twisted_centered[s], rep.plain_centered[s], rep.herau[s]});
    const std::string csv_path = join_path(common.out_dir, "norm_report.csv");
    csv.write(csv_path);
    manifest.add_artifact(csv_path);

    if (dump_snapshots) {
        for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
            const std::string p =
                join_path(common.out_dir, "snapshot_" + std::to_string(s) + ".hkgrid");
            hypokit::save_grid_function(run.snapshots[s], p);
            manifest.add_artifact(p);
        }
    }
    if (common.plot) {
        const std::string plot_path = join_path(common.out_dir, "twisted_decay.svg");
        hypokit::write_svg_plot(plot_path, "twisted norm decay",
                                {{"twisted (centered)", rep.times, rep.twisted_centered}},
                                false, true);
        manifest.add_artifact(plot_path);
    }

    json summary{{"k", k},
                 {"M", params.M},
                 {"kappa", *params.kappa},
                 {"mean", rep.mean},
                 {"fitted_decay_rate", rep.rate_defined ? json(rep.fitted_decay_rate) : json()},
                 {"rate_defined", rep.rate_defined},
                 {"certified_rate", rep.certified_rate},
                 {"certified_Lambda", rep.certified_Lambda}};
    const std::string sum_path = join_path(common.out_dir, "pde_summary.json");
    write_json(sum_path, summary);
    manifest.add_artifact(sum_path);
    manifest.finalize(join_path(common.out_dir, "manifest_pde.json"));
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_langevin(double beta, double coupling, int particles, int replicas, double dt,
                 double t_final, std::uint64_t seed, double burn_in,
                 const CommonOpts& common) {
    ensure_dir(common.out_dir);
    hypokit::RunManifest manifest("langevin", json{{"beta", beta},
                                                   {"coupling", coupling},
                                                   {"particles", particles},
                                                   {"replicas", replicas},
                                                   {"dt", dt},
                                                   {"t_final", t_final},
                                                   {"seed", seed}});
    hypokit::CurieWeissParams params{beta, coupling, particles};
    hypokit::EnsembleConfig cfg;
    cfg.replicas = replicas;
    cfg.dt = dt;
    cfg.t_final = t_final;
    cfg.seed = seed;

    const auto traj = hypokit::langevin_simulate(params, cfg);
    const auto kappa = hypokit::poincare_kappa(params);
    const auto est = hypokit::relaxation_estimate(traj, burn_in);

    hypokit::CsvWriter csv([&] {
        std::vector<std::string> cols{"t"};
        for (int r = 0; r < replicas; ++r) cols.push_back("m_replica" + std::to_string(r));
        return cols;
    }());
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        std::vector<double> row{traj.times[s]};
        for (int r = 0; r < replicas; ++r) row.push_back(traj.magnetization[r][s]);
        csv.add_row(row);
    }
    const std::string csv_path = join_path(common.out_dir, "magnetization.csv");
    csv.write(csv_path);
    manifest.add_artifact(csv_path);

    json summary{{"M", hypokit::mean_field_M(beta, coupling)},
                 {"poincare", hypokit::to_json(kappa)},
                 {"relaxation_rate", est.rate},
                 {"relaxation_stderr", est.stderr_rate},
                 {"fit_r_squared", est.r_squared},
                 {"flagged", est.flagged}};
    const std::string sum_path = join_path(common.out_dir, "langevin_summary.json");
    write_json(sum_path, summary);
    manifest.add_artifact(sum_path);
    if (common.plot) {
        const std::string plot_path = join_path(common.out_dir, "magnetization.svg");
        hypokit::write_svg_plot(plot_path, "magnetization",
                                {{"replica 0", traj.times, traj.magnetization[0]}});
        manifest.add_artifact(plot_path);
    }
    manifest.finalize(join_path(common.out_dir, "manifest_langevin.json"));
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_verify_ops(int k, const std::string& potential_name, double omega0, double beta,
                   std::uint64_t seed, int grid_n, double L, const CommonOpts& common) {
    ensure_dir(common.out_dir);
    hypokit::RunManifest manifest("verify-ops", json{{"k", k},
                                                     {"potential", potential_name},
                                                     {"omega0", omega0},
                                                     {"grid_n", grid_n},
                                                     {"seed", seed}});
    const auto pot = potential_from_flags(potential_name, omega0, beta);
    auto geom = std::make_shared<hypokit::GridGeometry>(1, grid_n, grid_n, L, L, pot);
    const double M = hypokit::assumption_constant_M(pot);

    hypokit::CounterRng rng(seed, 3);
    json rows = json::array();
    double worst_rel = 0.0, worst_slack = 0.0;
    for (int inst = 0; inst < 3; ++inst) {
        const double ax = 0.24 + 0.12 * rng.uniform(8 * inst);
        const double av = 0.24 + 0.12 * rng.uniform(8 * inst + 1);
        const double cx = 1.2 * (rng.uniform(8 * inst + 2) - 0.5);
        const double cv = 1.2 * (rng.uniform(8 * inst + 3) - 0.5);
        const double px = rng.uniform(8 * inst + 4);
        auto h = hypokit::GridFunction::sample(geom, [&](const double* x, const double* v) {
            const double g = std::exp(-ax * (x[0] - cx) * (x[0] - cx) -
                                      av * (v[0] - cv) * (v[0] - cv));
            return (1.0 + 0.4 * px * x[0] * v[0]) * g;
        });
        for (int m1 = 0; m1 <= k; ++m1) {
            const auto t = hypokit::dissipation_terms(h, pot, k, m1);
            auto rel = [](double a, double b) {
                return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
            };
            worst_rel = std::max({worst_rel, rel(t.T_A_direct, t.T_A_closed),
                                  rel(t.T_B_direct, t.T_B_closed),
                                  rel(t.Tmix_A_direct, t.Tmix_A_closed),
                                  rel(t.Tmix_B_direct, t.Tmix_B_closed)});
        }
        const auto rep = hypokit::verify_dissipation_bounds(h, pot, M, k);
        worst_slack = std::min(worst_slack, rep.min_slack);
        rows.push_back({{"instance", inst},
                        {"min_slack", rep.min_slack},
                        {"M_consistent", rep.M_consistent}});
    }
    json summary{{"k", k},
                 {"M", M},
                 {"worst_identity_relative_error", worst_rel},
                 {"worst_bound_slack", worst_slack},
                 {"instances", rows},
                 {"pass", worst_rel < 1e-5 && worst_slack > -1e-5}};
    const std::string sum_path = join_path(common.out_dir, "verify_ops_summary.json");
    write_json(sum_path, summary);
    manifest.add_artifact(sum_path);
    manifest.finalize(join_path(common.out_dir, "manifest_verify_ops.json"));
    std::cout << summary.dump(2) << "\n";
    return summary["pass"].get<bool>() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypokit: coefficient certificates and numerical checks for the "
                 "kinetic Fokker-Planck evolution"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--out-dir", common.out_dir, "output directory")->capture_default_str();
    app.add_flag("--plot", common.plot, "emit SVG plots alongside CSV outputs");

    // certificate
    auto* c_cert = app.add_subcommand("certificate", "build both coefficient certificates");
    int cert_k = 0;
    double cert_m = 1.0, cert_kappa = 0.0;
    c_cert->add_option("--k", cert_k, "Sobolev order")->required();
    c_cert->add_option("--big-m", cert_m, "relative-boundedness constant M >= 1")->required();
    auto* kappa_opt = c_cert->add_option("--kappa", cert_kappa, "Poincare constant");

    // exact
    auto* c_exact = app.add_subcommand("exact", "closed-form covariance and sharpness slopes");
    double ex_omega0 = 1.0, ex_tmax = 5.0, ex_wlo = 1e-3, ex_whi = 1e-2;
    int ex_steps = 50, ex_k = 0, ex_l = 0;
    c_exact->add_option("--omega0", ex_omega0, "potential frequency (not 0 or 1/2)")->required();
    c_exact->add_option("--t-max", ex_tmax, "covariance table horizon")->capture_default_str();
    c_exact->add_option("--t-steps", ex_steps, "covariance table rows")->capture_default_str();
    c_exact->add_option("--slope-k", ex_k, "fit sharpness slope at this order (0 = skip)");
    c_exact->add_option("--slope-l", ex_l, "x-derivative count for the slope");
    c_exact->add_option("--window-lo", ex_wlo, "slope window start")->capture_default_str();
    c_exact->add_option("--window-hi", ex_whi, "slope window end")->capture_default_str();

    // pde
    auto* c_pde = app.add_subcommand("pde", "grid evolution and norm time series");
    std::string pde_pot = "quadratic";
    double pde_omega0 = 1.0, pde_beta = 1.0, pde_tfinal = 5.0, pde_dt = 0.0;
    double pde_Lx = 7.0, pde_Lv = 7.0, pde_m = 0.0, pde_kappa = 0.0;
    int pde_k = 1, pde_nx = 256, pde_nv = 256, pde_rec = 100;
    bool pde_dump = false;
    c_pde->add_option("--potential", pde_pot, "quadratic | doublewell")->capture_default_str();
    c_pde->add_option("--omega0", pde_omega0, "quadratic frequency")->capture_default_str();
    c_pde->add_option("--beta", pde_beta, "double-well inverse temperature")->capture_default_str();
    c_pde->add_option("--k", pde_k, "Sobolev order for the report")->capture_default_str();
    c_pde->add_option("--t-final", pde_tfinal, "")->capture_default_str();
    c_pde->add_option("--dt", pde_dt, "time step (0 = stability limit)")->capture_default_str();
    c_pde->add_option("--nx", pde_nx, "")->capture_default_str();
    c_pde->add_option("--nv", pde_nv, "")->capture_default_str();
    auto* lx_opt = c_pde->add_option("--Lx", pde_Lx, "")->capture_default_str();
    c_pde->add_option("--Lv", pde_Lv, "")->capture_default_str();
    c_pde->add_option("--record-every", pde_rec, "")->capture_default_str();
    c_pde->add_option("--big-m", pde_m, "override M (0 = potential default)");
    c_pde->add_option("--kappa", pde_kappa, "override kappa (0 = numeric estimate)");
    c_pde->add_flag("--dump-snapshots", pde_dump, "write snapshot tensors");

    // langevin
    auto* c_lv = app.add_subcommand("langevin", "mean-field particle simulation");
    double lv_beta = 0.3, lv_K = 1.0, lv_dt = 1e-3, lv_tfinal = 100.0, lv_burn = 10.0;
    int lv_N = 16, lv_R = 8;
    std::uint64_t lv_seed = 1;
    c_lv->add_option("--beta", lv_beta, "")->required();
    c_lv->add_option("--coupling", lv_K, "")->required();
    c_lv->add_option("--particles", lv_N, "")->required();
    c_lv->add_option("--replicas", lv_R, "")->capture_default_str();
    c_lv->add_option("--dt", lv_dt, "")->capture_default_str();
    c_lv->add_option("--t-final", lv_tfinal, "")->capture_default_str();
    c_lv->add_option("--seed", lv_seed, "")->capture_default_str();
    c_lv->add_option("--burn-in", lv_burn, "")->capture_default_str();

    // verify-ops
    auto* c_ops = app.add_subcommand("verify-ops", "dissipation identity and estimate checks");
    int ops_k = 2, ops_n = 256;
    std::string ops_pot = "quadratic";
    double ops_omega0 = 1.0, ops_beta = 1.0, ops_L = 7.0;
    std::uint64_t ops_seed = 1;
    c_ops->add_option("--k", ops_k, "")->capture_default_str();
    c_ops->add_option("--potential", ops_pot, "")->capture_default_str();
    c_ops->add_option("--omega0", ops_omega0, "")->capture_default_str();
    c_ops->add_option("--beta", ops_beta, "")->capture_default_str();
    c_ops->add_option("--grid-n", ops_n, "")->capture_default_str();
    c_ops->add_option("--L", ops_L, "")->capture_default_str();
    c_ops->add_option("--seed", ops_seed, "")->capture_default_str();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_cert->parsed())
            return cmd_certificate(cert_k, cert_m, cert_kappa, kappa_opt->count() > 0, common);
        if (c_exact->parsed())
            return cmd_exact(ex_omega0, ex_tmax, ex_steps, ex_k, ex_l, ex_wlo, ex_whi, common);
        if (c_pde->parsed()) {
            if (pde_pot == "doublewell" && lx_opt->count() == 0)
                pde_Lx = 6.0; // quartic tails need no wider box
            return cmd_pde(pde_pot, pde_omega0, pde_beta, pde_k, pde_tfinal, pde_dt, pde_nx,
                           pde_nv, pde_Lx, pde_Lv, pde_rec, pde_m, pde_kappa, pde_dump,
                           common);
        }
        if (c_lv->parsed())
            return cmd_langevin(lv_beta, lv_K, lv_N, lv_R, lv_dt, lv_tfinal, lv_seed,
                                lv_burn, common);
        if (c_ops->parsed())
            return cmd_verify_ops(ops_k, ops_pot, ops_omega0, ops_beta, ops_seed, ops_n,
                                  ops_L, common);
    } catch (const hypokit::ParameterError& e) {
        std::cerr << json{{"error", "parameter"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const hypokit::ConfigurationError& e) {
        std::cerr << json{{"error", "configuration"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "runtime"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
