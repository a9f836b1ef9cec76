#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hypokit/norms.hpp"
#include "hypokit/rational.hpp"

#include "json.hpp"

namespace hypokit {

/// Problem data the coefficient recursions run on.
struct ProblemParams {
    int k = 1;                      ///< Sobolev order
    double M = 1.0;                 ///< relative-boundedness constant, >= 1
    std::optional<double> kappa;    ///< Poincare constant of the spatial marginal

    void validate(bool need_kappa) const;
};

/// One level of the twisted-norm construction. The diagonal coefficients are
/// tied to the mixed one by exact rational ratios; omega_diag are the derived
/// doubles, ratio_low/ratio_top the exact ratios (64 l^2 M and 1/(16 l^2 M)).
struct HypoLevel {
    int l = 0;
    double omega_mix = 0.0;              // omega_l
    std::vector<double> omega_diag;      // omega_{l,i}, i = 0..l
    Rational ratio_low;                  // omega_{l,i} / omega_l for i < l
    Rational ratio_top;                  // omega_{l,l} / omega_l
    double eta = 0.0;                    // 1 / (64 l^2 M)
    double K1 = 0.0, K2 = 0.0;           // aggregated Cauchy-Schwarz constants
    double K1_prime = 0.0, K1_dprime = 0.0;
    double K2_prime = 0.0, K2_dprime = 0.0;
    double lambda_l0 = 0.0;              // coercivity constant after this level
};

struct NormEquivalence {
    double c1 = 1.0; ///< twisted >= c1 * plain (squared norms)
    double c2 = 1.0; ///< twisted <= c2 * plain
};

/// Coefficient family making the twisted H^k norm coercive for the evolution.
struct HypocoercivityCertificate {
    ProblemParams params;
    std::vector<HypoLevel> levels;   // levels[0] is l=1
    double lambda_final = 0.0;       // decay-rate constant lambda_k
    double normalization_C = 1.0;    // max{1, kappa, 3/2 omega_{l,l-1}, 3/2 omega_{l,l}}
    NormEquivalence norm_equivalence;
    double relative_error_bound = 0.0; // float-arithmetic error bound on reported values
};

/// One level of the time-weighted functional construction.
struct HerauLevel {
    int l = 0;
    double sigma_mix = 0.0;             // sigma_l
    std::vector<double> sigma_diag;     // sigma_{l,i}, i = 0..l
    Rational ratio_low;
    Rational ratio_top;
    double K0 = 0.0;                    // closed-form pure-Z constant
    double K1 = 0.0;                    // aggregated cross-term constant
    double Lambda = 0.0;                // Lambda_l
};

/// Coefficient family making the time-weighted functional monotone on (0,1].
struct HerauCertificate {
    ProblemParams params;               // kappa unused
    std::vector<HerauLevel> levels;     // levels[0] is l=1
    double Lambda0 = 2.0;
    double relative_error_bound = 0.0;
};

/// The 3x3 lower-triangular quadratic-form instance of the positivity bound.
struct TriangularFormInstance {
    double a = 1.0;
    double M = 1.0;
    double b = 0.0;                     // a / (64 M)
    double c = 0.0;                     // a / (1024 M^2)
    std::array<std::array<double, 3>, 3> matrix{};
    std::array<double, 3> diag_bound{}; // (b/2, a/4, c/4)

    static TriangularFormInstance make(double a, double M);
};

struct TriangularCheck {
    bool passed = false;         // symmetrized eigenvalue test
    double min_eigenvalue = 0.0; // smallest eigenvalue of (S+S^T)/2 - Diag(bound)
    bool criterion_passed = false; // sufficient k_ij-weight criterion
};

HypocoercivityCertificate build_hypocoercivity_certificate(const ProblemParams& params);
HerauCertificate build_herau_certificate(const ProblemParams& params);
TriangularCheck check_triangular_positivity(const TriangularFormInstance& inst);

/// Twisted H^k inner product ((h,h)) evaluated from norm aggregates.
double twisted_hk_inner(const NormAggregates& norms, const HypocoercivityCertificate& cert);

/// Plain squared H^k norm from the same aggregates (for equivalence checks).
double plain_hk_norm_sq(const NormAggregates& norms, int k);

/// Time-weighted functional F(t) for t in (0,1].
double herau_functional(double t, const NormAggregates& norms, const HerauCertificate& cert);

nlohmann::json to_json(const HypocoercivityCertificate& cert);
nlohmann::json to_json(const HerauCertificate& cert);

} // namespace hypokit
