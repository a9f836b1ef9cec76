#include "hypokit/certificate.hpp"

#include <algorithm>
#include <cmath>

#include "hypokit/errors.hpp"
#include "hypokit/linalg.hpp"

namespace hypokit {

namespace {

// The recursions chain products of very small factors; 80-bit extended
// arithmetic keeps them clear of double underflow up to k ~ 20.
using ext = long double;

ext pow2(int e) { return std::ldexp(static_cast<ext>(1), e); }

} // namespace

void ProblemParams::validate(bool need_kappa) const {
    if (k < 0) throw ParameterError("ProblemParams: k must be >= 0");
    if (M < 1.0) throw ParameterError("ProblemParams: M must be >= 1");
    if (kappa && *kappa <= 0.0) throw ParameterError("ProblemParams: kappa must be > 0");
    if (need_kappa && !kappa)
        throw ConfigurationError("ProblemParams: kappa required for the final rate step");
}

HypocoercivityCertificate build_hypocoercivity_certificate(const ProblemParams& params) {
    params.validate(/*need_kappa=*/true);

    HypocoercivityCertificate cert;
    cert.params = params;

    const int k = params.k;
    const ext M = params.M;
    const ext sqrtM = std::sqrt(M);
    const Rational Mr = Rational::from_double(params.M);

    ext lambda = 1.0L; // lambda_{0,0} = 1
    for (int l = 1; l <= k; ++l) {
        HypoLevel lev;
        lev.l = l;
        lev.ratio_low = Rational(64) * Rational(l) * Rational(l) * Mr;
        lev.ratio_top = Rational(1) / (Rational(16) * Rational(l) * Rational(l) * Mr);
        const ext rlow = lev.ratio_low.to_long_double();
        const ext rtop = lev.ratio_top.to_long_double();
        const ext eta = 1.0L / (64.0L * l * l * M);

        // Aggregated constants: literal sums of the per-term bounds the
        // induction step produces. The construction fixes only their
        // existence; the sums below are recorded so each certificate is
        // auditable term by term.
        ext K1p = 0.0L, K2p = 0.0L;
        for (int i = 0; i <= l - 1; ++i) {
            K1p += rlow * (static_cast<ext>(l) + pow2(i + 1) * sqrtM);
            K2p += rlow * (1.0L + pow2(i) * sqrtM);
        }
        K2p += static_cast<ext>(l) * sqrtM * rtop;
        const ext K1pp = pow2(l + 1) * sqrtM;
        const ext K2pp = 3.0L + pow2(l + 1) * sqrtM + static_cast<ext>(l - 1) * sqrtM;
        const ext K1 = K1p + K1pp;
        const ext K2 = K2p + K2pp;

        const ext omega = std::min(lambda / (2.0L * K1),
                                   3.0L * eta * lambda / (4.0L * K2 * K2));
        lambda = std::min(lambda / 4.0L, omega * eta / 4.0L);

        lev.omega_mix = static_cast<double>(omega);
        lev.omega_diag.resize(l + 1);
        for (int i = 0; i <= l - 1; ++i)
            lev.omega_diag[i] = static_cast<double>(rlow * omega);
        lev.omega_diag[l] = static_cast<double>(rtop * omega);
        lev.eta = static_cast<double>(eta);
        lev.K1_prime = static_cast<double>(K1p);
        lev.K1_dprime = static_cast<double>(K1pp);
        lev.K2_prime = static_cast<double>(K2p);
        lev.K2_dprime = static_cast<double>(K2pp);
        lev.K1 = static_cast<double>(K1);
        lev.K2 = static_cast<double>(K2);
        lev.lambda_l0 = static_cast<double>(lambda);
        cert.levels.push_back(std::move(lev));
    }

    // Normalization C = max{1, kappa, 3/2 omega_{l,l-1}, 3/2 omega_{l,l}} and
    // the equivalence constants of the twisted norm.
    ext C = std::max<ext>(1.0L, *params.kappa);
    ext c1 = 1.0L, c2 = 1.0L;
    for (const auto& lev : cert.levels) {
        const ext low = lev.omega_diag[lev.l > 0 ? lev.l - 1 : 0];
        const ext top = lev.omega_diag[lev.l];
        C = std::max(C, 1.5L * low);
        C = std::max(C, 1.5L * top);
        c1 = std::min(c1, top / 2.0L);
        c2 = std::max(c2, 1.5L * std::max(low, top));
    }
    cert.normalization_C = static_cast<double>(C);
    cert.lambda_final = static_cast<double>(lambda / C);
    cert.norm_equivalence.c1 = static_cast<double>(c1);
    cert.norm_equivalence.c2 = static_cast<double>(c2);
    cert.relative_error_bound = 64.0 * std::max(1, k) * 1.1e-19;
    return cert;
}

HerauCertificate build_herau_certificate(const ProblemParams& params) {
    params.validate(/*need_kappa=*/false);

    HerauCertificate cert;
    cert.params = params;
    cert.Lambda0 = 2.0;

    const int k = params.k;
    const ext M = params.M;
    const ext sqrtM = std::sqrt(M);
    const Rational Mr = Rational::from_double(params.M);

    ext Lambda = 2.0L;
    for (int l = 1; l <= k; ++l) {
        HerauLevel lev;
        lev.l = l;
        lev.ratio_low = Rational(64) * Rational(l) * Rational(l) * Mr;
        lev.ratio_top = Rational(1) / (Rational(16) * Rational(l) * Rational(l) * Mr);
        const ext rlow = lev.ratio_low.to_long_double();
        const ext rtop = lev.ratio_top.to_long_double();

        const ext K0 =
            (2.0L * l * l + pow2(l + 1) * sqrtM) * 64.0L * l * l * M + pow2(l + 1) * sqrtM;
        // Cross terms aggregated by literal summation, as for the twisted norm.
        ext K1 = static_cast<ext>(3 * l - 1) + 1.0L;
        for (int i = 0; i <= l - 1; ++i) K1 += rlow * (1.0L + pow2(i) * sqrtM);
        K1 += pow2(l + 1) * sqrtM * rtop;
        K1 += pow2(l + 1) * sqrtM;

        const ext sigma =
            std::min(Lambda / (4.0L * K0),
                     Lambda / (128.0L * (l + 2) * l * l * M * K1 * K1));
        Lambda = std::min(Lambda / 2.0L, sigma / (128.0L * l * l * M));

        lev.sigma_mix = static_cast<double>(sigma);
        lev.sigma_diag.resize(l + 1);
        for (int i = 0; i <= l - 1; ++i)
            lev.sigma_diag[i] = static_cast<double>(rlow * sigma);
        lev.sigma_diag[l] = static_cast<double>(rtop * sigma);
        lev.K0 = static_cast<double>(K0);
        lev.K1 = static_cast<double>(K1);
        lev.Lambda = static_cast<double>(Lambda);
        cert.levels.push_back(std::move(lev));
    }
    cert.relative_error_bound = 64.0 * std::max(1, k) * 1.1e-19;
    return cert;
}

TriangularFormInstance TriangularFormInstance::make(double a, double M) {
    if (a <= 0.0) throw ParameterError("TriangularFormInstance: a must be > 0");
    if (M < 1.0) throw ParameterError("TriangularFormInstance: M must be >= 1");
    TriangularFormInstance inst;
    inst.a = a;
    inst.M = M;
    inst.b = a / (64.0 * M);
    inst.c = a / (1024.0 * M * M);
    const double s = std::sqrt(M);
    inst.matrix = {{{inst.b, 0.0, 0.0},
                    {-inst.b * s, a, 0.0},
                    {-2.0 * inst.c * s, -2.0 * inst.b, inst.c}}};
    inst.diag_bound = {inst.b / 2.0, a / 4.0, inst.c / 4.0};
    return inst;
}

TriangularCheck check_triangular_positivity(const TriangularFormInstance& inst) {
    if (inst.a <= 0.0 || inst.M < 1.0)
        throw ParameterError("check_triangular_positivity: need a > 0 and M >= 1");

    TriangularCheck result;

    SymMatrix q(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            q(i, j) = 0.5 * (inst.matrix[i][j] + inst.matrix[j][i]);
    for (int i = 0; i < 3; ++i) q(i, i) -= inst.diag_bound[i];
    result.min_eigenvalue = sym_min_eigenvalue(q);
    result.passed = result.min_eigenvalue >= -1e-12;

    // Sufficient criterion on the shifted matrix S - Diag(bound): with weights
    // k12 = k13 = 1/2, k21 = k31 = 1/3, k23 = k32 = 2/3, require
    // |s_ij|^2 <= 4 k_ij s_ii k_ji s_jj for i > j. Two of the inequalities are
    // equalities by construction, hence the relative slack.
    const double d0 = inst.matrix[0][0] - inst.diag_bound[0];
    const double d1 = inst.matrix[1][1] - inst.diag_bound[1];
    const double d2 = inst.matrix[2][2] - inst.diag_bound[2];
    const double s10 = inst.matrix[1][0];
    const double s20 = inst.matrix[2][0];
    const double s21 = inst.matrix[2][1];
    const double k12 = 0.5, k13 = 0.5, k21 = 1.0 / 3.0, k23 = 2.0 / 3.0,
                 k31 = 1.0 / 3.0, k32 = 2.0 / 3.0;
    auto leq = [](double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-12); };
    result.criterion_passed = leq(s10 * s10, 4.0 * k21 * d1 * k12 * d0) &&
                              leq(s20 * s20, 4.0 * k31 * d2 * k13 * d0) &&
                              leq(s21 * s21, 4.0 * k32 * d2 * k23 * d1) &&
                              k12 + k13 <= 1.0 && k21 + k23 <= 1.0 && k31 + k32 <= 1.0;
    return result;
}

double plain_hk_norm_sq(const NormAggregates& norms, int k) {
    if (norms.k < k) throw DataError("plain_hk_norm_sq: aggregates of insufficient order");
    double s = norms.seminorm(0, 0) * norms.seminorm(0, 0);
    for (int l = 1; l <= k; ++l)
        for (int i = 0; i <= l; ++i) s += norms.seminorm(i, l - i) * norms.seminorm(i, l - i);
    return s;
}

double twisted_hk_inner(const NormAggregates& norms, const HypocoercivityCertificate& cert) {
    const int k = cert.params.k;
    if (norms.k < k)
        throw DataError("twisted_hk_inner: norm aggregates do not reach order k");
    double s = norms.seminorm(0, 0) * norms.seminorm(0, 0);
    for (const auto& lev : cert.levels) {
        const int l = lev.l;
        for (int i = 0; i <= l; ++i)
            s += lev.omega_diag[i] * norms.seminorm(i, l - i) * norms.seminorm(i, l - i);
        s += 2.0 * lev.omega_mix * norms.mixed[l];
    }
    return s;
}

double herau_functional(double t, const NormAggregates& norms, const HerauCertificate& cert) {
    if (!(t > 0.0) || t > 1.0)
        throw DomainError("herau_functional: t must lie in (0, 1]");
    const int k = cert.params.k;
    if (norms.k < k)
        throw DataError("herau_functional: norm aggregates do not reach order k");
    double s = norms.seminorm(0, 0) * norms.seminorm(0, 0);
    for (const auto& lev : cert.levels) {
        const int l = lev.l;
        for (int i = 0; i <= l; ++i)
            s += lev.sigma_diag[i] * std::pow(t, l + 2 * i) * norms.seminorm(i, l - i) *
                 norms.seminorm(i, l - i);
        s += 2.0 * lev.sigma_mix * std::pow(t, 3 * l - 1) * norms.mixed[l];
    }
    return s;
}

namespace {

nlohmann::json params_json(const ProblemParams& p) {
    nlohmann::json j{{"k", p.k}, {"M", p.M}};
    if (p.kappa) j["kappa"] = *p.kappa;
    return j;
}

const char* kAggregationNote =
    "K constants aggregated by literal summation of the per-term bounds of the "
    "induction step; the construction fixes only their existence, not unique values";

} // namespace

nlohmann::json to_json(const HypocoercivityCertificate& cert) {
    nlohmann::json j;
    j["type"] = "hypocoercivity";
    j["params"] = params_json(cert.params);
    j["lambda_00"] = 1.0;
    auto levels = nlohmann::json::array();
    for (const auto& lev : cert.levels) {
        nlohmann::json lj;
        lj["l"] = lev.l;
        lj["omega_mix"] = lev.omega_mix;
        lj["omega_diag"] = lev.omega_diag;
        lj["ratio_low_exact"] = lev.ratio_low.str();
        lj["ratio_top_exact"] = lev.ratio_top.str();
        lj["eta"] = lev.eta;
        lj["K1"] = lev.K1;
        lj["K2"] = lev.K2;
        lj["K1_parts"] = {{"prime", lev.K1_prime}, {"double_prime", lev.K1_dprime}};
        lj["K2_parts"] = {{"prime", lev.K2_prime}, {"double_prime", lev.K2_dprime}};
        lj["lambda_l0"] = lev.lambda_l0;
        lj["anchors"] = {
            {"omega_diag", "omega[l,i] = 64 l^2 M omega[l] for i < l; omega[l,l] = omega[l] / (16 l^2 M)"},
            {"eta", "eta = 1 / (64 l^2 M)"},
            {"omega_mix", "omega[l] = min{lambda[l-1,0] / (2 K1), 3 eta lambda[l-1,0] / (4 K2^2)}"},
            {"lambda_l0", "lambda[l,0] = min{lambda[l-1,0] / 4, omega[l] eta / 4}"}};
        levels.push_back(lj);
    }
    j["levels"] = levels;
    j["normalization_C"] = cert.normalization_C;
    j["lambda_final"] = cert.lambda_final;
    j["norm_equivalence"] = {{"c1", cert.norm_equivalence.c1},
                             {"c2", cert.norm_equivalence.c2}};
    j["metadata"] = {{"aggregation", kAggregationNote},
                     {"arithmetic",
                      "coefficient ratios exact rational; sqrt(M) chains in 80-bit extended"},
                     {"relative_error_bound", cert.relative_error_bound}};
    if (cert.params.k == 0) j["metadata"]["base_certificate_only"] = true;
    return j;
}

nlohmann::json to_json(const HerauCertificate& cert) {
    nlohmann::json j;
    j["type"] = "herau";
    j["params"] = params_json(cert.params);
    j["Lambda0"] = cert.Lambda0;
    auto levels = nlohmann::json::array();
    for (const auto& lev : cert.levels) {
        nlohmann::json lj;
        lj["l"] = lev.l;
        lj["sigma_mix"] = lev.sigma_mix;
        lj["sigma_diag"] = lev.sigma_diag;
        lj["ratio_low_exact"] = lev.ratio_low.str();
        lj["ratio_top_exact"] = lev.ratio_top.str();
        lj["K0"] = lev.K0;
        lj["K1"] = lev.K1;
        lj["Lambda"] = lev.Lambda;
        lj["anchors"] = {
            {"sigma_diag", "sigma[l,i] = 64 l^2 M sigma[l] for i < l; sigma[l,l] = sigma[l] / (16 l^2 M)"},
            {"K0", "K0 = (2 l^2 + 2^{l+1} sqrt(M)) 64 l^2 M + 2^{l+1} sqrt(M)"},
            {"sigma_mix", "sigma[l] = min{Lambda[l-1] / (4 K0), Lambda[l-1] / (128 (l+2) l^2 M K1^2)}"},
            {"Lambda", "Lambda[l] = min{Lambda[l-1] / 2, sigma[l] / (128 l^2 M)}"}};
        levels.push_back(lj);
    }
    j["levels"] = levels;
    j["metadata"] = {{"aggregation", kAggregationNote},
                     {"arithmetic",
                      "coefficient ratios exact rational; sqrt(M) chains in 80-bit extended"},
                     {"relative_error_bound", cert.relative_error_bound}};
    return j;
}

} // namespace hypokit
