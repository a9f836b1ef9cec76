#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace hypokit {

/// V(x) = omega0^2 |x|^2 / 2, any dimension.
struct QuadraticPotential {
    double omega0 = 1.0;
};

/// 1D potential sampled on sorted nodes, evaluated through a natural cubic
/// spline (derivatives available up to order 3).
struct TabulatedPotential1D {
    std::vector<double> x_nodes;
    std::vector<double> V_values;
    int derivative_order = 3;
};

/// Mean-field quartic model: on-site confinement beta (x^4/4 - x^2/2) plus
/// pair coupling -beta K x_i x_j / N. N = 1 gives the plain double well.
struct CurieWeissPotential {
    double beta = 1.0;
    double K = 0.0;
    int N = 1;
};

class PotentialSpec {
public:
    PotentialSpec() : var_(QuadraticPotential{}) {}
    PotentialSpec(QuadraticPotential q) : var_(q) { validate(); }
    PotentialSpec(TabulatedPotential1D t);
    PotentialSpec(CurieWeissPotential c) : var_(c) { validate(); }

    static PotentialSpec quadratic(double omega0) { return PotentialSpec(QuadraticPotential{omega0}); }
    static PotentialSpec curie_weiss(double beta, double K, int N) {
        return PotentialSpec(CurieWeissPotential{beta, K, N});
    }

    double value(std::span<const double> x) const;
    void gradient(std::span<const double> x, std::span<double> out) const;
    /// Hessian entry d^2 V / dx_i dx_j.
    double hessian(std::span<const double> x, int i, int j) const;

    /// Dimension the potential is defined on; 0 means any (quadratic).
    int dimension() const;

    bool is_quadratic() const { return std::holds_alternative<QuadraticPotential>(var_); }
    bool is_tabulated() const { return std::holds_alternative<TabulatedPotential1D>(var_); }
    bool is_curie_weiss() const { return std::holds_alternative<CurieWeissPotential>(var_); }
    const QuadraticPotential& quadratic_params() const { return std::get<QuadraticPotential>(var_); }
    const CurieWeissPotential& curie_weiss_params() const { return std::get<CurieWeissPotential>(var_); }

    nlohmann::json descriptor() const;
    static PotentialSpec from_descriptor(const nlohmann::json& j);

private:
    void validate() const;

    std::variant<QuadraticPotential, TabulatedPotential1D, CurieWeissPotential> var_;

    // spline second derivatives at the nodes (tabulated case)
    std::vector<double> spline_m_;
    void build_spline();
    double spline_eval(double x, int deriv) const;
};

/// Relative-boundedness constant the potential honestly satisfies:
/// quadratic -> max(omega0^4, 1); Curie-Weiss -> 2020 (beta^{2/3} + beta^2 + K^4 beta^2).
double assumption_constant_M(const PotentialSpec& potential);

} // namespace hypokit
