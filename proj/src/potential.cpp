#include "hypokit/potential.hpp"

#include <algorithm>
#include <cmath>

#include "hypokit/errors.hpp"
#include "hypokit/linalg.hpp"

namespace hypokit {

PotentialSpec::PotentialSpec(TabulatedPotential1D t) : var_(std::move(t)) {
    validate();
    build_spline();
    // Quadrature tail test: the sampled density must be negligible and
    // decreasing at both ends, otherwise exp(-V) dx is not integrable on any
    // admissible truncation of this table.
    const auto& tab = std::get<TabulatedPotential1D>(var_);
    double vmin = *std::min_element(tab.V_values.begin(), tab.V_values.end());
    const double peak = std::exp(-vmin);
    const double left = std::exp(-tab.V_values.front());
    const double right = std::exp(-tab.V_values.back());
    const std::size_t n = tab.V_values.size();
    const bool rising_tails = tab.V_values.front() > tab.V_values[1] &&
                              tab.V_values.back() > tab.V_values[n - 2];
    if (left > 1e-6 * peak || right > 1e-6 * peak || !rising_tails)
        throw ParameterError("TabulatedPotential1D: exp(-V) tail test failed; "
                             "extend the table until the density is negligible at the ends");
}

void PotentialSpec::validate() const {
    if (auto* q = std::get_if<QuadraticPotential>(&var_)) {
        if (q->omega0 <= 0.0) throw ParameterError("QuadraticPotential: omega0 must be > 0");
    } else if (auto* t = std::get_if<TabulatedPotential1D>(&var_)) {
        if (t->x_nodes.size() < 8 || t->x_nodes.size() != t->V_values.size())
            throw ParameterError("TabulatedPotential1D: need >= 8 matching nodes/values");
        if (!std::is_sorted(t->x_nodes.begin(), t->x_nodes.end()))
            throw ParameterError("TabulatedPotential1D: x_nodes must be sorted");
        if (t->derivative_order < 1 || t->derivative_order > 3)
            throw ParameterError("TabulatedPotential1D: spline supports derivative orders 1..3");
    } else if (auto* c = std::get_if<CurieWeissPotential>(&var_)) {
        if (c->beta <= 0.0) throw ParameterError("CurieWeissPotential: beta must be > 0");
        if (c->N < 1) throw ParameterError("CurieWeissPotential: N must be >= 1");
    }
}

int PotentialSpec::dimension() const {
    if (is_tabulated()) return 1;
    if (is_curie_weiss()) return std::get<CurieWeissPotential>(var_).N;
    return 0;
}

double PotentialSpec::value(std::span<const double> x) const {
    if (auto* q = std::get_if<QuadraticPotential>(&var_)) {
        double s = 0.0;
        for (double xi : x) s += xi * xi;
        return 0.5 * q->omega0 * q->omega0 * s;
    }
    if (is_tabulated()) return spline_eval(x[0], 0);
    const auto& c = std::get<CurieWeissPotential>(var_);
    double onsite = 0.0, sum = 0.0, sumsq = 0.0;
    for (double xi : x) {
        onsite += c.beta * (xi * xi * xi * xi / 4.0 - xi * xi / 2.0);
        sum += xi;
        sumsq += xi * xi;
    }
    const double interaction = -c.beta * c.K / (2.0 * c.N) * (sum * sum - sumsq);
    return onsite + interaction;
}

void PotentialSpec::gradient(std::span<const double> x, std::span<double> out) const {
    if (auto* q = std::get_if<QuadraticPotential>(&var_)) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = q->omega0 * q->omega0 * x[i];
        return;
    }
    if (is_tabulated()) {
        out[0] = spline_eval(x[0], 1);
        return;
    }
    const auto& c = std::get<CurieWeissPotential>(var_);
    double sum = 0.0;
    for (double xi : x) sum += xi;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = c.beta * (x[i] * x[i] * x[i] - x[i] - c.K / c.N * (sum - x[i]));
}

double PotentialSpec::hessian(std::span<const double> x, int i, int j) const {
    if (auto* q = std::get_if<QuadraticPotential>(&var_))
        return i == j ? q->omega0 * q->omega0 : 0.0;
    if (is_tabulated()) return spline_eval(x[0], 2);
    const auto& c = std::get<CurieWeissPotential>(var_);
    if (i == j) return c.beta * (3.0 * x[i] * x[i] - 1.0);
    return -c.beta * c.K / c.N;
}

void PotentialSpec::build_spline() {
    const auto& t = std::get<TabulatedPotential1D>(var_);
    const std::size_t n = t.x_nodes.size();
    std::vector<double> sub(n, 0.0), diag(n, 1.0), super(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = t.x_nodes[i] - t.x_nodes[i - 1];
        const double hr = t.x_nodes[i + 1] - t.x_nodes[i];
        sub[i] = hl / 6.0;
        diag[i] = (hl + hr) / 3.0;
        super[i] = hr / 6.0;
        rhs[i] = (t.V_values[i + 1] - t.V_values[i]) / hr -
                 (t.V_values[i] - t.V_values[i - 1]) / hl;
    }
    tridiag_solve(sub, diag, super, rhs);
    rhs.front() = 0.0;
    rhs.back() = 0.0;
    spline_m_ = std::move(rhs);
}

double PotentialSpec::spline_eval(double x, int deriv) const {
    const auto& t = std::get<TabulatedPotential1D>(var_);
    const auto& xs = t.x_nodes;
    std::size_t hi = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
    hi = std::clamp<std::size_t>(hi, 1, xs.size() - 1);
    const std::size_t lo = hi - 1;
    const double h = xs[hi] - xs[lo];
    const double A = (xs[hi] - x) / h;
    const double B = (x - xs[lo]) / h;
    const double ml = spline_m_[lo], mh = spline_m_[hi];
    const double yl = t.V_values[lo], yh = t.V_values[hi];
    switch (deriv) {
        case 0:
            return A * yl + B * yh +
                   ((A * A * A - A) * ml + (B * B * B - B) * mh) * h * h / 6.0;
        case 1:
            return (yh - yl) / h - (3.0 * A * A - 1.0) * h * ml / 6.0 +
                   (3.0 * B * B - 1.0) * h * mh / 6.0;
        case 2:
            return A * ml + B * mh;
        case 3:
            return (mh - ml) / h;
        default:
            throw FeasibilityError("TabulatedPotential1D: derivative order beyond the spline");
    }
}

nlohmann::json PotentialSpec::descriptor() const {
    nlohmann::json j;
    if (auto* q = std::get_if<QuadraticPotential>(&var_)) {
        j["variant"] = "quadratic";
        j["omega0"] = q->omega0;
    } else if (auto* t = std::get_if<TabulatedPotential1D>(&var_)) {
        j["variant"] = "tabulated1d";
        j["x_nodes"] = t->x_nodes;
        j["V_values"] = t->V_values;
        j["derivative_order"] = t->derivative_order;
    } else {
        const auto& c = std::get<CurieWeissPotential>(var_);
        j["variant"] = "curie_weiss";
        j["beta"] = c.beta;
        j["K"] = c.K;
        j["N"] = c.N;
    }
    return j;
}

PotentialSpec PotentialSpec::from_descriptor(const nlohmann::json& j) {
    const std::string v = j.at("variant");
    if (v == "quadratic") return PotentialSpec(QuadraticPotential{j.at("omega0")});
    if (v == "tabulated1d")
        return PotentialSpec(TabulatedPotential1D{j.at("x_nodes"), j.at("V_values"),
                                                  j.at("derivative_order")});
    if (v == "curie_weiss")
        return PotentialSpec(CurieWeissPotential{j.at("beta"), j.at("K"), j.at("N")});
    throw ParameterError("PotentialSpec: unknown variant " + v);
}

double assumption_constant_M(const PotentialSpec& potential) {
    if (potential.is_quadratic()) {
        const double w = potential.quadratic_params().omega0;
        return std::max(w * w * w * w, 1.0);
    }
    if (potential.is_curie_weiss()) {
        const auto& c = potential.curie_weiss_params();
        return 2020.0 * (std::pow(c.beta, 2.0 / 3.0) + c.beta * c.beta +
                         std::pow(c.K, 4) * c.beta * c.beta);
    }
    throw ConfigurationError("assumption_constant_M: supply M explicitly for tabulated potentials");
}

} // namespace hypokit
