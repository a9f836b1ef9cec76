#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hypokit/potential.hpp"

namespace hypokit {

/// Tensor-product phase-space grid: d position axes then d velocity axes,
/// uniform nodes, with mu-weighted quadrature baked in. The outermost two
/// shells of every axis carry zero quadrature weight; weights are trapezoidal
/// over the interior times exp(-V(x) - |v|^2/2), renormalized so that the
/// quadrature of 1 is exactly 1.
class GridGeometry {
public:
    GridGeometry(int d, int nx, int nv, double Lx, double Lv, PotentialSpec potential);

    int d() const { return d_; }
    int nx() const { return nx_; }
    int nv() const { return nv_; }
    int axes() const { return 2 * d_; }
    double hx() const { return hx_; }
    double hv() const { return hv_; }
    double Lx() const { return Lx_; }
    double Lv() const { return Lv_; }
    std::size_t size() const { return size_; }
    const PotentialSpec& potential() const { return potential_; }

    int axis_nodes(int axis) const { return axis < d_ ? nx_ : nv_; }
    double axis_spacing(int axis) const { return axis < d_ ? hx_ : hv_; }
    std::size_t axis_stride(int axis) const { return strides_[axis]; }
    double axis_coord(int axis, int index) const {
        return axis < d_ ? x_nodes_[index] : v_nodes_[index];
    }
    const std::vector<double>& x_nodes() const { return x_nodes_; }
    const std::vector<double>& v_nodes() const { return v_nodes_; }

    /// Normalized quadrature weight at a flat node index.
    double weight(std::size_t flat) const { return weights_[flat]; }
    const std::vector<double>& weights() const { return weights_; }

    /// Decode a flat index into per-axis indices.
    void decode(std::size_t flat, int* idx) const;
    std::size_t encode(const int* idx) const;

private:
    int d_, nx_, nv_;
    double Lx_, Lv_, hx_, hv_;
    std::vector<double> x_nodes_, v_nodes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
    PotentialSpec potential_;
    std::vector<double> weights_;
};

using GeometryPtr = std::shared_ptr<const GridGeometry>;

/// A sampled function on the grid. Values are immutable by convention once
/// constructed; operators allocate fresh outputs.
struct GridFunction {
    GeometryPtr geom;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(GeometryPtr g) : geom(std::move(g)), values(geom->size(), 0.0) {}
    GridFunction(GeometryPtr g, std::vector<double> v) : geom(std::move(g)), values(std::move(v)) {}

    /// Sample f(x, v); x and v are d-vectors handed over as pointers into node coords.
    static GridFunction sample(const GeometryPtr& g,
                               const std::function<double(const double*, const double*)>& f);

    double quadrature() const;                        ///< integral against d(mu)
    double inner(const GridFunction& other) const;    ///< L2(mu) inner product
    double norm() const;                              ///< L2(mu) norm
    double max_abs() const;
    /// Largest |value| on the outermost two shells of any axis.
    double boundary_max_abs() const;
    bool is_admissible(double tol = 1e-10) const;
};

/// 4th-order centered first derivative along an axis, zero beyond the grid.
GridFunction derivative(const GridFunction& f, int axis);

/// 4th-order centered second derivative along an axis, zero beyond the grid.
GridFunction second_derivative(const GridFunction& f, int axis);

/// Pointwise combination helpers.
GridFunction multiply_coordinate(const GridFunction& f, int axis);
GridFunction& axpy(GridFunction& y, double alpha, const GridFunction& x);

/// Binary interchange format: little-endian magic + JSON header + raw doubles.
void save_grid_function(const GridFunction& f, const std::string& path);
GridFunction load_grid_function(const std::string& path);

} // namespace hypokit
