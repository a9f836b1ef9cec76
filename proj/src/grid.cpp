#include "hypokit/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "hypokit/errors.hpp"
#include "hypokit/parallel.hpp"

namespace hypokit {

GridGeometry::GridGeometry(int d, int nx, int nv, double Lx, double Lv,
                           PotentialSpec potential)
    : d_(d), nx_(nx), nv_(nv), Lx_(Lx), Lv_(Lv), potential_(std::move(potential)) {
    if (d != 1 && d != 2) throw ConfigurationError("GridGeometry: d must be 1 or 2");
    if (nx < 8 || nv < 8)
        throw ConfigurationError("GridGeometry: need at least 8 nodes per axis");
    if (Lx <= 0 || Lv <= 0) throw ParameterError("GridGeometry: extents must be positive");
    const int pd = potential_.dimension();
    if (pd != 0 && pd != d)
        throw ConfigurationError("GridGeometry: potential dimension does not match grid");

    hx_ = 2.0 * Lx / (nx - 1);
    hv_ = 2.0 * Lv / (nv - 1);
    x_nodes_.resize(nx);
    v_nodes_.resize(nv);
    for (int i = 0; i < nx; ++i) x_nodes_[i] = -Lx + i * hx_;
    for (int i = 0; i < nv; ++i) v_nodes_[i] = -Lv + i * hv_;

    const int na = axes();
    strides_.assign(na, 1);
    size_ = 1;
    for (int a = na - 1; a >= 0; --a) {
        strides_[a] = size_;
        size_ *= axis_nodes(a);
    }

    // Trapezoid factor per axis over the interior sub-grid [2, n-3]; the two
    // outermost shells are excluded from quadrature altogether.
    auto trap = [](int i, int n) -> double {
        if (i < 2 || i > n - 3) return 0.0;
        return (i == 2 || i == n - 3) ? 0.5 : 1.0;
    };

    weights_.assign(size_, 0.0);
    std::vector<int> idx(na);
    std::vector<double> x(d_), v(d_);
    double total = 0.0;
    for (std::size_t flat = 0; flat < size_; ++flat) {
        decode(flat, idx.data());
        double t = 1.0;
        for (int a = 0; a < na; ++a) t *= trap(idx[a], axis_nodes(a));
        if (t == 0.0) continue;
        double v2 = 0.0;
        for (int a = 0; a < d_; ++a) x[a] = x_nodes_[idx[a]];
        for (int a = 0; a < d_; ++a) {
            v[a] = v_nodes_[idx[d_ + a]];
            v2 += v[a] * v[a];
        }
        const double density = std::exp(-potential_.value(x) - 0.5 * v2);
        weights_[flat] = t * density;
        total += weights_[flat];
    }
    if (total <= 0.0) throw NumericalError("GridGeometry: degenerate quadrature");
    for (double& w : weights_) w /= total;
}

void GridGeometry::decode(std::size_t flat, int* idx) const {
    for (int a = 0; a < axes(); ++a) {
        idx[a] = static_cast<int>(flat / strides_[a]);
        flat %= strides_[a];
    }
}

std::size_t GridGeometry::encode(const int* idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < axes(); ++a) flat += strides_[a] * idx[a];
    return flat;
}

GridFunction GridFunction::sample(
    const GeometryPtr& g, const std::function<double(const double*, const double*)>& f) {
    GridFunction out(g);
    const int na = g->axes(), d = g->d();
    parallel_for(0, g->size(), [&](std::size_t flat) {
        int idx[4];
        double x[2], v[2];
        g->decode(flat, idx);
        for (int a = 0; a < d; ++a) x[a] = g->axis_coord(a, idx[a]);
        for (int a = d; a < na; ++a) v[a - d] = g->axis_coord(a, idx[a]);
        out.values[flat] = f(x, v);
    });
    return out;
}

double GridFunction::quadrature() const {
    const auto& w = geom->weights();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
    return s;
}

double GridFunction::inner(const GridFunction& other) const {
    const auto& w = geom->weights();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i] * other.values[i];
    return s;
}

double GridFunction::norm() const { return std::sqrt(std::max(0.0, inner(*this))); }

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::boundary_max_abs() const {
    const int na = geom->axes();
    double m = 0.0;
    std::vector<int> idx(na);
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        geom->decode(flat, idx.data());
        bool boundary = false;
        for (int a = 0; a < na; ++a) {
            const int n = geom->axis_nodes(a);
            if (idx[a] < 2 || idx[a] > n - 3) { boundary = true; break; }
        }
        if (boundary) m = std::max(m, std::abs(values[flat]));
    }
    return m;
}

bool GridFunction::is_admissible(double tol) const {
    return boundary_max_abs() <= tol * std::max(1.0, max_abs());
}

namespace {

// Apply a symmetric five-point stencil along one axis, zero outside the grid.
GridFunction apply_stencil(const GridFunction& f, int axis, const double (&st)[5]) {
    const auto& g = *f.geom;
    const std::size_t stride = g.axis_stride(axis);
    const int n = g.axis_nodes(axis);
    const std::size_t lines = g.size() / n;
    GridFunction out(f.geom);

    parallel_for(0, lines, [&](std::size_t line) {
        // Build the base offset of this line: enumerate all indices with the
        // chosen axis removed.
        std::size_t rem = line, base = 0;
        for (int a = 0; a < g.axes(); ++a) {
            if (a == axis) continue;
            const std::size_t na = g.axis_nodes(a);
            const std::size_t ia = rem % na;
            rem /= na;
            base += ia * g.axis_stride(a);
        }
        const double* src = f.values.data();
        double* dst = out.values.data();
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int m = -2; m <= 2; ++m) {
                const int j = i + m;
                if (j < 0 || j >= n) continue;
                s += st[m + 2] * src[base + j * stride];
            }
            dst[base + i * stride] = s;
        }
    });
    return out;
}

} // namespace

GridFunction derivative(const GridFunction& f, int axis) {
    const double h = f.geom->axis_spacing(axis);
    const double st[5] = {1.0 / (12 * h), -8.0 / (12 * h), 0.0, 8.0 / (12 * h),
                          -1.0 / (12 * h)};
    return apply_stencil(f, axis, st);
}

GridFunction second_derivative(const GridFunction& f, int axis) {
    const double h2 = f.geom->axis_spacing(axis) * f.geom->axis_spacing(axis);
    const double st[5] = {-1.0 / (12 * h2), 16.0 / (12 * h2), -30.0 / (12 * h2),
                          16.0 / (12 * h2), -1.0 / (12 * h2)};
    return apply_stencil(f, axis, st);
}

GridFunction multiply_coordinate(const GridFunction& f, int axis) {
    const auto& g = *f.geom;
    GridFunction out(f.geom);
    const std::size_t stride = g.axis_stride(axis);
    const int n = g.axis_nodes(axis);
    parallel_for(0, f.values.size(), [&](std::size_t flat) {
        const int i = static_cast<int>((flat / stride) % n);
        out.values[flat] = f.values[flat] * g.axis_coord(axis, i);
    });
    return out;
}

GridFunction& axpy(GridFunction& y, double alpha, const GridFunction& x) {
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += alpha * x.values[i];
    return y;
}

void save_grid_function(const GridFunction& f, const std::string& path) {
    nlohmann::json header;
    const auto& g = *f.geom;
    header["d"] = g.d();
    header["nx"] = g.nx();
    header["nv"] = g.nv();
    header["Lx"] = g.Lx();
    header["Lv"] = g.Lv();
    header["potential"] = g.potential().descriptor();
    header["dtype"] = "float64-le";
    const std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_grid_function: cannot open " + path);
    const char magic[8] = {'H', 'K', 'G', 'R', 'I', 'D', '1', '\0'};
    out.write(magic, 8);
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), 8);
    out.write(htext.data(), static_cast<std::streamsize>(hlen));
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

GridFunction load_grid_function(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_grid_function: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "HKGRID1\0", 8) != 0)
        throw DataError("load_grid_function: bad magic in " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 8);
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    const auto header = nlohmann::json::parse(htext);
    auto geom = std::make_shared<GridGeometry>(
        header.at("d"), header.at("nx"), header.at("nv"), header.at("Lx"), header.at("Lv"),
        PotentialSpec::from_descriptor(header.at("potential")));
    GridFunction f(geom);
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in) throw DataError("load_grid_function: truncated payload in " + path);
    return f;
}

} // namespace hypokit
