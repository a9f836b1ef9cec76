#include "hypokit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypokit {

void sym_eigen(const SymMatrix& m, std::vector<double>& eigenvalues,
               std::vector<double>* eigenvectors) {
    const std::size_t n = m.n;
    std::vector<double> a = m.a;
    std::vector<double> v;
    if (eigenvectors) {
        v.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    }
    auto off = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
        return s;
    };
    for (int sweep = 0; sweep < 100 && off() > 1e-30; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                if (eigenvectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v[k * n + p], vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    eigenvalues.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a[i * n + i];
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return diag[i] < diag[j]; });
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = diag[order[i]];
    if (eigenvectors) {
        eigenvectors->assign(n * n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                (*eigenvectors)[i * n + j] = v[i * n + order[j]];
    }
}

double sym_min_eigenvalue(const SymMatrix& m) {
    std::vector<double> ev;
    sym_eigen(m, ev);
    return ev.front();
}

BandMatrix::BandMatrix(std::size_t n, std::size_t bandwidth)
    : n_(n), bw_(bandwidth), stride_(2 * bandwidth + 1), band_(n * stride_, 0.0) {}

double& BandMatrix::at(std::size_t i, std::size_t j) {
    return band_[i * stride_ + (j + bw_ - i)];
}

double BandMatrix::get(std::size_t i, std::size_t j) const {
    if (j + bw_ < i || j > i + bw_) return 0.0;
    return band_[i * stride_ + (j + bw_ - i)];
}

void BandMatrix::factorize() {
    lu_ = band_;
    auto lu = [&](std::size_t i, std::size_t j) -> double& {
        return lu_[i * stride_ + (j + bw_ - i)];
    };
    for (std::size_t k = 0; k < n_; ++k) {
        const double piv = lu(k, k);
        if (piv == 0.0) throw std::runtime_error("BandMatrix: zero pivot");
        const std::size_t iend = std::min(n_, k + bw_ + 1);
        for (std::size_t i = k + 1; i < iend; ++i) {
            const double f = lu(i, k) / piv;
            lu(i, k) = f;
            const std::size_t jend = std::min(n_, k + bw_ + 1);
            for (std::size_t j = k + 1; j < jend; ++j) lu(i, j) -= f * lu(k, j);
        }
    }
    factorized_ = true;
}

void BandMatrix::solve(std::vector<double>& rhs) const {
    if (!factorized_) throw std::runtime_error("BandMatrix: solve before factorize");
    auto lu = [&](std::size_t i, std::size_t j) {
        return lu_[i * stride_ + (j + bw_ - i)];
    };
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j0 = i > bw_ ? i - bw_ : 0;
        double s = rhs[i];
        for (std::size_t j = j0; j < i; ++j) s -= lu(i, j) * rhs[j];
        rhs[i] = s;
    }
    for (std::size_t ii = n_; ii-- > 0;) {
        const std::size_t jend = std::min(n_, ii + bw_ + 1);
        double s = rhs[ii];
        for (std::size_t j = ii + 1; j < jend; ++j) s -= lu(ii, j) * rhs[j];
        rhs[ii] = s / lu(ii, ii);
    }
}

void BandMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j0 = i > bw_ ? i - bw_ : 0;
        const std::size_t j1 = std::min(n_, i + bw_ + 1);
        double s = 0.0;
        for (std::size_t j = j0; j < j1; ++j) s += band_[i * stride_ + (j + bw_ - i)] * x[j];
        y[i] = s;
    }
}

void tridiag_solve(std::vector<double> sub, std::vector<double> diag,
                   std::vector<double> super, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * super[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t ii = n - 1; ii-- > 0;)
        rhs[ii] = (rhs[ii] - super[ii] * rhs[ii + 1]) / diag[ii];
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

} // namespace hypokit
