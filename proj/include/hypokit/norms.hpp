#pragma once

#include <cmath>
#include <vector>

namespace hypokit {

/// Seminorm and mixed-term aggregates of a phase-space function, the common
/// currency between the discrete operators and the certificate evaluations.
///
/// seminorm(i,j) = || grad_x^i grad_v^j h ||_{L2(mu)} (Hilbert-Schmidt sum over
/// multi-indices), populated for i + j <= k + 1. mixed(l) is the inner product
/// < grad_x^{l-1} grad_v h, grad_x^l h >_{L2(mu)} for 1 <= l <= k.
struct NormAggregates {
    int k = 0;
    std::vector<double> seminorms; // (k+2)x(k+2) row-major, entry (i,j) at i*(k+2)+j
    std::vector<double> mixed;     // size k+1, index l in 1..k used

    double Z = 0.0;                // aggregate of derivatives below top order
    double W_x = 0.0;              // || grad_x^k h ||
    std::vector<double> W;         // W[l] = || grad_x^l grad_v^{k+1-l} h ||, l = 0..k

    explicit NormAggregates(int order = 0)
        : k(order),
          seminorms((order + 2) * (order + 2), 0.0),
          mixed(order + 1, 0.0),
          W(order + 1, 0.0) {}

    double seminorm(int i, int j) const { return seminorms[i * (k + 2) + j]; }
    double& seminorm(int i, int j) { return seminorms[i * (k + 2) + j]; }
    bool has_order(int i, int j) const { return i >= 0 && j >= 0 && i + j <= k + 1; }

    /// Recompute Z, W_x, W from the stored seminorms.
    void refresh_aggregates() {
        double z2 = 0.0;
        for (int l = 1; l <= k - 1; ++l)
            for (int i = 0; i <= l; ++i) z2 += seminorm(i, l - i) * seminorm(i, l - i);
        for (int l = 0; l <= k - 1; ++l) z2 += seminorm(l, k - l) * seminorm(l, k - l);
        Z = z2 > 0 ? std::sqrt(z2) : 0.0;
        W_x = seminorm(k, 0);
        for (int l = 0; l <= k; ++l) W[l] = seminorm(l, k + 1 - l);
    }
};

} // namespace hypokit
