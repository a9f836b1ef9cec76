#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace hypokit {

/// Dense symmetric matrix in row-major storage (small sizes only).
struct SymMatrix {
    std::size_t n = 0;
    std::vector<double> a; // n*n

    SymMatrix() = default;
    explicit SymMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

/// Eigenvalues (ascending) and eigenvectors (columns) of a small symmetric
/// matrix by cyclic Jacobi rotations.
void sym_eigen(const SymMatrix& m, std::vector<double>& eigenvalues,
               std::vector<double>* eigenvectors = nullptr);

/// Smallest eigenvalue of a small symmetric matrix.
double sym_min_eigenvalue(const SymMatrix& m);

/// Banded matrix with fixed lower/upper bandwidth, row-major band storage.
/// entry(i,j) is stored for |i-j| <= bw.
class BandMatrix {
public:
    BandMatrix(std::size_t n, std::size_t bandwidth);

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return bw_; }
    double& at(std::size_t i, std::size_t j);
    double get(std::size_t i, std::size_t j) const;

    /// In-place LU factorization without pivoting (valid for the diagonally
    /// dominant operators used here).
    void factorize();
    /// Solve L U x = rhs after factorize(); rhs is overwritten with x.
    void solve(std::vector<double>& rhs) const;
    /// y = A x with the original (unfactorized) coefficients.
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;

private:
    std::size_t n_;
    std::size_t bw_;
    std::size_t stride_;
    std::vector<double> band_;     // original coefficients
    std::vector<double> lu_;       // factorized copy
    bool factorized_ = false;
};

/// Thomas algorithm for a tridiagonal system; diagonals (sub, diag, super).
/// rhs is overwritten with the solution.
void tridiag_solve(std::vector<double> sub, std::vector<double> diag,
                   std::vector<double> super, std::vector<double>& rhs);

/// Ordinary least squares fit y ~ a + b x; returns {intercept, slope, r_squared}.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace hypokit
