#pragma once

// Row-major dense matrices and the LU factorization used for local and
// coarse solves.  Dense routines are meant for analysis-scale problems and
// subdomain-sized blocks, not for the global fine systems.

#include <cstddef>
#include <vector>

namespace aschwarz {

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C += alpha * A * B
void gemm_acc(double alpha, const DenseMatrix& A, const DenseMatrix& B, DenseMatrix& C);
DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B);

// y = A x
void gemv(const DenseMatrix& A, const double* x, double* y);

DenseMatrix abs_matrix(const DenseMatrix& B);

// Entrywise A - B.
DenseMatrix subtract(const DenseMatrix& A, const DenseMatrix& B);

struct LuFactors {
    DenseMatrix lu;         // L below the diagonal (unit), U on and above
    std::vector<int> piv;   // piv[k] = row exchanged with k at step k
    bool singular = false;
};

// Partial-pivoting LU; factors are computed in a copy of A.  A pivot whose
// magnitude falls below ~1e2 * eps * max|A| marks the factorization singular.
LuFactors lu_factor(const DenseMatrix& A);

// Solve A x = b given factors.  Throws std::runtime_error on singular factors.
std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b);
void lu_solve_inplace(const LuFactors& f, double* x);

// A^{-1} via LU on the identity; throws on singular input.
DenseMatrix dense_inverse(const DenseMatrix& A);

}  // namespace aschwarz
