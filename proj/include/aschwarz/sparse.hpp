#pragma once

// CSR sparse matrices with a deterministic (per-row left-to-right) spmv.

#include <cstddef>
#include <vector>

#include "aschwarz/dense.hpp"

namespace aschwarz {

using Vector = std::vector<double>;

struct SparseMatrix {
    std::size_t nrows = 0;
    std::size_t ncols = 0;
    std::vector<std::size_t> row_ptr;  // size nrows + 1
    std::vector<int> col;              // sorted ascending within each row
    std::vector<double> val;

    std::size_t nnz() const { return val.size(); }

    // Value at (i, j), 0 if not stored.  Binary search within the row.
    double at(std::size_t i, int j) const;
};

class SparseBuilder {
public:
    SparseBuilder(std::size_t nrows, std::size_t ncols) : nrows_(nrows), ncols_(ncols) {}

    // Duplicate (i, j) entries are summed at finalize.
    void add(std::size_t i, int j, double v);

    SparseMatrix finalize();

private:
    struct Entry {
        std::size_t i;
        int j;
        double v;
    };
    std::size_t nrows_;
    std::size_t ncols_;
    std::vector<Entry> entries_;
};

// y = A x, each row summed in storage (ascending-column) order.
void spmv(const SparseMatrix& A, const double* x, double* y);
Vector spmv(const SparseMatrix& A, const Vector& x);

// Principal submatrix A(idx, idx); idx must be sorted ascending, no repeats.
SparseMatrix restrict_sparse(const SparseMatrix& A, const std::vector<int>& idx);

DenseMatrix to_dense(const SparseMatrix& A);

bool is_symmetric(const SparseMatrix& A, double tol = 0.0);

}  // namespace aschwarz
