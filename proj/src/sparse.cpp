#include "aschwarz/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aschwarz {

double SparseMatrix::at(std::size_t i, int j) const {
    auto begin = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    auto end = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return val[static_cast<std::size_t>(it - col.begin())];
}

void SparseBuilder::add(std::size_t i, int j, double v) {
    if (i >= nrows_ || j < 0 || static_cast<std::size_t>(j) >= ncols_)
        throw std::out_of_range("SparseBuilder::add: index out of range");
    entries_.push_back({i, j, v});
}

SparseMatrix SparseBuilder::finalize() {
    // stable: duplicate entries accumulate in insertion order (deterministic)
    std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    SparseMatrix A;
    A.nrows = nrows_;
    A.ncols = ncols_;
    A.row_ptr.assign(nrows_ + 1, 0);
    A.col.reserve(entries_.size());
    A.val.reserve(entries_.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < nrows_; ++i) {
        A.row_ptr[i] = A.col.size();
        while (k < entries_.size() && entries_[k].i == i) {
            int j = entries_[k].j;
            double v = entries_[k].v;
            ++k;
            while (k < entries_.size() && entries_[k].i == i && entries_[k].j == j) {
                v += entries_[k].v;
                ++k;
            }
            A.col.push_back(j);
            A.val.push_back(v);
        }
    }
    A.row_ptr[nrows_] = A.col.size();
    return A;
}

void spmv(const SparseMatrix& A, const double* x, double* y) {
    for (std::size_t i = 0; i < A.nrows; ++i) {
        double s = 0.0;
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            s += A.val[k] * x[A.col[k]];
        y[i] = s;
    }
}

Vector spmv(const SparseMatrix& A, const Vector& x) {
    if (x.size() != A.ncols) throw std::invalid_argument("spmv: dimension mismatch");
    Vector y(A.nrows);
    spmv(A, x.data(), y.data());
    return y;
}

SparseMatrix restrict_sparse(const SparseMatrix& A, const std::vector<int>& idx) {
    if (A.nrows != A.ncols) throw std::invalid_argument("restrict_sparse: matrix not square");
    // global -> local map (-1 = outside)
    std::vector<int> glob2loc(A.ncols, -1);
    for (std::size_t l = 0; l < idx.size(); ++l) {
        int g = idx[l];
        if (g < 0 || static_cast<std::size_t>(g) >= A.ncols)
            throw std::out_of_range("restrict_sparse: index out of range");
        if (l > 0 && idx[l] <= idx[l - 1])
            throw std::invalid_argument("restrict_sparse: indices not strictly ascending");
        glob2loc[static_cast<std::size_t>(g)] = static_cast<int>(l);
    }
    SparseBuilder b(idx.size(), idx.size());
    for (std::size_t l = 0; l < idx.size(); ++l) {
        std::size_t gi = static_cast<std::size_t>(idx[l]);
        for (std::size_t k = A.row_ptr[gi]; k < A.row_ptr[gi + 1]; ++k) {
            int lj = glob2loc[static_cast<std::size_t>(A.col[k])];
            if (lj >= 0) b.add(l, lj, A.val[k]);
        }
    }
    return b.finalize();
}

DenseMatrix to_dense(const SparseMatrix& A) {
    DenseMatrix D(A.nrows, A.ncols, 0.0);
    for (std::size_t i = 0; i < A.nrows; ++i)
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            D(i, static_cast<std::size_t>(A.col[k])) += A.val[k];
    return D;
}

bool is_symmetric(const SparseMatrix& A, double tol) {
    if (A.nrows != A.ncols) return false;
    for (std::size_t i = 0; i < A.nrows; ++i)
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            double aji = A.at(static_cast<std::size_t>(A.col[k]), static_cast<int>(i));
            if (std::fabs(A.val[k] - aji) > tol) return false;
        }
    return true;
}

}  // namespace aschwarz
