#pragma once

// Matrix Market coordinate I/O (`%%MatrixMarket matrix coordinate real
// general`, 1-based indices).

#include <iosfwd>
#include <string>

#include "aschwarz/sparse.hpp"

namespace aschwarz {

SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market_file(const std::string& path);

void write_matrix_market(const SparseMatrix& A, std::ostream& out);
void write_matrix_market_file(const SparseMatrix& A, const std::string& path);

}  // namespace aschwarz
