#pragma once

// 3D Poisson test problem: 7-point finite differences on the interior of the
// unit cube, zero Dirichlet boundary, uniform source.

#include <array>
#include <cstddef>
#include <utility>

#include "aschwarz/sparse.hpp"

namespace aschwarz {

struct PoissonSpec {
    std::array<std::size_t, 3> cells{1, 1, 1};  // interior grid dims
    double source_value = 4590.0;
};

// Diagonal 6/h^2, off-diagonal -1/h^2 to each existing grid neighbor,
// h = 1/(max(cells)+1); b_i = source_value.  Lexicographic order, x fastest.
std::pair<SparseMatrix, Vector> assemble_poisson(const PoissonSpec& spec);

// Ground-truth solve for test oracles: dense LU for small systems, otherwise
// CG to 1e-12 relative.  Throws if neither converges.
Vector exact_solve(const SparseMatrix& A, const Vector& b);

}  // namespace aschwarz
