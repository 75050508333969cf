#pragma once

// Overlapping box decompositions of a structured grid, partition-of-unity
// weights, and the one-unknown-per-subdomain coarse space.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "aschwarz/sparse.hpp"

namespace aschwarz {

enum class WeightStrategy { restricted, multiplicity };

struct Decomposition {
    std::size_t p = 0;
    std::size_t global_n = 0;
    std::array<std::size_t, 3> grid_dims{};
    std::array<std::size_t, 3> proc_grid{};
    std::size_t overlap = 0;
    WeightStrategy strategy = WeightStrategy::multiplicity;

    std::vector<std::vector<int>> subdomain_indices;  // Omega^(s), sorted ascending
    std::vector<int> owner;                           // global index -> owning subdomain
    std::vector<std::vector<double>> weights;         // diag of W^(s), aligned with indices
};

struct CoarseSpace {
    SparseMatrix R_tilde;  // p x global_n, ownership aggregation
    SparseMatrix A_tilde;  // R_tilde A R_tilde^T
};

// Boxes are the proc_grid blocks of the grid, extended by `overlap` mesh steps
// per direction and clipped at the boundary; the owner of an index is the box
// containing it before extension.  Weights default to multiplicity (1/m).
Decomposition partition_box(const std::array<std::size_t, 3>& grid_dims,
                            const std::array<std::size_t, 3>& proc_grid,
                            std::size_t overlap);

Decomposition build_weights(const Decomposition& d, WeightStrategy strategy);

CoarseSpace build_coarse(const Decomposition& d, const SparseMatrix& A);

// A^(s) = R^(s) A R^(s)^T: principal submatrix on Omega^(s).
SparseMatrix restrict_block(const SparseMatrix& A, const Decomposition& d, std::size_t s);

// Summary (subdomain sizes, overlap, weight strategy) as a JSON string.
std::string decomposition_summary_json(const Decomposition& d);

}  // namespace aschwarz
