#include "aschwarz/decomposition.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace aschwarz {

namespace {

// Chunk q of [0, n) split into parts pieces.
std::pair<std::size_t, std::size_t> chunk(std::size_t n, std::size_t parts, std::size_t q) {
    return {q * n / parts, (q + 1) * n / parts};
}

std::vector<int> multiplicity(const Decomposition& d) {
    std::vector<int> m(d.global_n, 0);
    for (const auto& omega : d.subdomain_indices)
        for (int g : omega) ++m[static_cast<std::size_t>(g)];
    return m;
}

void assign_weights(Decomposition& d) {
    d.weights.assign(d.p, {});
    if (d.strategy == WeightStrategy::restricted) {
        for (std::size_t s = 0; s < d.p; ++s) {
            const auto& omega = d.subdomain_indices[s];
            auto& w = d.weights[s];
            w.resize(omega.size());
            for (std::size_t l = 0; l < omega.size(); ++l)
                w[l] = d.owner[static_cast<std::size_t>(omega[l])] == static_cast<int>(s) ? 1.0 : 0.0;
        }
    } else {
        std::vector<int> m = multiplicity(d);
        for (std::size_t s = 0; s < d.p; ++s) {
            const auto& omega = d.subdomain_indices[s];
            auto& w = d.weights[s];
            w.resize(omega.size());
            for (std::size_t l = 0; l < omega.size(); ++l)
                w[l] = 1.0 / m[static_cast<std::size_t>(omega[l])];
        }
    }
}

}  // namespace

Decomposition partition_box(const std::array<std::size_t, 3>& grid_dims,
                            const std::array<std::size_t, 3>& proc_grid,
                            std::size_t overlap) {
    for (int dir = 0; dir < 3; ++dir) {
        if (grid_dims[dir] == 0 || proc_grid[dir] == 0)
            throw std::invalid_argument("partition_box: zero grid or proc dimension");
        if (proc_grid[dir] > grid_dims[dir])
            throw std::invalid_argument("partition_box: empty subdomain (more procs than cells)");
    }
    Decomposition d;
    d.grid_dims = grid_dims;
    d.proc_grid = proc_grid;
    d.overlap = overlap;
    d.p = proc_grid[0] * proc_grid[1] * proc_grid[2];
    d.global_n = grid_dims[0] * grid_dims[1] * grid_dims[2];
    d.subdomain_indices.resize(d.p);
    d.owner.assign(d.global_n, -1);

    const std::size_t nx = grid_dims[0], ny = grid_dims[1];
    auto gidx = [nx, ny](std::size_t ix, std::size_t iy, std::size_t iz) {
        return ix + nx * (iy + ny * iz);
    };

    // subdomain s = qx + px*(qy + py*qz), x fastest (same convention as the
    // lexicographic global index)
    for (std::size_t qz = 0; qz < proc_grid[2]; ++qz)
        for (std::size_t qy = 0; qy < proc_grid[1]; ++qy)
            for (std::size_t qx = 0; qx < proc_grid[0]; ++qx) {
                const std::size_t s = qx + proc_grid[0] * (qy + proc_grid[1] * qz);
                auto [x0, x1] = chunk(grid_dims[0], proc_grid[0], qx);
                auto [y0, y1] = chunk(grid_dims[1], proc_grid[1], qy);
                auto [z0, z1] = chunk(grid_dims[2], proc_grid[2], qz);
                if (x0 == x1 || y0 == y1 || z0 == z1)
                    throw std::invalid_argument("partition_box: empty subdomain");

                // ownership: the box before extension
                for (std::size_t iz = z0; iz < z1; ++iz)
                    for (std::size_t iy = y0; iy < y1; ++iy)
                        for (std::size_t ix = x0; ix < x1; ++ix)
                            d.owner[gidx(ix, iy, iz)] = static_cast<int>(s);

                // membership: the box extended by `overlap`, clipped
                const std::size_t ex0 = x0 > overlap ? x0 - overlap : 0;
                const std::size_t ey0 = y0 > overlap ? y0 - overlap : 0;
                const std::size_t ez0 = z0 > overlap ? z0 - overlap : 0;
                const std::size_t ex1 = std::min(grid_dims[0], x1 + overlap);
                const std::size_t ey1 = std::min(grid_dims[1], y1 + overlap);
                const std::size_t ez1 = std::min(grid_dims[2], z1 + overlap);
                auto& omega = d.subdomain_indices[s];
                omega.reserve((ex1 - ex0) * (ey1 - ey0) * (ez1 - ez0));
                for (std::size_t iz = ez0; iz < ez1; ++iz)
                    for (std::size_t iy = ey0; iy < ey1; ++iy)
                        for (std::size_t ix = ex0; ix < ex1; ++ix)
                            omega.push_back(static_cast<int>(gidx(ix, iy, iz)));
                std::sort(omega.begin(), omega.end());
            }

    d.strategy = WeightStrategy::multiplicity;
    assign_weights(d);
    return d;
}

Decomposition build_weights(const Decomposition& din, WeightStrategy strategy) {
    Decomposition d = din;
    d.strategy = strategy;
    assign_weights(d);
    return d;
}

CoarseSpace build_coarse(const Decomposition& d, const SparseMatrix& A) {
    if (A.nrows != d.global_n || A.ncols != d.global_n)
        throw std::invalid_argument("build_coarse: matrix size mismatch");
    CoarseSpace c;

    SparseBuilder rb(d.p, d.global_n);
    for (std::size_t g = 0; g < d.global_n; ++g)
        rb.add(static_cast<std::size_t>(d.owner[g]), static_cast<int>(g), 1.0);
    c.R_tilde = rb.finalize();

    // A_tilde(s, t) = sum of A(i, j) over i owned by s, j owned by t
    SparseBuilder ab(d.p, d.p);
    for (std::size_t i = 0; i < A.nrows; ++i) {
        const int oi = d.owner[i];
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            ab.add(static_cast<std::size_t>(oi), d.owner[static_cast<std::size_t>(A.col[k])],
                   A.val[k]);
    }
    c.A_tilde = ab.finalize();
    return c;
}

SparseMatrix restrict_block(const SparseMatrix& A, const Decomposition& d, std::size_t s) {
    if (s >= d.p) throw std::out_of_range("restrict_block: subdomain index out of range");
    return restrict_sparse(A, d.subdomain_indices[s]);
}

std::string decomposition_summary_json(const Decomposition& d) {
    nlohmann::json j;
    j["p"] = d.p;
    j["global_n"] = d.global_n;
    j["grid_dims"] = d.grid_dims;
    j["proc_grid"] = d.proc_grid;
    j["overlap"] = d.overlap;
    j["weight_strategy"] =
        d.strategy == WeightStrategy::restricted ? "restricted" : "multiplicity";
    std::vector<std::size_t> sizes;
    sizes.reserve(d.p);
    std::size_t owned_total = 0;
    for (const auto& omega : d.subdomain_indices) sizes.push_back(omega.size());
    for (int o : d.owner) owned_total += o >= 0 ? 1 : 0;
    j["subdomain_sizes"] = sizes;
    j["owned_total"] = owned_total;
    return j.dump(2);
}

}  // namespace aschwarz
