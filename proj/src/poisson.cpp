#include "aschwarz/poisson.hpp"

#include <algorithm>
#include <stdexcept>

#include "aschwarz/linalg.hpp"

namespace aschwarz {

std::pair<SparseMatrix, Vector> assemble_poisson(const PoissonSpec& spec) {
    const auto [nx, ny, nz] = spec.cells;
    if (nx < 1 || ny < 1 || nz < 1)
        throw std::invalid_argument("assemble_poisson: each grid dimension must be >= 1");
    const std::size_t n = nx * ny * nz;
    if (n > 100u * 1000u * 1000u)
        throw std::invalid_argument("assemble_poisson: grid too large");

    const double h = 1.0 / (static_cast<double>(std::max({nx, ny, nz})) + 1.0);
    const double diag = 6.0 / (h * h);
    const double off = -1.0 / (h * h);

    SparseBuilder b(n, n);
    auto gidx = [nx, ny](std::size_t ix, std::size_t iy, std::size_t iz) {
        return ix + nx * (iy + ny * iz);
    };
    for (std::size_t iz = 0; iz < nz; ++iz)
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const std::size_t g = gidx(ix, iy, iz);
                if (iz > 0) b.add(g, static_cast<int>(gidx(ix, iy, iz - 1)), off);
                if (iy > 0) b.add(g, static_cast<int>(gidx(ix, iy - 1, iz)), off);
                if (ix > 0) b.add(g, static_cast<int>(gidx(ix - 1, iy, iz)), off);
                b.add(g, static_cast<int>(g), diag);
                if (ix + 1 < nx) b.add(g, static_cast<int>(gidx(ix + 1, iy, iz)), off);
                if (iy + 1 < ny) b.add(g, static_cast<int>(gidx(ix, iy + 1, iz)), off);
                if (iz + 1 < nz) b.add(g, static_cast<int>(gidx(ix, iy, iz + 1)), off);
            }
    return {b.finalize(), Vector(n, spec.source_value)};
}

Vector exact_solve(const SparseMatrix& A, const Vector& b) {
    if (A.nrows != A.ncols || b.size() != A.nrows)
        throw std::invalid_argument("exact_solve: dimension mismatch");
    if (A.nrows <= 512) {
        LuFactors f = lu_factor(to_dense(A));
        if (f.singular) throw std::runtime_error("exact_solve: singular matrix");
        return lu_solve(f, b);
    }
    CgResult r = cg_solve(A, b, 1e-12, 20 * A.nrows + 1000);
    if (!r.converged) throw std::runtime_error("exact_solve: CG did not converge");
    return r.x;
}

}  // namespace aschwarz
