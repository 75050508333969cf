#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aschwarz/linalg.hpp"
#include "aschwarz/poisson.hpp"
#include "aschwarz/sparse.hpp"

using namespace aschwarz;

namespace {

SparseMatrix tridiag(std::size_t n, double d, double o) {
    SparseBuilder b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) b.add(i, static_cast<int>(i - 1), o);
        b.add(i, static_cast<int>(i), d);
        if (i + 1 < n) b.add(i, static_cast<int>(i + 1), o);
    }
    return b.finalize();
}

}  // namespace

TEST_CASE("spmv identity and row-sum examples") {
    SparseBuilder b(2, 2);
    b.add(0, 0, 1.0);
    b.add(1, 1, 1.0);
    auto I = b.finalize();
    auto y = spmv(I, Vector{3.0, -1.0});
    CHECK(y[0] == 3.0);
    CHECK(y[1] == -1.0);

    auto A = tridiag(2, 2.0, -1.0);
    auto z = spmv(A, Vector{1.0, 1.0});
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[1] == doctest::Approx(1.0));
}

TEST_CASE("spmv matches dense stencil enumeration on 3^3 Laplacian") {
    auto [A, rhs] = assemble_poisson({{3, 3, 3}, 1.0});
    Vector ones(27, 1.0);
    Vector y = spmv(A, ones);
    DenseMatrix D = to_dense(A);
    Vector yd(27);
    gemv(D, ones.data(), yd.data());
    std::size_t positive = 0;
    for (std::size_t i = 0; i < 27; ++i) {
        CHECK(y[i] == doctest::Approx(yd[i]).epsilon(1e-14));
        if (y[i] > 0.0) ++positive;
    }
    // every row except the fully interior one touches the boundary
    CHECK(positive == 26);
    CHECK(y[13] == doctest::Approx(0.0).scale(D(13, 13)));
}

TEST_CASE("builder sums duplicates and validates indices") {
    SparseBuilder b(2, 2);
    b.add(0, 0, 1.0);
    b.add(0, 0, 2.5);
    b.add(1, 0, -1.0);
    auto A = b.finalize();
    CHECK(A.nnz() == 2);
    CHECK(A.at(0, 0) == 3.5);
    CHECK(A.at(1, 0) == -1.0);
    CHECK(A.at(1, 1) == 0.0);
    CHECK_THROWS_AS(SparseBuilder(2, 2).add(2, 0, 1.0), std::out_of_range);
    CHECK_THROWS_AS(SparseBuilder(2, 2).add(0, 5, 1.0), std::out_of_range);
}

TEST_CASE("restrict_sparse equals dense principal slice") {
    auto [A, rhs] = assemble_poisson({{4, 3, 2}, 1.0});
    std::vector<int> idx{0, 3, 5, 11, 17, 23};
    SparseMatrix S = restrict_sparse(A, idx);
    DenseMatrix D = to_dense(A);
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t bb = 0; bb < idx.size(); ++bb)
            CHECK(S.at(a, static_cast<int>(bb)) ==
                  D(static_cast<std::size_t>(idx[a]), static_cast<std::size_t>(idx[bb])));
    CHECK(is_symmetric(S));
    CHECK_THROWS_AS(restrict_sparse(A, std::vector<int>{3, 1}), std::invalid_argument);
}

TEST_CASE("weighted_max_norm examples and all-ones equivalence") {
    CHECK(weighted_max_norm(DenseMatrix::identity(4), Vector(4, 2.0)) == doctest::Approx(1.0));

    DenseMatrix A(2, 2);
    A(0, 1) = 1.0;
    A(1, 0) = 1.0;
    CHECK(weighted_max_norm(A, Vector{1.0, 2.0}) == doctest::Approx(2.0));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        DenseMatrix M(5, 5);
        for (std::size_t i = 0; i < 25; ++i) M.data()[i] = dist(rng);
        double inf = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 5; ++j) s += std::fabs(M(i, j));
            inf = std::max(inf, s);
        }
        CHECK(weighted_max_norm(M, Vector(5, 1.0)) == doctest::Approx(inf).epsilon(1e-14));
    }

    CHECK_THROWS_AS(weighted_max_norm(A, Vector{1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("spectral_radius_nonneg basics") {
    CHECK(spectral_radius_nonneg(DenseMatrix(3, 3, 0.0)).rho == doctest::Approx(0.0));

    DenseMatrix D(2, 2, 0.0);
    D(0, 0) = 0.5;
    D(1, 1) = 0.25;
    auto r = spectral_radius_nonneg(D);
    CHECK(r.converged);
    CHECK(r.rho == doctest::Approx(0.5).epsilon(1e-8));

    DenseMatrix neg(2, 2, 0.0);
    neg(0, 1) = -1.0;
    CHECK_THROWS_AS(spectral_radius_nonneg(neg), std::invalid_argument);
}

TEST_CASE("spectral_radius_nonneg matches closed-form eigenvalue on 2x2") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        double a = dist(rng), b = dist(rng), c = dist(rng), d = dist(rng);
        DenseMatrix B(2, 2);
        B(0, 0) = a;
        B(0, 1) = b;
        B(1, 0) = c;
        B(1, 1) = d;
        double lam = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + b * c);
        auto r = spectral_radius_nonneg(B, 1e-12, 20000);
        CHECK(r.rho == doctest::Approx(lam).epsilon(1e-6));
    }
}

TEST_CASE("spectral_radius_nonneg scales linearly") {
    DenseMatrix B(3, 3);
    B(0, 0) = 0.2;
    B(0, 1) = 0.3;
    B(1, 0) = 0.1;
    B(1, 1) = 0.4;
    B(1, 2) = 0.2;
    B(2, 1) = 0.3;
    B(2, 2) = 0.1;
    auto r1 = spectral_radius_nonneg(B, 1e-13, 20000);
    DenseMatrix C = B;
    for (std::size_t i = 0; i < 9; ++i) C.data()[i] *= 3.5;
    auto r2 = spectral_radius_nonneg(C, 1e-13, 20000);
    CHECK(r2.rho == doctest::Approx(3.5 * r1.rho).epsilon(1e-8));
}

TEST_CASE("is_m_matrix covers all branches") {
    CHECK(is_m_matrix(tridiag(2, 2.0, -1.0)) == MMatrixResult::yes);

    SparseBuilder pos(2, 2);
    pos.add(0, 0, 1.0);
    pos.add(0, 1, 1.0);
    pos.add(1, 1, 1.0);
    CHECK(is_m_matrix(pos.finalize()) == MMatrixResult::no);

    // reducible, weakly dominant only -> dense fallback says yes
    SparseBuilder red(2, 2);
    red.add(0, 0, 1.0);
    red.add(1, 0, -1.0);
    red.add(1, 1, 1.0);
    CHECK(is_m_matrix(red.finalize()) == MMatrixResult::yes);

    // not dominant, inverse has negative entries -> no
    CHECK(is_m_matrix(tridiag(2, 1.0, -3.0)) == MMatrixResult::no);

    // singular at the dense stage -> no
    CHECK(is_m_matrix(tridiag(2, 1.0, -1.0)) == MMatrixResult::no);

    // too large for the dense stage -> unknown
    CHECK(is_m_matrix(tridiag(2, 1.0, -1.0), 1) == MMatrixResult::unknown);

    // irreducibly diagonally dominant (interior rows weak): 1D Laplacian
    CHECK(is_m_matrix(tridiag(50, 2.0, -1.0)) == MMatrixResult::yes);
}

TEST_CASE("cg_solve basics and residual oracle") {
    SparseBuilder db(3, 3);
    db.add(0, 0, 1.0);
    db.add(1, 1, 2.0);
    db.add(2, 2, 4.0);
    auto D = db.finalize();

    auto r0 = cg_solve(D, Vector(3, 0.0), 1e-10, 100);
    CHECK(r0.converged);
    CHECK(r0.iterations == 0);
    for (double v : r0.x) CHECK(v == 0.0);

    auto r1 = cg_solve(D, Vector{1.0, 2.0, 4.0}, 1e-12, 100);
    CHECK(r1.converged);
    for (double v : r1.x) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));

    auto [A, b] = assemble_poisson({{8, 8, 8}, 1.0});
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector rb(A.nrows);
    for (auto& v : rb) v = dist(rng);
    auto rc = cg_solve(A, rb, 1e-9, 5000);
    CHECK(rc.converged);
    Vector Ax = spmv(A, rc.x);
    double rn = 0.0, bn = 0.0;
    for (std::size_t i = 0; i < rb.size(); ++i) {
        rn += (rb[i] - Ax[i]) * (rb[i] - Ax[i]);
        bn += rb[i] * rb[i];
    }
    CHECK(std::sqrt(rn) <= 1e-9 * std::sqrt(bn));
}

TEST_CASE("cg_solve rejects indefinite matrices") {
    SparseBuilder b(2, 2);
    b.add(0, 0, 1.0);
    b.add(1, 1, -1.0);
    auto A = b.finalize();
    CHECK_THROWS_AS(cg_solve(A, Vector{1.0, 1.0}, 1e-10, 10), std::runtime_error);
}

TEST_CASE("lu and cg agree on an SPD system") {
    auto [A, b] = assemble_poisson({{5, 4, 3}, 2.0});
    auto xc = cg_solve(A, b, 1e-12, 2000);
    REQUIRE(xc.converged);
    auto f = lu_factor(to_dense(A));
    auto xl = lu_solve(f, b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        num += (xc.x[i] - xl[i]) * (xc.x[i] - xl[i]);
        den += xl[i] * xl[i];
    }
    CHECK(std::sqrt(num) <= 1e-8 * std::sqrt(den));
}
