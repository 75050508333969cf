#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aschwarz/kernels.hpp"
#include "aschwarz/linalg.hpp"
#include "aschwarz/poisson.hpp"

using namespace aschwarz;

TEST_CASE("single-unknown problem") {
    auto [A, b] = assemble_poisson({{1, 1, 1}, 4590.0});
    REQUIRE(A.nrows == 1);
    CHECK(A.at(0, 0) == doctest::Approx(24.0));  // h = 1/2
    CHECK(b[0] == 4590.0);
    auto x = exact_solve(A, b);
    CHECK(x[0] == doctest::Approx(4590.0 / 24.0));
}

TEST_CASE("two-unknown stencil enumeration") {
    auto [A, b] = assemble_poisson({{2, 1, 1}, 4590.0});
    REQUIRE(A.nrows == 2);
    const double h = 1.0 / 3.0;
    CHECK(A.at(0, 0) == doctest::Approx(6.0 / (h * h)));
    CHECK(A.at(0, 1) == doctest::Approx(-1.0 / (h * h)));
    CHECK(A.at(1, 0) == doctest::Approx(-1.0 / (h * h)));
    CHECK(A.at(1, 1) == doctest::Approx(6.0 / (h * h)));
}

TEST_CASE("assembled matrix is symmetric with the expected row sums") {
    auto [A, b] = assemble_poisson({{4, 4, 4}, 1.0});
    CHECK(is_symmetric(A));
    const double h = 1.0 / 5.0;
    const double scale = 1.0 / (h * h);
    std::size_t zero_rows = 0;
    for (std::size_t i = 0; i < A.nrows; ++i) {
        double s = 0.0;
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) s += A.val[k];
        if (std::fabs(s) <= 1e-10 * scale)
            ++zero_rows;
        else
            CHECK(s > 0.0);
    }
    // rows with all six neighbors present: the 2x2x2 interior-of-interior block
    CHECK(zero_rows == 8);
}

TEST_CASE("assembled matrices are M-matrices") {
    for (auto dims : {std::array<std::size_t, 3>{1, 1, 1}, std::array<std::size_t, 3>{5, 1, 1},
                      std::array<std::size_t, 3>{3, 4, 2}, std::array<std::size_t, 3>{6, 6, 6}}) {
        auto [A, b] = assemble_poisson({dims, 1.0});
        CHECK(is_m_matrix(A) == MMatrixResult::yes);
    }
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(assemble_poisson({{0, 1, 1}, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(assemble_poisson({{1000, 1000, 1000}, 1.0}), std::invalid_argument);
}

TEST_CASE("exact_solve residual oracle on 8^3 (dense path)") {
    auto [A, b] = assemble_poisson({{8, 8, 8}, 4590.0});
    auto x = exact_solve(A, b);
    Vector Ax = spmv(A, x);
    const auto& k = kern::ops();
    Vector r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - Ax[i];
    CHECK(std::sqrt(k.nrm2sq(r.size(), r.data())) <=
          1e-11 * std::sqrt(k.nrm2sq(b.size(), b.data())));
}

TEST_CASE("exact_solve residual oracle on 9^3 (cg path)") {
    auto [A, b] = assemble_poisson({{9, 9, 9}, 4590.0});
    REQUIRE(A.nrows > 512);
    auto x = exact_solve(A, b);
    Vector Ax = spmv(A, x);
    const auto& k = kern::ops();
    Vector r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - Ax[i];
    CHECK(std::sqrt(k.nrm2sq(r.size(), r.data())) <=
          1e-11 * std::sqrt(k.nrm2sq(b.size(), b.data())));
}
