#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "aschwarz/matrix_market.hpp"
#include "aschwarz/sparse.hpp"

using namespace aschwarz;

TEST_CASE("read parses a handwritten coordinate file") {
    std::istringstream in(
        "%%MatrixMarket matrix coordinate real general\n"
        "% a comment line\n"
        "3 3 4\n"
        "1 1 2.0\n"
        "1 2 -1.0\n"
        "3 3 5.5\n"
        "2 2 1.0\n");
    SparseMatrix A = read_matrix_market(in);
    CHECK(A.nrows == 3);
    CHECK(A.ncols == 3);
    CHECK(A.nnz() == 4);
    CHECK(A.at(0, 0) == 2.0);
    CHECK(A.at(0, 1) == -1.0);
    CHECK(A.at(1, 1) == 1.0);
    CHECK(A.at(2, 2) == 5.5);
}

TEST_CASE("read rejects unsupported headers and bad entries") {
    {
        std::istringstream in("%%MatrixMarket matrix coordinate complex general\n1 1 1\n");
        CHECK_THROWS_AS(read_matrix_market(in), std::runtime_error);
    }
    {
        std::istringstream in("%%MatrixMarket matrix array real general\n1 1\n");
        CHECK_THROWS_AS(read_matrix_market(in), std::runtime_error);
    }
    {
        std::istringstream in(
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
        CHECK_THROWS_AS(read_matrix_market(in), std::runtime_error);
    }
    {
        std::istringstream in("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
        CHECK_THROWS_AS(read_matrix_market(in), std::runtime_error);  // truncated
    }
}

TEST_CASE("write/read roundtrip preserves a random matrix exactly") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    std::uniform_int_distribution<int> idx(0, 19);
    SparseBuilder b(20, 20);
    for (int k = 0; k < 60; ++k) b.add(static_cast<std::size_t>(idx(rng)), idx(rng), dist(rng));
    SparseMatrix A = b.finalize();

    std::ostringstream out;
    write_matrix_market(A, out);
    std::istringstream in(out.str());
    SparseMatrix B = read_matrix_market(in);

    REQUIRE(B.nrows == A.nrows);
    REQUIRE(B.nnz() == A.nnz());
    for (std::size_t i = 0; i < A.nrows; ++i)
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            CHECK(B.col[k] == A.col[k]);
            CHECK(B.val[k] == A.val[k]);  // 17 significant digits: exact roundtrip
        }
}

TEST_CASE("file I/O roundtrip") {
    SparseBuilder b(2, 3);
    b.add(0, 2, 1.25);
    b.add(1, 0, -4.0);
    SparseMatrix A = b.finalize();
    const std::string path = "mm_roundtrip_test.mtx";
    write_matrix_market_file(A, path);
    SparseMatrix B = read_matrix_market_file(path);
    std::remove(path.c_str());
    CHECK(B.nrows == 2);
    CHECK(B.ncols == 3);
    CHECK(B.at(0, 2) == 1.25);
    CHECK(B.at(1, 0) == -4.0);
    CHECK_THROWS_AS(read_matrix_market_file("definitely_missing_file.mtx"), std::runtime_error);
}
