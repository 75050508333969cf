#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "aschwarz/analysis.hpp"
#include "aschwarz/decomposition.hpp"
#include "aschwarz/poisson.hpp"

using namespace aschwarz;

namespace {

struct Instance {
    SparseMatrix A;
    Decomposition dec;
    CoarseSpace coarse;
};

Instance poisson_instance(std::array<std::size_t, 3> grid, std::array<std::size_t, 3> procs,
                          std::size_t overlap) {
    Instance inst;
    auto [A, b] = assemble_poisson({grid, 4590.0});
    (void)b;
    inst.A = std::move(A);
    inst.dec = partition_box(grid, procs, overlap);
    inst.coarse = build_coarse(inst.dec, inst.A);
    return inst;
}

double min_entry(const DenseMatrix& B) {
    double m = 0.0;
    for (std::size_t i = 0; i < B.rows(); ++i)
        for (std::size_t j = 0; j < B.cols(); ++j) m = std::min(m, B(i, j));
    return m;
}

double max_abs(const DenseMatrix& B) {
    double m = 0.0;
    for (std::size_t i = 0; i < B.rows(); ++i)
        for (std::size_t j = 0; j < B.cols(); ++j) m = std::max(m, std::abs(B(i, j)));
    return m;
}

}  // namespace

TEST_CASE("exact local solve: p=1 zeroes the one-level operator") {
    Instance inst = poisson_instance({4, 3, 2}, {1, 1, 1}, 0);
    OperatorBundle bundle = build_operator_bundle(inst.A, inst.dec, &inst.coarse);
    CHECK(max_abs(bundle.ima) <= 1e-12);
    CheckResult one = check_one_level(bundle);
    CHECK(one.rho <= 1e-10);
    CHECK(one.convergent);
    CHECK(one.power_converged);
}

TEST_CASE("exact coarse space: one point per subdomain zeroes I-NA") {
    // every unknown is its own owner, so A~ = A and N = A^{-1}
    Instance inst = poisson_instance({5, 1, 1}, {5, 1, 1}, 0);
    OperatorBundle bundle = build_operator_bundle(inst.A, inst.dec, &inst.coarse);
    CHECK(max_abs(bundle.ina) <= 1e-12);
    CHECK(max_abs(sync_iteration_matrix(bundle)) <= 1e-12);
    CHECK(check_lemma_condition(bundle).rho <= 1e-10);
}

TEST_CASE("diagonal matrix: block-Jacobi local solves are exact") {
    SparseBuilder sb(6, 6);
    for (std::size_t i = 0; i < 6; ++i) sb.add(i, static_cast<int>(i), 2.0 + double(i));
    SparseMatrix A = sb.finalize();
    Decomposition dec = partition_box({6, 1, 1}, {2, 1, 1}, 0);
    OperatorBundle bundle = build_operator_bundle(A, dec, nullptr);
    CHECK(max_abs(bundle.ima) <= 1e-14);
    CHECK(check_one_level(bundle).rho <= 1e-12);
}

TEST_CASE("1D Poisson with two subdomains satisfies the one-level condition") {
    Instance inst = poisson_instance({4, 1, 1}, {2, 1, 1}, 0);
    OperatorBundle bundle = build_operator_bundle(inst.A, inst.dec, &inst.coarse);
    CheckResult one = check_one_level(bundle);
    CHECK(one.power_converged);
    CHECK(one.rho > 0.0);
    CHECK(one.rho < 1.0);
    CHECK(one.convergent == (one.rho < 1.0 - 1e-8));
}

TEST_CASE("null coarse pointer gives the N = 0 shape") {
    Instance inst = poisson_instance({8, 4, 2}, {2, 1, 1}, 1);
    OperatorBundle bundle = build_operator_bundle(inst.A, inst.dec, nullptr);
    CHECK(max_abs(bundle.N) == 0.0);
    // I - NA degenerates to the identity
    DenseMatrix expect_id = DenseMatrix::identity(bundle.A.rows());
    CHECK(max_abs(subtract(bundle.ina, expect_id)) == 0.0);
    // the damping bound no longer depends on theta, so the largest grid value
    // is returned
    auto theta = min_damping(bundle);
    REQUIRE(theta.has_value());
    CHECK(*theta == 1.0);
}

TEST_CASE("certificate conditions hold across a Poisson family") {
    // The nonnegativity and product conditions are the ones proved under the
    // row-sharing coarse restriction, so they are certified on the selection
    // operator; the majorization holds for any coarse operator and is checked
    // on the solver's aggregation operator as well.
    struct Shape {
        std::array<std::size_t, 3> grid;
        std::array<std::size_t, 3> procs;
        std::size_t overlap;
    };
    const Shape shapes[] = {
        {{100, 1, 1}, {2, 1, 1}, 0}, {{200, 1, 1}, {4, 1, 1}, 1}, {{8, 8, 4}, {2, 2, 1}, 1},
        {{6, 6, 6}, {2, 2, 2}, 1},   {{8, 8, 8}, {2, 2, 2}, 1},
    };
    for (const Shape& sh : shapes) {
        CAPTURE(sh.grid[0]);
        CAPTURE(sh.procs[0]);
        Instance inst = poisson_instance(sh.grid, sh.procs, sh.overlap);
        CHECK(is_m_matrix(inst.A) == MMatrixResult::yes);

        CoarseSpace sel = selection_coarse(inst.A, inst.dec);
        OperatorBundle bundle = build_operator_bundle(inst.A, inst.dec, &sel);
        CHECK(min_entry(bundle.ima) >= -1e-12);
        CHECK(min_entry(bundle.ina) >= -1e-12);

        CheckResult lemma = check_lemma_condition(bundle);
        CHECK(lemma.power_converged);
        CHECK(lemma.rho < 1.0);

        CheckResult shared = check_shared_condition(bundle);
        CHECK(shared.power_converged);
        CHECK(shared.rho <= lemma.rho + 1e-10);

        // when both factors are entrywise nonnegative the absolute values are
        // no-ops, so the product's radius coincides with the lemma radius
        PowerResult prod_abs =
            spectral_radius_nonneg(abs_matrix(sync_iteration_matrix(bundle)));
        CHECK(prod_abs.converged);
        CHECK(std::abs(prod_abs.rho - lemma.rho) <= 1e-10);

        // the aggregation operator the solvers run with still satisfies the
        // majorization, negative I-NA entries notwithstanding
        OperatorBundle agg = build_operator_bundle(inst.A, inst.dec, &inst.coarse);
        CheckResult agg_shared = check_shared_condition(agg);
        CheckResult agg_lemma = check_lemma_condition(agg);
        CHECK(agg_shared.rho <= agg_lemma.rho + 1e-10);
    }
}

TEST_CASE("aggregation coarse correction improves the synchronous factor") {
    // the block-aggregated coarse space is the one the solvers use; on the
    // boxy instances its correction strictly shrinks the iteration radius
    struct Shape {
        std::array<std::size_t, 3> grid;
        std::array<std::size_t, 3> procs;
        std::size_t overlap;
    };
    const Shape shapes[] = {
        {{100, 1, 1}, {2, 1, 1}, 0},
        {{8, 8, 4}, {2, 2, 1}, 1},
        {{6, 6, 6}, {2, 2, 2}, 1},
        {{8, 8, 8}, {2, 2, 2}, 1},
    };
    for (const Shape& sh : shapes) {
        CAPTURE(sh.grid[0]);
        Instance inst = poisson_instance(sh.grid, sh.procs, sh.overlap);
        OperatorBundle bundle = build_operator_bundle(inst.A, inst.dec, &inst.coarse);
        PowerResult sync2 = spectral_radius_signed(sync_iteration_matrix(bundle));
        PowerResult sync1 = spectral_radius_signed(bundle.ima);
        CHECK(sync2.converged);
        CHECK(sync1.converged);
        CHECK(sync2.rho < sync1.rho);
    }
}

TEST_CASE("the selection restriction shares a row with each local restriction") {
    Instance inst = poisson_instance({8, 8, 4}, {2, 2, 1}, 1);
    CoarseSpace sel = selection_coarse(inst.A, inst.dec);
    REQUIRE(sel.R_tilde.nrows == inst.dec.p);
    for (std::size_t s = 0; s < inst.dec.p; ++s) {
        // exactly one unit entry per row, at an index the subdomain owns
        REQUIRE(sel.R_tilde.row_ptr[s + 1] - sel.R_tilde.row_ptr[s] == 1);
        const auto e = sel.R_tilde.row_ptr[s];
        CHECK(sel.R_tilde.val[e] == 1.0);
        CHECK(inst.dec.owner[static_cast<std::size_t>(sel.R_tilde.col[e])] ==
              static_cast<int>(s));
    }
    // A~ is the principal submatrix on the selected points
    for (std::size_t s = 0; s < inst.dec.p; ++s)
        for (std::size_t t = 0; t < inst.dec.p; ++t) {
            const int js = sel.R_tilde.col[sel.R_tilde.row_ptr[s]];
            const int jt = sel.R_tilde.col[sel.R_tilde.row_ptr[t]];
            CHECK(sel.A_tilde.at(s, static_cast<int>(t)) ==
                  inst.A.at(static_cast<std::size_t>(js), jt));
        }
}

TEST_CASE("damping admissibility is downward-closed on the grid") {
    Instance inst = poisson_instance({6, 6, 6}, {2, 2, 2}, 1);
    OperatorBundle bundle = build_operator_bundle(inst.A, inst.dec, &inst.coarse);

    auto theta_star = min_damping(bundle);
    REQUIRE(theta_star.has_value());

    // recompute the bound over the whole grid and compare with the scan
    const std::size_t n = bundle.A.rows();
    DenseMatrix ima_abs = abs_matrix(bundle.ima);
    DenseMatrix na_abs = abs_matrix(subtract(DenseMatrix::identity(n), bundle.ina));
    double prev_rho = -1.0;
    for (double theta : default_theta_grid()) {
        DenseMatrix B = ima_abs;
        gemm_acc(theta, ima_abs, na_abs, B);
        const double rho = spectral_radius_nonneg(B).rho;
        const bool admissible = rho < 1.0 - 1e-8;
        CHECK(admissible == (theta <= *theta_star));
        // the bound shrinks as theta does (grid is descending)
        if (prev_rho >= 0.0) CHECK(rho <= prev_rho + 1e-10);
        prev_rho = rho;
    }
}

TEST_CASE("signed power iteration agrees with the nonnegative one") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DenseMatrix B(20, 20);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 20; ++j) B(i, j) = u(rng);
    PowerResult a = spectral_radius_nonneg(B);
    PowerResult b = spectral_radius_signed(B);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.rho == doctest::Approx(b.rho).epsilon(1e-8));
}

TEST_CASE("certificate JSON reports the conditions and the M-matrix status") {
    Instance inst = poisson_instance({6, 6, 2}, {2, 2, 1}, 1);
    OperatorBundle bundle = build_operator_bundle(inst.A, inst.dec, &inst.coarse);
    const std::string text = certificate_json("poisson-6x6x2-p4", inst.A, bundle);
    nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j["instance"] == "poisson-6x6x2-p4");
    CHECK(j["m_matrix"] == "yes");
    CHECK(j["one_level"]["rho"].get<double>() < 1.0);
    CHECK(j["one_level"]["convergent"].get<bool>());
    CHECK(j["shared_condition"]["rho"].get<double>() <=
          j["lemma_condition"]["rho"].get<double>() + 1e-10);
    CHECK(j["sync_two_level_rho"].get<double>() < j["sync_one_level_rho"].get<double>());
    CHECK(j["min_damping_theta"].is_number());
    CHECK(j["min_entry_i_minus_ma"].get<double>() >= -1e-12);
}

TEST_CASE("a flipped off-diagonal sign is reported, conditions still evaluated") {
    auto [A, b] = assemble_poisson({{16, 1, 1}, 4590.0});
    (void)b;
    // flip the first off-diagonal entry positive: no longer an M-matrix
    for (std::size_t k = A.row_ptr[0]; k < A.row_ptr[1]; ++k)
        if (A.col[k] != 0) {
            A.val[k] = -A.val[k];
            break;
        }
    CHECK(is_m_matrix(A) == MMatrixResult::no);

    Decomposition dec = partition_box({16, 1, 1}, {2, 1, 1}, 1);
    CoarseSpace coarse = build_coarse(dec, A);
    OperatorBundle bundle = build_operator_bundle(A, dec, &coarse);
    const std::string text = certificate_json("flipped-sign", A, bundle);
    nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j["m_matrix"] == "no");
    CHECK(std::isfinite(j["one_level"]["rho"].get<double>()));
    CHECK(std::isfinite(j["lemma_condition"]["rho"].get<double>()));
}

TEST_CASE("the dense limit is enforced") {
    Instance inst = poisson_instance({6, 6, 2}, {2, 2, 1}, 1);
    CHECK_THROWS_AS(build_operator_bundle(inst.A, inst.dec, &inst.coarse, 10),
                    std::invalid_argument);
}
