#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aschwarz/decomposition.hpp"
#include "aschwarz/poisson.hpp"
#include "aschwarz/sync_solver.hpp"

using namespace aschwarz;

namespace {

// Dense M = sum_s R^(s)T W^(s) (A^(s))^-1 R^(s), built independently of the
// solver internals.
DenseMatrix dense_M(const SparseMatrix& A, const Decomposition& d) {
    DenseMatrix M(d.global_n, d.global_n, 0.0);
    for (std::size_t s = 0; s < d.p; ++s) {
        DenseMatrix Binv = dense_inverse(to_dense(restrict_block(A, d, s)));
        const auto& omega = d.subdomain_indices[s];
        for (std::size_t i = 0; i < omega.size(); ++i)
            for (std::size_t j = 0; j < omega.size(); ++j)
                M(static_cast<std::size_t>(omega[i]), static_cast<std::size_t>(omega[j])) +=
                    d.weights[s][i] * Binv(i, j);
    }
    return M;
}

// Dense N = R~^T A~^-1 R~ via the ownership map.
DenseMatrix dense_N(const CoarseSpace& c, const Decomposition& d) {
    DenseMatrix Ainv = dense_inverse(to_dense(c.A_tilde));
    DenseMatrix N(d.global_n, d.global_n);
    for (std::size_t g = 0; g < d.global_n; ++g)
        for (std::size_t h = 0; h < d.global_n; ++h)
            N(g, h) = Ainv(static_cast<std::size_t>(d.owner[g]),
                           static_cast<std::size_t>(d.owner[h]));
    return N;
}

Vector dense_residual(const SparseMatrix& A, const Vector& b, const Vector& x) {
    Vector Ax = spmv(A, x);
    Vector r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - Ax[i];
    return r;
}

double norm2(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

SolverConfig base_config(Scheme scheme) {
    SolverConfig cfg;
    cfg.scheme = scheme;
    cfg.epsilon = 1e-6;
    cfg.k_max = 5000;
    return cfg;
}

}  // namespace

TEST_CASE("p=1 with local LU converges in one iteration") {
    auto [A, b] = assemble_poisson({{4, 3, 2}, 4590.0});
    auto d = partition_box({4, 3, 2}, {1, 1, 1}, 0);
    auto res = solve_one_level(A, b, d, base_config(Scheme::one_level));
    CHECK(res.report.converged);
    CHECK(res.report.iterations == 1.0);
    CHECK(res.report.final_residual <= 1e-6);
    Vector exact = exact_solve(A, b);
    for (std::size_t i = 0; i < exact.size(); ++i)
        CHECK(res.x[i] == doctest::Approx(exact[i]).epsilon(1e-10));
}

TEST_CASE("zero right-hand side -> zero iterations") {
    auto [A, b] = assemble_poisson({{3, 3, 3}, 1.0});
    Vector zero(b.size(), 0.0);
    auto d = partition_box({3, 3, 3}, {3, 1, 1}, 1);
    auto res = solve_one_level(A, zero, d, base_config(Scheme::one_level));
    CHECK(res.report.converged);
    CHECK(res.report.iterations == 0.0);
    CHECK(res.report.final_residual == 0.0);
}

TEST_CASE("local_update_f is a fixed point at the exact solution") {
    auto [A, b] = assemble_poisson({{6, 5, 1}, 4590.0});
    auto d = partition_box({6, 5, 1}, {2, 2, 1}, 1);
    Vector exact = exact_solve(A, b);

    SolverConfig cfg = base_config(Scheme::one_level);
    SchwarzContext ctx = build_context(A, b, d, nullptr, cfg);

    std::vector<Vector> x_all(d.p);
    for (std::size_t s = 0; s < d.p; ++s) {
        const auto& omega = d.subdomain_indices[s];
        x_all[s].resize(omega.size());
        for (std::size_t l = 0; l < omega.size(); ++l)
            x_all[s][l] = exact[static_cast<std::size_t>(omega[l])];
    }
    const double scale = norm2(exact);
    for (std::size_t s = 0; s < d.p; ++s) {
        Vector out = local_update_f(ctx, s, x_all);
        for (std::size_t l = 0; l < out.size(); ++l)
            CHECK(std::fabs(out[l] - x_all[s][l]) <= 1e-12 * scale);
    }
}

TEST_CASE("local_update_f matches a hand-rolled block-Jacobi step") {
    auto [A, b] = assemble_poisson({{4, 1, 1}, 4590.0});
    auto d = partition_box({4, 1, 1}, {2, 1, 1}, 0);
    SolverConfig cfg = base_config(Scheme::one_level);
    SchwarzContext ctx = build_context(A, b, d, nullptr, cfg);

    std::vector<Vector> x_all{{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t s = 0; s < 2; ++s) {
        Vector out = local_update_f(ctx, s, x_all);
        // zero state: update is (A^(s))^-1 b^(s)
        DenseMatrix Binv = dense_inverse(to_dense(restrict_block(A, d, s)));
        const auto& omega = d.subdomain_indices[s];
        for (std::size_t i = 0; i < omega.size(); ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < omega.size(); ++j)
                v += Binv(i, j) * b[static_cast<std::size_t>(omega[j])];
            CHECK(out[i] == doctest::Approx(v).epsilon(1e-12));
        }
    }
}

TEST_CASE("one-level iterate count matches the dense power-sequence oracle") {
    auto [A, b] = assemble_poisson({{8, 1, 1}, 4590.0});
    auto d = partition_box({8, 1, 1}, {2, 1, 1}, 1);
    SolverConfig cfg = base_config(Scheme::one_level);
    cfg.epsilon = 1e-8;

    DenseMatrix M = dense_M(A, d);
    Vector x(b.size(), 0.0);
    std::size_t k_oracle = 0;
    while (norm2(dense_residual(A, b, x)) > cfg.epsilon && k_oracle < 10000) {
        Vector r = dense_residual(A, b, x);
        Vector Mr(x.size(), 0.0);
        gemv(M, r.data(), Mr.data());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += Mr[i];
        ++k_oracle;
    }

    auto res = solve_one_level(A, b, d, cfg);
    CHECK(res.report.converged);
    CHECK(res.report.iterations == static_cast<double>(k_oracle));
}

TEST_CASE("two-level mult iterates match the dense (I-MA)(I-NA) recursion") {
    auto [A, b] = assemble_poisson({{10, 4, 1}, 1.0});  // n = 40 <= 200
    auto d = partition_box({10, 4, 1}, {2, 2, 1}, 1);
    auto coarse = build_coarse(d, A);

    DenseMatrix M = dense_M(A, d);
    DenseMatrix N = dense_N(coarse, d);

    SolverConfig cfg = base_config(Scheme::two_level_mult);
    cfg.theta = 1.0;
    cfg.epsilon = 1e-300;  // never stop early

    Vector xhat(b.size(), 0.0);
    for (std::size_t K = 1; K <= 8; ++K) {
        // one more recursion step: coarse then fine
        Vector r = dense_residual(A, b, xhat);
        Vector Nr(xhat.size(), 0.0);
        gemv(N, r.data(), Nr.data());
        for (std::size_t i = 0; i < xhat.size(); ++i) xhat[i] += Nr[i];
        r = dense_residual(A, b, xhat);
        Vector Mr(xhat.size(), 0.0);
        gemv(M, r.data(), Mr.data());
        for (std::size_t i = 0; i < xhat.size(); ++i) xhat[i] += Mr[i];

        SolverConfig ck = cfg;
        ck.k_max = K;
        auto res = solve_two_level_sync(A, b, d, coarse, ck);
        double scale = std::max(1.0, norm2(xhat));
        for (std::size_t i = 0; i < xhat.size(); ++i)
            CHECK(std::fabs(res.x[i] - xhat[i]) <= 1e-12 * scale);
    }
}

TEST_CASE("theta = 0 reproduces the one-level sequence exactly") {
    auto [A, b] = assemble_poisson({{6, 6, 2}, 4590.0});
    auto d = partition_box({6, 6, 2}, {2, 2, 1}, 1);
    auto coarse = build_coarse(d, A);

    auto r1 = solve_one_level(A, b, d, base_config(Scheme::one_level));

    SolverConfig cfg = base_config(Scheme::two_level_mult);
    cfg.theta = 0.0;
    auto r2 = solve_two_level_sync(A, b, d, coarse, cfg);

    CHECK(r1.report.iterations == r2.report.iterations);
    REQUIRE(r1.x.size() == r2.x.size());
    for (std::size_t i = 0; i < r1.x.size(); ++i) CHECK(r1.x[i] == r2.x[i]);  // bitwise

    SolverConfig cfa = base_config(Scheme::two_level_add);
    cfa.theta = 0.0;
    auto r3 = solve_two_level_sync(A, b, d, coarse, cfa);
    CHECK(r3.report.iterations == r1.report.iterations);
    for (std::size_t i = 0; i < r1.x.size(); ++i) CHECK(r3.x[i] == r1.x[i]);
}

TEST_CASE("replicated and centralized layouts give identical synchronous runs") {
    auto [A, b] = assemble_poisson({{8, 4, 2}, 4590.0});
    auto d = partition_box({8, 4, 2}, {2, 2, 1}, 1);
    auto coarse = build_coarse(d, A);

    SolverConfig cfg = base_config(Scheme::two_level_mult);
    cfg.coarse_layout = CoarseLayout::replicated;
    auto r1 = solve_two_level_sync(A, b, d, coarse, cfg);
    cfg.coarse_layout = CoarseLayout::centralized;
    auto r2 = solve_two_level_sync(A, b, d, coarse, cfg);

    CHECK(r1.report.iterations == r2.report.iterations);
    for (std::size_t i = 0; i < r1.x.size(); ++i) CHECK(r1.x[i] == r2.x[i]);
}

TEST_CASE("two-level mult converges at least as fast as one-level") {
    for (auto dims : {std::array<std::size_t, 3>{8, 8, 8}, std::array<std::size_t, 3>{12, 6, 4},
                      std::array<std::size_t, 3>{16, 4, 1}}) {
        auto [A, b] = assemble_poisson({dims, 4590.0});
        auto d = partition_box(dims, {2, 2, 1}, 1);
        auto coarse = build_coarse(d, A);

        auto r1 = solve_one_level(A, b, d, base_config(Scheme::one_level));
        auto r2 = solve_two_level_sync(A, b, d, coarse, base_config(Scheme::two_level_mult));
        REQUIRE(r1.report.converged);
        REQUIRE(r2.report.converged);
        CHECK(r2.report.iterations <= r1.report.iterations);
        CHECK(r2.report.coarse_solves == static_cast<std::size_t>(r2.report.iterations));
        CHECK(r2.report.identical_corrections_avg == doctest::Approx(1.0));
    }
}

TEST_CASE("additive variant converges and reports sensibly") {
    auto [A, b] = assemble_poisson({{8, 8, 4}, 4590.0});
    auto d = partition_box({8, 8, 4}, {2, 2, 1}, 1);
    auto coarse = build_coarse(d, A);
    auto r = solve_two_level_sync(A, b, d, coarse, base_config(Scheme::two_level_add));
    CHECK(r.report.converged);
    CHECK(r.report.final_residual <= 1e-5);
    CHECK(r.report.coarse_solves > 0);
}

TEST_CASE("residual trend is monotone after the first iterations") {
    auto [A, b] = assemble_poisson({{10, 10, 5}, 4590.0});
    auto d = partition_box({10, 10, 5}, {2, 2, 1}, 1);
    auto r = solve_one_level(A, b, d, base_config(Scheme::one_level));
    REQUIRE(r.report.converged);
    const auto& h = r.report.residual_history;
    for (std::size_t k = 6; k < h.size(); ++k) CHECK(h[k] <= h[k - 1] * (1.0 + 1e-12));
}

TEST_CASE("divergence guard trips on absurd damping") {
    auto [A, b] = assemble_poisson({{6, 6, 1}, 4590.0});
    auto d = partition_box({6, 6, 1}, {2, 2, 1}, 1);
    auto coarse = build_coarse(d, A);
    SolverConfig cfg = base_config(Scheme::two_level_mult);
    cfg.theta = 50.0;
    cfg.k_max = 100000;
    auto r = solve_two_level_sync(A, b, d, coarse, cfg);
    CHECK(r.report.diverged);
    CHECK_FALSE(r.report.converged);
    CHECK(r.report.iterations < 100000.0);
}

TEST_CASE("fixed point: every scheme leaves the exact solution unchanged") {
    auto [A, b] = assemble_poisson({{5, 5, 2}, 4590.0});
    auto d = partition_box({5, 5, 2}, {2, 1, 1}, 1);
    auto coarse = build_coarse(d, A);
    Vector exact = exact_solve(A, b);
    const double scale = norm2(exact);

    // Drive each scheme for exactly one iteration from the exact solution by
    // shifting the problem: solve A y = b with initial guess encoded via
    // b' = b - A x_exact = 0 -> updates must stay at zero.
    Vector zero_b(b.size(), 0.0);
    for (auto scheme : {Scheme::one_level, Scheme::two_level_mult, Scheme::two_level_add}) {
        SolverConfig cfg = base_config(scheme);
        cfg.k_max = 3;
        cfg.epsilon = 1e-300;
        SolveResult res;
        if (scheme == Scheme::one_level)
            res = solve_one_level(A, zero_b, d, cfg);
        else
            res = solve_two_level_sync(A, zero_b, d, coarse, cfg);
        for (double v : res.x) CHECK(std::fabs(v) <= 1e-12 * std::max(1.0, scale));
    }
}
