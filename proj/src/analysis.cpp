#include "aschwarz/analysis.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "aschwarz/kernels.hpp"

namespace aschwarz {

OperatorBundle build_operator_bundle(const SparseMatrix& A, const Decomposition& dec,
                                     const CoarseSpace* coarse, std::size_t dense_limit) {
    if (A.nrows != dec.global_n || A.ncols != dec.global_n)
        throw std::invalid_argument("build_operator_bundle: matrix size mismatch");
    const std::size_t n = dec.global_n;
    if (n > dense_limit)
        throw std::invalid_argument("build_operator_bundle: instance exceeds the dense limit");
    const std::size_t p = dec.p;

    OperatorBundle bundle;
    bundle.A = to_dense(A);

    // M = sum_s R^T W A_s^-1 R, assembled column-by-column from local solves
    bundle.M = DenseMatrix(n, n);
    for (std::size_t s = 0; s < p; ++s) {
        const auto& glob = dec.subdomain_indices[s];
        const auto& w = dec.weights[s];
        const std::size_t m = glob.size();
        DenseMatrix As(m, m);
        {
            SparseMatrix As_sp = restrict_block(A, dec, s);
            for (std::size_t li = 0; li < m; ++li)
                for (std::size_t k = As_sp.row_ptr[li]; k < As_sp.row_ptr[li + 1]; ++k)
                    As(li, static_cast<std::size_t>(As_sp.col[k])) += As_sp.val[k];
        }
        LuFactors lu = lu_factor(As);
        if (lu.singular)
            throw std::runtime_error("build_operator_bundle: singular local block");
        std::vector<double> col(m);
        for (std::size_t c = 0; c < m; ++c) {
            std::fill(col.begin(), col.end(), 0.0);
            col[c] = 1.0;
            lu_solve_inplace(lu, col.data());
            const auto gc = static_cast<std::size_t>(glob[c]);
            for (std::size_t r = 0; r < m; ++r)
                bundle.M(static_cast<std::size_t>(glob[r]), gc) += w[r] * col[r];
        }
    }

    // I - MA through A's sparsity: (MA)(., j) = sum_k M(., k) A(k, j)
    bundle.ima = DenseMatrix::identity(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t e = A.row_ptr[k]; e < A.row_ptr[k + 1]; ++e) {
            const auto j = static_cast<std::size_t>(A.col[e]);
            const double v = A.val[e];
            for (std::size_t i = 0; i < n; ++i) bundle.ima(i, j) -= bundle.M(i, k) * v;
        }

    // N = R~^T A~^-1 R~ and NA = R~^T (A~^-1 (R~ A)); only coarse-sized
    // intermediates appear before the final prolongation
    bundle.N = DenseMatrix(n, n);
    bundle.ina = DenseMatrix::identity(n);
    if (coarse != nullptr) {
        const SparseMatrix& Rt = coarse->R_tilde;  // pc x n
        if (Rt.ncols != n)
            throw std::invalid_argument("build_operator_bundle: coarse restriction mismatch");
        const std::size_t pc = Rt.nrows;
        DenseMatrix G = dense_inverse(to_dense(coarse->A_tilde));
        DenseMatrix Rd = to_dense(Rt);
        DenseMatrix RdT(n, pc);
        for (std::size_t s = 0; s < pc; ++s)
            for (std::size_t j = 0; j < n; ++j) RdT(j, s) = Rd(s, j);
        bundle.N = matmul(RdT, matmul(G, Rd));

        DenseMatrix RA(pc, n);  // R~ A through both sparsity patterns
        for (std::size_t s = 0; s < pc; ++s)
            for (std::size_t e = Rt.row_ptr[s]; e < Rt.row_ptr[s + 1]; ++e) {
                const auto k = static_cast<std::size_t>(Rt.col[e]);
                const double w = Rt.val[e];
                for (std::size_t f = A.row_ptr[k]; f < A.row_ptr[k + 1]; ++f)
                    RA(s, static_cast<std::size_t>(A.col[f])) += w * A.val[f];
            }
        DenseMatrix NAm = matmul(RdT, matmul(G, RA));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) bundle.ina(i, j) -= NAm(i, j);
    }

    // terms: (I-MA) D_s (I-NA) with D_s the diagonal holding subdomain s's
    // weights; only the omega_s columns of the left factor survive D_s
    bundle.terms.reserve(p);
    for (std::size_t s = 0; s < p; ++s) {
        const auto& glob = dec.subdomain_indices[s];
        const auto& w = dec.weights[s];
        const std::size_t m = glob.size();
        DenseMatrix L(n, m);
        DenseMatrix R(m, n);
        for (std::size_t l = 0; l < m; ++l) {
            const auto g = static_cast<std::size_t>(glob[l]);
            for (std::size_t i = 0; i < n; ++i) L(i, l) = bundle.ima(i, g) * w[l];
            for (std::size_t j = 0; j < n; ++j) R(l, j) = bundle.ina(g, j);
        }
        bundle.terms.push_back(matmul(L, R));
    }
    return bundle;
}

CoarseSpace selection_coarse(const SparseMatrix& A, const Decomposition& dec) {
    const std::size_t p = dec.p;
    std::vector<std::vector<int>> owned(p);
    for (std::size_t g = 0; g < dec.global_n; ++g)
        owned[static_cast<std::size_t>(dec.owner[g])].push_back(static_cast<int>(g));
    std::vector<int> points(p);
    for (std::size_t s = 0; s < p; ++s) {
        if (owned[s].empty())
            throw std::invalid_argument("selection_coarse: subdomain owns no unknown");
        points[s] = owned[s][owned[s].size() / 2];  // owned lists are ascending
    }

    CoarseSpace c;
    SparseBuilder rb(p, dec.global_n);
    for (std::size_t s = 0; s < p; ++s) rb.add(s, points[s], 1.0);
    c.R_tilde = rb.finalize();

    SparseBuilder ab(p, p);
    for (std::size_t s = 0; s < p; ++s)
        for (std::size_t t = 0; t < p; ++t) {
            const double v = A.at(static_cast<std::size_t>(points[s]), points[t]);
            if (v != 0.0 || s == t) ab.add(s, static_cast<int>(t), v);
        }
    c.A_tilde = ab.finalize();
    return c;
}

CheckResult check_one_level(const OperatorBundle& bundle, double tol) {
    PowerResult pr = spectral_radius_nonneg(abs_matrix(bundle.ima));
    return {pr.rho, pr.rho < 1.0 - tol, pr.converged};
}

CheckResult check_shared_condition(const OperatorBundle& bundle, double tol) {
    const std::size_t n = bundle.A.rows();
    DenseMatrix S(n, n);
    for (const DenseMatrix& T : bundle.terms) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) S(i, j) += std::abs(T(i, j));
    }
    PowerResult pr = spectral_radius_nonneg(S);
    return {pr.rho, pr.rho < 1.0 - tol, pr.converged};
}

CheckResult check_lemma_condition(const OperatorBundle& bundle, double tol) {
    PowerResult pr =
        spectral_radius_nonneg(matmul(abs_matrix(bundle.ima), abs_matrix(bundle.ina)));
    return {pr.rho, pr.rho < 1.0 - tol, pr.converged};
}

DenseMatrix sync_iteration_matrix(const OperatorBundle& bundle) {
    return matmul(bundle.ima, bundle.ina);
}

const std::vector<double>& default_theta_grid() {
    static const std::vector<double> grid = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5,
                                             0.4, 0.3, 0.2, 0.1, 0.05, 0.01};
    return grid;
}

std::optional<double> min_damping(const OperatorBundle& bundle,
                                  const std::vector<double>& grid, double tol) {
    const std::size_t n = bundle.A.rows();
    DenseMatrix ima_abs = abs_matrix(bundle.ima);
    if (spectral_radius_nonneg(ima_abs).rho >= 1.0 - tol) return std::nullopt;
    DenseMatrix na_abs =
        abs_matrix(subtract(DenseMatrix::identity(n), bundle.ina));  // |NA|
    for (double theta : grid) {
        // |I-MA| (I + theta |NA|)
        DenseMatrix B = ima_abs;
        gemm_acc(theta, ima_abs, na_abs, B);
        if (spectral_radius_nonneg(B).rho < 1.0 - tol) return theta;
    }
    return std::nullopt;
}

PowerResult spectral_radius_signed(const DenseMatrix& B, double tol, std::size_t max_iter) {
    if (B.rows() != B.cols())
        throw std::invalid_argument("spectral_radius_signed: matrix not square");
    const std::size_t n = B.rows();
    PowerResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    Vector v(n), w(n, 0.0);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (double& x : v) x = u(rng);
    const auto& k = kern::ops();
    k.scal(n, 1.0 / std::sqrt(k.nrm2sq(n, v.data())), v.data());
    double prev = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        gemv(B, v.data(), w.data());
        const double est = k.dot(n, v.data(), w.data());  // Rayleigh quotient, |v| = 1
        res.rho = std::abs(est);
        res.iterations = it;
        if (it > 1 && std::abs(est - prev) <= tol * std::max(1.0, std::abs(est))) {
            res.converged = true;
            return res;
        }
        prev = est;
        const double wn = std::sqrt(k.nrm2sq(n, w.data()));
        if (wn == 0.0) {
            res.rho = 0.0;
            res.converged = true;
            return res;
        }
        k.scal(n, 1.0 / wn, w.data());
        std::swap(v, w);
    }
    return res;
}

std::string certificate_json(const std::string& instance, const SparseMatrix& A,
                             const OperatorBundle& bundle, double tol) {
    nlohmann::ordered_json j;
    j["instance"] = instance;
    j["n"] = bundle.A.rows();
    j["subdomains"] = bundle.terms.size();

    const MMatrixResult mm = is_m_matrix(A);
    j["m_matrix"] =
        mm == MMatrixResult::yes ? "yes" : (mm == MMatrixResult::no ? "no" : "unknown");

    const std::size_t n = bundle.A.rows();
    double min_ima = 0.0, min_ina = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t jj = 0; jj < n; ++jj) {
            min_ima = std::min(min_ima, bundle.ima(i, jj));
            min_ina = std::min(min_ina, bundle.ina(i, jj));
        }
    j["min_entry_i_minus_ma"] = min_ima;
    j["min_entry_i_minus_na"] = min_ina;

    auto put = [&](const char* key, const CheckResult& r) {
        j[key] = {{"rho", r.rho},
                  {"convergent", r.convergent},
                  {"power_converged", r.power_converged}};
    };
    put("one_level", check_one_level(bundle, tol));
    put("shared_condition", check_shared_condition(bundle, tol));
    put("lemma_condition", check_lemma_condition(bundle, tol));

    PowerResult sync2 = spectral_radius_signed(sync_iteration_matrix(bundle));
    PowerResult sync1 = spectral_radius_signed(bundle.ima);
    j["sync_two_level_rho"] = sync2.rho;
    j["sync_one_level_rho"] = sync1.rho;

    std::optional<double> theta = min_damping(bundle, default_theta_grid(), tol);
    if (theta.has_value())
        j["min_damping_theta"] = *theta;
    else
        j["min_damping_theta"] = nullptr;
    return j.dump(2) + "\n";
}

}  // namespace aschwarz
