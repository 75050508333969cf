#pragma once

// Solver configuration and run reporting shared by the synchronous solvers,
// the simulator, and the threaded engine.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace aschwarz {

enum class Scheme { one_level, two_level_mult, two_level_add };
enum class CoarseLayout { replicated, centralized };
enum class IsyncVariant { xtau, tau };

struct InnerSolver {
    enum class Kind { lu, cg };
    Kind kind = Kind::lu;
    double cg_tol = 1e-10;
    std::size_t cg_max_iter = 200000;
};

inline constexpr std::size_t zeta_infinite = std::numeric_limits<std::size_t>::max();

struct SolverConfig {
    Scheme scheme = Scheme::one_level;
    CoarseLayout coarse_layout = CoarseLayout::replicated;
    double theta = 1.0;            // damping for the coarse correction
    std::size_t zeta = zeta_infinite;  // max identical corrections per install
    double epsilon = 1e-6;         // absolute stopping threshold on |tau|
    std::size_t k_max = 100000;
    InnerSolver local_solver;
    InnerSolver coarse_solver;
    IsyncVariant isync = IsyncVariant::xtau;  // async engines only

    // theta = 0 is accepted here (it degenerates two-level to one-level, a
    // documented comparison case); the CLI additionally requires theta > 0.
    void validate() const;
};

struct RunReport {
    double iterations = 0.0;  // sync: count; async: per-process average
    std::size_t coarse_solves = 0;
    double identical_corrections_avg = 0.0;  // k/c
    std::vector<double> residual_history;    // weighted-partition estimates
    double final_residual = 0.0;             // |b - Ax|_2, recomputed from final x
    bool converged = false;
    bool diverged = false;  // 1e6x growth guard tripped
    double sim_time = 0.0;  // simulator ticks or wall-clock seconds
    std::string engine;     // "sync" | "sim" | "threads"
};

}  // namespace aschwarz
