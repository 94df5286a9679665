#pragma once

#include <Eigen/SparseCore>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "equiclass/conic.hpp"
#include "equiclass/detail/ipm.hpp"
#include "equiclass/errors.hpp"

namespace equiclass {

/// Counters shared across a run; retries are deterministic for fixed inputs.
struct SolveStats {
    std::atomic<long long> solves{0};
    std::atomic<long long> retries{0};
};

namespace detail {

struct StandardForm {
    Eigen::SparseMatrix<double> A, G;
    Eigen::VectorXd b, h;
    int lp_dim = 0;
    std::vector<int> soc_dims;
};

inline StandardForm to_standard_form(const ConicProgram& prog) {
    const int n = prog.num_variables();
    StandardForm sf;
    sf.A = prog.eq_matrix;
    sf.b = prog.eq_rhs;

    int bound_rows = 0;
    for (int j = 0; j < n; ++j) {
        if (prog.lower_bounds[static_cast<std::size_t>(j)]) ++bound_rows;
        if (prog.upper_bounds[static_cast<std::size_t>(j)]) ++bound_rows;
    }
    const int le_rows = static_cast<int>(prog.le_matrix.rows());
    int cone_rows = 0;
    for (const auto& cone : prog.cones) cone_rows += 1 + static_cast<int>(cone.F.rows());

    sf.lp_dim = le_rows + bound_rows;
    const int m = sf.lp_dim + cone_rows;
    sf.h.resize(m);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(prog.le_matrix.nonZeros()) +
                     static_cast<std::size_t>(bound_rows) + static_cast<std::size_t>(cone_rows) * 4);
    for (int j = 0; j < prog.le_matrix.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(prog.le_matrix, j); it; ++it)
            triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    sf.h.head(le_rows) = prog.le_rhs;

    int row = le_rows;
    for (int j = 0; j < n; ++j) {
        if (const auto& lb = prog.lower_bounds[static_cast<std::size_t>(j)]) {
            triplets.emplace_back(row, j, -1.0);
            sf.h[row++] = -*lb;
        }
        if (const auto& ub = prog.upper_bounds[static_cast<std::size_t>(j)]) {
            triplets.emplace_back(row, j, 1.0);
            sf.h[row++] = *ub;
        }
    }
    for (const auto& cone : prog.cones) {
        // s = (a'x + b, F x + g) in Q  <=>  G rows (-a'; -F), h = (b; g).
        for (int j = 0; j < cone.a.size(); ++j)
            if (cone.a[j] != 0.0) triplets.emplace_back(row, j, -cone.a[j]);
        sf.h[row++] = cone.b;
        for (int i = 0; i < cone.F.rows(); ++i) {
            for (int j = 0; j < cone.F.cols(); ++j)
                if (cone.F(i, j) != 0.0) triplets.emplace_back(row, j, -cone.F(i, j));
            sf.h[row++] = cone.g.size() > 0 ? cone.g[i] : 0.0;
        }
        sf.soc_dims.push_back(1 + static_cast<int>(cone.F.rows()));
    }
    sf.G.resize(m, n);
    sf.G.setFromTriplets(triplets.begin(), triplets.end());
    return sf;
}

inline int certified_digits_from(const ConeInteriorPointSolver::Info& info) {
    double gap_metric = info.gap;
    if (info.relgap) gap_metric = std::min(gap_metric, *info.relgap);
    const double err = std::max({info.pres, info.dres, gap_metric, 1e-16});
    const int digits = static_cast<int>(std::floor(-std::log10(err)));
    return std::clamp(digits, 0, 16);
}

}  // namespace detail

/**
 * Single conic solve at one tolerance profile. On optimal exits the outcome
 * carries the primal point, both objective values and the achieved residuals;
 * infeasible/unbounded statuses come from the homogeneous embedding's
 * certificates.
 */
inline SolveOutcome solve_conic(const ConicProgram& prog, const ToleranceProfile& profile) {
    detail::StandardForm sf = detail::to_standard_form(prog);
    detail::ConeInteriorPointSolver::Settings settings;
    settings.feastol = profile.feastol;
    settings.abstol = profile.abstol;
    settings.reltol = profile.reltol;
    settings.feastol_reduced = profile.feastol_reduced;
    settings.abstol_reduced = profile.abstol_reduced;
    settings.reltol_reduced = profile.reltol_reduced;
    settings.max_iters = profile.max_iters;

    detail::ConeInteriorPointSolver solver(std::move(sf.A), std::move(sf.G), prog.objective, sf.b,
                                           sf.h, sf.lp_dim, sf.soc_dims, settings);
    const auto exit = solver.solve();

    SolveOutcome outcome;
    outcome.primal_residual = solver.info().pres;
    outcome.dual_residual = solver.info().dres;
    outcome.gap = solver.info().gap;
    outcome.iterations = solver.info().iterations;

    using Exit = detail::ConeInteriorPointSolver::Exit;
    switch (exit) {
        case Exit::optimal:
        case Exit::close_to_optimal:
            outcome.status = SolveStatus::optimal;
            outcome.solution = solver.primal();
            outcome.value = prog.objective.dot(*outcome.solution);
            outcome.dual_value = solver.info().dcost;
            outcome.certified_digits = detail::certified_digits_from(solver.info());
            break;
        case Exit::primal_infeasible:
        case Exit::close_to_primal_infeasible:
            outcome.status = SolveStatus::infeasible;
            break;
        case Exit::dual_infeasible:
        case Exit::close_to_dual_infeasible:
            outcome.status = SolveStatus::unbounded;
            break;
        default:
            outcome.status = SolveStatus::numeric_failure;
            break;
    }
    return outcome;
}

/**
 * Tolerance-escalation ladder: start strict and relax stepwise on numeric
 * failure, accepting a solve only when the objective is certified to at
 * least six decimal places.
 */
inline SolveOutcome solve_conic_escalating(const ConicProgram& prog, SolveStats* stats = nullptr) {
    const auto& ladder = escalation_ladder();
    SolveOutcome outcome;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        outcome = solve_conic(prog, ladder[i]);
        if (stats) stats->solves.fetch_add(1, std::memory_order_relaxed);
        if (outcome.status == SolveStatus::optimal && outcome.certified_digits >= 6) return outcome;
        if (outcome.status == SolveStatus::infeasible || outcome.status == SolveStatus::unbounded)
            return outcome;
        if (stats && i + 1 < ladder.size()) stats->retries.fetch_add(1, std::memory_order_relaxed);
    }
    outcome.status = SolveStatus::numeric_failure;
    return outcome;
}

/// A pure binary program: min objective'x over x in {0,1}^n with linear constraints.
struct BinaryProgram {
    Eigen::VectorXd objective;
    Eigen::SparseMatrix<double> eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::SparseMatrix<double> le_matrix;
    Eigen::VectorXd le_rhs;

    int num_variables() const { return static_cast<int>(objective.size()); }
};

/**
 * Globally optimal solve via best-first branch-and-bound on the LP
 * relaxation. Branches on the most fractional variable (ties to the lowest
 * index), explores the fix-to-0 child first, and is fully deterministic.
 */
inline SolveOutcome solve_binary_program(const BinaryProgram& bp, SolveStats* stats = nullptr) {
    const int n = bp.num_variables();
    constexpr double kIntTol = 1e-6;

    ConicProgram relaxation(bp.objective);
    relaxation.eq_matrix = bp.eq_matrix;
    relaxation.eq_rhs = bp.eq_rhs;
    relaxation.le_matrix = bp.le_matrix;
    relaxation.le_rhs = bp.le_rhs;

    struct Node {
        std::vector<signed char> fixed;  // -1 free, 0 or 1 fixed
        double bound;
        long id;
    };
    const auto worse = [](const Node& a, const Node& b) {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);

    long next_id = 0;
    queue.push(Node{std::vector<signed char>(static_cast<std::size_t>(n), -1),
                    -std::numeric_limits<double>::infinity(), next_id++});

    double incumbent_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd incumbent;
    bool have_incumbent = false;

    while (!queue.empty()) {
        Node node = queue.top();
        queue.pop();
        const double margin = 1e-7 * std::max(1.0, std::abs(incumbent_value));
        if (have_incumbent && node.bound >= incumbent_value - margin) break;  // best-first: done

        for (int j = 0; j < n; ++j) {
            const signed char f = node.fixed[static_cast<std::size_t>(j)];
            relaxation.lower_bounds[static_cast<std::size_t>(j)] = f == 1 ? 1.0 : 0.0;
            relaxation.upper_bounds[static_cast<std::size_t>(j)] = f == 0 ? 0.0 : 1.0;
        }
        const SolveOutcome lp = solve_conic_escalating(relaxation, stats);
        if (lp.status == SolveStatus::infeasible) continue;
        if (lp.status != SolveStatus::optimal)
            throw SolverFailure("LP relaxation failed inside branch-and-bound");
        if (have_incumbent && *lp.value >= incumbent_value - margin) continue;

        const Eigen::VectorXd& x = *lp.solution;
        int branch_var = -1;
        double most_fractional = kIntTol;
        for (int j = 0; j < n; ++j) {
            const double dist = std::abs(x[j] - std::round(x[j]));
            if (dist > most_fractional) {
                most_fractional = dist;
                branch_var = j;
            }
        }

        if (branch_var < 0) {
            Eigen::VectorXd rounded = x.unaryExpr([](double v) { return std::round(v); });
            const double value = bp.objective.dot(rounded);
            if (!have_incumbent || value < incumbent_value) {
                incumbent = std::move(rounded);
                incumbent_value = value;
                have_incumbent = true;
            }
            continue;
        }

        for (signed char branch_value : {0, 1}) {
            Node child{node.fixed, *lp.value, next_id++};
            child.fixed[static_cast<std::size_t>(branch_var)] = branch_value;
            queue.push(std::move(child));
        }
    }

    SolveOutcome outcome;
    if (have_incumbent) {
        outcome.status = SolveStatus::optimal;
        outcome.value = incumbent_value;
        outcome.solution = incumbent;
        outcome.certified_digits = 9;
    } else {
        outcome.status = SolveStatus::infeasible;
    }
    return outcome;
}

}  // namespace equiclass
