#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <optional>
#include <string>
#include <vector>

namespace equiclass {

/// One second-order cone constraint  ||F x + g|| <= a' x + b.
struct SecondOrderConeConstraint {
    Eigen::MatrixXd F;
    Eigen::VectorXd g;
    Eigen::VectorXd a;
    double b = 0.0;
};

/**
 * A conic program in inequality form:
 *
 *   min  objective' x
 *   s.t. eq_matrix x  = eq_rhs
 *        le_matrix x <= le_rhs
 *        ||F_k x + g_k|| <= a_k' x + b_k          for each cone k
 *        lower_bounds <= x <= upper_bounds        (componentwise, optional)
 *
 * An LP is the special case with no cone constraints.
 */
struct ConicProgram {
    Eigen::VectorXd objective;
    Eigen::SparseMatrix<double> eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::SparseMatrix<double> le_matrix;
    Eigen::VectorXd le_rhs;
    std::vector<SecondOrderConeConstraint> cones;
    std::vector<std::optional<double>> lower_bounds;
    std::vector<std::optional<double>> upper_bounds;

    ConicProgram() = default;
    explicit ConicProgram(Eigen::VectorXd c)
        : objective(std::move(c)),
          eq_matrix(0, objective.size()),
          le_matrix(0, objective.size()),
          lower_bounds(static_cast<std::size_t>(objective.size())),
          upper_bounds(static_cast<std::size_t>(objective.size())) {}

    int num_variables() const { return static_cast<int>(objective.size()); }

    void set_all_lower_bounds(double value) {
        for (auto& lb : lower_bounds) lb = value;
    }
};

enum class SolveStatus { optimal, infeasible, unbounded, numeric_failure };

inline const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::numeric_failure: return "numeric_failure";
    }
    return "?";
}

struct SolveOutcome {
    SolveStatus status = SolveStatus::numeric_failure;
    std::optional<double> value;
    std::optional<Eigen::VectorXd> solution;
    int certified_digits = 0;

    // Diagnostics from the final iterate.
    std::optional<double> dual_value;
    double primal_residual = std::numeric_limits<double>::infinity();
    double dual_residual = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

/**
 * One rung of the tolerance-escalation ladder. A solve must certify its
 * objective to at least six decimals to be accepted, no matter the rung.
 */
struct ToleranceProfile {
    std::string name;
    double feastol;
    double abstol;
    double reltol;
    double feastol_reduced;
    double abstol_reduced;
    double reltol_reduced;
    int max_iters;

    static ToleranceProfile strict() { return {"strict", 1e-9, 1e-9, 1e-9, 1e-7, 1e-7, 1e-7, 150}; }
    static ToleranceProfile standard() { return {"standard", 1e-8, 1e-8, 1e-8, 5e-7, 5e-7, 5e-7, 120}; }
    static ToleranceProfile relaxed() { return {"relaxed", 1e-7, 1e-7, 1e-7, 1e-6, 1e-6, 1e-6, 200}; }
};

inline const std::vector<ToleranceProfile>& escalation_ladder() {
    static const std::vector<ToleranceProfile> ladder = {
        ToleranceProfile::strict(), ToleranceProfile::standard(), ToleranceProfile::relaxed()};
    return ladder;
}

}  // namespace equiclass
