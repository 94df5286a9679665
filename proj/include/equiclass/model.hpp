#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "equiclass/errors.hpp"

namespace equiclass {

/// A category is a set of object column indices, kept sorted ascending.
using Category = std::vector<int>;

/**
 * The characteristic data for all objects: an N x T input matrix (smaller is
 * better) and an M x T output matrix (larger is better). Objects are columns;
 * identity is the column index and labels are display-only.
 */
struct CharacteristicTable {
    std::vector<std::string> object_ids;
    Eigen::MatrixXd inputs;   // N x T, strictly positive
    Eigen::MatrixXd outputs;  // M x T

    int num_objects() const { return static_cast<int>(inputs.cols()); }
    int num_inputs() const { return static_cast<int>(inputs.rows()); }
    int num_outputs() const { return static_cast<int>(outputs.rows()); }
    /// Number of constraint rows in every DEA block: outputs first, then inputs.
    int num_rows() const { return num_inputs() + num_outputs(); }

    /// Largest absolute entry, used to scale solver caps. At least 1.
    double magnitude() const {
        double m = 1.0;
        if (inputs.size() > 0) m = std::max(m, inputs.cwiseAbs().maxCoeff());
        if (outputs.size() > 0) m = std::max(m, outputs.cwiseAbs().maxCoeff());
        return m;
    }
};

/// Throws unless the table satisfies all structural invariants; returns it unchanged.
inline const CharacteristicTable& validate_table(const CharacteristicTable& table) {
    const auto T = table.inputs.cols();
    if (table.inputs.rows() < 1 || table.outputs.rows() < 1 || T < 1)
        throw DimensionMismatch("table needs at least one object, one input and one output");
    if (table.outputs.cols() != T)
        throw DimensionMismatch("inputs have " + std::to_string(T) + " columns, outputs have " +
                                std::to_string(table.outputs.cols()));
    if (static_cast<Eigen::Index>(table.object_ids.size()) != T)
        throw DimensionMismatch("expected " + std::to_string(T) + " object ids, got " +
                                std::to_string(table.object_ids.size()));
    if (!table.inputs.allFinite() || !table.outputs.allFinite())
        throw NonFiniteEntry("characteristic values must be finite");
    if ((table.inputs.array() <= 0.0).any())
        throw NonPositiveInput("input characteristics must be strictly positive");
    return table;
}

/**
 * The sigma vector of uncertainty scales for the M+N constraint rows of a
 * category, output rows first. Componentwise nonnegative.
 */
struct SigmaVector {
    Eigen::VectorXd values;

    SigmaVector() = default;
    explicit SigmaVector(Eigen::VectorXd v) : values(std::move(v)) {}
    static SigmaVector zero(int rows) { return SigmaVector(Eigen::VectorXd::Zero(rows)); }
    static SigmaVector uniform(int rows, double scale) {
        return SigmaVector(Eigen::VectorXd::Constant(rows, scale));
    }

    int size() const { return static_cast<int>(values.size()); }
    double norm() const { return values.norm(); }
    double operator[](int i) const { return values[i]; }
    bool is_zero() const { return values.size() == 0 || values.maxCoeff() <= 0.0; }

    /// Componentwise maximum, the hat-sigma construction.
    SigmaVector cwise_max(const SigmaVector& other) const {
        return SigmaVector(values.cwiseMax(other.values));
    }
};

/// One record per accepted first-order iteration: (||sigma||, Gamma(sigma)).
struct TracePoint {
    double sigma_norm;
    double gamma;
};

enum class ProximityExit { converged, single_object, trivial_small_category, stalled, iteration_limit };

/**
 * The proximity-to-equitable-efficiency estimate for one category together
 * with its norm bounds: lower = ||sigma_hat|| / sqrt(M+N), upper = ||sigma_hat||.
 */
struct ProximityResult {
    int category_index = 0;
    SigmaVector sigma_hat;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    double estimate = 0.0;
    bool decided_by_single_object = false;
    std::vector<TracePoint> trace;
    ProximityExit exit = ProximityExit::converged;
    double final_direction_value = 0.0;
};

/**
 * A partition of the object indices {0..T-1} into S nonempty categories,
 * optionally carrying cached per-category proximity values and their total.
 */
struct Classification {
    std::vector<Category> categories;
    std::optional<std::vector<double>> proximity;
    std::optional<double> total;

    int num_categories() const { return static_cast<int>(categories.size()); }
};

/// True iff the categories are S nonempty pairwise-disjoint sets covering {0..T-1}.
inline bool partition_is_valid(const Classification& classification, int num_objects, int num_categories) {
    if (classification.num_categories() != num_categories) return false;
    std::vector<char> seen(static_cast<std::size_t>(num_objects), 0);
    int covered = 0;
    for (const Category& category : classification.categories) {
        if (category.empty()) return false;
        for (int object : category) {
            if (object < 0 || object >= num_objects) return false;
            if (seen[static_cast<std::size_t>(object)]) return false;
            seen[static_cast<std::size_t>(object)] = 1;
            ++covered;
        }
    }
    return covered == num_objects;
}

/**
 * Generator for the row-uncertainty structure R_i = [R'_i | R''_i]. Identity
 * and diagonal kinds adapt to any category; explicit matrices are pinned to
 * one category size and are rejected by the classification search.
 */
struct UncertaintySpec {
    enum class Kind { identity, diagonal, explicit_rows };

    Kind kind = Kind::identity;
    /// Diagonal kind: one strictly positive weight per object (global index).
    Eigen::VectorXd object_weights;
    /// Explicit kind: one R'_i per constraint row, output rows first.
    std::vector<Eigen::MatrixXd> row_matrices;

    static UncertaintySpec identity() { return UncertaintySpec{}; }

    static UncertaintySpec diagonal(Eigen::VectorXd weights) {
        if ((weights.array() <= 0.0).any())
            throw BadExplicitShape("diagonal uncertainty weights must be strictly positive");
        UncertaintySpec spec;
        spec.kind = Kind::diagonal;
        spec.object_weights = std::move(weights);
        return spec;
    }

    static UncertaintySpec explicit_rows(std::vector<Eigen::MatrixXd> matrices) {
        UncertaintySpec spec;
        spec.kind = Kind::explicit_rows;
        spec.row_matrices = std::move(matrices);
        return spec;
    }

    bool mutable_under_search() const { return kind != Kind::explicit_rows; }
};

}  // namespace equiclass
