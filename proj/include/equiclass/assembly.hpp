#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <string>
#include <vector>

#include "equiclass/errors.hpp"
#include "equiclass/model.hpp"

namespace equiclass {

/**
 * The constraint blocks of the efficiency LP for one object within one
 * category. Columns of A and B are the category members in ascending object
 * order, followed by the duplicated y^t and x^t slots:
 *
 *   output rows of A:  [-Y^s | y^t |   0 ]
 *   input rows of A:   [ X^s |  0  | -x^t]
 *   B row 1 = (1,...,1,0,0),  B row 2 = (0,...,0,1,0),  c = (0,...,0,1).
 */
struct DeaBlocks {
    Eigen::MatrixXd A;  // (M+N) x (|C|+2)
    Eigen::MatrixXd B;  // 2 x (|C|+2)
    Eigen::VectorXd c;  // |C|+2
    int target_column = 0;

    int category_size() const { return static_cast<int>(A.cols()) - 2; }

    /// The always-feasible point: ones at the target column and both duplicated slots.
    Eigen::VectorXd eta_hat() const {
        Eigen::VectorXd eta = Eigen::VectorXd::Zero(A.cols());
        eta[target_column] = 1.0;
        eta[A.cols() - 2] = 1.0;
        eta[A.cols() - 1] = 1.0;
        return eta;
    }
};

/// Position of object t within the ascending-ordered category, or -1.
inline int category_slot(const Category& category, int t) {
    const auto it = std::lower_bound(category.begin(), category.end(), t);
    if (it == category.end() || *it != t) return -1;
    return static_cast<int>(it - category.begin());
}

inline DeaBlocks build_blocks(const CharacteristicTable& table, const Category& category, int t) {
    const int slot = category_slot(category, t);
    if (slot < 0)
        throw ObjectNotInCategory("object " + std::to_string(t) + " is not a member of the category");

    const int size = static_cast<int>(category.size());
    const int M = table.num_outputs();
    const int N = table.num_inputs();
    const int cols = size + 2;

    DeaBlocks blocks;
    blocks.target_column = slot;
    blocks.A = Eigen::MatrixXd::Zero(M + N, cols);
    for (int j = 0; j < size; ++j) {
        blocks.A.block(0, j, M, 1) = -table.outputs.col(category[static_cast<std::size_t>(j)]);
        blocks.A.block(M, j, N, 1) = table.inputs.col(category[static_cast<std::size_t>(j)]);
    }
    blocks.A.block(0, size, M, 1) = table.outputs.col(t);
    blocks.A.block(M, size + 1, N, 1) = -table.inputs.col(t);

    blocks.B = Eigen::MatrixXd::Zero(2, cols);
    blocks.B.row(0).head(size).setOnes();
    blocks.B(1, size) = 1.0;

    blocks.c = Eigen::VectorXd::Zero(cols);
    blocks.c[cols - 1] = 1.0;
    return blocks;
}

/**
 * One constraint row's uncertainty structure R_i = [R'_i | R''_i]. The
 * duplicated-slot column of R''_i is the negated target column of R'_i so the
 * perturbed row keeps the duplicated entry consistent with its category
 * column: the y^t slot for output rows, the x^t slot for input rows.
 */
struct RowUncertainty {
    Eigen::MatrixXd R_prime;         // rows x |C|
    Eigen::MatrixXd R_double_prime;  // rows x 2
    int row_index = 0;

    Eigen::MatrixXd full() const {
        Eigen::MatrixXd R(R_prime.rows(), R_prime.cols() + 2);
        R << R_prime, R_double_prime;
        return R;
    }
};

inline RowUncertainty build_row_uncertainty(const UncertaintySpec& spec, const Category& category,
                                            int t, int row, int num_outputs) {
    const int slot = category_slot(category, t);
    if (slot < 0)
        throw ObjectNotInCategory("object " + std::to_string(t) + " is not a member of the category");

    const int size = static_cast<int>(category.size());
    RowUncertainty result;
    result.row_index = row;

    switch (spec.kind) {
        case UncertaintySpec::Kind::identity:
            result.R_prime = Eigen::MatrixXd::Identity(size, size);
            break;
        case UncertaintySpec::Kind::diagonal: {
            Eigen::VectorXd weights(size);
            for (int j = 0; j < size; ++j) {
                const int object = category[static_cast<std::size_t>(j)];
                if (object >= spec.object_weights.size())
                    throw BadExplicitShape("diagonal uncertainty needs a weight for object " +
                                           std::to_string(object));
                weights[j] = spec.object_weights[object];
            }
            result.R_prime = weights.asDiagonal();
            break;
        }
        case UncertaintySpec::Kind::explicit_rows: {
            if (row >= static_cast<int>(spec.row_matrices.size()))
                throw BadExplicitShape("explicit uncertainty has no matrix for row " + std::to_string(row));
            const Eigen::MatrixXd& R = spec.row_matrices[static_cast<std::size_t>(row)];
            if (R.cols() != size)
                throw BadExplicitShape("explicit R' for row " + std::to_string(row) + " has " +
                                       std::to_string(R.cols()) + " columns, category has " +
                                       std::to_string(size) + " members");
            result.R_prime = R;
            break;
        }
    }

    result.R_double_prime = Eigen::MatrixXd::Zero(result.R_prime.rows(), 2);
    const int duplicated_slot = row < num_outputs ? 0 : 1;
    result.R_double_prime.col(duplicated_slot) = -result.R_prime.col(slot);
    return result;
}

}  // namespace equiclass
