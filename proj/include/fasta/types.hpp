#pragma once

#include <Eigen/Core>

namespace fasta {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major matrix view over a flat point.
inline Eigen::Map<const RowMatrix> as_matrix(const Vector &x, Eigen::Index rows, Eigen::Index cols) {
    return {x.data(), rows, cols};
}

/// Flattens a matrix in row-major order.
inline Vector flatten(const Eigen::Ref<const Matrix> &m) {
    Vector out(m.size());
    Eigen::Map<RowMatrix>(out.data(), m.rows(), m.cols()) = m;
    return out;
}

} // namespace fasta
