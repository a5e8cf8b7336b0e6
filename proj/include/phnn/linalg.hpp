#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "phnn/error.hpp"

namespace phnn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool all_finite(const Eigen::Ref<const Mat>& a) { return a.allFinite(); }

/// max |A + Aᵀ|, zero for an exactly skew-symmetric matrix.
inline double skew_defect(const Eigen::Ref<const Mat>& a) {
    if (a.rows() != a.cols()) throw DimensionError("skew_defect: matrix is not square");
    return a.size() == 0 ? 0.0 : (a + a.transpose()).cwiseAbs().maxCoeff();
}

inline double min_symmetric_eigenvalue(const Eigen::Ref<const Mat>& a) {
    if (a.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

/// Largest singular value (operator 2-norm).
inline double spectral_norm(const Eigen::Ref<const Mat>& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps near-zero entries from
/// reporting huge relative errors for absolute differences at roundoff level.
inline double relative_error(double a, double b, double floor = 1e-8) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / scale;
}

inline double max_relative_error(const Eigen::Ref<const Mat>& a, const Eigen::Ref<const Mat>& b,
                                 double floor = 1e-8) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("max_relative_error: shape mismatch");
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            worst = std::max(worst, relative_error(a(i, j), b(i, j), floor));
    return worst;
}

}  // namespace phnn
