#pragma once

#include <functional>

#include "phnn/error.hpp"
#include "phnn/linalg.hpp"

namespace phnn {

/// Central-difference gradient (f(x + h eᵢ) − f(x − h eᵢ)) / 2h.
///
/// Used as an independent oracle for the analytic derivatives.
inline Vec finite_difference_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
    if (!(h > 0.0)) throw ValidationError("finite_difference_gradient: step must be positive");
    Vec grad(x.size());
    Vec probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        grad(i) = (up - down) / (2.0 * h);
    }
    return grad;
}

/// Central-difference Jacobian of a vector function, rows = outputs.
inline Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-5) {
    if (!(h > 0.0)) throw ValidationError("finite_difference_jacobian: step must be positive");
    Mat jac;
    Vec probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const Vec up = f(probe);
        probe(i) = x(i) - h;
        const Vec down = f(probe);
        probe(i) = x(i);
        if (i == 0) jac.resize(up.size(), x.size());
        jac.col(i) = (up - down) / (2.0 * h);
    }
    return jac;
}

}  // namespace phnn
