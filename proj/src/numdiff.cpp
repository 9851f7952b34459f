#include "twoscale/numdiff.hpp"

#include <cmath>

namespace twoscale {

Matrix jacobian_central(const VectorField& fn, const Vector& x, Eigen::Index rows) {
    Matrix jac(rows, x.size());
    Vector xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = 1e-6 * (1.0 + std::abs(x(j)));
        xp(j) = x(j) + h;
        const Vector fp = fn(xp);
        xp(j) = x(j) - h;
        const Vector fm = fn(xp);
        xp(j) = x(j);
        if (fp.size() != rows || fm.size() != rows) {
            throw DimensionError("jacobian_central: function output size changed");
        }
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    if (!jac.allFinite()) throw NumericalError("jacobian_central: non-finite Jacobian entry");
    return jac;
}

Matrix jacobian_central(const VectorField& fn, const Vector& x) {
    const Eigen::Index rows = fn(x).size();
    return jacobian_central(fn, x, rows);
}

Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double threshold = rel_tol * sv(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) ++rank;
    }
    return rank;
}

}  // namespace twoscale
