#include "twoscale/ekf.hpp"

#include "twoscale/numdiff.hpp"

#include <algorithm>
#include <cmath>

namespace twoscale {

void EkfState::validate() const {
    const Eigen::Index n = x_hat.size();
    if (P.rows() != n || P.cols() != n || Q.rows() != n || Q.cols() != n) {
        throw DimensionError("EkfState: P and Q must be n_xf x n_xf");
    }
    if (R.rows() != R.cols()) throw DimensionError("EkfState: R must be square");
}

EkfState make_ekf_state(Vector x0, Matrix P0, Matrix Q, Matrix R, double tau0) {
    EkfState st;
    st.x_previous = x0;
    st.x_hat = std::move(x0);
    st.P = std::move(P0);
    st.Q = std::move(Q);
    st.R = std::move(R);
    st.last_update_time = tau0;
    st.validate();
    return st;
}

Vector composite_point(const Vector& xs, const Vector& xf, const Vector& x_fss, const FastStateMap& map) {
    Vector x = xs;
    for (Eigen::Index m = 0; m < map.size(); ++m) {
        const auto i = map.indices[static_cast<std::size_t>(m)];
        x(i) += xf(m) - x_fss(m);
    }
    return x;
}

EkfState ekf_predict(EkfState st, const VectorField& fast_rhs, double dt_tau) {
    if (!(dt_tau > 0.0)) throw ConfigError("ekf_predict: dt_tau must be positive");
    st.validate();
    const Eigen::Index n = st.x_hat.size();

    auto derivatives = [&](const Vector& x, const Matrix& P, Vector& dx, Matrix& dP) {
        dx = fast_rhs(x);
        const Matrix a = jacobian_central(fast_rhs, x, n);
        dP = a * P + P * a.transpose() + st.Q;
    };

    const Matrix a0 = jacobian_central(fast_rhs, st.x_hat, n);
    const double scale = a0.cwiseAbs().rowwise().sum().maxCoeff();
    const auto substeps = std::max<long>(1, static_cast<long>(std::ceil(dt_tau * scale / 0.5)));
    const double h = dt_tau / static_cast<double>(substeps);

    st.x_previous = st.x_hat;
    Vector x = st.x_hat;
    Matrix P = st.P;
    Vector k1x, k2x, k3x, k4x;
    Matrix k1p, k2p, k3p, k4p;
    for (long i = 0; i < substeps; ++i) {
        derivatives(x, P, k1x, k1p);
        derivatives(x + 0.5 * h * k1x, P + 0.5 * h * k1p, k2x, k2p);
        derivatives(x + 0.5 * h * k2x, P + 0.5 * h * k2p, k3x, k3p);
        derivatives(x + h * k3x, P + h * k3p, k4x, k4p);
        x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        P += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if (!x.allFinite() || !P.allFinite()) {
            throw DivergedError("ekf_predict: mean or covariance diverged", st.last_update_time);
        }
    }
    st.x_hat = std::move(x);
    st.P = 0.5 * (P + P.transpose());
    st.last_update_time += dt_tau;
    return st;
}

EkfState ekf_update(EkfState st, const Vector& y, const Vector& xs_info, const Vector& x_fss,
                    const FastStateMap& map, const VectorField& h, EkfUpdateBase base) {
    st.validate();
    require_size(x_fss, st.x_hat.size(), "ekf_update: x_fss");
    require_size(y, st.R.rows(), "ekf_update: measurement");

    const VectorField output = [&](const Vector& xf) { return h(composite_point(xs_info, xf, x_fss, map)); };
    const Vector y_pred = output(st.x_hat);
    const Matrix H = jacobian_central(output, st.x_hat, y.size());

    Matrix S = H * st.P * H.transpose() + st.R;
    S = 0.5 * (S + S.transpose());
    Eigen::LDLT<Matrix> ldlt(S);
    auto usable = [&](const Eigen::LDLT<Matrix>& f) {
        return f.info() == Eigen::Success && f.isPositive() &&
               f.vectorD().minCoeff() > 1e-300 && f.vectorD().allFinite();
    };
    if (!usable(ldlt)) {
        S.diagonal().array() += 1e-12;
        ldlt.compute(S);
        if (!usable(ldlt)) throw NumericalError("ekf_update: singular innovation covariance");
    }

    // K = P H^T S^{-1}
    const Matrix K = ldlt.solve(H * st.P).transpose();
    st.innovation = y - y_pred;
    const Vector& origin = base == EkfUpdateBase::predicted ? st.x_hat : st.x_previous;
    st.x_hat = origin + K * st.innovation;

    const Eigen::Index n = st.x_hat.size();
    const Matrix P = (Matrix::Identity(n, n) - K * H) * st.P;
    st.P = 0.5 * (P + P.transpose());
    if (!st.x_hat.allFinite() || !st.P.allFinite()) throw NumericalError("ekf_update: non-finite posterior");
    return st;
}

}  // namespace twoscale
