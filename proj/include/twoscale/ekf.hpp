#pragma once

#include "twoscale/common.hpp"
#include "twoscale/decomposition.hpp"

namespace twoscale {

/// Fast-subsystem extended Kalman filter state. Time is the stretched time tau.
struct EkfState {
    Vector x_hat;
    Matrix P;
    Matrix Q;  // process noise intensity on dx_f/dtau
    Matrix R;  // measurement noise covariance
    double last_update_time = 0.0;

    /// Posterior mean before the most recent prediction.
    Vector x_previous;
    /// Innovation of the most recent update.
    Vector innovation;

    void validate() const;
};

EkfState make_ekf_state(Vector x0, Matrix P0, Matrix Q, Matrix R, double tau0 = 0.0);

/// Propagates the mean along `fast_rhs` and the covariance along
/// dP/dtau = A P + P A^T + Q (A: central-difference Jacobian at the mean)
/// over `dt_tau`, with RK4 sub-steps small enough for the local spectral scale.
/// P is symmetrized afterwards.
EkfState ekf_predict(EkfState st, const VectorField& fast_rhs, double dt_tau);

enum class EkfUpdateBase {
    predicted,          // standard: correct the predicted mean
    previous_posterior, // literal variant: correct the previous posterior mean
};

/// Measurement update against y = h(x_s + embed(x_f - x_fss)).
/// H is the Jacobian of that composed map with respect to x_f at the
/// predicted mean. When H P H^T + R is singular, 1e-12 I is added once;
/// a second failure throws NumericalError.
EkfState ekf_update(EkfState st, const Vector& y, const Vector& xs_info, const Vector& x_fss,
                    const FastStateMap& map, const VectorField& h,
                    EkfUpdateBase base = EkfUpdateBase::predicted);

/// Composite point x_s + embed(x_f - x_fss).
Vector composite_point(const Vector& xs, const Vector& xf, const Vector& x_fss, const FastStateMap& map);

}  // namespace twoscale
