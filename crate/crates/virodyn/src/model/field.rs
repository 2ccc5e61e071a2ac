//! The nondimensional vector field and its analytic Jacobian.

use super::params::Params;
use super::state::{Matrix7, State, DIM};

/// Time derivative of every population, in state order.
///
/// The field is polynomial: logistic competition of the two uninfected cell
/// types, mass-action infection, mutation transfer from generalist-infected
/// to specialist-infected cells, burst production, and virion decay. Every
/// term carries a population factor, so the zero state is an equilibrium and
/// the flow preserves the nonnegative orthant.
pub fn rhs(p: &Params, s: &State) -> [f64; DIM] {
    let mut out = [0.0; DIM];
    rhs_into(p, &s.to_array(), &mut out);
    out
}

/// Hot-path form of [`rhs`] operating on raw arrays.
#[inline]
pub fn rhs_into(p: &Params, y: &[f64; DIM], dy: &mut [f64; DIM]) {
    let [x1, x2, ys1, y1, y2, zs, z] = *y;
    let total = x1 + x2;
    dy[0] = x1 * (1.0 - total) - x1 * p.alpha * z - x1 * p.alpha_s * zs;
    dy[1] = x2 * (p.beta1 - p.beta2 * total) - x2 * p.alpha * z;
    dy[2] = p.alpha_s * zs * x1 + p.mu * y1 - p.gamma1_s * ys1;
    dy[3] = p.alpha * z * x1 - (p.mu + p.gamma1) * y1;
    dy[4] = p.alpha * z * x2 - p.gamma2 * y2;
    dy[5] = p.gamma1_s * ys1 - p.nu_s * p.alpha_s * zs * x1 - p.zeta_s * zs;
    dy[6] = p.kappa1 * p.gamma1 * y1 + p.kappa2 * p.gamma2 * y2
        - p.nu * p.alpha * z * total
        - p.zeta * z;
}

/// Exact partial derivatives of [`rhs`], rows and columns in state order.
pub fn jacobian(p: &Params, s: &State) -> Matrix7 {
    let State {
        x1,
        x2,
        ys1: _,
        y1: _,
        y2: _,
        zs,
        z,
    } = *s;
    let total = x1 + x2;
    let mut j = Matrix7::zeros();

    // x1 row
    j[(0, 0)] = 1.0 - 2.0 * x1 - x2 - p.alpha * z - p.alpha_s * zs;
    j[(0, 1)] = -x1;
    j[(0, 5)] = -p.alpha_s * x1;
    j[(0, 6)] = -p.alpha * x1;

    // x2 row
    j[(1, 0)] = -p.beta2 * x2;
    j[(1, 1)] = p.beta1 - p.beta2 * (x1 + 2.0 * x2) - p.alpha * z;
    j[(1, 6)] = -p.alpha * x2;

    // ys1 row
    j[(2, 0)] = p.alpha_s * zs;
    j[(2, 2)] = -p.gamma1_s;
    j[(2, 3)] = p.mu;
    j[(2, 5)] = p.alpha_s * x1;

    // y1 row
    j[(3, 0)] = p.alpha * z;
    j[(3, 3)] = -(p.mu + p.gamma1);
    j[(3, 6)] = p.alpha * x1;

    // y2 row
    j[(4, 1)] = p.alpha * z;
    j[(4, 4)] = -p.gamma2;
    j[(4, 6)] = p.alpha * x2;

    // zs row
    j[(5, 0)] = -p.nu_s * p.alpha_s * zs;
    j[(5, 2)] = p.gamma1_s;
    j[(5, 5)] = -p.nu_s * p.alpha_s * x1 - p.zeta_s;

    // z row
    j[(6, 0)] = -p.nu * p.alpha * z;
    j[(6, 1)] = -p.nu * p.alpha * z;
    j[(6, 3)] = p.kappa1 * p.gamma1;
    j[(6, 4)] = p.kappa2 * p.gamma2;
    j[(6, 6)] = -p.nu * p.alpha * total - p.zeta;

    j
}
