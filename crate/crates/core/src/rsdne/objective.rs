//! The unified objective and its block gradients.
//!
//! `J = ||M - UH||^2 + lambda (||U||^2 + ||H||^2) + alpha (Tr(U'L_sU) + Tr(U'L_wU))`.
//!
//! The fit term is expanded as `||M||^2 - 2<MH', U> + <U'U, HH'>`, so no
//! dense `n x n` product is ever formed.

use nalgebra::DMatrix;

use super::{RsdneConfig, RsdneState};
use crate::graph::ProximityMatrix;

pub fn objective(state: &RsdneState, proximity: &ProximityMatrix, config: &RsdneConfig) -> f64 {
    let m = proximity.sparse();
    let mh = m.mul_dense(&state.h.transpose());
    let fit = m.frobenius_sq() - 2.0 * mh.dot(&state.u)
        + (state.u.transpose() * &state.u).dot(&(&state.h * state.h.transpose()));
    let ridge = config.lambda * (state.u.norm_squared() + state.h.norm_squared());
    let graph = if config.alpha == 0.0 {
        0.0
    } else {
        config.alpha
            * (state.intra.quadratic_trace(&state.u) + state.inter.quadratic_trace(&state.u))
    };
    fit + ridge + graph
}

/// `2(-MH' + UHH' + alpha (L_s + L_w) U + lambda U)`.
pub fn grad_u(state: &RsdneState, proximity: &ProximityMatrix, config: &RsdneConfig) -> DMatrix<f64> {
    let mh = proximity.sparse().mul_dense(&state.h.transpose());
    let hh = &state.h * state.h.transpose();
    let mut g = &state.u * hh - mh + &state.u * config.lambda;
    if config.alpha != 0.0 {
        g += (state.intra.apply(&state.u) + state.inter.apply(&state.u)) * config.alpha;
    }
    g * 2.0
}

/// `2(-U'M + U'UH + lambda H)`.
pub fn grad_h(state: &RsdneState, proximity: &ProximityMatrix, config: &RsdneConfig) -> DMatrix<f64> {
    let um = proximity.sparse().tr_mul_dense(&state.u).transpose();
    let uu = state.u.transpose() * &state.u;
    (uu * &state.h - um + &state.h * config.lambda) * 2.0
}

/// Curvature of `J` along a direction `D` in `U`: `J(U + tD) = J(U) + t<grad, D> + t^2 q(D)`.
pub(crate) fn curvature_u(state: &RsdneState, config: &RsdneConfig, dir: &DMatrix<f64>) -> f64 {
    let hh = &state.h * state.h.transpose();
    let mut q = (dir.transpose() * dir).dot(&hh) + config.lambda * dir.norm_squared();
    if config.alpha != 0.0 {
        q += config.alpha * (state.intra.quadratic_trace(dir) + state.inter.quadratic_trace(dir));
    }
    q
}

/// Curvature of `J` along a direction `D` in `H`.
pub(crate) fn curvature_h(state: &RsdneState, config: &RsdneConfig, dir: &DMatrix<f64>) -> f64 {
    let uu = state.u.transpose() * &state.u;
    (dir * dir.transpose()).dot(&uu) + config.lambda * dir.norm_squared()
}
