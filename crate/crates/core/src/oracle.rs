//! Independent routes to the averaged quantities, used for validation.
//!
//! Nothing here shares the folded integrands of [`crate::averaging`]:
//! coefficients are averaged over the whole torus from the raw expansion,
//! and the quadratic form is recovered by differentiating the directly
//! averaged three-dimensional force function.

use serde::Serialize;

use crate::averaging::{full_stencil_mean, geometry_from_poincare, quarter_stencil_mean, Geometry};
use crate::error::Result;
use crate::fd;
use crate::kepler::{self, OrbitConfig, PoincareState};
use crate::quadrature::{converge, grid_mean, AxisNodes, Domain, QuadratureSpec};

/// Full-torus averages of the raw quadratic-form coefficients
///
/// ```text
/// A = -y y_J / (2 r³ G),   C = -x x_J / (2 r³ G)
/// ```
///
/// at the aligned planar configuration. Returns `(Abar, Cbar)`.
pub fn unfolded_ac(cfg: &OrbitConfig, e: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    cfg.validate()?;
    kepler::check_separation(cfg.a, e, 0.0, cfg.e_j, quad.crossing_threshold)?;
    let g_act = cfg.delaunay_g(e);
    let c = converge(
        quad,
        |na, np| {
            let an = AxisNodes::new(Domain::Full, na);
            let pn = AxisNodes::new(Domain::Full, np);
            let b = ((1.0 - e) * (1.0 + e)).sqrt();
            let bj = ((1.0 - cfg.e_j) * (1.0 + cfg.e_j)).sqrt();
            Ok(grid_mean(na, np, |i, j| {
                let (x, y) = (cfg.a * (an.cos[i] - e), cfg.a * b * an.sin[i]);
                let (xj, yj) = (pn.cos[j] - cfg.e_j, bj * pn.sin[j]);
                let w = (1.0 - e * an.cos[i]) * (1.0 - cfg.e_j * pn.cos[j]);
                let r2 = (x - xj).powi(2) + (y - yj).powi(2);
                let r3 = r2 * r2.sqrt();
                [
                    -0.5 * y * yj / (r3 * g_act) * w,
                    -0.5 * x * xj / (r3 * g_act) * w,
                ]
            }))
        },
        |v, d| {
            let s = v[0].abs().max(v[1].abs());
            d[0] <= quad.tol * s && d[1] <= quad.tol * s
        },
    )?;
    Ok((c.values[0], c.values[1]))
}

/// Second derivatives of the directly averaged spatial force function with
/// respect to `(p3, q3)` at the aligned planar point of eccentricity `e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialHessian {
    pub pp: f64,
    pub qq: f64,
    pub pq: f64,
    /// Force function at the base point.
    pub v0: f64,
    pub step: f64,
    pub nodes: usize,
}

/// Default finite-difference step in canonical variables: `1e-3 sqrt(2L)`.
pub fn canonical_step(cfg: &OrbitConfig) -> f64 {
    1e-3 * (2.0 * cfg.delaunay_l()).sqrt()
}

/// `p2 = sqrt(2(L - G))` of the aligned planar point, without cancellation.
pub fn aligned_p2(cfg: &OrbitConfig, e: f64) -> f64 {
    let l_act = cfg.delaunay_l();
    let s = ((1.0 - e) * (1.0 + e)).sqrt();
    (2.0 * l_act * e * e / (1.0 + s)).sqrt()
}

pub fn spatial_hessian(cfg: &OrbitConfig, e: f64, quad: &QuadratureSpec) -> Result<SpatialHessian> {
    cfg.validate()?;
    kepler::check_separation(cfg.a, e, 0.0, cfg.e_j, quad.crossing_threshold)?;
    let l_act = cfg.delaunay_l();
    let p2 = aligned_p2(cfg, e);
    let h = canonical_step(cfg);
    let mut geoms = [Geometry::planar(e, 0.0); 17];
    for (g, (du, dv)) in geoms.iter_mut().zip(fd::PLANE_OFFSETS) {
        let state = PoincareState {
            p1: l_act,
            p2,
            p3: du * h,
            q1: 0.0,
            q2: 0.0,
            q3: dv * h,
        };
        *g = geometry_from_poincare(cfg, &state)?;
    }
    let combos = fd::plane_combos(h);
    let c = converge(
        quad,
        |na, np| Ok(full_stencil_mean(cfg.a, cfg.e_j, &geoms, &combos, na, np)),
        |v, d| crate::equilibrium::within_tolerance(&combos, v, d, quad.tol),
    )?;
    let (pp, qq, pq) = fd::plane_hessian(&c.values);
    Ok(SpatialHessian {
        pp,
        qq,
        pq,
        v0: c.values[0],
        step: h,
        nodes: c.n_ast,
    })
}

/// Local minima of `Rbar(e)` at `g = 0` located by a plain grid scan with
/// spacing `step` over `[lo, hi]`, all at one fixed node count.
pub fn rbar_grid_minima(cfg: &OrbitConfig, lo: f64, hi: f64, step: f64, nodes: usize) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as usize + 1;
    let es: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
    let vals: Vec<f64> = es
        .iter()
        .map(|&e| quarter_stencil_mean(cfg.a, cfg.e_j, &[e], &[[1.0]], nodes, nodes)[0])
        .collect();
    (1..count.saturating_sub(1))
        .filter(|&k| vals[k] < vals[k - 1] && vals[k] <= vals[k + 1])
        .map(|k| es[k])
        .collect()
}
