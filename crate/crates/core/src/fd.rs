//! Finite-difference stencils with one Richardson step.
//!
//! Stencils are evaluated pointwise inside the quadrature: each node
//! contributes the difference quotient of its own integrand values, so the
//! cancellation happens before the large sums are formed.

/// Offsets of the one-dimensional stencil `[0, +h, -h, +h/2, -h/2]`.
pub const LINE_OFFSETS: [f64; 5] = [0.0, 1.0, -1.0, 0.5, -0.5];

/// Combination rows for [`LINE_OFFSETS`]:
/// `[f, f'(h), f'(h/2), f''(h), f''(h/2)]`.
pub fn line_combos(h: f64) -> [[f64; 5]; 5] {
    let (h2, hh) = (0.5 * h, h * h);
    [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5 / h, -0.5 / h, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.5 / h2, -0.5 / h2],
        [-2.0 / hh, 1.0 / hh, 1.0 / hh, 0.0, 0.0],
        [-2.0 / (h2 * h2), 0.0, 0.0, 1.0 / (h2 * h2), 1.0 / (h2 * h2)],
    ]
}

/// Richardson-extrapolated first and second derivatives from a line stencil.
pub fn line_derivatives(v: &[f64; 5]) -> (f64, f64) {
    (richardson(v[1], v[2]), richardson(v[3], v[4]))
}

/// Offsets (in units of `h`) of the 17-point plane stencil used for
/// Hessians: centre, both axes at `h` and `h/2`, and the diagonals.
pub const PLANE_OFFSETS: [(f64, f64); 17] = [
    (0.0, 0.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.5, 0.0),
    (-0.5, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (0.0, 0.5),
    (0.0, -0.5),
    (1.0, 1.0),
    (1.0, -1.0),
    (-1.0, 1.0),
    (-1.0, -1.0),
    (0.5, 0.5),
    (0.5, -0.5),
    (-0.5, 0.5),
    (-0.5, -0.5),
];

/// Combination rows for [`PLANE_OFFSETS`]:
/// `[f, f_uu(h), f_vv(h), f_uv(h), f_uu(h/2), f_vv(h/2), f_uv(h/2)]`.
pub fn plane_combos(h: f64) -> [[f64; 17]; 7] {
    let mut rows = [[0.0; 17]; 7];
    rows[0][0] = 1.0;
    for (level, step) in [(0usize, h), (1, 0.5 * h)] {
        let inv = 1.0 / (step * step);
        let (u_pts, v_pts, diag) = (1 + 2 * level, 5 + 2 * level, 9 + 4 * level);
        let r = 1 + 3 * level;
        rows[r][0] = -2.0 * inv;
        rows[r][u_pts] = inv;
        rows[r][u_pts + 1] = inv;
        rows[r + 1][0] = -2.0 * inv;
        rows[r + 1][v_pts] = inv;
        rows[r + 1][v_pts + 1] = inv;
        rows[r + 2][diag] = 0.25 * inv;
        rows[r + 2][diag + 1] = -0.25 * inv;
        rows[r + 2][diag + 2] = -0.25 * inv;
        rows[r + 2][diag + 3] = 0.25 * inv;
    }
    rows
}

/// `(f_uu, f_vv, f_uv)` after Richardson extrapolation of a plane stencil.
pub fn plane_hessian(v: &[f64; 7]) -> (f64, f64, f64) {
    (
        richardson(v[1], v[4]),
        richardson(v[2], v[5]),
        richardson(v[3], v[6]),
    )
}

/// Eliminates the `O(h^2)` term from estimates at steps `h` and `h/2`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Applies combination rows to stencil values.
#[inline]
pub fn combine<const S: usize, const K: usize>(
    rows: &[[f64; S]; K],
    values: &[f64; S],
) -> [f64; K] {
    let mut out = [0.0; K];
    for (o, row) in out.iter_mut().zip(rows) {
        let mut acc = 0.0;
        for (w, v) in row.iter().zip(values) {
            acc += w * v;
        }
        *o = acc;
    }
    out
}

/// Rounding level of each combination row for a function of size `scale`.
///
/// Changes below this between refinement levels are noise, not
/// discretisation error.
pub fn roundoff_floor<const S: usize, const K: usize>(
    rows: &[[f64; S]; K],
    scale: f64,
) -> [f64; K] {
    rows.map(|row| 8.0 * f64::EPSILON * scale.abs() * row.iter().map(|w| w.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_stencil_on_quintic() {
        let f = |x: f64| 1.0 + 2.0 * x - 3.0 * x * x + 0.5 * x.powi(3) + 0.25 * x.powi(4);
        let (x0, h) = (0.3, 1e-2);
        let vals: [f64; 5] = LINE_OFFSETS.map(|o| f(x0 + o * h));
        let out = combine(&line_combos(h), &vals);
        let (d1, d2) = line_derivatives(&out);
        let exact1 = 2.0 - 6.0 * x0 + 1.5 * x0 * x0 + x0.powi(3);
        let exact2 = -6.0 + 3.0 * x0 + 3.0 * x0 * x0;
        assert!((d1 - exact1).abs() < 1e-10);
        assert!((d2 - exact2).abs() < 1e-8);
    }

    #[test]
    fn plane_stencil_on_polynomial() {
        let f =
            |u: f64, v: f64| 2.0 * u * u - 0.7 * u * v + 3.0 * v * v + u.powi(3) * v + v.powi(4);
        let (u0, v0, h) = (0.2, -0.1, 1e-2);
        let vals: [f64; 17] = PLANE_OFFSETS.map(|(du, dv)| f(u0 + du * h, v0 + dv * h));
        let out = combine(&plane_combos(h), &vals);
        let (uu, vv, uv) = plane_hessian(&out);
        assert!((uu - (4.0 + 6.0 * u0 * v0)).abs() < 1e-8);
        assert!((vv - (6.0 + 12.0 * v0 * v0)).abs() < 1e-8);
        assert!((uv - (-0.7 + 3.0 * u0 * u0)).abs() < 1e-8);
        assert_eq!(out[0], f(u0, v0));
    }
}
