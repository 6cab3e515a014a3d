//! Tensor-product midpoint rules on the torus of eccentric anomalies.
//!
//! The integrands are analytic and 2π-periodic in both anomalies away from
//! orbit crossings, so equally spaced nodes converge geometrically. Node
//! counts are doubled until two successive estimates agree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Node counts and convergence control. Node counts are per full period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_ast: usize,
    pub n_pl: usize,
    pub tol: f64,
    pub max_n: usize,
    /// Orbit separation below which averaging is refused.
    pub crossing_threshold: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_ast: 64,
            n_pl: 64,
            tol: 1e-10,
            max_n: 4096,
            crossing_threshold: crate::kepler::DEFAULT_CROSSING_THRESHOLD,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_ast < 8 || self.n_pl < 8 {
            return Err(domain("quadrature needs at least 8 nodes per axis"));
        }
        if !(self.tol > 0.0) {
            return Err(domain("quadrature tolerance must be positive"));
        }
        if self.max_n < self.n_ast.max(self.n_pl) {
            return Err(domain("max_n is below the initial node count"));
        }
        if !(self.crossing_threshold >= 0.0) {
            return Err(domain("crossing threshold must be non-negative"));
        }
        Ok(())
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }
}

/// Which part of the torus the nodes cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[0, 2π)²`.
    Full,
    /// `[0, π]²`, used for integrands already folded by the reflection
    /// symmetry of aligned orbits.
    Quarter,
}

impl Domain {
    /// Midpoint nodes on one axis for `n` nodes per full period.
    pub fn nodes(self, n: usize) -> Vec<f64> {
        match self {
            Domain::Full => {
                let h = std::f64::consts::TAU / n as f64;
                (0..n).map(|k| (k as f64 + 0.5) * h).collect()
            }
            Domain::Quarter => {
                let m = n / 2;
                let h = std::f64::consts::PI / m as f64;
                (0..m).map(|k| (k as f64 + 0.5) * h).collect()
            }
        }
    }
}

/// Precomputed `(sin, cos)` of the nodes on one axis.
#[derive(Debug, Clone)]
pub struct AxisNodes {
    pub sin: Vec<f64>,
    pub cos: Vec<f64>,
}

impl AxisNodes {
    pub fn new(domain: Domain, n: usize) -> Self {
        let (sin, cos) = domain.nodes(n).into_iter().map(f64::sin_cos).unzip();
        Self { sin, cos }
    }

    pub fn len(&self) -> usize {
        self.sin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sin.is_empty()
    }
}

const PARALLEL_MIN_NODES: usize = 1 << 14;

/// Arithmetic mean of `f(i, j)` over an `rows x cols` grid.
///
/// Row sums are compensated and combined pairwise in index order, so the
/// result does not depend on how rows are distributed across threads.
pub fn grid_mean<const K: usize, F>(rows: usize, cols: usize, f: F) -> [f64; K]
where
    F: Fn(usize, usize) -> [f64; K] + Sync,
{
    let row_sum = |i: usize| -> [f64; K] {
        let mut sum = [0.0; K];
        let mut comp = [0.0; K];
        for j in 0..cols {
            let v = f(i, j);
            for k in 0..K {
                let t = sum[k] + v[k];
                if sum[k].abs() >= v[k].abs() {
                    comp[k] += (sum[k] - t) + v[k];
                } else {
                    comp[k] += (v[k] - t) + sum[k];
                }
                sum[k] = t;
            }
        }
        let mut out = [0.0; K];
        for k in 0..K {
            out[k] = sum[k] + comp[k];
        }
        out
    };
    let sums: Vec<[f64; K]> = if rows * cols >= PARALLEL_MIN_NODES {
        (0..rows).into_par_iter().map(row_sum).collect()
    } else {
        (0..rows).map(row_sum).collect()
    };
    let mut total = pairwise(&sums);
    let count = (rows * cols) as f64;
    for v in total.iter_mut() {
        *v /= count;
    }
    total
}

fn pairwise<const K: usize>(xs: &[[f64; K]]) -> [f64; K] {
    match xs.len() {
        0 => [0.0; K],
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            let (a, b) = (pairwise(l), pairwise(r));
            let mut out = [0.0; K];
            for k in 0..K {
                out[k] = a[k] + b[k];
            }
            out
        }
    }
}

/// A converged vector of quadrature results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged<const K: usize> {
    pub values: [f64; K],
    /// Absolute change between the last two refinement levels.
    pub change: [f64; K],
    /// Nodes per full period on each axis at the accepted level.
    pub n_ast: usize,
    pub n_pl: usize,
}

/// Doubles the node counts until `accept(current, change)` holds.
pub fn converge<const K: usize>(
    spec: &QuadratureSpec,
    mut eval: impl FnMut(usize, usize) -> Result<[f64; K]>,
    accept: impl Fn(&[f64; K], &[f64; K]) -> bool,
) -> Result<Converged<K>> {
    spec.validate()?;
    let (mut na, mut np) = (spec.n_ast, spec.n_pl);
    let mut prev = eval(na, np)?;
    let mut worst = f64::INFINITY;
    while na.max(np) * 2 <= spec.max_n {
        na *= 2;
        np *= 2;
        let cur = eval(na, np)?;
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("non-finite quadrature value".into()));
        }
        let mut change = [0.0; K];
        for k in 0..K {
            change[k] = (cur[k] - prev[k]).abs();
        }
        if accept(&cur, &change) {
            return Ok(Converged {
                values: cur,
                change,
                n_ast: na,
                n_pl: np,
            });
        }
        worst = change.iter().fold(0.0f64, |m, v| m.max(*v));
        prev = cur;
    }
    Err(Error::NonConverged {
        nodes: na.max(np),
        change: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn midpoint_is_exact_for_low_harmonics() {
        let nodes = AxisNodes::new(Domain::Full, 16);
        let m = grid_mean(16, 16, |i, j| {
            [1.0 + nodes.cos[i] * nodes.cos[j] + nodes.sin[i].powi(2)]
        });
        assert!((m[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn quarter_domain_nodes() {
        let n = Domain::Quarter.nodes(8);
        assert_eq!(n.len(), 4);
        assert!((n[0] - PI / 8.0).abs() < 1e-15);
        assert!((n[3] - 7.0 * PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn geometric_convergence_on_analytic_integrand() {
        // mean of 1/(1.5 - cos x) over a period is 1/sqrt(1.25)
        let spec = QuadratureSpec::default();
        let c = converge(
            &spec,
            |na, _| {
                let nodes = AxisNodes::new(Domain::Full, na);
                Ok(grid_mean(na, 1, |i, _| [1.0 / (1.5 - nodes.cos[i])]))
            },
            |v, d| d[0] <= 1e-13 * v[0].abs(),
        )
        .unwrap();
        assert!((c.values[0] - 1.0 / 1.25f64.sqrt()).abs() < 1e-14);
        assert!(c.n_ast <= 256);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadratureSpec {
            max_n: 256,
            ..Default::default()
        };
        let r = converge(&spec, |na, _| Ok([na as f64]), |_, _| false);
        assert!(matches!(r, Err(Error::NonConverged { .. })));
    }

    #[test]
    fn parallel_and_serial_sums_agree_bitwise() {
        let f = |i: usize, j: usize| [((i * 31 + j * 17) as f64).sin() * 1e3 + 1e-7 * j as f64];
        let par = grid_mean(256, 256, f);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let ser = pool.install(|| grid_mean(256, 256, f));
        assert_eq!(par[0].to_bits(), ser[0].to_bits());
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec {
            n_ast: 4,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(QuadratureSpec {
            tol: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(QuadratureSpec::default().validate().is_ok());
    }
}
