//! Oracle suite run at random non-crossing configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::averaging::{averaged_ac, averaged_b, averaged_r, direct_average_v3d};
use crate::equilibrium::{find_equilibrium_default, Definiteness, SolverSettings};
use crate::error::{domain, Result};
use crate::kepler::{self, OrbitConfig, PoincareState};
use crate::oracle::{aligned_p2, spatial_hessian, unfolded_ac};
use crate::stability::{
    classify_spatial, frequencies, linearization, spectrum, spectrum_deviation,
};

/// Deliberate corruption used to check that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    FlipAbar,
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub points: usize,
    pub seed: u64,
    pub settings: SolverSettings,
    pub fault: Option<Fault>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            points: 20,
            seed: 1,
            settings: SolverSettings::default(),
            fault: None,
        }
    }
}

/// Tolerances of the individual checks.
pub mod tol {
    pub const B_VANISHES: f64 = 1e-9;
    pub const FOLDING: f64 = 1e-9;
    pub const PLANAR_3D: f64 = 1e-10;
    pub const HESSIAN_DIAG: f64 = 1e-6;
    pub const HESSIAN_CROSS: f64 = 1e-8;
    pub const SPECTRUM: f64 = 1e-8;
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub check: &'static str,
    pub point: usize,
    pub a: f64,
    pub e_j: f64,
    pub e: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub points: usize,
    pub fault: Option<Fault>,
    pub outcomes: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub check: &'static str,
    pub tolerance: f64,
    pub worst: f64,
    pub passed: usize,
    pub total: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failing_checks(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = self
            .outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.check)
            .collect();
        names.dedup();
        names.sort_unstable();
        names.dedup();
        names
    }

    /// One line per check, in the order the checks first appear.
    pub fn summary(&self) -> Vec<CheckSummary> {
        let mut out: Vec<CheckSummary> = Vec::new();
        for o in &self.outcomes {
            let pos = match out.iter().position(|s| s.check == o.check) {
                Some(p) => p,
                None => {
                    out.push(CheckSummary {
                        check: o.check,
                        tolerance: o.tolerance,
                        worst: 0.0,
                        passed: 0,
                        total: 0,
                    });
                    out.len() - 1
                }
            };
            let s = &mut out[pos];
            s.total += 1;
            s.passed += usize::from(o.passed);
            if !o.observed.is_finite() || o.observed > s.worst {
                s.worst = o.observed;
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("validation: {} points, seed {}\n", self.points, self.seed);
        if let Some(f) = self.fault {
            s.push_str(&format!("fault injected: {f:?}\n"));
        }
        s.push_str(&format!(
            "{:<24} {:>10} {:>12} {:>9}  result\n",
            "check", "tolerance", "worst", "passed"
        ));
        for c in self.summary() {
            let verdict = if c.passed == c.total { "ok" } else { "FAIL" };
            s.push_str(&format!(
                "{:<24} {:>10.1e} {:>12.3e} {:>4}/{:<4}  {}\n",
                c.check, c.tolerance, c.worst, c.passed, c.total, verdict
            ));
        }
        for o in self.outcomes.iter().filter(|o| !o.passed) {
            s.push_str(&format!(
                "  {} failed at point {} (a={}, e_J={}, e={}): observed {:e}{}\n",
                o.check,
                o.point,
                o.a,
                o.e_j,
                o.e,
                o.observed,
                o.note
                    .as_deref()
                    .map(|n| format!(" [{n}]"))
                    .unwrap_or_default()
            ));
        }
        s
    }
}

/// Samples a configuration whose orbits stay well apart.
fn sample(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    loop {
        let a = if rng.gen_bool(0.5) {
            rng.gen_range(0.05..0.6)
        } else {
            rng.gen_range(1.6..4.0)
        };
        let e_j = rng.gen_range(0.05..0.85);
        let e = rng.gen_range(0.0..0.8);
        if kepler::orbit_min_separation(a, e, e_j) >= 0.05 {
            return (a, e_j, e);
        }
    }
}

pub fn run_validation(opts: &ValidationOptions) -> Result<ValidationReport> {
    if opts.points == 0 {
        return Err(domain("validation needs at least one point"));
    }
    opts.settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let samples: Vec<(f64, f64, f64)> = (0..opts.points).map(|_| sample(&mut rng)).collect();
    let mut outcomes = Vec::new();
    for (k, &(a, e_j, e)) in samples.iter().enumerate() {
        check_point(k, a, e_j, e, opts, &mut outcomes);
    }
    Ok(ValidationReport {
        seed: opts.seed,
        points: opts.points,
        fault: opts.fault,
        outcomes,
    })
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

fn check_point(
    k: usize,
    a: f64,
    e_j: f64,
    e: f64,
    opts: &ValidationOptions,
    out: &mut Vec<CheckOutcome>,
) {
    let quad = &opts.settings.quad;
    let sign = if opts.fault == Some(Fault::FlipAbar) {
        -1.0
    } else {
        1.0
    };
    let cfg = OrbitConfig { a, e_j, mu: 0.0 };
    let mut push = |check: &'static str, e: f64, observed: Result<f64>, tolerance: f64| {
        let (observed, note) = match observed {
            Ok(v) => (v, None),
            Err(err) => (f64::INFINITY, Some(err.to_string())),
        };
        out.push(CheckOutcome {
            check,
            point: k,
            a,
            e_j,
            e,
            observed,
            tolerance,
            passed: observed < tolerance,
            note,
        });
    };

    push(
        "b_vanishes",
        e,
        averaged_b(&cfg, e, quad).map(|b| b.value.abs()),
        tol::B_VANISHES,
    );

    push(
        "planar_matches_3d",
        e,
        (|| {
            let folded = averaged_r(&cfg, e, 0.0, quad)?.value;
            let p = PoincareState {
                p1: cfg.delaunay_l(),
                p2: aligned_p2(&cfg, e),
                p3: 0.0,
                q1: 0.0,
                q2: 0.0,
                q3: 0.0,
            };
            Ok(rel(folded, direct_average_v3d(&cfg, &p, quad)?.value))
        })(),
        tol::PLANAR_3D,
    );

    let coeffs = averaged_ac(&cfg, e, quad).map(|mut c| {
        c.abar *= sign;
        c
    });
    push(
        "folding_matches_torus",
        e,
        (|| {
            let c = coeffs.clone()?;
            let (a_full, c_full) = unfolded_ac(&cfg, e, quad)?;
            Ok(rel(c.abar, a_full).max(rel(c.cbar, c_full)))
        })(),
        tol::FOLDING,
    );

    let hess = spatial_hessian(&cfg, e, quad);
    push(
        "hessian_diagonal",
        e,
        (|| {
            let c = coeffs.clone()?;
            let h = hess.clone()?;
            Ok(rel(h.pp, 2.0 * c.abar).max(rel(h.qq, 2.0 * c.cbar)))
        })(),
        tol::HESSIAN_DIAG,
    );
    push(
        "hessian_cross_term",
        e,
        hess.map(|h| h.pq.abs()),
        tol::HESSIAN_CROSS,
    );

    push(
        "abar_negative",
        e,
        coeffs.map(|c| {
            if c.abar < 0.0 && c.abar.abs() > opts.settings.verdict_margin * c.err_a {
                0.0
            } else {
                1.0
            }
        }),
        0.5,
    );

    // checks at the planar equilibrium of (a, e_J)
    let eq = find_equilibrium_default(&cfg, &opts.settings);
    let rec = eq
        .and_then(|eq| classify_spatial(&cfg, &eq, &opts.settings))
        .map(|mut r| {
            r.abar *= sign;
            r
        });
    let e_star = rec.as_ref().map_or(f64::NAN, |r| r.e_star);
    push(
        "planar_hessian_definite",
        e_star,
        rec.clone().map(|r| {
            if r.planar == Definiteness::PositiveDefinite {
                0.0
            } else {
                1.0
            }
        }),
        0.5,
    );
    push(
        "cbar_negative",
        e_star,
        rec.clone().map(|r| {
            if r.cbar < 0.0 && r.cbar.abs() > opts.settings.verdict_margin * r.err.c {
                0.0
            } else {
                1.0
            }
        }),
        0.5,
    );
    push(
        "linear_spectrum",
        e_star,
        rec.and_then(|r| {
            let f = frequencies(&r.hessian, r.abar, r.cbar)?;
            Ok(spectrum_deviation(
                &spectrum(&linearization(&r.hessian, r.abar, r.cbar)),
                &f,
            ))
        }),
        tol::SPECTRUM,
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let report = run_validation(&ValidationOptions {
            points: 2,
            ..Default::default()
        })
        .unwrap();
        assert!(report.passed(), "{}", report.to_text());
        assert_eq!(report.summary().len(), 9);
    }

    #[test]
    fn flipped_abar_is_caught() {
        let opts = ValidationOptions {
            points: 1,
            fault: Some(Fault::FlipAbar),
            ..Default::default()
        };
        let report = run_validation(&opts).unwrap();
        assert!(!report.passed());
        let failing = report.failing_checks();
        assert!(failing.contains(&"abar_negative"), "{failing:?}");
        assert!(failing.contains(&"hessian_diagonal"), "{failing:?}");
        assert!(failing.contains(&"linear_spectrum"), "{failing:?}");
    }

    #[test]
    fn zero_points_refused() {
        assert!(run_validation(&ValidationOptions {
            points: 0,
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(sample(&mut r1), sample(&mut r2));
    }
}
