//! Parameter-plane sweeps over `(a, e_J)`.

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{find_equilibrium_default, EquilibriumStatus, SolverSettings};
use crate::error::{domain, Error, Result};
use crate::kepler::OrbitConfig;
use crate::stability::{
    classify_spatial, trace_resonance, RatioField, ResonancePoint, SpatialVerdict, StabilityRecord,
};

pub const CSV_HEADER: &str =
    "a,e_J,status,e_star,Rbar,Abar,Bbar,Cbar,hess_pp,hess_qq,hess_pq,omega_plane,omega_z,ratio,err_R,err_A,err_C";
/// Bumped whenever the column set or its meaning changes.
pub const CSV_SCHEMA: &str = "secstab-cells/1";
pub const RESONANCE_HEADER: &str = "a,e_J,ratio";

/// Equally spaced axis `min..=max` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        let axis = Self { min, max, n };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain("axis needs at least one point"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(domain(format!(
                "axis bounds {}..{} are invalid",
                self.min, self.max
            )));
        }
        if self.n == 1 && self.max != self.min {
            return Err(domain("a single-point axis needs min == max"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n)
            .map(|k| {
                if k + 1 == self.n {
                    self.max
                } else {
                    self.min + k as f64 * step
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    /// Parses `MIN:MAX:N`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, n] = parts.as_slice() else {
            return Err(domain(format!("range '{s}' is not MIN:MAX:N")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| domain(format!("'{t}' is not a number")))
        };
        let n = n
            .trim()
            .parse::<usize>()
            .map_err(|_| domain(format!("'{n}' is not a point count")))?;
        Axis::new(num(min)?, num(max)?, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a: Axis,
    pub e_j: Axis,
    pub mu: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.a.validate()?;
        self.e_j.validate()?;
        OrbitConfig::new(self.a.min, self.e_j.min, self.mu)?;
        OrbitConfig::new(self.a.max, self.e_j.max, self.mu)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CellStatus {
    Found,
    MultipleRoots,
    Unstable,
    Inconclusive,
    NoRoot,
    OrbitCrossing,
    NonConverged,
    Degenerate,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Found => "FOUND",
            CellStatus::MultipleRoots => "MULTIPLE_ROOTS",
            CellStatus::Unstable => "UNSTABLE",
            CellStatus::Inconclusive => "INCONCLUSIVE",
            CellStatus::NoRoot => "NO_ROOT",
            CellStatus::OrbitCrossing => "ORBIT_CROSSING",
            CellStatus::NonConverged => "NON_CONVERGED",
            CellStatus::Degenerate => "DEGENERATE",
        }
    }

    /// A stable planar equilibrium was selected.
    pub fn has_equilibrium(self) -> bool {
        matches!(
            self,
            CellStatus::Found
                | CellStatus::MultipleRoots
                | CellStatus::Unstable
                | CellStatus::Inconclusive
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub a: f64,
    pub e_j: f64,
    pub status: CellStatus,
    pub record: Option<StabilityRecord>,
    /// Every root of the planar equilibrium condition, stable or not.
    pub roots: Vec<f64>,
    pub detail: Option<String>,
}

impl Cell {
    pub fn ratio(&self) -> Option<f64> {
        self.record.and_then(|r| r.frequencies).map(|f| f.ratio)
    }
}

fn failure(a: f64, e_j: f64, err: &Error, roots: Vec<f64>) -> Cell {
    let status = match err {
        Error::OrbitCrossing { .. } => CellStatus::OrbitCrossing,
        Error::Degenerate(_) => CellStatus::Degenerate,
        _ => CellStatus::NonConverged,
    };
    Cell {
        a,
        e_j,
        status,
        record: None,
        roots,
        detail: Some(err.to_string()),
    }
}

/// Equilibrium search, spatial classification and frequencies at one point.
pub fn evaluate_cell(a: f64, e_j: f64, mu: f64, settings: &SolverSettings) -> Cell {
    let cfg = match OrbitConfig::new(a, e_j, mu) {
        Ok(c) => c,
        Err(e) => return failure(a, e_j, &e, Vec::new()),
    };
    let eq = match find_equilibrium_default(&cfg, settings) {
        Ok(eq) => eq,
        Err(e) => return failure(a, e_j, &e, Vec::new()),
    };
    let roots: Vec<f64> = eq.roots.iter().map(|r| r.e).collect();
    let bare = |status| Cell {
        a,
        e_j,
        status,
        record: None,
        roots: roots.clone(),
        detail: None,
    };
    let multiple = match eq.status {
        EquilibriumStatus::Crossing => return bare(CellStatus::OrbitCrossing),
        EquilibriumStatus::NoRoot => return bare(CellStatus::NoRoot),
        EquilibriumStatus::NonConverged => return bare(CellStatus::NonConverged),
        EquilibriumStatus::Found => false,
        EquilibriumStatus::MultipleRoots => true,
    };
    let rec = match classify_spatial(&cfg, &eq, settings) {
        Ok(r) => r,
        Err(e) => return failure(a, e_j, &e, roots),
    };
    let status = match rec.spatial_verdict {
        SpatialVerdict::Unstable => CellStatus::Unstable,
        SpatialVerdict::Inconclusive => CellStatus::Inconclusive,
        SpatialVerdict::LinearlyStable if rec.frequencies.is_none() => CellStatus::Degenerate,
        SpatialVerdict::LinearlyStable if multiple => CellStatus::MultipleRoots,
        SpatialVerdict::LinearlyStable => CellStatus::Found,
    };
    Cell {
        a,
        e_j,
        status,
        record: Some(rec),
        roots,
        detail: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub code_version: String,
    pub csv_schema: String,
    pub grid: GridSpec,
    pub settings: SolverSettings,
    pub jobs: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub metadata: SweepMetadata,
    /// Row-major: `a` outer, `e_J` inner.
    pub cells: Vec<Cell>,
}

/// Runs `f` on a dedicated pool of `jobs` threads.
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Err(domain("worker count must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Evaluates every cell of the grid on `jobs` workers. Cell failures are
/// recorded, never propagated.
pub fn run_sweep(grid: &GridSpec, settings: &SolverSettings, jobs: usize) -> Result<SweepGrid> {
    grid.validate()?;
    settings.validate()?;
    let start = Instant::now();
    let (a_vals, j_vals) = (grid.a.values(), grid.e_j.values());
    let points: Vec<(f64, f64)> = a_vals
        .iter()
        .flat_map(|&a| j_vals.iter().map(move |&j| (a, j)))
        .collect();
    let cells = with_pool(jobs, || {
        points
            .par_iter()
            .map(|&(a, e_j)| evaluate_cell(a, e_j, grid.mu, settings))
            .collect::<Vec<_>>()
    })?;
    Ok(SweepGrid {
        metadata: SweepMetadata {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            csv_schema: CSV_SCHEMA.to_string(),
            grid: *grid,
            settings: *settings,
            jobs,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
        cells,
    })
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

impl SweepGrid {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for c in &self.cells {
            let mut fields = vec![num(c.a), num(c.e_j), c.status.as_str().to_string()];
            match &c.record {
                Some(r) => {
                    let f = r.frequencies;
                    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
                    fields.extend(
                        [
                            r.e_star,
                            r.rbar,
                            r.abar,
                            r.bbar,
                            r.cbar,
                            r.hessian.pp,
                            r.hessian.qq,
                            r.hessian.pq,
                        ]
                        .map(num),
                    );
                    fields.push(opt(f.map(|f| f.omega_plane)));
                    fields.push(opt(f.map(|f| f.omega_z)));
                    fields.push(opt(f.map(|f| f.ratio)));
                    fields.extend([r.err.r, r.err.a, r.err.c].map(num));
                }
                None => fields.extend(std::iter::repeat_n(String::new(), 14)),
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn metadata_json(&self) -> serde_json::Value {
        let mut counts = std::collections::BTreeMap::new();
        for c in &self.cells {
            *counts.entry(c.status.as_str()).or_insert(0usize) += 1;
        }
        serde_json::json!({
            "metadata": self.metadata,
            "a_values": self.metadata.grid.a.values(),
            "e_J_values": self.metadata.grid.e_j.values(),
            "status_counts": counts,
        })
    }

    /// Points of `ratio = k`, refined by re-running the full pipeline.
    pub fn resonance(&self, k: f64, param_tol: f64) -> Vec<ResonancePoint> {
        let (a_vals, j_vals) = (
            self.metadata.grid.a.values(),
            self.metadata.grid.e_j.values(),
        );
        let values: Vec<Option<f64>> = self.cells.iter().map(Cell::ratio).collect();
        let (mu, settings) = (self.metadata.grid.mu, self.metadata.settings);
        trace_resonance(
            RatioField {
                a: &a_vals,
                e_j: &j_vals,
                values: &values,
            },
            k,
            param_tol,
            |a, e_j| evaluate_cell(a, e_j, mu, &settings).ratio(),
        )
    }
}

pub fn write_resonance_csv<W: Write>(points: &[ResonancePoint], mut w: W) -> io::Result<()> {
    writeln!(w, "{RESONANCE_HEADER}")?;
    for p in points {
        writeln!(w, "{},{},{}", num(p.a), num(p.e_j), num(p.ratio))?;
    }
    Ok(())
}
