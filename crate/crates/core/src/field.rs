//! Spatial fields of steady filtration driven by point sources.
//!
//! In free space with specific volume `v_background` at infinity the
//! potential is
//!
//! ```text
//! Q(v(x)) = Σ J_i / (4π|x - a_i|) + Q(v_background)
//! ```
//!
//! which is harmonic away from the sources. The specific volume follows by
//! inverting `Q`, temperature and pressure from the isentrope, and the
//! Darcy velocity is `u = -(k/μ)∇p = v·∇Q`. A positive intensity raises `Q`
//! (and `v`) near its source; a negative one lowers `v` toward 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eos;
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Execution};
use crate::phase::{CoexistenceCurve, PhaseLabel};
use crate::potential::QPotential;

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub position: Vec3,
    /// Signed intensity `J`.
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSet {
    sources: Vec<PointSource>,
    v_background: f64,
}

impl SourceSet {
    pub fn new(sources: Vec<PointSource>, v_background: f64) -> Result<Self> {
        if !(v_background > 1.0 + eos::VOLUME_GUARD) || !v_background.is_finite() {
            return Err(Error::InvalidParams(format!(
                "background volume {v_background} must exceed 1"
            )));
        }
        for (i, s) in sources.iter().enumerate() {
            if s.position
                .iter()
                .chain([&s.intensity])
                .any(|c| !c.is_finite())
            {
                return Err(Error::InvalidParams(format!(
                    "source {i} has non-finite data"
                )));
            }
            if let Some(j) = sources[..i].iter().position(|o| o.position == s.position) {
                return Err(Error::InvalidParams(format!(
                    "sources {j} and {i} share position {:?}",
                    s.position
                )));
            }
        }
        Ok(SourceSet {
            sources,
            v_background,
        })
    }

    pub fn sources(&self) -> &[PointSource] {
        &self.sources
    }

    pub fn v_background(&self) -> f64 {
        self.v_background
    }

    /// `Σ J_i / (4π|x - a_i|)`.
    pub fn kernel(&self, x: Vec3) -> Result<f64> {
        let mut sum = 0.0;
        for s in &self.sources {
            let r = norm(sub(x, s.position));
            if r == 0.0 {
                return Err(Error::SingularPoint(x));
            }
            sum += s.intensity / (4.0 * PI * r);
        }
        Ok(sum)
    }

    /// Analytic gradient of [`SourceSet::kernel`].
    pub fn kernel_gradient(&self, x: Vec3) -> Result<Vec3> {
        let mut g = [0.0; 3];
        for s in &self.sources {
            let d = sub(x, s.position);
            let r = norm(d);
            if r == 0.0 {
                return Err(Error::SingularPoint(x));
            }
            let c = -s.intensity / (4.0 * PI * r * r * r);
            for k in 0..3 {
                g[k] += c * d[k];
            }
        }
        Ok(g)
    }

    pub fn distance_to_nearest(&self, x: Vec3) -> f64 {
        self.sources
            .iter()
            .map(|s| norm(sub(x, s.position)))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub position: Vec3,
    pub volume: f64,
    pub temperature: f64,
    pub pressure: f64,
    pub potential: f64,
    pub velocity: Vec3,
    pub phase: PhaseLabel,
}

/// The solved filtration problem: potential, sources and phase table.
#[derive(Debug, Clone)]
pub struct FiltrationField {
    q: QPotential,
    sources: SourceSet,
    curve: CoexistenceCurve,
    q_background: f64,
}

impl FiltrationField {
    pub fn new(q: QPotential, sources: SourceSet, curve: CoexistenceCurve) -> Result<Self> {
        let q_background = q.value(sources.v_background())?;
        let out_of_range = Error::OutOfRange {
            target: q_background,
            sup: q.q_sup(),
        };
        if q_background >= q.q_sup() {
            return Err(out_of_range);
        }
        // far out Q is flat to rounding and no longer resolves the volume
        let v = q.invert(q_background)?;
        if (v - sources.v_background()).abs() > 1e-8 * sources.v_background() {
            return Err(out_of_range);
        }
        Ok(FiltrationField {
            q,
            sources,
            curve,
            q_background,
        })
    }

    pub fn potential(&self) -> &QPotential {
        &self.q
    }

    pub fn sources(&self) -> &SourceSet {
        &self.sources
    }

    pub fn curve(&self) -> &CoexistenceCurve {
        &self.curve
    }

    pub fn q_background(&self) -> f64 {
        self.q_background
    }

    /// The superposed potential at `x`.
    pub fn potential_at(&self, x: Vec3) -> Result<f64> {
        Ok(self.sources.kernel(x)? + self.q_background)
    }

    /// Specific volume at `x`.
    pub fn volume_at(&self, x: Vec3) -> Result<f64> {
        self.q.invert(self.potential_at(x)?)
    }

    /// Full state, velocity and phase at `x`.
    pub fn evaluate(&self, x: Vec3) -> Result<FieldSample> {
        let potential = self.potential_at(x)?;
        let volume = self.q.invert(potential)?;
        let iso = self.q.isentrope();
        let temperature = iso.temperature(volume)?;
        let pressure = iso.pressure(volume)?;
        let grad = self.sources.kernel_gradient(x)?;
        let phase = self.curve.classify(volume, temperature)?;
        Ok(FieldSample {
            position: x,
            volume,
            temperature,
            pressure,
            potential,
            velocity: grad.map(|g| volume * g),
            phase,
        })
    }

    /// Darcy velocity `-(k/μ)∇p` with `∇p` from central differences of step `h`.
    pub fn darcy_velocity_fd(&self, x: Vec3, h: f64) -> Result<Vec3> {
        let iso = self.q.isentrope();
        let k_over_mu = self.q.mobility().value();
        let mut u = [0.0; 3];
        for (k, uk) in u.iter_mut().enumerate() {
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let pp = iso.pressure(self.volume_at(xp)?)?;
            let pm = iso.pressure(self.volume_at(xm)?)?;
            *uk = -k_over_mu * (pp - pm) / (2.0 * h);
        }
        Ok(u)
    }
}

/// Axis-aligned box sampled at `resolution[k]` evenly spaced nodes per axis,
/// endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec3,
    pub upper: Vec3,
    pub resolution: [usize; 3],
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for k in 0..3 {
            if self.resolution[k] < 2 {
                return Err(Error::InvalidParams(format!(
                    "grid resolution along axis {k} must be at least 2, got {}",
                    self.resolution[k]
                )));
            }
            if !(self.upper[k] > self.lower[k]) {
                return Err(Error::InvalidParams(format!(
                    "grid upper bound must exceed lower bound along axis {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> Vec3 {
        std::array::from_fn(|k| (self.upper[k] - self.lower[k]) / (self.resolution[k] - 1) as f64)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Node `index`, with x varying fastest, then y, then z.
    pub fn point(&self, index: usize) -> Vec3 {
        let [nx, ny, _] = self.resolution;
        let ijk = [index % nx, (index / nx) % ny, index / (nx * ny)];
        let h = self.spacing();
        std::array::from_fn(|k| self.lower[k] + h[k] * ijk[k] as f64)
    }

    /// Dual-cell volume of node `index`.
    pub fn node_weight(&self, index: usize) -> f64 {
        let [nx, ny, _] = self.resolution;
        let ijk = [index % nx, (index / nx) % ny, index / (nx * ny)];
        let mut w = self.cell_volume();
        for (i, n) in ijk.into_iter().zip(self.resolution) {
            if i == 0 || i == n - 1 {
                w *= 0.5;
            }
        }
        w
    }

    /// Same box with `factor` times as many cells per axis.
    pub fn refined(&self, factor: usize) -> GridSpec {
        GridSpec {
            resolution: self.resolution.map(|r| (r - 1) * factor + 1),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingReason {
    /// Within one grid cell of a source.
    SourceExclusion,
    /// Superposed potential not below the supremum of Q.
    OutOfRange,
    /// Temperature below the coexistence table.
    BelowTable,
    /// Any other solver failure.
    SolverFailure,
}

impl MissingReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            MissingReason::SourceExclusion => "source_exclusion",
            MissingReason::OutOfRange => "out_of_range",
            MissingReason::BelowTable => "below_table",
            MissingReason::SolverFailure => "solver_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridRecord {
    Sample(FieldSample),
    Missing {
        position: Vec3,
        reason: MissingReason,
    },
}

impl GridRecord {
    pub fn position(&self) -> Vec3 {
        match self {
            GridRecord::Sample(s) => s.position,
            GridRecord::Missing { position, .. } => *position,
        }
    }

    pub fn sample(&self) -> Option<&FieldSample> {
        match self {
            GridRecord::Sample(s) => Some(s),
            GridRecord::Missing { .. } => None,
        }
    }
}

/// Per-label node counts and volumes. Each node stands for its dual cell
/// (trapezoid weights: halved per boundary axis), so the volumes of all
/// nodes add up to the box volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub counts: Vec<(PhaseLabel, usize)>,
    pub volumes: Vec<(PhaseLabel, f64)>,
    pub missing: Vec<(MissingReason, usize)>,
}

impl PhaseSummary {
    pub fn count(&self, label: PhaseLabel) -> usize {
        self.counts
            .iter()
            .find(|(l, _)| *l == label)
            .map_or(0, |(_, c)| *c)
    }

    pub fn missing_count(&self, reason: MissingReason) -> usize {
        self.missing
            .iter()
            .find(|(r, _)| *r == reason)
            .map_or(0, |(_, c)| *c)
    }

    pub fn volume(&self, label: PhaseLabel) -> f64 {
        self.volumes
            .iter()
            .find(|(l, _)| *l == label)
            .map_or(0.0, |(_, v)| *v)
    }

    pub fn sampled(&self) -> usize {
        self.counts.iter().map(|(_, c)| c).sum()
    }

    /// Fraction of successfully sampled nodes carrying `label`.
    pub fn fraction(&self, label: PhaseLabel) -> f64 {
        match self.sampled() {
            0 => 0.0,
            n => self.count(label) as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    pub grid: GridSpec,
    pub records: Vec<GridRecord>,
    pub summary: PhaseSummary,
}

fn missing_reason(err: &Error) -> MissingReason {
    match err {
        Error::OutOfRange { .. } => MissingReason::OutOfRange,
        Error::OutOfTable { .. } => MissingReason::BelowTable,
        Error::SingularPoint(_) => MissingReason::SourceExclusion,
        _ => MissingReason::SolverFailure,
    }
}

/// Evaluates the field on every grid node. Nodes closer than one grid cell
/// to a source, and nodes where the solve fails, become missing records.
pub fn sample_grid(
    field: &FiltrationField,
    grid: &GridSpec,
    execution: Execution,
) -> Result<GridSamples> {
    grid.validate()?;
    let exclusion = grid.spacing().iter().copied().fold(0.0, f64::max);
    let records = map_indexed(grid.len(), execution, |i| {
        let x = grid.point(i);
        if field.sources().distance_to_nearest(x) < exclusion {
            return GridRecord::Missing {
                position: x,
                reason: MissingReason::SourceExclusion,
            };
        }
        match field.evaluate(x) {
            Ok(s) => GridRecord::Sample(s),
            Err(e) => GridRecord::Missing {
                position: x,
                reason: missing_reason(&e),
            },
        }
    });
    let summary = summarize(&records, grid);
    Ok(GridSamples {
        grid: *grid,
        records,
        summary,
    })
}

fn summarize(records: &[GridRecord], grid: &GridSpec) -> PhaseSummary {
    let mut counts: Vec<(PhaseLabel, usize)> = PhaseLabel::ALL.iter().map(|&l| (l, 0)).collect();
    let mut volumes: Vec<(PhaseLabel, f64)> = PhaseLabel::ALL.iter().map(|&l| (l, 0.0)).collect();
    let mut missing: Vec<(MissingReason, usize)> = [
        MissingReason::SourceExclusion,
        MissingReason::OutOfRange,
        MissingReason::BelowTable,
        MissingReason::SolverFailure,
    ]
    .iter()
    .map(|&r| (r, 0))
    .collect();
    for (i, r) in records.iter().enumerate() {
        match r {
            GridRecord::Sample(s) => {
                if let Some(c) = counts.iter_mut().find(|(l, _)| *l == s.phase) {
                    c.1 += 1;
                }
                if let Some(c) = volumes.iter_mut().find(|(l, _)| *l == s.phase) {
                    c.1 += grid.node_weight(i);
                }
            }
            GridRecord::Missing { reason, .. } => {
                if let Some(c) = missing.iter_mut().find(|(m, _)| m == reason) {
                    c.1 += 1;
                }
            }
        }
    }
    PhaseSummary {
        counts,
        volumes,
        missing,
    }
}

/// Probe points for the finite-difference check of `ΔQ(v(x)) = 0`.
///
/// The probe nodes are fixed by `nodes`; `h` is only the stencil step, so
/// refining `h` at fixed nodes isolates the truncation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityProbe {
    pub nodes: GridSpec,
    pub h: f64,
    /// Nodes closer than `max(3h, exclusion_radius)` to a source are skipped.
    pub exclusion_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityReport {
    /// Max over probe nodes of the 7-point Laplacian of `Q(v(x))`.
    pub max_laplacian: f64,
    /// Max over probe nodes of the central-difference `div(u/v)`.
    pub max_continuity: f64,
    pub nodes_used: usize,
    pub nodes_skipped: usize,
}

/// `Q` recomputed from the solved volume, so the check runs through the
/// inversion and the quadrature rather than the kernel sum alone.
fn recomputed_potential(field: &FiltrationField, x: Vec3) -> Result<f64> {
    let v = field.volume_at(x)?;
    field.potential().value(v)
}

fn mass_flux(field: &FiltrationField, x: Vec3) -> Result<Vec3> {
    let v = field.volume_at(x)?;
    let g = field.sources().kernel_gradient(x)?;
    // u/v with u = v∇Q
    Ok(g.map(|gk| v * gk / v))
}

fn probe_node(field: &FiltrationField, x: Vec3, h: f64) -> Result<(f64, f64)> {
    let center = recomputed_potential(field, x)?;
    let mut lap = -6.0 * center;
    let mut div = 0.0;
    for k in 0..3 {
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        lap += recomputed_potential(field, xp)? + recomputed_potential(field, xm)?;
        div += (mass_flux(field, xp)?[k] - mass_flux(field, xm)?[k]) / (2.0 * h);
    }
    Ok((lap / (h * h), div))
}

pub fn verify_harmonicity(
    field: &FiltrationField,
    probe: &HarmonicityProbe,
    execution: Execution,
) -> Result<HarmonicityReport> {
    probe.nodes.validate()?;
    if !(probe.h > 0.0) {
        return Err(Error::InvalidParams(format!(
            "stencil step {} must be positive",
            probe.h
        )));
    }
    let exclusion = (3.0 * probe.h).max(probe.exclusion_radius);
    let results = map_indexed(probe.nodes.len(), execution, |i| {
        let x = probe.nodes.point(i);
        if field.sources().distance_to_nearest(x) < exclusion {
            return None;
        }
        probe_node(field, x, probe.h).ok()
    });
    let mut report = HarmonicityReport {
        max_laplacian: 0.0,
        max_continuity: 0.0,
        nodes_used: 0,
        nodes_skipped: 0,
    };
    for r in results {
        match r {
            Some((lap, div)) => {
                report.max_laplacian = report.max_laplacian.max(lap.abs());
                report.max_continuity = report.max_continuity.max(div.abs());
                report.nodes_used += 1;
            }
            None => report.nodes_skipped += 1,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{critical_point, entropy};
    use crate::isentrope::{s0_threshold, Isentrope};
    use crate::phase::trace_coexistence_curve;
    use crate::potential::Mobility;
    use std::sync::OnceLock;

    const V_BG: f64 = 9.5;

    fn shared() -> &'static (QPotential, CoexistenceCurve) {
        static CELL: OnceLock<(QPotential, CoexistenceCurve)> = OnceLock::new();
        CELL.get_or_init(|| {
            let tc = critical_point().temperature;
            let curve = trace_coexistence_curve(0.25 * tc, 120).unwrap();
            let iso = Isentrope::new(3, 2.0 * s0_threshold(3).unwrap()).unwrap();
            let q = QPotential::build(iso, Mobility::new(1.0).unwrap(), V_BG).unwrap();
            (q, curve)
        })
    }

    fn field(sources: &[(Vec3, f64)]) -> FiltrationField {
        let (q, curve) = shared();
        let srcs = sources
            .iter()
            .map(|&(position, intensity)| PointSource {
                position,
                intensity,
            })
            .collect();
        FiltrationField::new(
            q.clone(),
            SourceSet::new(srcs, V_BG).unwrap(),
            curve.clone(),
        )
        .unwrap()
    }

    fn three_sources() -> FiltrationField {
        field(&[
            ([0.0, 0.0, 0.0], 2e-4),
            ([1.5, 0.0, 0.0], -1e-4),
            ([0.0, 1.5, 0.5], 1.5e-4),
        ])
    }

    #[test]
    fn rejects_duplicate_positions_and_bad_background() {
        let s = PointSource {
            position: [1.0, 0.0, 0.0],
            intensity: 1.0,
        };
        assert!(SourceSet::new(vec![s, s], V_BG).is_err());
        assert!(SourceSet::new(vec![], 1.0).is_err());
        assert!(SourceSet::new(vec![], f64::NAN).is_err());
    }

    #[test]
    fn no_sources_is_uniform() {
        let f = field(&[]);
        for x in [[0.0, 0.0, 0.0], [3.0, -2.0, 7.0]] {
            let s = f.evaluate(x).unwrap();
            assert!((s.volume - V_BG).abs() < 1e-10);
            assert_eq!(s.velocity, [0.0; 3]);
        }
    }

    #[test]
    fn sink_volume_rises_along_ray() {
        let f = field(&[([0.0; 3], -3e-4)]);
        let dir = [0.48, 0.6, 0.64];
        let mut prev: Option<FieldSample> = None;
        for i in 0..60 {
            let r = 0.2 * 1.1_f64.powi(i);
            let s = f.evaluate(dir.map(|d| d * r)).unwrap();
            assert!(s.volume < V_BG);
            if let Some(p) = prev {
                assert!(s.volume > p.volume, "v not increasing at r={r}");
                assert!(s.pressure < p.pressure, "p not decreasing at r={r}");
            }
            prev = Some(s);
        }
        let first = V_BG - f.evaluate(dir.map(|d| d * 0.2)).unwrap().volume;
        assert!(V_BG - prev.unwrap().volume < 1e-2 * first);
    }

    #[test]
    fn mirror_symmetry() {
        let f = field(&[([1.0, 0.3, 0.2], 2e-4), ([-1.0, 0.3, 0.2], 2e-4)]);
        for x in [[0.4, 0.1, -0.7], [2.5, 1.0, 0.3], [0.05, -1.0, 2.0]] {
            let a = f.evaluate(x).unwrap();
            let b = f.evaluate([-x[0], x[1], x[2]]).unwrap();
            assert!((a.volume - b.volume).abs() <= 1e-12 * a.volume);
            assert!(
                (a.velocity[0] + b.velocity[0]).abs() <= 1e-12 * a.velocity[0].abs().max(1e-300)
            );
            assert!(
                (a.velocity[1] - b.velocity[1]).abs() <= 1e-12 * a.velocity[1].abs().max(1e-300)
            );
        }
    }

    #[test]
    fn superposition_is_linear() {
        let srcs = [
            ([0.0, 0.0, 0.0], 2e-4),
            ([1.5, 0.0, 0.0], -1e-4),
            ([0.0, 1.5, 0.5], 1.5e-4),
        ];
        let all = field(&srcs);
        let singles: Vec<_> = srcs.iter().map(|&s| field(&[s])).collect();
        let x = [0.7, -0.4, 1.1];
        let sum: f64 = singles.iter().map(|f| f.potential_at(x).unwrap()).sum();
        let expected = sum - (srcs.len() - 1) as f64 * all.q_background();
        assert!((all.potential_at(x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn far_field_decays_to_background() {
        let f = three_sources();
        let slope = f.potential().derivative(V_BG).unwrap();
        for dir in [[1.0, 0.0, 0.0], [0.0, -0.6, 0.8], [-0.36, 0.48, 0.8]] {
            let x = dir.map(|d| d * 15.0);
            let dq = f.sources().kernel(x).unwrap().abs();
            let dv = (f.volume_at(x).unwrap() - V_BG).abs();
            assert!(dv <= 2.0 * dq / slope, "dv={dv} bound={}", 2.0 * dq / slope);
        }
    }

    #[test]
    fn darcy_velocity_matches_pressure_gradient() {
        let f = three_sources();
        for x in [[0.6, 0.7, -0.4], [-1.0, 0.5, 0.3]] {
            let u = f.evaluate(x).unwrap().velocity;
            let err = |h: f64| {
                let fd = f.darcy_velocity_fd(x, h).unwrap();
                (0..3).map(|k| (fd[k] - u[k]).abs()).fold(0.0, f64::max)
            };
            let (e1, e2) = (err(0.02), err(0.01));
            let scale = u.iter().map(|c| c.abs()).fold(0.0, f64::max);
            assert!(e1 < 1e-2 * scale);
            let ratio = e1 / e2;
            assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
        }
    }

    fn probe_box() -> GridSpec {
        GridSpec {
            lower: [-1.5, -1.5, -1.0],
            upper: [2.5, 2.5, 1.5],
            resolution: [5, 5, 4],
        }
    }

    #[test]
    fn harmonicity_is_second_order() {
        let f = three_sources();
        let run = |h: f64| {
            let probe = HarmonicityProbe {
                nodes: probe_box(),
                h,
                exclusion_radius: 0.6,
            };
            verify_harmonicity(&f, &probe, Execution::Sequential).unwrap()
        };
        let (a, b) = (run(0.1), run(0.05));
        assert_eq!(a.nodes_used, b.nodes_used);
        assert!(a.nodes_used > 0);
        let lap = a.max_laplacian / b.max_laplacian;
        let div = a.max_continuity / b.max_continuity;
        assert!((2.8..5.2).contains(&lap), "laplacian ratio {lap}");
        assert!((2.8..5.2).contains(&div), "continuity ratio {div}");
    }

    #[test]
    fn harmonicity_without_sources_vanishes() {
        let f = field(&[]);
        let probe = HarmonicityProbe {
            nodes: probe_box(),
            h: 0.1,
            exclusion_radius: 0.0,
        };
        let r = verify_harmonicity(&f, &probe, Execution::Sequential).unwrap();
        assert_eq!(r.nodes_skipped, 0);
        assert!(r.max_laplacian < 1e-10);
        assert_eq!(r.max_continuity, 0.0);
    }

    #[test]
    fn grid_entropy_is_constant() {
        let f = three_sources();
        let g = GridSpec {
            lower: [-2.0, -2.0, -1.0],
            upper: [3.0, 3.0, 1.0],
            resolution: [11, 11, 5],
        };
        let s = sample_grid(&f, &g, Execution::Parallel).unwrap();
        let n = f.potential().isentrope().n();
        let sig: Vec<f64> = s
            .records
            .iter()
            .filter_map(|r| r.sample())
            .map(|s| entropy(s.volume, s.temperature, n))
            .collect();
        assert!(sig.len() > 500);
        let lo = sig.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo < 1e-10, "spread {}", hi - lo);
    }

    #[test]
    fn weak_sources_on_hot_isentrope_are_supercritical() {
        let (_, curve) = shared();
        let iso = Isentrope::new(3, 2.0).unwrap();
        let q = QPotential::build(iso, Mobility::new(1.0).unwrap(), 3.0).unwrap();
        let srcs = SourceSet::new(
            vec![PointSource {
                position: [0.0; 3],
                intensity: 1e-3,
            }],
            3.0,
        )
        .unwrap();
        let f = FiltrationField::new(q, srcs, curve.clone()).unwrap();
        let g = GridSpec {
            lower: [-1.0; 3],
            upper: [1.0; 3],
            resolution: [6, 6, 6],
        };
        let s = sample_grid(&f, &g, Execution::Parallel).unwrap();
        assert!(s.summary.sampled() > 0);
        assert_eq!(s.summary.fraction(PhaseLabel::Supercritical), 1.0);
    }

    #[test]
    fn strong_source_yields_out_of_range_records() {
        let f = field(&[([0.0; 3], 5e-3)]);
        let g = GridSpec {
            lower: [-1.0; 3],
            upper: [1.0; 3],
            resolution: [9, 9, 9],
        };
        let s = sample_grid(&f, &g, Execution::Sequential).unwrap();
        assert!(s.summary.missing_count(MissingReason::OutOfRange) > 0);
        assert_eq!(s.summary.missing_count(MissingReason::SourceExclusion), 1);
        assert!(s.summary.sampled() > 0);
    }

    #[test]
    fn node_weights_tile_the_box() {
        let g = probe_box();
        let total: f64 = (0..g.len()).map(|i| g.node_weight(i)).sum();
        assert!((total - 4.0 * 4.0 * 2.5).abs() < 1e-12);
        assert_eq!(g.point(g.len() - 1), g.upper);
        assert_eq!(g.refined(2).resolution, [9, 9, 7]);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = three_sources();
        let g = GridSpec {
            lower: [-2.0, -2.0, -1.0],
            upper: [3.0, 3.0, 1.0],
            resolution: [9, 8, 4],
        };
        let a = sample_grid(&f, &g, Execution::Sequential).unwrap();
        let b = sample_grid(&f, &g, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
