//! Scenario execution shared by the subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pr_filtration::eos::critical_point;
use pr_filtration::field::{
    sample_grid, verify_harmonicity, FiltrationField, GridSamples, HarmonicityProbe,
    HarmonicityReport, MissingReason, SourceSet,
};
use pr_filtration::isentrope::{cubic_root, s0_applicability_bound, s0_threshold, Isentrope};
use pr_filtration::parallel::Execution;
use pr_filtration::phase::{trace_coexistence_curve, CoexistenceCurve, PhaseLabel};
use pr_filtration::potential::{Mobility, QPotential};

use crate::error::{CliError, CliResult};
use crate::output::{self, CoexistenceRow, COEXISTENCE_CSV, FIELD_CSV, REPORT_TXT};
use crate::scenario::Scenario;
use crate::selfcheck::{run_selfcheck, SelfCheckReport};

/// Command-line values that replace scenario entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub resolution: Option<[usize; 3]>,
    pub t_min: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut scenario: Scenario) -> CliResult<Scenario> {
        if let Some(r) = self.resolution {
            scenario.grid.resolution = r;
        }
        if let Some(t) = self.t_min {
            scenario.curve.t_min = t;
        }
        scenario.validate()?;
        Ok(scenario)
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub execution: Execution,
}

impl RunOptions {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn ensure_dir(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))
    }
}

pub fn critical_summary(dof: u32) -> CliResult<String> {
    let cp = critical_point();
    let solver = |e| CliError::solver(format!("isentrope bounds for n = {dof}"), e);
    let root = cubic_root(dof).map_err(solver)?;
    let threshold = s0_threshold(dof).map_err(solver)?;
    let bound = s0_applicability_bound(dof).map_err(solver)?;
    let mut s = String::new();
    writeln!(
        s,
        "critical point: v_c = {}, T_c = {}, p_c = {}",
        cp.volume, cp.temperature, cp.pressure
    )
    .ok();
    writeln!(s, "n = {dof}: cubic root v* = {}", root.v_star).ok();
    writeln!(s, "n = {dof}: s0 invertibility threshold = {threshold}").ok();
    writeln!(s, "n = {dof}: s0 applicability bound = {bound}").ok();
    Ok(s)
}

pub fn build_curve(scenario: &Scenario) -> CliResult<CoexistenceCurve> {
    trace_coexistence_curve(scenario.curve.t_min, scenario.curve.steps)
        .map_err(|e| CliError::solver("coexistence curve", e))
}

pub fn build_field(scenario: &Scenario, curve: CoexistenceCurve) -> CliResult<FiltrationField> {
    let iso = Isentrope::new(scenario.gas.dof, scenario.s0)
        .map_err(|e| CliError::solver("isentrope", e))?;
    let mobility = Mobility::new(scenario.mobility).map_err(|e| CliError::solver("mobility", e))?;
    let q = QPotential::build(iso, mobility, scenario.v_ref())
        .map_err(|e| CliError::solver("filtration potential", e))?;
    let sources = SourceSet::new(scenario.point_sources(), scenario.sources.v_background)
        .map_err(|e| CliError::solver("sources", e))?;
    FiltrationField::new(q, sources, curve).map_err(|e| CliError::solver("background state", e))
}

pub fn write_coexistence(
    scenario: &Scenario,
    curve: &CoexistenceCurve,
    opts: &RunOptions,
) -> CliResult<PathBuf> {
    opts.ensure_dir()?;
    let rows: Vec<CoexistenceRow> = curve.points().iter().map(CoexistenceRow::from).collect();
    let path = opts.path(COEXISTENCE_CSV);
    let hash = scenario.hash();
    output::write_csv(&path, &hash, &rows)?;
    if scenario.outputs.json {
        output::write_json(&path, &hash, &rows)?;
    }
    Ok(path)
}

pub fn write_field(
    scenario: &Scenario,
    field: &FiltrationField,
    samples: &GridSamples,
    opts: &RunOptions,
) -> CliResult<PathBuf> {
    opts.ensure_dir()?;
    let rows = output::field_rows(field, samples);
    let path = opts.path(FIELD_CSV);
    let hash = scenario.hash();
    output::write_csv(&path, &hash, &rows)?;
    if scenario.outputs.json {
        output::write_json(&path, &hash, &rows)?;
    }
    Ok(path)
}

pub fn sample(
    scenario: &Scenario,
    field: &FiltrationField,
    execution: Execution,
) -> CliResult<GridSamples> {
    sample_grid(field, &scenario.grid_spec(), execution)
        .map_err(|e| CliError::solver("grid sampling", e))
}

/// Harmonicity at the grid's smallest spacing `h` and at `h/2`, probed on
/// a coarse lattice spanning the same box.
pub fn harmonicity(
    scenario: &Scenario,
    field: &FiltrationField,
    execution: Execution,
) -> CliResult<(f64, HarmonicityReport, HarmonicityReport)> {
    let grid = scenario.grid_spec();
    let h = grid.spacing().iter().copied().fold(f64::INFINITY, f64::min);
    let mut nodes = grid;
    nodes.resolution = grid.resolution.map(|r| r.min(9));
    let run = |step: f64| {
        let probe = HarmonicityProbe {
            nodes,
            h: step,
            exclusion_radius: 3.0 * h,
        };
        verify_harmonicity(field, &probe, execution)
            .map_err(|e| CliError::solver("harmonicity probe", e))
    };
    Ok((h, run(h)?, run(0.5 * h)?))
}

pub struct RunSummary {
    pub report: String,
    pub samples: Option<GridSamples>,
    pub selfcheck: Option<SelfCheckReport>,
}

fn summarize_grid(out: &mut String, samples: &GridSamples) {
    let g = &samples.grid;
    let s = &samples.summary;
    let box_volume: f64 = (0..3).map(|k| g.upper[k] - g.lower[k]).product();
    writeln!(
        out,
        "grid: resolution {:?}, {} nodes, spacing {:?}",
        g.resolution,
        g.len(),
        g.spacing()
    )
    .ok();
    writeln!(out, "phase          nodes       volume   volume_fraction").ok();
    for label in PhaseLabel::ALL {
        writeln!(
            out,
            "{:<12} {:>7} {:>12.6} {:>17.6}",
            label.as_str(),
            s.count(label),
            s.volume(label),
            s.volume(label) / box_volume
        )
        .ok();
    }
    let missing: Vec<String> = [
        MissingReason::SourceExclusion,
        MissingReason::OutOfRange,
        MissingReason::BelowTable,
        MissingReason::SolverFailure,
    ]
    .iter()
    .map(|r| format!("{}={}", r.as_str(), s.missing_count(*r)))
    .collect();
    writeln!(out, "missing: {}", missing.join(", ")).ok();
}

/// Runs every artifact the scenario requests and writes `report.txt`.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> CliResult<RunSummary> {
    opts.ensure_dir()?;
    let mut report = critical_summary(scenario.gas.dof)?;
    let curve = build_curve(scenario)?;
    writeln!(
        report,
        "coexistence: {} points down to T = {}",
        curve.points().len(),
        scenario.curve.t_min
    )
    .ok();
    if scenario.outputs.coexistence {
        write_coexistence(scenario, &curve, opts)?;
    }
    let mut samples = None;
    if scenario.outputs.field || scenario.outputs.harmonicity {
        let field = build_field(scenario, curve)?;
        let q = field.potential();
        writeln!(
            report,
            "isentrope: n = {}, s0 = {}, sigma0 = {}",
            scenario.gas.dof,
            scenario.s0,
            q.isentrope().entropy_level()
        )
        .ok();
        writeln!(
            report,
            "potential: v_ref = {}, Q_sup = {}, Q(v_background) = {}",
            q.v_ref(),
            q.q_sup(),
            field.q_background()
        )
        .ok();
        writeln!(
            report,
            "sources: {}, v_background = {}",
            scenario.sources.points.len(),
            scenario.sources.v_background
        )
        .ok();
        if scenario.outputs.field {
            let s = sample(scenario, &field, opts.execution)?;
            write_field(scenario, &field, &s, opts)?;
            summarize_grid(&mut report, &s);
            samples = Some(s);
        }
        if scenario.outputs.harmonicity {
            let (h, a, b) = harmonicity(scenario, &field, opts.execution)?;
            writeln!(
                report,
                "harmonicity: {} probe nodes ({} skipped); h = {h}: max|lap Q| = {:.6e}, max|div(rho u)| = {:.6e}; h/2: {:.6e}, {:.6e}; ratios {:.4}, {:.4}",
                a.nodes_used,
                a.nodes_skipped,
                a.max_laplacian,
                a.max_continuity,
                b.max_laplacian,
                b.max_continuity,
                a.max_laplacian / b.max_laplacian,
                a.max_continuity / b.max_continuity
            )
            .ok();
        }
    }
    let mut selfcheck = None;
    if scenario.outputs.selfcheck {
        let r = run_selfcheck(None, opts.execution);
        writeln!(report, "self-check:\n{}", r.render()).ok();
        selfcheck = Some(r);
    }
    output::write_text(&opts.path(REPORT_TXT), &scenario.hash(), &report)?;
    if let Some(r) = &selfcheck {
        if !r.all_passed() {
            return Err(CliError::SelfCheck(r.failed()));
        }
    }
    Ok(RunSummary {
        report,
        samples,
        selfcheck,
    })
}

/// Path of the report a run writes under `out_dir`.
pub fn report_path(out_dir: &Path) -> PathBuf {
    out_dir.join(REPORT_TXT)
}
