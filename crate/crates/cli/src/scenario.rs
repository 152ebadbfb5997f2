//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! s0 = 0.68
//! mobility = 1.0
//!
//! [gas]
//! dof = 3
//!
//! [curve]
//! t_min = 0.0425
//!
//! [sources]
//! v_background = 9.5
//! points = [{ position = [0.0, 0.0, 0.0], intensity = 4e-4 }]
//!
//! [grid]
//! lower = [-3.5, -3.5, -1.0]
//! upper = [3.5, 2.5, 1.0]
//! resolution = [36, 31, 11]
//! ```
//!
//! `v_ref` (where Q vanishes) defaults to `sources.v_background`. The
//! `[outputs]` table selects artifacts; all default to on except `json`
//! and `selfcheck`.

use pr_filtration::eos::{critical_point, GasParams};
use pr_filtration::field::{GridSpec, PointSource};
use pr_filtration::isentrope::s0_threshold;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult, FieldIssue};

pub const DEFAULT_CURVE_STEPS: usize = 200;

fn default_steps() -> usize {
    DEFAULT_CURVE_STEPS
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConstantsSpec {
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSpec {
    pub dof: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ScaleConstantsSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    /// Lowest tabulated temperature (reduced).
    pub t_min: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub position: [f64; 3],
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcesSpec {
    pub v_background: f64,
    #[serde(default)]
    pub points: Vec<SourceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub resolution: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSpec {
    #[serde(default = "yes")]
    pub coexistence: bool,
    #[serde(default = "yes")]
    pub field: bool,
    #[serde(default = "yes")]
    pub harmonicity: bool,
    /// Mirror every CSV as JSON.
    #[serde(default)]
    pub json: bool,
    /// Append the self-check to `report.txt`.
    #[serde(default)]
    pub selfcheck: bool,
}

impl Default for OutputsSpec {
    fn default() -> Self {
        OutputsSpec {
            coexistence: true,
            field: true,
            harmonicity: true,
            json: false,
            selfcheck: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub s0: f64,
    pub mobility: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_ref: Option<f64>,
    pub gas: GasSpec,
    pub curve: CurveSpec,
    pub sources: SourcesSpec,
    pub grid: GridSection,
    #[serde(default)]
    pub outputs: OutputsSpec,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> CliResult<Scenario> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| format!("document[{}..{}]", s.start, s.end))
                .unwrap_or_else(|| "document".into());
            CliError::Validation(vec![FieldIssue::new(field, e.message().trim())])
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &std::path::Path) -> CliResult<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical serialization, as lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn v_ref(&self) -> f64 {
        self.v_ref.unwrap_or(self.sources.v_background)
    }

    pub fn gas_params(&self) -> pr_filtration::Result<GasParams> {
        let g = GasParams::new(self.gas.dof)?;
        match &self.gas.constants {
            Some(c) => g.with_constants(c.a, c.b, c.r),
            None => Ok(g),
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            lower: self.grid.lower,
            upper: self.grid.upper,
            resolution: self.grid.resolution,
        }
    }

    pub fn point_sources(&self) -> Vec<PointSource> {
        self.sources
            .points
            .iter()
            .map(|p| PointSource {
                position: p.position,
                intensity: p.intensity,
            })
            .collect()
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> CliResult<()> {
        let mut issues = Vec::new();
        let mut bad = |field: &str, message: String| issues.push(FieldIssue::new(field, message));

        if self.gas.dof < 3 {
            bad(
                "gas.dof",
                format!("must be at least 3, got {}", self.gas.dof),
            );
        }
        if let Some(c) = &self.gas.constants {
            for (name, x) in [("a", c.a), ("b", c.b), ("r", c.r)] {
                if !(x > 0.0 && x.is_finite()) {
                    bad(
                        &format!("gas.constants.{name}"),
                        format!("must be positive, got {x}"),
                    );
                }
            }
        }
        if !self.s0.is_finite() || self.s0 <= 0.0 {
            bad("s0", format!("must be a positive number, got {}", self.s0));
        } else if self.gas.dof >= 3 {
            let threshold = s0_threshold(self.gas.dof).expect("dof checked");
            if self.s0 <= threshold {
                bad(
                    "s0",
                    format!(
                        "{} does not exceed the invertibility threshold {threshold} for n = {}",
                        self.s0, self.gas.dof
                    ),
                );
            }
        }
        if !(self.mobility > 0.0 && self.mobility.is_finite()) {
            bad(
                "mobility",
                format!("must be positive, got {}", self.mobility),
            );
        }
        if let Some(v) = self.v_ref {
            if !(v > 1.0 && v.is_finite()) {
                bad("v_ref", format!("must exceed 1, got {v}"));
            }
        }
        let v_bg = self.sources.v_background;
        if !(v_bg > 1.0 && v_bg.is_finite()) {
            bad("sources.v_background", format!("must exceed 1, got {v_bg}"));
        }
        for (i, p) in self.sources.points.iter().enumerate() {
            if p.position.iter().any(|c| !c.is_finite()) {
                bad(
                    &format!("sources.points[{i}].position"),
                    "must be finite".into(),
                );
            }
            if !p.intensity.is_finite() {
                bad(
                    &format!("sources.points[{i}].intensity"),
                    "must be finite".into(),
                );
            }
            if let Some(j) = self.sources.points[..i]
                .iter()
                .position(|o| o.position == p.position)
            {
                bad(
                    &format!("sources.points[{i}].position"),
                    format!("duplicates sources.points[{j}]"),
                );
            }
        }
        let tc = critical_point().temperature;
        let t_min = self.curve.t_min;
        if !(t_min > 0.0 && t_min < tc) {
            bad(
                "curve.t_min",
                format!("must lie in (0, T_c = {tc}), got {t_min}"),
            );
        }
        if self.curve.steps < 2 {
            bad(
                "curve.steps",
                format!("must be at least 2, got {}", self.curve.steps),
            );
        }
        for k in 0..3 {
            if self.grid.resolution[k] < 2 {
                bad(
                    &format!("grid.resolution[{k}]"),
                    format!("must be at least 2, got {}", self.grid.resolution[k]),
                );
            }
            let (lo, hi) = (self.grid.lower[k], self.grid.upper[k]);
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                bad(
                    &format!("grid.upper[{k}]"),
                    format!("must exceed grid.lower[{k}] = {lo}"),
                );
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
s0 = 0.68
mobility = 1.0

[gas]
dof = 3

[curve]
t_min = 0.0425

[sources]
v_background = 9.5
points = [
  { position = [0.0, 0.0, 0.0], intensity = 4e-4 },
  { position = [2.0, 1.0, 0.0], intensity = -1.25e-4 },
]

[grid]
lower = [-1.0, -1.0, -1.0]
upper = [1.0, 1.0, 1.0]
resolution = [5, 5, 5]
"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::from_toml_str(SAMPLE).unwrap();
        assert_eq!(s.curve.steps, DEFAULT_CURVE_STEPS);
        assert_eq!(s.v_ref(), 9.5);
        assert!(s.outputs.field && !s.outputs.json);
        assert_eq!(s.point_sources().len(), 2);
    }

    #[test]
    fn round_trips_losslessly() {
        let mut s = Scenario::from_toml_str(SAMPLE).unwrap();
        s.s0 = 0.1 + 0.2 + 0.5;
        s.sources.points[1].intensity = std::f64::consts::PI * 1e-5;
        s.v_ref = Some(1.0 + f64::EPSILON * 8.0);
        let back = Scenario::from_toml_str(&s.to_toml_string()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.hash(), s.hash());
    }

    #[test]
    fn lists_every_offending_field() {
        let text = SAMPLE
            .replace("dof = 3", "dof = 2")
            .replace("v_background = 9.5", "v_background = 0.5")
            .replace("resolution = [5, 5, 5]", "resolution = [5, 1, 0]");
        let Err(CliError::Validation(issues)) = Scenario::from_toml_str(&text) else {
            panic!("expected validation error");
        };
        let fields: Vec<&str> = issues.iter().map(|i| i.field.as_str()).collect();
        assert_eq!(
            fields,
            [
                "gas.dof",
                "sources.v_background",
                "grid.resolution[1]",
                "grid.resolution[2]"
            ]
        );
    }

    #[test]
    fn low_s0_names_threshold() {
        let text = SAMPLE.replace("s0 = 0.68", "s0 = 0.2");
        let err = Scenario::from_toml_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("s0") && msg.contains("0.33894529636"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = SAMPLE.replace("mobility = 1.0", "mobility = 1.0\nmobilty = 2.0");
        assert!(matches!(
            Scenario::from_toml_str(&text),
            Err(CliError::Validation(_))
        ));
    }
}
