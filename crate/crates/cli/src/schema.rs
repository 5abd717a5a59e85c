//! On-disk schemas: problem files, control files, result envelopes.
//! Complex numbers are serialized as [re, im] pairs.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use landscape_lab::error::Error as CoreError;
use landscape_lab::grouplandscape::{GateGroup, Objective};
use landscape_lab::propagate::PiecewiseControl;
use landscape_lab::qcore::{CMat, HermitianOperator, StateVector, UnitaryMatrix};
use landscape_lab::sysmodel::{registry, ControlSystem, ExampleProblem, RegistryId};

pub const SCHEMA_VERSION: u32 = 1;

pub type JsonMat = Vec<Vec<[f64; 2]>>;
pub type JsonVec = Vec<[f64; 2]>;

pub fn mat_to_json(m: &CMat) -> JsonMat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[[i, j]].re, m[[i, j]].im]).collect())
        .collect()
}

pub fn mat_from_json(j: &JsonMat) -> Result<CMat, String> {
    let n = j.len();
    if n == 0 || j.iter().any(|row| row.len() != n) {
        return Err("matrix must be square and non-empty".into());
    }
    Ok(Array2::from_shape_fn((n, n), |(r, c)| {
        C64::new(j[r][c][0], j[r][c][1])
    }))
}

pub fn vec_to_json(v: &Array1<C64>) -> JsonVec {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vec_from_json(j: &JsonVec) -> Array1<C64> {
    Array1::from_iter(j.iter().map(|p| C64::new(p[0], p[1])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    PureState { psi0: JsonVec, psig: JsonVec },
    Observable { rho0: JsonMat, a: JsonMat },
    Gate { v: JsonMat, group: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub dim: usize,
    pub h0: JsonMat,
    pub controls: Vec<JsonMat>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t: f64,
    pub s: usize,
    pub m: usize,
    #[serde(default)]
    pub variable_time: bool,
}

/// A problem document: either a registry shortcut or a fully inline
/// definition (system + objective + grid).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub registry: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

/// A sampled piecewise-constant control.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlFile {
    pub schema_version: u32,
    pub t: f64,
    pub s: usize,
    pub m: usize,
    /// M rows of S amplitudes.
    pub values: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
}

impl ControlFile {
    pub fn from_control(c: &PiecewiseControl) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            t: c.horizon(),
            s: c.slices(),
            m: c.channels(),
            values: (0..c.channels())
                .map(|r| (0..c.slices()).map(|s| c.values()[[r, s]]).collect())
                .collect(),
            ell: c.ell(),
        }
    }

    pub fn to_control(&self) -> Result<PiecewiseControl, String> {
        if self.values.len() != self.m || self.values.iter().any(|row| row.len() != self.s) {
            return Err("control values shape does not match (m, s)".into());
        }
        let vals = Array2::from_shape_fn((self.m, self.s), |(r, s)| self.values[r][s]);
        let mut c = PiecewiseControl::new(self.t, vals).map_err(|e| e.to_string())?;
        c.set_ell(self.ell);
        Ok(c)
    }
}

/// A loaded problem ready for the numeric modules.
pub struct LoadedProblem {
    pub label: String,
    pub system: ControlSystem,
    pub objective: Objective,
    /// Zero control carrying the grid shape and the variable-time flag.
    pub template: PiecewiseControl,
    pub example: Option<ExampleProblem>,
}

fn grid_template(t: f64, s: usize, m: usize, variable_time: bool) -> PiecewiseControl {
    let template = PiecewiseControl::zeros(m, s, t);
    if variable_time {
        template.with_ell(1.0)
    } else {
        template
    }
}

impl ProblemFile {
    pub fn for_registry(id: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            registry: Some(id.into()),
            system: None,
            objective: None,
            grid: None,
        }
    }

    /// Full inline export of a registry problem.
    pub fn inline_from_example(p: &ExampleProblem, template: &PiecewiseControl) -> Self {
        let objective = match &p.objective {
            Objective::PureState { psi0, psig } => ObjectiveSpec::PureState {
                psi0: vec_to_json(psi0.vec()),
                psig: vec_to_json(psig.vec()),
            },
            Objective::Observable { rho0, a } => ObjectiveSpec::Observable {
                rho0: mat_to_json(rho0),
                a: mat_to_json(a.mat()),
            },
            Objective::Gate { v, group } => ObjectiveSpec::Gate {
                v: mat_to_json(v.mat()),
                group: match group {
                    GateGroup::U => "u".into(),
                    GateGroup::SU => "su".into(),
                    GateGroup::PU => "pu".into(),
                },
            },
        };
        Self {
            schema_version: SCHEMA_VERSION,
            registry: None,
            system: Some(SystemSpec {
                dim: p.system.dim(),
                h0: mat_to_json(p.system.h0().mat()),
                controls: p
                    .system
                    .controls()
                    .iter()
                    .map(|h| mat_to_json(h.mat()))
                    .collect(),
            }),
            objective: Some(objective),
            grid: Some(GridSpec {
                t: template.horizon(),
                s: template.slices(),
                m: template.channels(),
                variable_time: template.ell().is_some(),
            }),
        }
    }

    pub fn load(&self, slices_override: Option<usize>) -> Result<LoadedProblem, CoreError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CoreError::InvalidArgument(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION}); migrate the document",
                self.schema_version
            )));
        }
        if let Some(id) = &self.registry {
            let rid = RegistryId::parse(id)?;
            let example = registry(rid)?;
            let (t, s, m, vt) = match &example.critical_control {
                Some(c) => (c.horizon(), c.slices(), c.channels(), c.ell().is_some()),
                None => (example.target_time, 140, example.system.channels(), false),
            };
            let s = slices_override.unwrap_or(s);
            return Ok(LoadedProblem {
                label: example.id.clone(),
                system: example.system.clone(),
                objective: example.objective.clone(),
                template: grid_template(t, s, m, vt),
                example: Some(example),
            });
        }
        let (Some(system), Some(objective), Some(grid)) =
            (&self.system, &self.objective, &self.grid)
        else {
            return Err(CoreError::InvalidArgument(
                "problem file needs either a registry id or system+objective+grid".into(),
            ));
        };
        let to_core = |j: &JsonMat| -> Result<HermitianOperator, CoreError> {
            let m = mat_from_json(j).map_err(CoreError::InvalidArgument)?;
            HermitianOperator::new(m)
        };
        let h0 = to_core(&system.h0)?;
        if h0.dim() != system.dim {
            return Err(CoreError::DimensionMismatch {
                left: h0.dim(),
                right: system.dim,
            });
        }
        let controls = system
            .controls
            .iter()
            .map(|c| to_core(c))
            .collect::<Result<Vec<_>, _>>()?;
        let sys = ControlSystem::new(h0, controls)?;
        let obj = match objective {
            ObjectiveSpec::PureState { psi0, psig } => Objective::pure_state(
                StateVector::new(vec_from_json(psi0))?,
                StateVector::new(vec_from_json(psig))?,
            )?,
            ObjectiveSpec::Observable { rho0, a } => Objective::observable(
                mat_from_json(rho0).map_err(CoreError::InvalidArgument)?,
                HermitianOperator::new(
                    mat_from_json(a).map_err(CoreError::InvalidArgument)?,
                )?,
            )?,
            ObjectiveSpec::Gate { v, group } => {
                let g = match group.as_str() {
                    "u" => GateGroup::U,
                    "su" => GateGroup::SU,
                    "pu" => GateGroup::PU,
                    other => {
                        return Err(CoreError::InvalidArgument(format!(
                            "unknown gate group '{other}'"
                        )))
                    }
                };
                Objective::gate(
                    UnitaryMatrix::new(
                        mat_from_json(v).map_err(CoreError::InvalidArgument)?,
                    )?,
                    g,
                )?
            }
        };
        if obj.dim() != sys.dim() {
            return Err(CoreError::DimensionMismatch {
                left: obj.dim(),
                right: sys.dim(),
            });
        }
        let s = slices_override.unwrap_or(grid.s);
        Ok(LoadedProblem {
            label: "inline".into(),
            system: sys,
            objective: obj,
            template: grid_template(grid.t, s, grid.m, grid.variable_time),
            example: None,
        })
    }
}

/// Result wrapper written by every subcommand. Wall time is always null so
/// identical configurations produce byte-identical envelopes; the measured
/// time is reported on stderr instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub seeds: Vec<u64>,
    pub payload: Value,
    pub wall_time_s: Option<f64>,
    pub library_version: String,
}

impl ResultEnvelope {
    pub fn new(command: &str, config: Value, seeds: Vec<u64>, payload: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            seeds,
            payload,
            wall_time_s: None,
            library_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    /// Parses and validates an envelope document: every numeric leaf of the
    /// payload must be finite (JSON null where a number is expected is the
    /// usual symptom of serializing NaN).
    pub fn load(text: &str) -> Result<Self, String> {
        let env: ResultEnvelope =
            serde_json::from_str(text).map_err(|e| format!("envelope parse error: {e}"))?;
        if env.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION}); migrate the document",
                env.schema_version
            ));
        }
        fn check(v: &Value, path: &str) -> Result<(), String> {
            match v {
                Value::Null => Err(format!(
                    "non-finite or missing numeric value at {path} (NaN serializes to null)"
                )),
                Value::Array(a) => {
                    for (i, x) in a.iter().enumerate() {
                        check(x, &format!("{path}[{i}]"))?;
                    }
                    Ok(())
                }
                Value::Object(o) => {
                    for (k, x) in o {
                        check(x, &format!("{path}.{k}"))?;
                    }
                    Ok(())
                }
                _ => Ok(()),
            }
        }
        check(&env.payload, "payload")?;
        Ok(env)
    }
}

/// Run-record payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecordDto {
    pub seed: u64,
    pub terminal_error: f64,
    pub iterations: usize,
    pub termination: String,
    pub threshold_crossing: Option<usize>,
    pub curvature_skips: usize,
    pub error_history: Vec<f64>,
    pub final_control: ControlFile,
}

impl RunRecordDto {
    pub fn from_record(r: &landscape_lab::optimize::RunRecord) -> Self {
        Self {
            seed: r.seed,
            terminal_error: r.terminal_error,
            iterations: r.iterations,
            termination: format!("{:?}", r.termination),
            threshold_crossing: r.threshold_crossing,
            curvature_skips: r.curvature_skips,
            error_history: r.error_history.clone(),
            final_control: ControlFile::from_control(&r.final_control),
        }
    }
}
