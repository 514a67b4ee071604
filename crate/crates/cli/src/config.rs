//! Experiment configuration: JSON with `schema_version: 1`, validated before
//! anything is computed.

use std::path::{Path, PathBuf};

use czreach::learning::{monomial_basis_custom, MonomialBasis};
use czreach::{fresh_ids, Cpz};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    LtiDemo,
    PolyModelDemo,
    PolyDataDemo,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::LtiDemo => "lti-demo",
            Self::PolyModelDemo => "poly-model-demo",
            Self::PolyDataDemo => "poly-data-demo",
            Self::Verify => "verify",
        }
    }

    /// The configuration shipped for this experiment.
    pub fn bundled(self) -> &'static str {
        match self {
            Self::LtiDemo => include_str!("../configs/lti-demo.json"),
            Self::PolyModelDemo => include_str!("../configs/poly-model-demo.json"),
            Self::PolyDataDemo => include_str!("../configs/poly-data-demo.json"),
            Self::Verify => include_str!("../configs/verify.json"),
        }
    }
}

/// True system behind the data, or the known model for `poly-model-demo`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `x⁺ = Φx + Γu`; matrices as lists of rows.
    Lti {
        phi: Vec<Vec<f64>>,
        gamma: Vec<Vec<f64>>,
    },
    /// `x⁺ = Θ h(x, u)` with `h` given by exponent rows over `z = (x, u)`.
    Polynomial {
        theta: Vec<Vec<f64>>,
        basis: Vec<Vec<u32>>,
    },
}

/// A set as `⟨c, G, E, A, b, R⟩`; matrices are lists of rows. Without `E` the
/// set is a zonotope with one factor per generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub c: Vec<f64>,
    #[serde(rename = "G", default)]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<Vec<u32>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Vec::is_empty")]
    pub r: Vec<Vec<u32>>,
}

/// Recorded data: `offline_trajectories` feed the initial model set, the
/// `online_trajectories` arrive before step `online_step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub offline_trajectories: usize,
    #[serde(default)]
    pub online_trajectories: usize,
    /// Transitions per trajectory.
    pub trajectory_length: usize,
    #[serde(default = "one")]
    pub online_step: usize,
}

fn one() -> usize {
    1
}

fn default_cloud() -> usize {
    2000
}

fn default_simulations() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_set: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_set: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_set: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Minimum number of online samples before a refinement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction_order: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// 1-based state dimension pairs to plot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<Vec<[usize; 2]>>,
    #[serde(default = "default_cloud")]
    pub cloud_samples: usize,
    /// Simulated trajectories drawn into the plots.
    #[serde(default = "default_simulations")]
    pub simulations: usize,
}

impl ExperimentConfig {
    /// A config with only the required fields set.
    pub fn minimal(experiment: Experiment) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment,
            system: None,
            initial_set: None,
            input_set: None,
            noise_set: None,
            horizon: None,
            batch_length: None,
            data: None,
            reduction_order: None,
            seed: 0,
            output_dir: None,
            projections: None,
            cloud_samples: default_cloud(),
            simulations: default_simulations(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn projection_dims(&self) -> Vec<[usize; 2]> {
        self.projections
            .clone()
            .unwrap_or_else(|| match self.experiment {
                Experiment::LtiDemo => vec![[1, 2], [3, 4], [4, 5]],
                _ => vec![[1, 2]],
            })
    }

    /// Checks every requirement of the experiment and all dimensions.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::validation(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.experiment == Experiment::Verify {
            return Ok(());
        }
        let system = require(&self.system, "system")?;
        let (nx, nu) = system.dims()?;
        for (name, set, n) in [
            ("initial_set", &self.initial_set, nx),
            ("input_set", &self.input_set, nu),
            ("noise_set", &self.noise_set, nx),
        ] {
            let spec = require(set, name)?;
            let dim = spec.validate(name)?;
            if dim != n {
                return Err(CliError::validation(
                    format!("{name}.c"),
                    format!("dimension {dim}, expected {n}"),
                ));
            }
        }
        let horizon = *require(&self.horizon, "horizon")?;
        if horizon == 0 {
            return Err(CliError::validation("horizon", "must be at least 1"));
        }
        if self.reduction_order == Some(0) {
            return Err(CliError::validation(
                "reduction_order",
                "must be at least 1",
            ));
        }
        if self.cloud_samples < 100 {
            return Err(CliError::validation(
                "cloud_samples",
                "must be at least 100",
            ));
        }
        for (i, [a, b]) in self.projection_dims().iter().enumerate() {
            if *a == 0 || *b == 0 || *a > nx || *b > nx || a == b {
                return Err(CliError::validation(
                    format!("projections[{i}]"),
                    format!("need two distinct dimensions in 1..={nx}"),
                ));
            }
        }
        match (self.experiment, system) {
            (Experiment::LtiDemo, SystemSpec::Lti { .. }) => self.validate_data(nx + nu),
            (Experiment::PolyDataDemo, SystemSpec::Polynomial { basis, .. }) => {
                self.validate_data(basis.len())
            }
            (Experiment::PolyModelDemo, SystemSpec::Polynomial { .. }) => Ok(()),
            (e, _) => Err(CliError::validation(
                "system.kind",
                format!("{} needs a different system kind", e.name()),
            )),
        }
    }

    fn validate_data(&self, min_samples: usize) -> Result<(), CliError> {
        let data = require(&self.data, "data")?;
        if data.trajectory_length == 0 {
            return Err(CliError::validation(
                "data.trajectory_length",
                "must be at least 1",
            ));
        }
        if data.offline_trajectories * data.trajectory_length < min_samples {
            return Err(CliError::validation(
                "data.offline_trajectories",
                format!("offline data need at least {min_samples} samples"),
            ));
        }
        let batch = *require(&self.batch_length, "batch_length")?;
        if batch < min_samples {
            return Err(CliError::validation(
                "batch_length",
                format!("must be at least {min_samples}"),
            ));
        }
        if data.online_trajectories > 0 && data.online_step >= self.horizon.unwrap_or(0) {
            return Err(CliError::validation(
                "data.online_step",
                "online data must arrive before the last step",
            ));
        }
        Ok(())
    }
}

fn require<'a, T>(v: &'a Option<T>, path: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::validation(path, "required field is missing"))
}

fn rows_to_matrix<T: nalgebra::Scalar + Copy>(
    path: &str,
    rows: &[Vec<T>],
    nrows: usize,
    ncols: Option<usize>,
) -> Result<DMatrix<T>, CliError> {
    if rows.len() != nrows {
        return Err(CliError::validation(
            path,
            format!("{} rows, expected {nrows}", rows.len()),
        ));
    }
    let ncols = ncols.unwrap_or_else(|| rows.first().map_or(0, Vec::len));
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(CliError::validation(
            format!("{path}[{i}]"),
            format!("expected {ncols} entries"),
        ));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl SystemSpec {
    /// `(n_x, n_u)`.
    pub fn dims(&self) -> Result<(usize, usize), CliError> {
        match self {
            Self::Lti { phi, gamma } => {
                let nx = phi.len();
                if nx == 0 {
                    return Err(CliError::validation("system.phi", "empty matrix"));
                }
                rows_to_matrix("system.phi", phi, nx, Some(nx))?;
                let g = rows_to_matrix("system.gamma", gamma, nx, None)?;
                if g.ncols() == 0 {
                    return Err(CliError::validation("system.gamma", "no input columns"));
                }
                Ok((nx, g.ncols()))
            }
            Self::Polynomial { theta, basis } => {
                let nx = theta.len();
                if nx == 0 {
                    return Err(CliError::validation("system.theta", "empty matrix"));
                }
                rows_to_matrix("system.theta", theta, nx, Some(basis.len()))?;
                let nz = basis.first().map_or(0, Vec::len);
                if nz <= nx {
                    return Err(CliError::validation(
                        "system.basis",
                        format!("exponent rows need more than {nx} entries"),
                    ));
                }
                self.basis()?;
                Ok((nx, nz - nx))
            }
        }
    }

    pub fn lti(&self) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        match self {
            Self::Lti { phi, gamma } => Some((
                DMatrix::from_fn(phi.len(), phi.len(), |i, j| phi[i][j]),
                DMatrix::from_fn(gamma.len(), gamma[0].len(), |i, j| gamma[i][j]),
            )),
            Self::Polynomial { .. } => None,
        }
    }

    pub fn theta(&self) -> Option<DMatrix<f64>> {
        match self {
            Self::Polynomial { theta, basis } => {
                Some(DMatrix::from_fn(theta.len(), basis.len(), |i, j| {
                    theta[i][j]
                }))
            }
            Self::Lti { .. } => None,
        }
    }

    pub fn basis(&self) -> Result<MonomialBasis, CliError> {
        match self {
            Self::Polynomial { basis, .. } => {
                let nz = basis.first().map_or(0, Vec::len);
                monomial_basis_custom(nz, basis.clone())
                    .map_err(|e| CliError::validation("system.basis", e.to_string()))
            }
            Self::Lti { .. } => Err(CliError::validation(
                "system.basis",
                "linear systems have no basis",
            )),
        }
    }
}

impl SetSpec {
    /// Checks shapes and returns the dimension.
    fn validate(&self, path: &str) -> Result<usize, CliError> {
        self.build_at(path).map(|s| s.dim())
    }

    /// The set with freshly allocated factor ids.
    pub fn build(&self) -> Result<Cpz, CliError> {
        self.build_at("set")
    }

    fn build_at(&self, path: &str) -> Result<Cpz, CliError> {
        let n = self.c.len();
        if n == 0 {
            return Err(CliError::validation(format!("{path}.c"), "empty center"));
        }
        let g = if self.g.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            rows_to_matrix(&format!("{path}.G"), &self.g, n, None)?
        };
        let h = g.ncols();
        let e = match &self.e {
            None => DMatrix::identity(h, h),
            Some(rows) => {
                let p = rows.len();
                rows_to_matrix(&format!("{path}.E"), rows, p, Some(h))?
            }
        };
        let p = e.nrows();
        let nc = self.b.len();
        let r = if self.r.is_empty() {
            DMatrix::zeros(p, 0)
        } else {
            rows_to_matrix(&format!("{path}.R"), &self.r, p, None)?
        };
        let a = if self.a.is_empty() {
            DMatrix::zeros(nc, r.ncols())
        } else {
            rows_to_matrix(&format!("{path}.A"), &self.a, nc, Some(r.ncols()))?
        };
        Cpz::new(
            DVector::from_column_slice(&self.c),
            g,
            e,
            a,
            DVector::from_column_slice(&self.b),
            r,
            fresh_ids(p),
        )
        .map_err(|err| CliError::validation(path, err.to_string()))
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ExperimentConfig::from_json(&text)
}
