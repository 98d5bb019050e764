//! TOML run configuration.
//!
//! ```toml
//! [demography]
//! bS = [13.0, 3.4]
//! bI = [3.6, 8.0]
//! c_SS_11 = 0.9      # c_AB_ij: focal species i with status A,
//! c_SI_11 = 0.9      # competitor species j with status B
//! # ... all 16 keys
//!
//! [disease]          # optional when run.nu is given
//! beta = 0.8         # scalar or [[b11, b12], [b21, b22]]
//! gamma = 0.4        # scalar or [g1, g2]
//!
//! [run]              # every key optional
//! nu = 0.5
//! sweep = { nu = "0.01:0.99:0.02", bS1 = "2:20:0.5" }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{DemographyParams, DiseaseParams, ModelError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub demography: DemographySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disease: Option<DiseaseSection>,
    #[serde(default)]
    pub run: RunSection,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemographySection {
    pub bS: [f64; 2],
    pub bI: [f64; 2],
    pub c_SS_11: f64,
    pub c_SI_11: f64,
    pub c_IS_11: f64,
    pub c_II_11: f64,
    pub c_SS_12: f64,
    pub c_SI_12: f64,
    pub c_IS_12: f64,
    pub c_II_12: f64,
    pub c_SS_21: f64,
    pub c_SI_21: f64,
    pub c_IS_21: f64,
    pub c_II_21: f64,
    pub c_SS_22: f64,
    pub c_SI_22: f64,
    pub c_IS_22: f64,
    pub c_II_22: f64,
}

impl DemographySection {
    /// Table in `[i][j][A][B]` order.
    fn table(&self) -> [[[[f64; 2]; 2]; 2]; 2] {
        [
            [
                [[self.c_SS_11, self.c_SI_11], [self.c_IS_11, self.c_II_11]],
                [[self.c_SS_12, self.c_SI_12], [self.c_IS_12, self.c_II_12]],
            ],
            [
                [[self.c_SS_21, self.c_SI_21], [self.c_IS_21, self.c_II_21]],
                [[self.c_SS_22, self.c_SI_22], [self.c_IS_22, self.c_II_22]],
            ],
        ]
    }

    pub fn from_params(p: &DemographyParams<f64>) -> Self {
        let c = &p.c;
        Self {
            bS: p.b_s,
            bI: p.b_i,
            c_SS_11: c[0][0][0][0],
            c_SI_11: c[0][0][0][1],
            c_IS_11: c[0][0][1][0],
            c_II_11: c[0][0][1][1],
            c_SS_12: c[0][1][0][0],
            c_SI_12: c[0][1][0][1],
            c_IS_12: c[0][1][1][0],
            c_II_12: c[0][1][1][1],
            c_SS_21: c[1][0][0][0],
            c_SI_21: c[1][0][0][1],
            c_IS_21: c[1][0][1][0],
            c_II_21: c[1][0][1][1],
            c_SS_22: c[1][1][0][0],
            c_SI_22: c[1][1][0][1],
            c_IS_22: c[1][1][1][0],
            c_II_22: c[1][1][1][1],
        }
    }

    pub fn params(&self) -> Result<DemographyParams<f64>, ModelError> {
        DemographyParams::new(self.bS, self.bI, self.table())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Scalar(f64),
    Matrix([[f64; 2]; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Scalar(f64),
    Vector([f64; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiseaseSection {
    pub beta: BetaSpec,
    pub gamma: GammaSpec,
    /// When true the values must be homogeneous.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<bool>,
}

impl DiseaseSection {
    pub fn params(&self) -> Result<DiseaseParams<f64>, String> {
        let beta = match self.beta {
            BetaSpec::Scalar(b) => [[b; 2]; 2],
            BetaSpec::Matrix(m) => m,
        };
        let gamma = match self.gamma {
            GammaSpec::Scalar(g) => [g; 2],
            GammaSpec::Vector(v) => v,
        };
        let d = DiseaseParams::new(beta, gamma).map_err(|e| e.to_string())?;
        if self.homogeneous == Some(true) && !d.is_homogeneous() {
            return Err("disease.homogeneous = true but beta/gamma values differ".into());
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Disease episodes per demographic step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Step-norm convergence threshold for orbits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_tol: Option<f64>,
    /// Relative tolerance of the full-versus-reduced comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correspondence_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<[usize; 2]>,
    /// `[[lo1, lo2], [hi1, hi2]]`; defaults to the trapping box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[[f64; 2]; 2]>,
    /// Sets `ν` directly instead of deriving it from `[disease]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Reduced `(N¹, N²)` or full `(N_S¹, N_I¹, N_S², N_I²)` initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Number of full-model steps written by `step`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Random initial states for `correspond` when `x0` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Upper bound on species totals of random states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_total: Option<f64>,
    /// Axis name (`nu` or a demographic parameter) to `lo:hi:step`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sweep: BTreeMap<String, String>,
}

/// Validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Loaded {
    pub config: Config,
    pub demography: DemographyParams<f64>,
    pub disease: Option<DiseaseParams<f64>>,
}

/// 1-based line of the first `key =` assignment in `src`.
fn line_of_key(src: &str, key: &str) -> Option<usize> {
    src.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|n| n + 1)
}

fn at_key(src: &str, key: &str, msg: String) -> String {
    match line_of_key(src, key) {
        Some(line) => format!("line {line}: {msg}"),
        None => msg,
    }
}

impl Config {
    pub fn parse(src: &str) -> Result<Loaded, String> {
        let config: Config = toml::from_str(src).map_err(|e| e.to_string())?;
        let demography = config.demography.params().map_err(|e| {
            let key = match &e {
                ModelError::InvalidParameter { name, .. } if name.starts_with('b') => {
                    name[..2].to_string()
                }
                ModelError::InvalidParameter { name, .. } => name.clone(),
                _ => String::new(),
            };
            at_key(src, &key, e.to_string())
        })?;
        let disease = match &config.disease {
            Some(s) => Some(s.params().map_err(|e| at_key(src, "beta", e))?),
            None => None,
        };
        config
            .run
            .validate()
            .map_err(|(key, msg)| at_key(src, key, msg))?;
        Ok(Loaded {
            config,
            demography,
            disease,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

impl RunSection {
    fn validate(&self) -> Result<(), (&'static str, String)> {
        let positive = |key: &'static str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err((key, format!("run.{key} = {x} must be positive")))
            }
            _ => Ok(()),
        };
        positive("tol", self.tol)?;
        positive("match_tol", self.match_tol)?;
        positive("correspondence_tol", self.correspondence_tol)?;
        positive("max_total", self.max_total)?;
        if let Some(nu) = self.nu {
            if !(nu > 0.0 && nu <= 1.0) {
                return Err(("nu", format!("run.nu = {nu} outside (0, 1]")));
            }
        }
        if let Some([a, b]) = self.resolution {
            if a == 0 || b == 0 {
                return Err((
                    "resolution",
                    "run.resolution entries must be positive".into(),
                ));
            }
        }
        if let Some(x0) = &self.x0 {
            if !(x0.len() == 2 || x0.len() == 4) || x0.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
            {
                return Err(("x0", "run.x0 must hold 2 or 4 non-negative numbers".into()));
            }
        }
        Ok(())
    }
}
