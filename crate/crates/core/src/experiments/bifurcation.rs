use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::analysis::{classify_case, CaseLabel};
use crate::model::{coefficient_indices, coefficient_name, DemographyParams};
use crate::reduction::ReducedParams;
use crate::scalar::Scalar;

/// A single demographic parameter addressed by its config name: `bS1`,
/// `bI2`, `c_SI_12`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DemographicParam {
    GrowthS(usize),
    GrowthI(usize),
    /// `(i, j, A, B)` as status indices.
    Coefficient(usize, usize, usize, usize),
}

impl DemographicParam {
    pub fn get<T: Scalar>(self, p: &DemographyParams<T>) -> T {
        match self {
            DemographicParam::GrowthS(i) => p.b_s[i],
            DemographicParam::GrowthI(i) => p.b_i[i],
            DemographicParam::Coefficient(i, j, a, b) => p.c[i][j][a][b],
        }
    }

    /// Copy of `p` with this parameter replaced, revalidated.
    pub fn with<T: Scalar>(
        self,
        p: &DemographyParams<T>,
        value: T,
    ) -> Result<DemographyParams<T>, ExperimentError> {
        let mut q = *p;
        match self {
            DemographicParam::GrowthS(i) => q.b_s[i] = value,
            DemographicParam::GrowthI(i) => q.b_i[i] = value,
            DemographicParam::Coefficient(i, j, a, b) => q.c[i][j][a][b] = value,
        }
        q.validate()?;
        Ok(q)
    }
}

impl fmt::Display for DemographicParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DemographicParam::GrowthS(i) => write!(f, "bS{}", i + 1),
            DemographicParam::GrowthI(i) => write!(f, "bI{}", i + 1),
            DemographicParam::Coefficient(i, j, a, b) => {
                let st = |s: usize| crate::model::Status::ALL[s];
                f.write_str(&coefficient_name(i, j, st(a), st(b)))
            }
        }
    }
}

impl FromStr for DemographicParam {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let growth = |rest: &str| match rest {
            "1" => Some(0),
            "2" => Some(1),
            _ => None,
        };
        if let Some(i) = s.strip_prefix("bS").and_then(growth) {
            return Ok(DemographicParam::GrowthS(i));
        }
        if let Some(i) = s.strip_prefix("bI").and_then(growth) {
            return Ok(DemographicParam::GrowthI(i));
        }
        coefficient_indices()
            .find(|&(i, j, a, b)| coefficient_name(i, j, a, b) == s)
            .map(|(i, j, a, b)| DemographicParam::Coefficient(i, j, a.index(), b.index()))
            .ok_or_else(|| ExperimentError::UnknownParameter(s.to_string()))
    }
}

impl Serialize for DemographicParam {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Evenly spaced axis `lo, lo + step, …` up to `hi` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self, ExperimentError> {
        let ok = lo.is_finite() && hi.is_finite() && step.is_finite() && hi >= lo && step > 0.0;
        if !ok {
            return Err(ExperimentError::InvalidAxis(format!(
                "{lo}:{hi}:{step} (need lo <= hi and step > 0)"
            )));
        }
        Ok(Self { lo, hi, step })
    }

    /// Parses `lo:hi:step`.
    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || ExperimentError::InvalidAxis(format!("{s:?} is not lo:hi:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        Self::new(v[0], v[1], v[2])
    }

    /// Points are computed as `lo + k·step` so no rounding accumulates;
    /// the last point is `hi` when `hi − lo` is a whole number of steps.
    pub fn values<T: Scalar>(&self) -> Vec<T> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| T::of(self.lo + k as f64 * self.step))
            .collect()
    }
}

/// Case labels over a `(ν, p)` grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BifurcationScan<T> {
    pub param: DemographicParam,
    pub nu_axis: Vec<T>,
    pub p_axis: Vec<T>,
    /// `labels[ip * nu_axis.len() + inu]`.
    pub labels: Vec<CaseLabel>,
}

impl<T: Scalar> BifurcationScan<T> {
    pub fn label(&self, inu: usize, ip: usize) -> CaseLabel {
        self.labels[ip * self.nu_axis.len() + inu]
    }

    /// Labels along the `ν` axis at `p_axis[ip]`, in axis order.
    pub fn column(&self, ip: usize) -> &[CaseLabel] {
        let n = self.nu_axis.len();
        &self.labels[ip * n..(ip + 1) * n]
    }

    /// Cases met while `ν` decreases at `p_axis[ip]`, with repeats and
    /// `NonGeneric` points removed.
    pub fn case_sequence(&self, ip: usize) -> Vec<CaseLabel> {
        case_sequence(&self.nu_axis, self.column(ip))
    }
}

pub(crate) fn case_sequence<T: Scalar>(nu: &[T], labels: &[CaseLabel]) -> Vec<CaseLabel> {
    let mut order: Vec<usize> = (0..nu.len()).collect();
    order.sort_by(|&a, &b| nu[b].partial_cmp(&nu[a]).expect("finite nu"));
    let mut seq: Vec<CaseLabel> = Vec::new();
    for k in order {
        let l = labels[k];
        if l != CaseLabel::NonGeneric && seq.last() != Some(&l) {
            seq.push(l);
        }
    }
    seq
}

fn check_nu<T: Scalar>(nu: T) -> Result<(), ExperimentError> {
    if nu > T::zero() && nu < T::one() {
        Ok(())
    } else {
        Err(ExperimentError::InvalidAxis(format!(
            "nu = {nu} outside (0, 1)"
        )))
    }
}

/// Classifies the reduced map at every `(ν, p)` grid point, building the
/// reduced parameters straight from `ν`.
pub fn bifurcation_scan<T: Scalar>(
    p: &DemographyParams<T>,
    nu_axis: &[T],
    param: DemographicParam,
    p_axis: &[T],
) -> Result<BifurcationScan<T>, ExperimentError> {
    if nu_axis.is_empty() || p_axis.is_empty() {
        return Err(ExperimentError::InvalidAxis("empty axis".into()));
    }
    for &nu in nu_axis {
        check_nu(nu)?;
    }
    let columns: Vec<DemographyParams<T>> = p_axis
        .iter()
        .map(|&v| param.with(p, v))
        .collect::<Result<_, _>>()?;
    let n = nu_axis.len();
    let labels = (0..n * p_axis.len())
        .into_par_iter()
        .map(|cell| {
            let rp = ReducedParams::from_nu(&columns[cell / n], nu_axis[cell % n])?;
            Ok(classify_case(&rp))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(BifurcationScan {
        param,
        nu_axis: nu_axis.to_vec(),
        p_axis: p_axis.to_vec(),
        labels,
    })
}

/// A change of case between two `ν` values, located by bisection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Transition<T> {
    pub nu: T,
    /// Case on the larger-`ν` side.
    pub from: CaseLabel,
    pub to: CaseLabel,
}

/// Transitions along one `ν` column in decreasing-`ν` order. Each bracket
/// between consecutive generic grid labels is bisected until narrower
/// than `nu_tol` or until the midpoint shows a third case.
pub fn locate_transitions<T: Scalar>(
    p: &DemographyParams<T>,
    nu_axis: &[T],
    nu_tol: T,
) -> Result<Vec<Transition<T>>, ExperimentError> {
    for &nu in nu_axis {
        check_nu(nu)?;
    }
    let mut nus = nu_axis.to_vec();
    nus.sort_by(|a, b| b.partial_cmp(a).expect("finite nu"));
    let label_at = |nu: T| -> Result<CaseLabel, ExperimentError> {
        Ok(classify_case(&ReducedParams::from_nu(p, nu)?))
    };
    let labels: Vec<CaseLabel> = nus
        .par_iter()
        .map(|&nu| label_at(nu))
        .collect::<Result<_, _>>()?;
    let generic: Vec<(T, CaseLabel)> = nus
        .into_iter()
        .zip(labels)
        .filter(|(_, l)| *l != CaseLabel::NonGeneric)
        .collect();
    let brackets: Vec<((T, CaseLabel), (T, CaseLabel))> = generic
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| (w[0], w[1]))
        .collect();
    brackets
        .into_par_iter()
        .map(|((mut hi, from), (mut lo, to))| {
            while hi - lo > nu_tol {
                let mid = T::half() * (hi + lo);
                let l = label_at(mid)?;
                if l == from {
                    hi = mid;
                } else if l == to {
                    lo = mid;
                } else {
                    break;
                }
            }
            Ok(Transition {
                nu: T::half() * (hi + lo),
                from,
                to,
            })
        })
        .collect()
}
