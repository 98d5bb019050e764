//! Parasite-mediated competition: when competition coefficients do not
//! depend on infection status, both the parasite-free system and the reduced
//! system are Leslie-Gower maps and their outcome is read off two signs.

use serde::Serialize;

use super::cases::CaseLabel;
use super::AnalysisError;
use crate::model::{DemographyParams, DiseaseParams};
use crate::reduction::{compute_nu, ReductionError};
use crate::scalar::Scalar;

/// Outcome parameters of the Leslie-Gower map with growth rates `b` and
/// species-level coefficients `c`:
/// `D¹ = (b¹−1)/c¹¹ − (b²−1)/c²¹`, `D² = (b²−1)/c²² − (b¹−1)/c¹²`.
pub fn leslie_gower_d<T: Scalar>(b: [T; 2], c: [[T; 2]; 2]) -> [T; 2] {
    let one = T::one();
    [
        (b[0] - one) / c[0][0] - (b[1] - one) / c[1][0],
        (b[1] - one) / c[1][1] - (b[0] - one) / c[0][1],
    ]
}

/// The four Lotka-Volterra-type outcomes of a Leslie-Gower map with both
/// growth rates above one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LvScenario {
    Species1Wins,
    Species2Wins,
    Coexistence,
    /// Either species excluded depending on initial conditions.
    Bistable,
}

impl LvScenario {
    /// `None` when a sign is zero.
    pub fn from_signs<T: Scalar>(d: [T; 2]) -> Option<Self> {
        let z = T::zero();
        if d[0] == z || d[1] == z {
            return None;
        }
        Some(match (d[0] > z, d[1] > z) {
            (true, false) => LvScenario::Species1Wins,
            (false, true) => LvScenario::Species2Wins,
            (false, false) => LvScenario::Coexistence,
            (true, true) => LvScenario::Bistable,
        })
    }

    pub fn case_label(self) -> CaseLabel {
        match self {
            LvScenario::Species1Wins => CaseLabel::C0,
            LvScenario::Species2Wins => CaseLabel::D0,
            LvScenario::Coexistence => CaseLabel::A1,
            LvScenario::Bistable => CaseLabel::B1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutcomeCoefficients<T> {
    pub nu: T,
    /// `(D¹, D²)` of the parasite-free system (growth `b_S`).
    pub d: [T; 2],
    /// `(D̄¹, D̄²)` of the reduced system.
    pub d_bar: [T; 2],
    /// Infected-only part (growth `b_I`); sets the sign of `D̄` as `R₀ → ∞`.
    pub d_bar_i: [T; 2],
    /// Susceptible-only part (growth `b_S`).
    pub d_bar_s: [T; 2],
    /// Effective growth rates `b^i = ν b_S^i + (1−ν) b_I^i`.
    pub growth: [T; 2],
    /// `b_I^i < 1`: a large enough `R₀` drives species `i` extinct.
    pub extinct_for_large_r0: [bool; 2],
    /// `b^i ≤ 1` at this `ν`.
    pub extinct_at_nu: [bool; 2],
}

pub fn outcome_coefficients<T: Scalar>(
    p: &DemographyParams<T>,
    d: &DiseaseParams<T>,
) -> Result<OutcomeCoefficients<T>, AnalysisError> {
    if !p.is_status_independent() {
        return Err(AnalysisError::StatusDependent);
    }
    outcome_coefficients_at(p, compute_nu(d)?)
}

/// Same as [`outcome_coefficients`] with `ν` given directly.
pub fn outcome_coefficients_at<T: Scalar>(
    p: &DemographyParams<T>,
    nu: T,
) -> Result<OutcomeCoefficients<T>, AnalysisError> {
    let c = p
        .species_coefficients()
        .ok_or(AnalysisError::StatusDependent)?;
    if !(nu > T::zero() && nu <= T::one()) {
        return Err(ReductionError::InvalidNu(nu.as_f64()).into());
    }
    let mu = T::one() - nu;
    let growth = [nu * p.b_s[0] + mu * p.b_i[0], nu * p.b_s[1] + mu * p.b_i[1]];
    let d_bar_i = leslie_gower_d(p.b_i, c);
    let d_bar_s = leslie_gower_d(p.b_s, c);
    Ok(OutcomeCoefficients {
        nu,
        d: d_bar_s,
        d_bar: leslie_gower_d(growth, c),
        d_bar_i,
        d_bar_s,
        growth,
        extinct_for_large_r0: [p.b_i[0] < T::one(), p.b_i[1] < T::one()],
        extinct_at_nu: [growth[0] <= T::one(), growth[1] <= T::one()],
    })
}
