//! The four-variable model: demographic competition map, SIS disease map and
//! their two-timescale composition `S ∘ F^(k)`.
//!
//! State layout is `(N_S¹, N_I¹, N_S², N_I²)`. Species and status indices are
//! zero-based in code: species `0` is species 1 of the model, `Status::S` is
//! the susceptible class.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },
    #[error("state has zero total population; the disease map is undefined there")]
    ZeroPopulation,
    #[error("state component {index} is negative or not finite ({value})")]
    InvalidState { index: usize, value: f64 },
    #[error("disease parameters are not admissible (every beta and gamma must lie in (0, 1])")]
    InadmissibleDisease,
}

/// Infection status of an individual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    S,
    I,
}

impl Status {
    pub const ALL: [Status; 2] = [Status::S, Status::I];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Status::S => 0,
            Status::I => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Status::S => 'S',
            Status::I => 'I',
        }
    }
}

/// Per-capita competition coefficients indexed `[i][j][A][B]`: focal species
/// `i`, competitor species `j`, focal status `A`, competitor status `B`.
/// `c[0][1][S][I]` is the coefficient usually written `c_SI^12`.
pub type CompetitionTable<T> = [[[[T; 2]; 2]; 2]; 2];

/// Growth rates and competition coefficients of the demographic map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemographyParams<T> {
    /// Inherent growth rates of susceptibles, `b_S^i`.
    pub b_s: [T; 2],
    /// Inherent growth rates of infecteds, `b_I^i`.
    pub b_i: [T; 2],
    pub c: CompetitionTable<T>,
}

impl<T: Scalar> DemographyParams<T> {
    pub fn new(b_s: [T; 2], b_i: [T; 2], c: CompetitionTable<T>) -> Result<Self, ModelError> {
        let p = Self { b_s, b_i, c };
        p.validate()?;
        Ok(p)
    }

    /// Coefficients that only depend on the species involved:
    /// `c_AB^ij = c[i][j]` for every status pair.
    pub fn status_independent(
        b_s: [T; 2],
        b_i: [T; 2],
        c: [[T; 2]; 2],
    ) -> Result<Self, ModelError> {
        let table = std::array::from_fn(|i| std::array::from_fn(|j| [[c[i][j]; 2]; 2]));
        Self::new(b_s, b_i, table)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for i in 0..2 {
            if !(self.b_s[i] > T::zero()) || !self.b_s[i].is_finite() {
                return Err(invalid(
                    format!("bS{}", i + 1),
                    self.b_s[i],
                    "must be positive",
                ));
            }
            if !(self.b_i[i] >= T::zero()) || !self.b_i[i].is_finite() {
                return Err(invalid(
                    format!("bI{}", i + 1),
                    self.b_i[i],
                    "must be non-negative",
                ));
            }
        }
        for (i, j, a, b) in coefficient_indices() {
            let v = self.c[i][j][a.index()][b.index()];
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(coefficient_name(i, j, a, b), v, "must be positive"));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn coefficient(&self, i: usize, j: usize, a: Status, b: Status) -> T {
        self.c[i][j][a.index()][b.index()]
    }

    #[inline]
    pub fn growth(&self, i: usize, a: Status) -> T {
        match a {
            Status::S => self.b_s[i],
            Status::I => self.b_i[i],
        }
    }

    /// True when every `c_AB^ij` is the same for all four status pairs.
    pub fn is_status_independent(&self) -> bool {
        (0..2).all(|i| {
            (0..2).all(|j| {
                let t = &self.c[i][j];
                let v = t[0][0];
                t[0][1] == v && t[1][0] == v && t[1][1] == v
            })
        })
    }

    /// The species-level table `c^ij` when the coefficients are status independent.
    pub fn species_coefficients(&self) -> Option<[[T; 2]; 2]> {
        self.is_status_independent()
            .then(|| std::array::from_fn(|i| std::array::from_fn(|j| self.c[i][j][0][0])))
    }
}

/// Iterates `(i, j, A, B)` in the canonical order used by config files.
pub fn coefficient_indices() -> impl Iterator<Item = (usize, usize, Status, Status)> {
    (0..2).flat_map(|i| {
        (0..2).flat_map(move |j| {
            Status::ALL
                .into_iter()
                .flat_map(move |a| Status::ALL.into_iter().map(move |b| (i, j, a, b)))
        })
    })
}

/// Config-file key of a competition coefficient, e.g. `c_SI_12`.
pub fn coefficient_name(i: usize, j: usize, a: Status, b: Status) -> String {
    format!("c_{}{}_{}{}", a.letter(), b.letter(), i + 1, j + 1)
}

fn invalid<T: Scalar>(name: String, value: T, reason: &'static str) -> ModelError {
    ModelError::InvalidParameter {
        name,
        value: value.as_f64(),
        reason,
    }
}

/// Transmission and recovery parameters of the disease map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiseaseParams<T> {
    /// `beta[i][j]`: transmission to species `i` from infecteds of species `j`.
    pub beta: [[T; 2]; 2],
    pub gamma: [T; 2],
}

impl<T: Scalar> DiseaseParams<T> {
    pub fn new(beta: [[T; 2]; 2], gamma: [T; 2]) -> Result<Self, ModelError> {
        for i in 0..2 {
            for (j, &v) in beta[i].iter().enumerate() {
                if !(v > T::zero()) || !v.is_finite() {
                    return Err(invalid(
                        format!("beta{}{}", i + 1, j + 1),
                        v,
                        "must be positive",
                    ));
                }
            }
            if !(gamma[i] > T::zero()) || !gamma[i].is_finite() {
                return Err(invalid(
                    format!("gamma{}", i + 1),
                    gamma[i],
                    "must be positive",
                ));
            }
        }
        Ok(Self { beta, gamma })
    }

    /// Equal transmission and recovery in both species.
    pub fn homogeneous(beta: T, gamma: T) -> Result<Self, ModelError> {
        Self::new([[beta; 2]; 2], [gamma; 2])
    }

    /// Homogeneous parameters with `gamma = nu * beta`, i.e. `1/R₀ = nu`.
    pub fn from_nu(nu: T, beta: T) -> Result<Self, ModelError> {
        Self::homogeneous(beta, nu * beta)
    }

    /// Every rate in `(0, 1]`; this is what keeps the disease map in the
    /// non-negative cone.
    pub fn is_admissible(&self) -> bool {
        let ok = |v: T| v > T::zero() && v <= T::one();
        self.beta.iter().flatten().all(|&v| ok(v)) && self.gamma.iter().all(|&v| ok(v))
    }

    pub fn is_homogeneous(&self) -> bool {
        let b = self.beta[0][0];
        self.beta.iter().flatten().all(|&v| v == b) && self.gamma[0] == self.gamma[1]
    }

    /// `(beta, gamma)` of a homogeneous parameter set.
    pub fn homogeneous_rates(&self) -> Option<(T, T)> {
        self.is_homogeneous()
            .then(|| (self.beta[0][0], self.gamma[0]))
    }

    /// Homogeneous with `0 < gamma < beta <= 1`.
    pub fn satisfies_hypothesis(&self) -> bool {
        match self.homogeneous_rates() {
            Some((b, g)) => T::zero() < g && g < b && b <= T::one(),
            None => false,
        }
    }
}

/// Population counts `(N_S¹, N_I¹, N_S², N_I²)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FullState<T> {
    pub n_s1: T,
    pub n_i1: T,
    pub n_s2: T,
    pub n_i2: T,
}

impl<T: Scalar> FullState<T> {
    pub fn new(n_s1: T, n_i1: T, n_s2: T, n_i2: T) -> Self {
        Self {
            n_s1,
            n_i1,
            n_s2,
            n_i2,
        }
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.n_s1, self.n_i1, self.n_s2, self.n_i2]
    }

    /// Count of species `i` (0 or 1) with status `a`.
    #[inline]
    pub fn get(&self, i: usize, a: Status) -> T {
        match (i, a) {
            (0, Status::S) => self.n_s1,
            (0, Status::I) => self.n_i1,
            (1, Status::S) => self.n_s2,
            (1, Status::I) => self.n_i2,
            _ => panic!("species index {i} out of range"),
        }
    }

    /// Species totals `(N¹, N²)`.
    pub fn totals(&self) -> [T; 2] {
        [self.n_s1 + self.n_i1, self.n_s2 + self.n_i2]
    }

    pub fn total(&self) -> T {
        self.n_s1 + self.n_i1 + self.n_s2 + self.n_i2
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|&v| v >= T::zero())
    }

    /// At least one infected individual.
    pub fn in_omega(&self) -> bool {
        self.is_nonnegative() && self.n_i1 + self.n_i2 > T::zero()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(T::zero(), |m, (&a, b)| m.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> T {
        self.to_array()
            .iter()
            .fold(T::zero(), |m, &a| m.max(a.abs()))
    }

    pub(crate) fn check_nonnegative(&self) -> Result<(), ModelError> {
        for (index, v) in self.to_array().into_iter().enumerate() {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(ModelError::InvalidState {
                    index,
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// One demographic episode: each class grows at its own rate and is
/// depressed by a Leslie-Gower denominator over all four classes.
pub fn demographic_step<T: Scalar>(p: &DemographyParams<T>, x: &FullState<T>) -> FullState<T> {
    let mut out = [T::zero(); 4];
    for i in 0..2 {
        for a in Status::ALL {
            let mut den = T::one();
            for j in 0..2 {
                for b in Status::ALL {
                    den = den + p.coefficient(i, j, a, b) * x.get(j, b);
                }
            }
            out[2 * i + a.index()] = p.growth(i, a) * x.get(i, a) / den;
        }
    }
    FullState::from_array(out)
}

/// Result of one disease episode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiseaseStep<T> {
    pub state: FullState<T>,
    /// False when the parameters are outside `(0, 1]`; the formula is still
    /// evaluated but the image may leave the non-negative cone.
    pub positivity_guaranteed: bool,
}

/// One infection-recovery episode of the two-species SIS map.
pub fn disease_step<T: Scalar>(
    d: &DiseaseParams<T>,
    x: &FullState<T>,
) -> Result<DiseaseStep<T>, ModelError> {
    if !(x.total() > T::zero()) {
        return Err(ModelError::ZeroPopulation);
    }
    Ok(DiseaseStep {
        state: disease_map(d, x),
        positivity_guaranteed: d.is_admissible(),
    })
}

/// Unchecked disease map; the caller guarantees a positive total.
///
/// Written as `N_S (1 - force) + γ N_I` and `N_I (1 - γ) + N_S force` so that,
/// for admissible rates, the rounded result stays non-negative.
#[inline]
pub(crate) fn disease_map<T: Scalar>(d: &DiseaseParams<T>, x: &FullState<T>) -> FullState<T> {
    let total = x.total();
    let mut out = [T::zero(); 4];
    for i in 0..2 {
        let force = (d.beta[i][0] * x.n_i1 + d.beta[i][1] * x.n_i2) / total;
        let s = x.get(i, Status::S);
        let inf = x.get(i, Status::I);
        out[2 * i] = s * (T::one() - force) + d.gamma[i] * inf;
        out[2 * i + 1] = inf * (T::one() - d.gamma[i]) + s * force;
    }
    FullState::from_array(out)
}

/// `k`-fold iterate `F^(k)(x)`.
pub fn disease_iterate<T: Scalar>(
    d: &DiseaseParams<T>,
    k: u32,
    x: &FullState<T>,
) -> Result<FullState<T>, ModelError> {
    if k == 0 {
        return Ok(*x);
    }
    if !(x.total() > T::zero()) {
        return Err(ModelError::ZeroPopulation);
    }
    // F conserves the species totals, so the total stays positive.
    Ok((0..k).fold(*x, |s, _| disease_map(d, &s)))
}

/// One step of the full model: `k` disease episodes followed by one
/// demographic episode. `k = 0` is pure demography.
pub fn full_step<T: Scalar>(
    p: &DemographyParams<T>,
    d: &DiseaseParams<T>,
    k: u32,
    x: &FullState<T>,
) -> Result<FullState<T>, ModelError> {
    if k == 0 {
        return Ok(demographic_step(p, x));
    }
    if !d.is_admissible() {
        return Err(ModelError::InadmissibleDisease);
    }
    let fast = disease_iterate(d, k, x)?;
    Ok(demographic_step(p, &fast))
}
