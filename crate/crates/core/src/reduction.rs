//! Homogeneous-disease reduction of the full model to a planar map on the
//! species totals.
//!
//! With equal transmission `β` and recovery `γ` in both species the disease
//! map conserves each species total and drives the infected fraction of
//! every species to `1 − ν`, where `ν = γ/β = 1/R₀`. Replacing the fast
//! process by that endemic split gives the reduced parameters below.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{disease_map, DemographyParams, DiseaseParams, FullState, ModelError, Status};
use crate::scalar::Scalar;

/// Slack added to the contraction bound when judging a fitted decay ratio.
pub const CERTIFICATE_SLACK: f64 = 0.05;

/// Errors below this many ulps of the largest grid coordinate are rounding
/// noise and are left out of the decay fit.
const ROUNDING_FLOOR: f64 = 256.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("reduction requires homogeneous disease (all beta equal, both gamma equal)")]
    Heterogeneous,
    #[error("Hypothesis 0 < gamma < beta <= 1 violated (beta = {beta}, gamma = {gamma})")]
    HypothesisViolated { beta: f64, gamma: f64 },
    #[error("nu = {0} outside (0, 1]")]
    InvalidNu(f64),
    #[error("reduced parameter {name} = {value} is invalid")]
    InvalidParameter { name: String, value: f64 },
    #[error("species totals must be non-negative with a positive sum")]
    InvalidTotals,
    #[error("convergence grid is empty")]
    EmptyGrid,
    #[error("grid state {0} is not in Omega with both species present")]
    InvalidGridState(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parameters of the reduced two-species map.
///
/// `c_s[i][j]` is the aggregated coefficient `c_Sj^i` felt by susceptibles of
/// species `i` from species `j`; `c_i` likewise for infecteds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams<T> {
    /// `ν = γ/β`, computed once. `ν = 1` is the parasite-free Leslie-Gower
    /// baseline and is only reachable through the direct constructors.
    pub nu: T,
    pub r_s: [T; 2],
    pub r_i: [T; 2],
    pub c_s: [[T; 2]; 2],
    pub c_i: [[T; 2]; 2],
}

impl<T: Scalar> ReducedParams<T> {
    pub fn new(
        nu: T,
        r_s: [T; 2],
        r_i: [T; 2],
        c_s: [[T; 2]; 2],
        c_i: [[T; 2]; 2],
    ) -> Result<Self, ReductionError> {
        let rp = Self {
            nu,
            r_s,
            r_i,
            c_s,
            c_i,
        };
        rp.validate()?;
        Ok(rp)
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        if !(self.nu > T::zero() && self.nu <= T::one()) {
            return Err(ReductionError::InvalidNu(self.nu.as_f64()));
        }
        let bad = |name: String, value: T| ReductionError::InvalidParameter {
            name,
            value: value.as_f64(),
        };
        for i in 0..2 {
            if !(self.r_s[i] > T::zero()) || !self.r_s[i].is_finite() {
                return Err(bad(format!("rS{}", i + 1), self.r_s[i]));
            }
            if !(self.r_i[i] >= T::zero()) || !self.r_i[i].is_finite() {
                return Err(bad(format!("rI{}", i + 1), self.r_i[i]));
            }
            for j in 0..2 {
                if !(self.c_s[i][j] > T::zero()) || !self.c_s[i][j].is_finite() {
                    return Err(bad(format!("cS{}_{}", j + 1, i + 1), self.c_s[i][j]));
                }
                if !(self.c_i[i][j] > T::zero()) || !self.c_i[i][j].is_finite() {
                    return Err(bad(format!("cI{}_{}", j + 1, i + 1), self.c_i[i][j]));
                }
            }
        }
        Ok(())
    }

    /// Aggregates the demography at a given `ν`, bypassing `(β, γ)`.
    pub fn from_nu(p: &DemographyParams<T>, nu: T) -> Result<Self, ReductionError> {
        if !(nu > T::zero() && nu <= T::one()) {
            return Err(ReductionError::InvalidNu(nu.as_f64()));
        }
        let mu = T::one() - nu;
        let blend = |i: usize, j: usize, a: Status| {
            nu * p.coefficient(i, j, a, Status::S) + mu * p.coefficient(i, j, a, Status::I)
        };
        Self::new(
            nu,
            [p.b_s[0] * nu, p.b_s[1] * nu],
            [p.b_i[0] * mu, p.b_i[1] * mu],
            std::array::from_fn(|i| std::array::from_fn(|j| blend(i, j, Status::S))),
            std::array::from_fn(|i| std::array::from_fn(|j| blend(i, j, Status::I))),
        )
    }

    /// Synthetic `ν = 1` parameters reproducing the classical Leslie-Gower
    /// map `N^i' = b^i N^i / (1 + c^i1 N¹ + c^i2 N²)`.
    pub fn leslie_gower(b: [T; 2], c: [[T; 2]; 2]) -> Result<Self, ReductionError> {
        Self::new(T::one(), b, [T::zero(); 2], c, c)
    }

    /// `φ_i(0, 0) = r_S^i + r_I^i`.
    #[inline]
    pub fn phi0(&self, i: usize) -> T {
        self.r_s[i] + self.r_i[i]
    }

    /// Upper corner of the trapping box: `r_S^i / c_Si^i + r_I^i / c_Ii^i`.
    pub fn trapping_box(&self) -> [T; 2] {
        std::array::from_fn(|i| self.r_s[i] / self.c_s[i][i] + self.r_i[i] / self.c_i[i][i])
    }
}

/// `ν = γ/β = 1/R₀` for a homogeneous parameter set satisfying
/// `0 < γ < β ≤ 1`.
pub fn compute_nu<T: Scalar>(d: &DiseaseParams<T>) -> Result<T, ReductionError> {
    let (beta, gamma) = d.homogeneous_rates().ok_or(ReductionError::Heterogeneous)?;
    if !d.satisfies_hypothesis() {
        return Err(ReductionError::HypothesisViolated {
            beta: beta.as_f64(),
            gamma: gamma.as_f64(),
        });
    }
    Ok(gamma / beta)
}

pub fn reduce_params<T: Scalar>(
    p: &DemographyParams<T>,
    d: &DiseaseParams<T>,
) -> Result<ReducedParams<T>, ReductionError> {
    ReducedParams::from_nu(p, compute_nu(d)?)
}

/// `(νN¹, (1−ν)N¹, νN², (1−ν)N²)`.
pub fn endemic_split<T: Scalar>(nu: T, totals: [T; 2]) -> FullState<T> {
    let mu = T::one() - nu;
    FullState::new(
        nu * totals[0],
        mu * totals[0],
        nu * totals[1],
        mu * totals[1],
    )
}

/// Endemic fixed point of the disease map for given species totals.
pub fn endemic_equilibrium<T: Scalar>(
    d: &DiseaseParams<T>,
    totals: [T; 2],
) -> Result<FullState<T>, ReductionError> {
    let nu = compute_nu(d)?;
    let valid = totals.iter().all(|&n| n >= T::zero() && n.is_finite());
    if !valid || !(totals[0] + totals[1] > T::zero()) {
        return Err(ReductionError::InvalidTotals);
    }
    Ok(endemic_split(nu, totals))
}

/// Limit `F̄` of the disease iterates: projects each species total onto the
/// endemic split.
pub fn fast_limit_map<T: Scalar>(
    d: &DiseaseParams<T>,
    x: &FullState<T>,
) -> Result<FullState<T>, ReductionError> {
    let nu = compute_nu(d)?;
    Ok(endemic_split(nu, x.totals()))
}

/// Contraction constant `max{1 − γ, |1 − γ − β|}` bounding the decay of the
/// difference in infected fractions.
pub fn contraction_bound<T: Scalar>(beta: T, gamma: T) -> T {
    (T::one() - gamma).max((T::one() - gamma - beta).abs())
}

/// Numerical evidence that `F^(k) → F̄` uniformly on a finite grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    pub k_values: Vec<u32>,
    /// `sup_x ‖F^(k)(x) − F̄(x)‖∞` for each `k`.
    pub sup_errors: Vec<T>,
    /// Geometric decay ratio fitted on the last half of the `k` values whose
    /// error is still above the rounding floor.
    pub fitted_ratio: T,
    pub bound_c: T,
    /// Linear rate `|1 − β + γ|` of the total infected fraction at the
    /// endemic split; larger than `bound_c` when `ν > 1/2`.
    pub asymptotic_rate: T,
    /// First index from which `sup_errors` is non-increasing.
    pub burn_in: usize,
    /// Largest relative change of a species total over every disease step.
    pub max_conservation_error: T,
}

impl<T: Scalar> ConvergenceReport<T> {
    pub fn within_bound(&self) -> bool {
        self.fitted_ratio <= self.bound_c + T::of(CERTIFICATE_SLACK)
    }
}

pub fn certify_convergence<T: Scalar>(
    d: &DiseaseParams<T>,
    grid: &[FullState<T>],
    k_max: u32,
) -> Result<ConvergenceReport<T>, ReductionError> {
    let nu = compute_nu(d)?;
    let (beta, gamma) = d.homogeneous_rates().ok_or(ReductionError::Heterogeneous)?;
    if grid.is_empty() {
        return Err(ReductionError::EmptyGrid);
    }
    for (idx, x) in grid.iter().enumerate() {
        let [n1, n2] = x.totals();
        if !x.in_omega() || !(n1 > T::zero()) || !(n2 > T::zero()) {
            return Err(ReductionError::InvalidGridState(idx));
        }
    }

    let per_point: Vec<(Vec<T>, T)> = grid
        .par_iter()
        .map(|x0| {
            let totals = x0.totals();
            let target = endemic_split(nu, totals);
            let mut x = *x0;
            let mut errors = Vec::with_capacity(k_max as usize);
            let mut conservation = T::zero();
            for _ in 0..k_max {
                x = disease_map(d, &x);
                errors.push(x.max_abs_diff(&target));
                for (now, then) in x.totals().iter().zip(totals) {
                    conservation = conservation.max((*now - then).abs() / then);
                }
            }
            (errors, conservation)
        })
        .collect();

    let mut sup_errors = vec![T::zero(); k_max as usize];
    let mut max_conservation_error = T::zero();
    for (errors, cons) in &per_point {
        for (s, &e) in sup_errors.iter_mut().zip(errors) {
            *s = s.max(e);
        }
        max_conservation_error = max_conservation_error.max(*cons);
    }

    let k_values: Vec<u32> = (1..=k_max).collect();
    let scale = grid.iter().fold(T::zero(), |m, x| m.max(x.max_abs()));
    let floor = T::epsilon() * T::of(ROUNDING_FLOOR) * scale;
    let fitted_ratio = fit_decay_ratio(&k_values, &sup_errors, floor);
    let burn_in = non_increasing_from(&sup_errors);
    Ok(ConvergenceReport {
        k_values,
        sup_errors,
        fitted_ratio,
        bound_c: contraction_bound(beta, gamma),
        asymptotic_rate: (T::one() - beta + gamma).abs(),
        burn_in,
        max_conservation_error,
    })
}

/// Least-squares slope of `ln e_k` against `k`, returned as the ratio
/// `exp(slope)`. Only errors above `floor` count, and of the range they span
/// only the last half; with fewer than two such samples the ratio is zero.
fn fit_decay_ratio<T: Scalar>(ks: &[u32], errors: &[T], floor: T) -> T {
    let end = errors.iter().rposition(|e| *e > floor).map_or(0, |i| i + 1);
    let start = end / 2;
    let pts: Vec<(f64, f64)> = ks[start..end]
        .iter()
        .zip(&errors[start..end])
        .filter(|(_, e)| **e > floor)
        .map(|(&k, e)| (f64::from(k), e.as_f64().ln()))
        .collect();
    if pts.len() < 2 {
        return T::zero();
    }
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let me = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(k, e)| (k - mk) * (e - me)).sum();
    let sxx: f64 = pts.iter().map(|(k, _)| (k - mk) * (k - mk)).sum();
    T::of((sxy / sxx).exp())
}

fn non_increasing_from<T: Scalar>(v: &[T]) -> usize {
    let mut start = v.len().saturating_sub(1);
    while start > 0 && v[start - 1] >= v[start] {
        start -= 1;
    }
    start
}

/// Random states in Ω with both species present and totals in
/// `(0.01·max_total, max_total]`.
pub fn sample_interior_states<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_total: f64,
) -> Vec<FullState<T>> {
    (0..n)
        .map(|_| loop {
            let n1 = max_total * rng.gen_range(0.01..=1.0);
            let n2 = max_total * rng.gen_range(0.01..=1.0);
            let f1: f64 = rng.gen_range(0.0..=1.0);
            let f2: f64 = rng.gen_range(0.0..=1.0);
            let x = FullState::new(
                T::of(n1 * (1.0 - f1)),
                T::of(n1 * f1),
                T::of(n2 * (1.0 - f2)),
                T::of(n2 * f2),
            );
            if x.in_omega() {
                break x;
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::disease_step;

    fn fig2_demography() -> DemographyParams<f64> {
        let mut c = [[[[0.0; 2]; 2]; 2]; 2];
        let by_status = [[[0.9, 0.1], [1.1, 5.0]], [[6.0, 0.3], [0.2, 0.8]]];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = [[by_status[i][j][0]; 2], [by_status[i][j][1]; 2]];
            }
        }
        DemographyParams::new([13.0, 3.4], [3.6, 8.0], c).unwrap()
    }

    #[test]
    fn nu_is_inverse_r0() {
        let d = DiseaseParams::homogeneous(0.8, 0.4).unwrap();
        assert_eq!(compute_nu(&d).unwrap(), 0.5);
        let d = DiseaseParams::homogeneous(1.0_f64, 0.1).unwrap();
        let nu = compute_nu(&d).unwrap();
        assert_eq!(nu, 0.1);
        assert!((1.0 / nu - 10.0).abs() < 1e-12);
    }

    #[test]
    fn nu_rejects_boundary_and_heterogeneity() {
        let d = DiseaseParams::homogeneous(0.5, 0.5).unwrap();
        assert!(matches!(
            compute_nu(&d),
            Err(ReductionError::HypothesisViolated { .. })
        ));
        let d = DiseaseParams::new([[0.5, 0.6], [0.5, 0.5]], [0.1, 0.1]).unwrap();
        assert_eq!(compute_nu(&d), Err(ReductionError::Heterogeneous));
        let d = DiseaseParams::new([[0.5; 2]; 2], [0.1, 0.2]).unwrap();
        assert_eq!(compute_nu(&d), Err(ReductionError::Heterogeneous));
    }

    #[test]
    fn reduced_rates_for_fig2() {
        let d = DiseaseParams::homogeneous(0.8, 0.4).unwrap();
        let rp = reduce_params(&fig2_demography(), &d).unwrap();
        assert_eq!(rp.nu, 0.5);
        assert_eq!(rp.r_s[0], 6.5);
        assert!((rp.r_i[0] - 1.8).abs() < 1e-15);
        // status-independent within the competitor status: c_Sj^i = c_SS^ij
        assert!((rp.c_s[0][1] - 1.1).abs() < 1e-15);
        assert!((rp.c_i[0][1] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn equal_coefficients_survive_blending() {
        let p = DemographyParams::status_independent(
            [3.0_f64, 2.0],
            [1.0, 0.5],
            [[0.7, 0.3], [0.2, 1.1]],
        )
        .unwrap();
        for nu in [0.05, 0.3, 0.77, 1.0] {
            let rp = ReducedParams::from_nu(&p, nu).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let c = p.c[i][j][0][0];
                    assert!((rp.c_s[i][j] - c).abs() <= 1e-15 * c);
                    assert!((rp.c_i[i][j] - c).abs() <= 1e-15 * c);
                }
            }
        }
    }

    #[test]
    fn nu_one_is_parasite_free() {
        let p = fig2_demography();
        let rp = ReducedParams::from_nu(&p, 1.0).unwrap();
        assert_eq!(rp.r_s, p.b_s);
        assert_eq!(rp.r_i, [0.0, 0.0]);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(rp.c_s[i][j], p.c[i][j][0][0]);
                assert_eq!(rp.c_i[i][j], p.c[i][j][1][0]);
            }
        }
        assert!(ReducedParams::from_nu(&p, 0.0).is_err());
        assert!(ReducedParams::from_nu(&p, 1.2).is_err());
    }

    #[test]
    fn endemic_points() {
        let d = DiseaseParams::homogeneous(0.8, 0.4).unwrap();
        assert_eq!(
            endemic_equilibrium(&d, [2.0, 2.0]).unwrap(),
            FullState::new(1.0, 1.0, 1.0, 1.0)
        );
        assert_eq!(
            endemic_equilibrium(&d, [3.0, 0.0]).unwrap(),
            FullState::new(1.5, 1.5, 0.0, 0.0)
        );
        let d = DiseaseParams::homogeneous(0.6, 0.2).unwrap();
        let e = endemic_equilibrium(&d, [3.0, 6.0]).unwrap();
        assert!(e.max_abs_diff(&FullState::new(1.0, 2.0, 2.0, 4.0)) < 1e-14);
        let fe = disease_step(&d, &e).unwrap().state;
        assert!(fe.max_abs_diff(&e) < 1e-12);
        assert_eq!(
            endemic_equilibrium(&d, [0.0, 0.0]),
            Err(ReductionError::InvalidTotals)
        );
    }

    #[test]
    fn fast_limit_is_a_projection() {
        let d = DiseaseParams::homogeneous(0.8, 0.4).unwrap();
        let x = FullState::new(2.0, 0.0, 0.0, 2.0);
        let y = fast_limit_map(&d, &x).unwrap();
        assert_eq!(y, FullState::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(fast_limit_map(&d, &y).unwrap(), y);
        let x = FullState::new(0.3, 4.1, 2.2, 0.0);
        let y = fast_limit_map(&d, &x).unwrap();
        assert_eq!(fast_limit_map(&d, &y).unwrap(), y);
    }

    #[test]
    fn bound_by_substitution() {
        assert!((contraction_bound(0.8_f64, 0.4) - 0.6).abs() < 1e-15);
        assert!((contraction_bound(1.0_f64, 0.1) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn endemic_grid_has_zero_error() {
        let d = DiseaseParams::homogeneous(0.8, 0.4).unwrap();
        let grid: Vec<_> = [(1.0, 3.0), (2.0, 0.5), (7.0, 7.0)]
            .iter()
            .map(|&(a, b)| endemic_split(0.5, [a, b]))
            .collect();
        let r = certify_convergence(&d, &grid, 20).unwrap();
        assert!(r.sup_errors.iter().all(|&e| e == 0.0), "{:?}", r.sup_errors);
        assert_eq!(r.fitted_ratio, 0.0);
    }

    #[test]
    fn grid_validation() {
        let d = DiseaseParams::homogeneous(0.8, 0.4).unwrap();
        assert_eq!(
            certify_convergence(&d, &[], 5),
            Err(ReductionError::EmptyGrid)
        );
        let grid = [FullState::new(1.0, 1.0, 0.0, 0.0)];
        assert_eq!(
            certify_convergence(&d, &grid, 5),
            Err(ReductionError::InvalidGridState(0))
        );
    }

    #[test]
    fn decay_fit_recovers_geometric_ratio() {
        let ks: Vec<u32> = (1..=40).collect();
        let e: Vec<f64> = ks.iter().map(|&k| 3.0 * 0.7f64.powi(k as i32)).collect();
        assert!((fit_decay_ratio(&ks, &e, 0.0) - 0.7).abs() < 1e-12);
        // a flat tail of rounding noise below the floor is ignored
        let mut noisy = e.clone();
        for v in noisy.iter_mut().skip(30) {
            *v = 1e-15;
        }
        assert!((fit_decay_ratio(&ks, &noisy, 1e-14) - 0.7).abs() < 1e-12);
        assert_eq!(non_increasing_from(&e), 0);
        assert_eq!(non_increasing_from(&[1.0, 2.0, 1.5, 1.0]), 1);
    }
}
