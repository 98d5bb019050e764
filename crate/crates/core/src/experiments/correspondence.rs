use serde::Serialize;

use super::orbit::simulate_orbit;
use super::{ExperimentError, CONFIRMATION_STEPS, CONVERGENCE_TOL, MAX_ITER};
use crate::analysis::ReducedState;
use crate::model::{disease_iterate, full_step, DemographyParams, DiseaseParams, FullState};
use crate::reduction::{compute_nu, endemic_split, reduce_params};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FullOrbit<T> {
    /// `None` if `max_iter` was reached first.
    pub limit: Option<FullState<T>>,
    pub last: FullState<T>,
    pub iterations: usize,
}

/// Iterates `S ∘ F^(k)` with the same stopping rule as the reduced orbits.
pub fn simulate_full<T: Scalar>(
    p: &DemographyParams<T>,
    d: &DiseaseParams<T>,
    k: u32,
    x0: FullState<T>,
    max_iter: usize,
    tol: T,
) -> Result<FullOrbit<T>, ExperimentError> {
    let mut x = x0;
    let mut streak = 0;
    let mut n = 0;
    while n < max_iter && streak < CONFIRMATION_STEPS {
        let next = full_step(p, d, k, &x)?;
        streak = if next.max_abs_diff(&x) < tol {
            streak + 1
        } else {
            0
        };
        x = next;
        n += 1;
    }
    let converged = streak == CONFIRMATION_STEPS;
    Ok(FullOrbit {
        limit: converged.then_some(x),
        last: x,
        iterations: if converged { n - CONFIRMATION_STEPS } else { n },
    })
}

/// Full model against its reduction from the same initial totals.
///
/// The full limit `X*` is a fixed point of `S ∘ F^(k)`, i.e. it is observed
/// right after a demographic episode. Its species totals are compared with
/// the reduced limit `N*`, and its post-disease phase `F^(k)(X*)` with the
/// endemic split `(νN¹*, (1−ν)N¹*, νN²*, (1−ν)N²*)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrespondenceReport<T> {
    pub k: u32,
    pub nu: T,
    pub tol: T,
    pub full_limit: Option<FullState<T>>,
    pub full_iterations: usize,
    /// `F^(k)(X*)`.
    pub post_disease: Option<FullState<T>>,
    pub reduced_limit: Option<ReducedState<T>>,
    pub reduced_iterations: usize,
    pub predicted: Option<FullState<T>>,
    /// `‖F^(k)(X*) − predicted‖∞ / ‖predicted‖∞`.
    pub discrepancy: Option<T>,
    /// `max_i |N^i(X*) − N^i*| / max_i N^i*`.
    pub totals_discrepancy: Option<T>,
    /// `None` when either simulation did not converge.
    pub passed: Option<bool>,
}

fn relative<T: Scalar>(err: T, scale: T) -> T {
    if scale > T::zero() {
        err / scale
    } else {
        err
    }
}

pub fn correspondence_check<T: Scalar>(
    p: &DemographyParams<T>,
    d: &DiseaseParams<T>,
    k: u32,
    x0: FullState<T>,
    tol: T,
) -> Result<CorrespondenceReport<T>, ExperimentError> {
    let nu = compute_nu(d)?;
    if x0.check_nonnegative().is_err() {
        return Err(ExperimentError::InvalidInitialState);
    }
    if !x0.in_omega() {
        return Err(ExperimentError::NotInOmega);
    }
    let conv = T::of(CONVERGENCE_TOL);
    let full = simulate_full(p, d, k, x0, MAX_ITER, conv)?;
    let rp = reduce_params(p, d)?;
    let [n1, n2] = x0.totals();
    let reduced = simulate_orbit(&rp, ReducedState::new(n1, n2), MAX_ITER, conv);

    let mut report = CorrespondenceReport {
        k,
        nu,
        tol,
        full_limit: full.limit,
        full_iterations: full.iterations,
        post_disease: None,
        reduced_limit: reduced.limit,
        reduced_iterations: reduced.iterations,
        predicted: None,
        discrepancy: None,
        totals_discrepancy: None,
        passed: None,
    };
    if let Some(r) = reduced.limit {
        report.predicted = Some(endemic_split(nu, [r.n1, r.n2]));
    }
    if let Some(x) = full.limit {
        report.post_disease = Some(disease_iterate(d, k, &x)?);
    }
    if let (Some(x), Some(post), Some(pred), Some(r)) = (
        full.limit,
        report.post_disease,
        report.predicted,
        reduced.limit,
    ) {
        let disc = relative(post.max_abs_diff(&pred), pred.max_abs());
        let [t1, t2] = x.totals();
        let tot = relative((t1 - r.n1).abs().max((t2 - r.n2).abs()), r.n1.max(r.n2));
        report.discrepancy = Some(disc);
        report.totals_discrepancy = Some(tot);
        report.passed = Some(disc <= tol && tot <= tol);
    }
    Ok(report)
}
