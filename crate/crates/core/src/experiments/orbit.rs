use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::CONFIRMATION_STEPS;
use crate::analysis::{reduced_step, Equilibrium, ReducedState, Stability};
use crate::reduction::ReducedParams;
use crate::scalar::Scalar;

/// Every iterate up to this index is stored; later ones are thinned.
const KEEP_ALL: usize = 1_000;
const THIN_EVERY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitSample<T> {
    pub iteration: usize,
    pub state: ReducedState<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitResult<T> {
    /// Stored iterates, starting with `x0`; the last iterate is always kept.
    pub samples: Vec<OrbitSample<T>>,
    /// `None` if `max_iter` was reached first.
    pub limit: Option<ReducedState<T>>,
    /// Steps taken before the final run of sub-tolerance steps, or all
    /// steps taken when not converged.
    pub iterations: usize,
    /// First index from which both components are monotone to the end,
    /// ignoring changes no larger than the tolerance.
    pub monotone_from: usize,
}

impl<T: Scalar> OrbitResult<T> {
    pub fn converged(&self) -> bool {
        self.limit.is_some()
    }

    pub fn last(&self) -> ReducedState<T> {
        self.samples.last().expect("orbit has at least x0").state
    }
}

/// Tracks where the current monotone run of one component started.
#[derive(Clone, Copy)]
struct RunTracker {
    direction: i8,
    start: usize,
}

impl RunTracker {
    fn update<T: Scalar>(&mut self, from: usize, diff: T, tol: T) {
        if diff.abs() <= tol {
            return;
        }
        let d = if diff > T::zero() { 1 } else { -1 };
        if self.direction != 0 && d != self.direction {
            self.start = from;
        }
        self.direction = d;
    }
}

/// Iterates the reduced map until the step norm stays below `tol` for ten
/// consecutive steps or `max_iter` steps have been taken. The trajectory is
/// thinned: every iterate up to 10³, then every 100th.
pub fn simulate_orbit<T: Scalar>(
    rp: &ReducedParams<T>,
    x0: ReducedState<T>,
    max_iter: usize,
    tol: T,
) -> OrbitResult<T> {
    run(rp, x0, max_iter, tol, false)
}

/// Same as [`simulate_orbit`] but keeps every iterate.
pub fn simulate_orbit_full<T: Scalar>(
    rp: &ReducedParams<T>,
    x0: ReducedState<T>,
    max_iter: usize,
    tol: T,
) -> OrbitResult<T> {
    run(rp, x0, max_iter, tol, true)
}

fn run<T: Scalar>(
    rp: &ReducedParams<T>,
    x0: ReducedState<T>,
    max_iter: usize,
    tol: T,
    keep_all: bool,
) -> OrbitResult<T> {
    let keep = |n: usize| keep_all || n <= KEEP_ALL || n.is_multiple_of(THIN_EVERY);
    let mut samples = vec![OrbitSample {
        iteration: 0,
        state: x0,
    }];
    let mut trackers = [RunTracker {
        direction: 0,
        start: 0,
    }; 2];
    let mut x = x0;
    let mut streak = 0;
    let mut n = 0;
    while n < max_iter {
        let next = reduced_step(rp, &x);
        trackers[0].update(n, next.n1 - x.n1, tol);
        trackers[1].update(n, next.n2 - x.n2, tol);
        let step = next.max_abs_diff(&x);
        x = next;
        n += 1;
        if keep(n) {
            samples.push(OrbitSample {
                iteration: n,
                state: x,
            });
        }
        streak = if step < tol { streak + 1 } else { 0 };
        if streak == CONFIRMATION_STEPS {
            break;
        }
    }
    if samples.last().map(|s| s.iteration) != Some(n) {
        samples.push(OrbitSample {
            iteration: n,
            state: x,
        });
    }
    let converged = streak == CONFIRMATION_STEPS;
    OrbitResult {
        samples,
        limit: converged.then_some(x),
        iterations: if converged { n - CONFIRMATION_STEPS } else { n },
        monotone_from: trackers[0].start.max(trackers[1].start),
    }
}

/// Index of the equilibrium within `tol` (max norm) of `x`; `None` when no
/// equilibrium is that close or when the two closest are equidistant.
pub fn match_equilibrium<T: Scalar>(
    x: &ReducedState<T>,
    equilibria: &[Equilibrium<T>],
    tol: T,
) -> Option<usize> {
    let mut best: Option<(T, usize)> = None;
    let mut tie = false;
    for e in equilibria {
        let d = e.location.max_abs_diff(x);
        if d > tol {
            continue;
        }
        match best {
            Some((bd, _)) if d > bd => {}
            Some((bd, _)) if d == bd => tie = true,
            _ => {
                best = Some((d, e.index));
                tie = false;
            }
        }
    }
    if tie {
        None
    } else {
        best.map(|(_, i)| i)
    }
}

/// Where a batch of orbits ended up.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OrbitCensus {
    /// Orbits per equilibrium index.
    pub counts: BTreeMap<usize, usize>,
    /// Converged orbits whose limit matched no single equilibrium.
    pub unmatched: usize,
    pub not_converged: usize,
    /// Orbits whose limit is a saddle.
    pub saddle_hits: usize,
}

/// Runs every start to its limit and tallies the equilibria reached.
pub fn orbit_census<T: Scalar>(
    rp: &ReducedParams<T>,
    equilibria: &[Equilibrium<T>],
    starts: &[ReducedState<T>],
    max_iter: usize,
    tol: T,
    match_tol: T,
) -> OrbitCensus {
    let outcomes: Vec<Option<Option<usize>>> = starts
        .par_iter()
        .map(|x0| {
            simulate_orbit(rp, *x0, max_iter, tol)
                .limit
                .map(|l| match_equilibrium(&l, equilibria, match_tol))
        })
        .collect();
    let mut census = OrbitCensus::default();
    for o in outcomes {
        match o {
            None => census.not_converged += 1,
            Some(None) => census.unmatched += 1,
            Some(Some(idx)) => {
                *census.counts.entry(idx).or_default() += 1;
                let saddle = equilibria
                    .iter()
                    .any(|e| e.index == idx && e.stability == Stability::Saddle);
                if saddle {
                    census.saddle_hits += 1;
                }
            }
        }
    }
    census
}

/// Uniform random states in the open box `(0, upper]`.
pub fn sample_box_states<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    upper: [T; 2],
) -> Vec<ReducedState<T>> {
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = 1.0 - rng.gen::<f64>();
            ReducedState::new(upper[0] * T::of(u1), upper[1] * T::of(u2))
        })
        .collect()
}
