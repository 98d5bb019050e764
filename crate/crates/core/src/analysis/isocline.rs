use serde::Serialize;

use super::AnalysisError;
use crate::reduction::ReducedParams;
use crate::scalar::{rel_eq, Scalar};

const DEGENERACY_RTOL: f64 = 1e-12;

/// The non-trivial isocline `φ_i(x₁, x₂) = 1` of one species.
///
/// Clearing denominators turns it into the conic
/// `(c_S·x)(c_I·x) − α·x + (1 − φ_i(0,0)) = 0`, with
/// `α_j = c_Ij (r_S − 1) + c_Sj (r_I − 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsoclineBranch<T> {
    /// Zero-based species index.
    pub species: usize,
    /// `φ_i(0, 0) = r_S^i + r_I^i`.
    pub phi0: T,
    pub alpha: [T; 2],
    /// Axis intercepts `(R_i1, R_i2)`; present iff `phi0 > 1`.
    pub intercepts: Option<[T; 2]>,
    /// The conic splits into two parallel lines (`c_S1 c_I2 = c_S2 c_I1`).
    pub degenerate: bool,
    /// Determinant of the 2×2 quadratic-part matrix; never positive.
    pub delta: T,
    /// Determinant of the full 3×3 conic matrix; never negative.
    #[serde(rename = "Delta")]
    pub big_delta: T,
    #[serde(skip)]
    r: [T; 2],
    #[serde(skip)]
    c_s: [T; 2],
    #[serde(skip)]
    c_i: [T; 2],
}

impl<T: Scalar> IsoclineBranch<T> {
    pub fn exists(&self) -> bool {
        self.intercepts.is_some()
    }

    /// `Φ_i(x₁)` without domain checks; `x₁` must lie in `[0, R_i1]`.
    pub fn height(&self, x1: T) -> T {
        let [r_s, r_i] = self.r;
        let y = if self.degenerate {
            // c_I = λ c_S: solve for u = c_S·x on the line, then for x₂.
            let lambda = self.c_i[0] / self.c_s[0];
            let b = T::one() + lambda - r_s * lambda - r_i;
            let u = positive_root(lambda, b, T::one() - self.phi0);
            (u - self.c_s[0] * x1) / self.c_s[1]
        } else {
            let a_s = T::one() + self.c_s[0] * x1;
            let a_i = T::one() + self.c_i[0] * x1;
            let qa = self.c_s[1] * self.c_i[1];
            let qb = a_s * self.c_i[1] + a_i * self.c_s[1] - r_s * self.c_i[1] - r_i * self.c_s[1];
            let qc = a_s * a_i - r_s * a_i - r_i * a_s;
            positive_root(qa, qb, qc)
        };
        y.max(T::zero())
    }
}

/// Larger root of `a y² + b y + c` with `a > 0`, evaluated without
/// cancellation.
fn positive_root<T: Scalar>(a: T, b: T, c: T) -> T {
    let disc = (b * b - T::of(4.0) * a * c).max(T::zero()).sqrt();
    if b > T::zero() {
        -(c + c) / (b + disc)
    } else {
        (disc - b) / (a + a)
    }
}

pub fn isocline<T: Scalar>(rp: &ReducedParams<T>, i: usize) -> IsoclineBranch<T> {
    let (r_s, r_i) = (rp.r_s[i], rp.r_i[i]);
    let c_s = rp.c_s[i];
    let c_i = rp.c_i[i];
    let phi0 = r_s + r_i;
    let alpha: [T; 2] =
        std::array::from_fn(|j| c_i[j] * (r_s - T::one()) + c_s[j] * (r_i - T::one()));

    let intercepts = (phi0 > T::one()).then(|| {
        std::array::from_fn(|j| {
            let prod = c_s[j] * c_i[j];
            let excess = phi0 - T::one();
            let root = (alpha[j] * alpha[j] + T::of(4.0) * prod * excess).sqrt();
            if alpha[j] >= T::zero() {
                (alpha[j] + root) / (prod + prod)
            } else {
                (excess + excess) / (root - alpha[j])
            }
        })
    });

    let half = T::half();
    let cross_a = c_s[0] * c_i[1];
    let cross_b = c_s[1] * c_i[0];
    let degenerate = rel_eq(cross_a, cross_b, T::of(DEGENERACY_RTOL));
    // Both conic determinants collapse to multiples of (cross_a − cross_b)²;
    // the factored forms keep their signs exact.
    let gap = if degenerate {
        T::zero()
    } else {
        cross_a - cross_b
    };
    let quarter = half * half;
    let delta = -quarter * gap * gap;
    let big_delta = quarter * r_s * r_i * gap * gap;

    IsoclineBranch {
        species: i,
        phi0,
        alpha,
        intercepts,
        degenerate,
        delta,
        big_delta,
        r: [r_s, r_i],
        c_s,
        c_i,
    }
}

/// `Φ_i(x₁)`: the unique `x₂ ≥ 0` on the isocline of species `i`.
pub fn isocline_height<T: Scalar>(
    rp: &ReducedParams<T>,
    i: usize,
    x1: T,
) -> Result<T, AnalysisError> {
    let branch = isocline(rp, i);
    let [r1, _] = branch
        .intercepts
        .ok_or(AnalysisError::NoIsocline { species: i })?;
    if !(x1 >= T::zero() && x1 <= r1) {
        return Err(AnalysisError::OutOfDomain {
            x1: x1.as_f64(),
            max: r1.as_f64(),
        });
    }
    Ok(branch.height(x1))
}
