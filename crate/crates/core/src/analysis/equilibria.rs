use num_complex::Complex;
use serde::Serialize;

use super::isocline::{isocline, IsoclineBranch};
use super::{jacobian, phi, phi_gradient, ReducedState};
use crate::reduction::ReducedParams;
use crate::scalar::Scalar;

/// An equilibrium whose eigenvalue moduli are within this distance of 1 is
/// treated as non-hyperbolic.
pub const HYPERBOLICITY_MARGIN: f64 = 1e-9;

const SCAN_INTERVALS: usize = 10_000;
const ROOT_TOL: f64 = 1e-12;
const TANGENCY_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EquilibriumKind {
    /// `E₀* = (0, 0)`.
    Trivial,
    /// `E₁*` on the positive `x₁` axis.
    Semitrivial1,
    /// `E₂*` on the positive `x₂` axis.
    Semitrivial2,
    Positive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Stability {
    Attracting,
    Saddle,
    Repelling,
    /// Some eigenvalue modulus within the hyperbolicity margin of 1.
    UnstableOther,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Equilibrium<T> {
    /// `0`, `1`, `2` for `E₀*`, `E₁*`, `E₂*`; positive equilibria are
    /// numbered from 3 in K-order (`x₁` ascending).
    pub index: usize,
    pub location: ReducedState<T>,
    pub kind: EquilibriumKind,
    pub eigenvalues: [Complex<T>; 2],
    pub stability: Stability,
    pub hyperbolic: bool,
}

impl<T: Scalar> Equilibrium<T> {
    pub fn name(&self) -> String {
        format!("E{}", self.index)
    }

    fn at(
        rp: &ReducedParams<T>,
        index: usize,
        kind: EquilibriumKind,
        location: ReducedState<T>,
    ) -> Self {
        let eigenvalues = eigenvalues(jacobian(rp, &location));
        let (stability, hyperbolic) = classify_spectrum(&eigenvalues);
        Self {
            index,
            location,
            kind,
            eigenvalues,
            stability,
            hyperbolic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumSet<T> {
    /// `E₀*`, then the semitrivial equilibria that exist, then the positive
    /// ones in K-order.
    pub equilibria: Vec<Equilibrium<T>>,
    /// More than three positive equilibria, a tangency of the isoclines, or a
    /// non-hyperbolic equilibrium.
    pub non_generic: bool,
}

impl<T: Scalar> EquilibriumSet<T> {
    pub fn positive(&self) -> impl Iterator<Item = &Equilibrium<T>> {
        self.equilibria
            .iter()
            .filter(|e| e.kind == EquilibriumKind::Positive)
    }

    pub fn positive_count(&self) -> usize {
        self.positive().count()
    }

    pub fn by_kind(&self, kind: EquilibriumKind) -> Option<&Equilibrium<T>> {
        self.equilibria.iter().find(|e| e.kind == kind)
    }

    pub fn attractors(&self) -> impl Iterator<Item = &Equilibrium<T>> {
        self.equilibria
            .iter()
            .filter(|e| e.stability == Stability::Attracting)
    }
}

/// Spectrum of a real 2×2 matrix from its characteristic polynomial.
///
/// The discriminant is taken as `((a − d)/2)² + bc`, which is exact for
/// triangular matrices.
pub fn eigenvalues<T: Scalar>(m: [[T; 2]; 2]) -> [Complex<T>; 2] {
    let half_tr = T::half() * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half_gap = T::half() * (m[0][0] - m[1][1]);
    let disc = half_gap * half_gap + m[0][1] * m[1][0];
    if disc >= T::zero() {
        let s = disc.sqrt();
        let big = if half_tr >= T::zero() {
            half_tr + s
        } else {
            half_tr - s
        };
        let small = if big != T::zero() {
            det / big
        } else {
            half_tr - s
        };
        let (a, b) = if big >= small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex::new(a, T::zero()), Complex::new(b, T::zero())]
    } else {
        let im = (-disc).sqrt();
        [Complex::new(half_tr, im), Complex::new(half_tr, -im)]
    }
}

fn classify_spectrum<T: Scalar>(eig: &[Complex<T>; 2]) -> (Stability, bool) {
    let margin = T::of(HYPERBOLICITY_MARGIN);
    let moduli = [eig[0].norm(), eig[1].norm()];
    if moduli.iter().any(|m| (*m - T::one()).abs() <= margin) {
        return (Stability::UnstableOther, false);
    }
    let inside = moduli.iter().filter(|m| **m < T::one()).count();
    let stability = match inside {
        2 => Stability::Attracting,
        1 => Stability::Saddle,
        _ => Stability::Repelling,
    };
    (stability, true)
}

/// All equilibria of the reduced map.
///
/// Positive equilibria are the crossings of the two isoclines, located as
/// sign changes of `g = Φ₁ − Φ₂` on a uniform scan of `[0, min(R₁₁, R₂₁)]`,
/// refined by bisection and polished with Newton steps on `φ₁ = φ₂ = 1`.
pub fn find_equilibria<T: Scalar>(rp: &ReducedParams<T>) -> EquilibriumSet<T> {
    let branches = [isocline(rp, 0), isocline(rp, 1)];
    let mut equilibria = vec![Equilibrium::at(
        rp,
        0,
        EquilibriumKind::Trivial,
        ReducedState::default(),
    )];
    if let Some([r11, _]) = branches[0].intercepts {
        equilibria.push(Equilibrium::at(
            rp,
            1,
            EquilibriumKind::Semitrivial1,
            ReducedState::new(r11, T::zero()),
        ));
    }
    if let Some([_, r22]) = branches[1].intercepts {
        equilibria.push(Equilibrium::at(
            rp,
            2,
            EquilibriumKind::Semitrivial2,
            ReducedState::new(T::zero(), r22),
        ));
    }

    let mut non_generic = false;
    if branches[0].exists() && branches[1].exists() {
        let scan = scan_crossings(&branches);
        non_generic |= scan.tangency;
        for (n, x1) in scan.roots.into_iter().enumerate() {
            let guess = ReducedState::new(x1, branches[0].height(x1));
            let location = polish(rp, guess);
            equilibria.push(Equilibrium::at(
                rp,
                3 + n,
                EquilibriumKind::Positive,
                location,
            ));
        }
    }
    let positives = equilibria
        .iter()
        .filter(|e| e.kind == EquilibriumKind::Positive)
        .count();
    non_generic |= positives > 3;
    non_generic |= equilibria
        .iter()
        .any(|e| e.kind != EquilibriumKind::Trivial && !e.hyperbolic);

    EquilibriumSet {
        equilibria,
        non_generic,
    }
}

struct Scan<T> {
    roots: Vec<T>,
    tangency: bool,
}

fn scan_crossings<T: Scalar>(branches: &[IsoclineBranch<T>; 2]) -> Scan<T> {
    let [r11, r12] = branches[0].intercepts.expect("branch 1 exists");
    let [r21, r22] = branches[1].intercepts.expect("branch 2 exists");
    let end = r11.min(r21);
    let n = SCAN_INTERVALS;
    let x_at = |k: usize| {
        if k == n {
            end
        } else {
            end * T::of(k as f64) / T::of(n as f64)
        }
    };
    let height = |b: usize, x: T| {
        // exact zero at the branch's own x1-intercept
        if x == branches[b].intercepts.unwrap()[0] {
            T::zero()
        } else {
            branches[b].height(x)
        }
    };
    let g = |x: T| height(0, x) - height(1, x);

    let mut values: Vec<T> = (0..=n).map(|k| g(x_at(k))).collect();
    values[0] = r12 - r22;

    let mut roots = Vec::new();
    for k in 0..n {
        let (ga, gb) = (values[k], values[k + 1]);
        if k > 0 && ga == T::zero() {
            roots.push(x_at(k));
        } else if (ga < T::zero() && gb > T::zero()) || (ga > T::zero() && gb < T::zero()) {
            roots.push(bisect(&g, x_at(k), x_at(k + 1), ga));
        }
    }

    // A touching (non-crossing) contact shows up as a local minimum of |g|
    // near zero with the same sign on both sides.
    let scale = values
        .iter()
        .fold(T::zero(), |m, v| m.max(v.abs()))
        .max(end);
    let threshold = T::of(TANGENCY_RTOL) * scale;
    let mut tangency = false;
    for k in 1..n {
        let (a, b, c) = (values[k - 1], values[k], values[k + 1]);
        let same_side = (a > T::zero() && b > T::zero() && c > T::zero())
            || (a < T::zero() && b < T::zero() && c < T::zero());
        if same_side && b.abs() <= a.abs() && b.abs() <= c.abs() {
            let m = min_abs(&g, x_at(k - 1), x_at(k + 1));
            if m <= threshold {
                tangency = true;
            }
        }
    }
    // A crossing with vanishing slope is a tangency as well.
    for &r in &roots {
        let h = end * T::of(1e-6);
        let lo = (r - h).max(T::zero());
        let hi = (r + h).min(end);
        let slope = (g(hi) - g(lo)) / (hi - lo);
        if slope.abs() * end <= threshold {
            tangency = true;
        }
    }
    Scan { roots, tangency }
}

fn bisect<T: Scalar, F: Fn(T) -> T>(g: &F, mut a: T, mut b: T, mut ga: T) -> T {
    for _ in 0..200 {
        let mid = T::half() * (a + b);
        if mid <= a || mid >= b || b - a <= T::of(ROOT_TOL) * T::one().max(mid.abs()) {
            return mid;
        }
        let gm = g(mid);
        if gm == T::zero() {
            return mid;
        }
        if (gm < T::zero()) == (ga < T::zero()) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    T::half() * (a + b)
}

/// Golden-section minimum of `|g|` on `[a, b]`.
fn min_abs<T: Scalar, F: Fn(T) -> T>(g: &F, mut a: T, mut b: T) -> T {
    let inv_phi = T::of(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    for _ in 0..80 {
        if g(c).abs() < g(d).abs() {
            b = d;
        } else {
            a = c;
        }
        c = b - (b - a) * inv_phi;
        d = a + (b - a) * inv_phi;
    }
    g(T::half() * (a + b)).abs()
}

/// Newton on `(φ₁ − 1, φ₂ − 1) = 0`, keeping an iterate only if it lowers the
/// residual and stays in the open quadrant.
fn polish<T: Scalar>(rp: &ReducedParams<T>, mut x: ReducedState<T>) -> ReducedState<T> {
    let residual = |x: &ReducedState<T>| [phi(rp, 0, x) - T::one(), phi(rp, 1, x) - T::one()];
    let norm = |r: [T; 2]| r[0].abs().max(r[1].abs());
    let mut res = residual(&x);
    for _ in 0..8 {
        if norm(res) == T::zero() {
            break;
        }
        let g0 = phi_gradient(rp, 0, &x);
        let g1 = phi_gradient(rp, 1, &x);
        let det = g0[0] * g1[1] - g0[1] * g1[0];
        if det == T::zero() || !det.is_finite() {
            break;
        }
        let dx1 = (res[0] * g1[1] - res[1] * g0[1]) / det;
        let dx2 = (g0[0] * res[1] - g1[0] * res[0]) / det;
        let cand = ReducedState::new(x.n1 - dx1, x.n2 - dx2);
        if !(cand.n1 > T::zero() && cand.n2 > T::zero()) {
            break;
        }
        let cand_res = residual(&cand);
        if norm(cand_res) >= norm(res) {
            break;
        }
        x = cand;
        res = cand_res;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::reduced_step;

    #[test]
    fn real_and_complex_spectra() {
        let e = eigenvalues([[2.0_f64, 1.0], [1.0, 2.0]]);
        assert!((e[0].re - 3.0).abs() < 1e-15 && (e[1].re - 1.0).abs() < 1e-15);
        let e = eigenvalues([[0.0, -1.0], [1.0, 0.0]]);
        assert_eq!(e[0], Complex::new(0.0, 1.0));
        assert_eq!(e[1], Complex::new(0.0, -1.0));
        let e = eigenvalues([[0.5, 0.0], [0.0, -3.0]]);
        assert_eq!(e[0].re, 0.5);
        assert_eq!(e[1].re, -3.0);
    }

    #[test]
    fn spectrum_classes() {
        let c = |a: f64, b: f64| classify_spectrum(&[Complex::new(a, 0.0), Complex::new(b, 0.0)]);
        assert_eq!(c(0.5, -0.2), (Stability::Attracting, true));
        assert_eq!(c(1.5, 0.2), (Stability::Saddle, true));
        assert_eq!(c(1.5, -2.0), (Stability::Repelling, true));
        assert_eq!(c(1.0, 0.2), (Stability::UnstableOther, false));
    }

    #[test]
    fn symmetric_leslie_gower() {
        let rp = ReducedParams::leslie_gower([2.0_f64, 2.0], [[1.0, 0.5], [0.5, 1.0]]).unwrap();
        let set = find_equilibria(&rp);
        assert!(!set.non_generic);
        assert_eq!(set.equilibria.len(), 4);
        let e1 = set.by_kind(EquilibriumKind::Semitrivial1).unwrap();
        let e2 = set.by_kind(EquilibriumKind::Semitrivial2).unwrap();
        assert!((e1.location.n1 - 1.0).abs() < 1e-14 && e1.location.n2 == 0.0);
        assert!((e2.location.n2 - 1.0).abs() < 1e-14 && e2.location.n1 == 0.0);
        assert_eq!(e1.stability, Stability::Saddle);
        let pos: Vec<_> = set.positive().collect();
        assert_eq!(pos.len(), 1);
        assert_eq!(pos[0].index, 3);
        assert!(
            pos[0]
                .location
                .max_abs_diff(&ReducedState::new(2.0 / 3.0, 2.0 / 3.0))
                < 1e-12
        );
        assert_eq!(pos[0].stability, Stability::Attracting);
        assert_eq!(set.equilibria[0].stability, Stability::Repelling);
    }

    #[test]
    fn extinct_system_has_only_origin() {
        let rp =
            ReducedParams::new(0.5, [0.3, 0.4], [0.5, 0.2], [[1.0; 2]; 2], [[2.0; 2]; 2]).unwrap();
        let set = find_equilibria(&rp);
        assert_eq!(set.equilibria.len(), 1);
        assert_eq!(set.equilibria[0].stability, Stability::Attracting);
        assert!(set.equilibria[0].hyperbolic);
    }

    #[test]
    fn residuals_are_small() {
        let rp = ReducedParams::new(
            0.5,
            [6.5, 1.7],
            [1.8, 4.0],
            [[0.9, 1.1], [6.0, 0.2]],
            [[0.1, 5.0], [0.3, 0.8]],
        )
        .unwrap();
        let set = find_equilibria(&rp);
        assert_eq!(set.positive_count(), 3);
        for e in &set.equilibria {
            let h = reduced_step(&rp, &e.location);
            assert!(h.max_abs_diff(&e.location) <= 1e-10, "{e:?}");
        }
    }

    #[test]
    fn tangency_is_flagged() {
        // Two Leslie-Gower isoclines that coincide: every point is a
        // crossing with zero slope.
        let rp = ReducedParams::leslie_gower([2.0, 2.0], [[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(find_equilibria(&rp).non_generic);
    }
}
