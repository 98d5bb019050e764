//! Parameter sets and generators shared by the integration tests.

#![allow(dead_code)]

use parasite_competition::model::{CompetitionTable, DemographyParams, DiseaseParams};
use parasite_competition::reduction::ReducedParams;
use proptest::prelude::*;

/// Coefficients `[i][j]` for a susceptible and an infected focal individual;
/// the competitor's status does not matter.
fn focal_status_table(s: [[f64; 2]; 2], i: [[f64; 2]; 2]) -> CompetitionTable<f64> {
    std::array::from_fn(|a| std::array::from_fn(|b| [[s[a][b]; 2], [i[a][b]; 2]]))
}

/// Two-species demography with three positive equilibria at `ν = 0.5`.
pub fn fig2_demography() -> DemographyParams<f64> {
    DemographyParams::new(
        [13.0, 3.4],
        [3.6, 8.0],
        focal_status_table([[0.9, 1.1], [6.0, 0.2]], [[0.1, 5.0], [0.3, 0.8]]),
    )
    .unwrap()
}

pub fn fig2_disease() -> DiseaseParams<f64> {
    DiseaseParams::homogeneous(0.8, 0.4).unwrap()
}

pub fn fig2_reduced() -> ReducedParams<f64> {
    ReducedParams::from_nu(&fig2_demography(), 0.5).unwrap()
}

/// Demography swept over `(ν, b_S¹)` in the bifurcation diagram.
pub fn fig3_demography(b_s1: f64) -> DemographyParams<f64> {
    let mut c = [[[[0.0; 2]; 2]; 2]; 2];
    // [i][j] -> (SS, SI, IS, II)
    let v = [
        [(1.3, 0.5, 0.1, 0.1), (1.0, 0.05, 8.0, 3.0)],
        [(6.0, 0.3, 0.3, 0.3), (0.2, 0.2, 0.8, 0.8)],
    ];
    for i in 0..2 {
        for j in 0..2 {
            let (ss, si, is, ii) = v[i][j];
            c[i][j] = [[ss, si], [is, ii]];
        }
    }
    DemographyParams::new([b_s1, 4.4], [2.0, 9.0], c).unwrap()
}

/// Reduced parameters with three positive equilibria (attracting, saddle,
/// attracting in K-order) and both semitrivial equilibria unstable.
pub fn a3_instance() -> ReducedParams<f64> {
    ReducedParams::new(
        0.5,
        [11.617183652058579, 12.920287688627687],
        [2.2383871800294806, 12.856792456601156],
        [
            [0.17672537289820048, 0.8051045756540606],
            [1.2845799411288203, 0.754817158722541],
        ],
        [
            [3.4555973382973337, 0.10304647849895254],
            [0.22099393984232796, 1.7658642924139794],
        ],
    )
    .unwrap()
}

pub fn c2_instance() -> ReducedParams<f64> {
    ReducedParams::from_nu(&fig3_demography(16.0), 0.5).unwrap()
}

pub fn d2_instance() -> ReducedParams<f64> {
    ReducedParams::from_nu(&fig3_demography(16.0), 0.29).unwrap()
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

pub fn coefficient() -> impl Strategy<Value = f64> {
    log_uniform(0.05, 10.0)
}

pub fn coefficient_pair_table() -> impl Strategy<Value = [[f64; 2]; 2]> {
    prop::array::uniform2(prop::array::uniform2(coefficient()))
}

/// Arbitrary valid reduced parameters at `ν ∈ (0.02, 0.98)`.
pub fn reduced_params() -> impl Strategy<Value = ReducedParams<f64>> {
    (
        0.02..0.98f64,
        prop::array::uniform2(0.2..20.0f64),
        prop::array::uniform2(0.0..20.0f64),
        coefficient_pair_table(),
        coefficient_pair_table(),
    )
        .prop_map(|(nu, r_s, r_i, c_s, c_i)| ReducedParams::new(nu, r_s, r_i, c_s, c_i).unwrap())
}

/// Reduced parameters whose two isoclines both reach the open quadrant.
pub fn persistent_reduced_params() -> impl Strategy<Value = ReducedParams<f64>> {
    reduced_params().prop_filter("both phi(0,0) > 1", |rp| {
        rp.phi0(0) > 1.05 && rp.phi0(1) > 1.05
    })
}

/// Arbitrary status-dependent demography.
pub fn demography() -> impl Strategy<Value = DemographyParams<f64>> {
    (
        prop::array::uniform2(0.2..20.0f64),
        prop::array::uniform2(0.2..20.0f64),
        prop::array::uniform16(coefficient()),
    )
        .prop_map(|(b_s, b_i, flat)| {
            let c = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    std::array::from_fn(|a| {
                        std::array::from_fn(|b| flat[8 * i + 4 * j + 2 * a + b])
                    })
                })
            });
            DemographyParams::new(b_s, b_i, c).unwrap()
        })
}

/// Homogeneous disease parameters with `0 < γ < β ≤ 1`.
pub fn hypothesis_disease() -> impl Strategy<Value = DiseaseParams<f64>> {
    (0.05..=1.0f64, 0.01..0.99f64)
        .prop_map(|(beta, frac)| DiseaseParams::homogeneous(beta, beta * frac).unwrap())
}

/// Admissible (possibly heterogeneous) disease parameters.
pub fn admissible_disease() -> impl Strategy<Value = DiseaseParams<f64>> {
    (
        prop::array::uniform2(prop::array::uniform2(0.001..=1.0f64)),
        prop::array::uniform2(0.001..=1.0f64),
    )
        .prop_map(|(beta, gamma)| DiseaseParams::new(beta, gamma).unwrap())
}

/// Root of `φ_i` along axis `axis` by plain bisection on the defining sum.
pub fn intercept_by_bisection(rp: &ReducedParams<f64>, i: usize, axis: usize) -> f64 {
    let f = |t: f64| {
        rp.r_s[i] / (1.0 + rp.c_s[i][axis] * t) + rp.r_i[i] / (1.0 + rp.c_i[i][axis] * t) - 1.0
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Same distribution as [`reduced_params`], drawn from a plain RNG.
pub fn sample_reduced_params<R: rand::Rng>(rng: &mut R) -> ReducedParams<f64> {
    let mut c = || (rng.gen_range(0.05f64.ln()..10.0f64.ln())).exp();
    let c_s = [[c(), c()], [c(), c()]];
    let c_i = [[c(), c()], [c(), c()]];
    let nu = rng.gen_range(0.02..0.98);
    let r_s = [rng.gen_range(0.2..20.0), rng.gen_range(0.2..20.0)];
    let r_i = [rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0)];
    ReducedParams::new(nu, r_s, r_i, c_s, c_i).unwrap()
}
