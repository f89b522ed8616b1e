//! Energy transfer at rational times: `|T̂_s(k)| = |sin(πk/N)/π · Σ_j T_j e^{-2πijk/N}|`
//! with `T_j = T(s_j⁺)`, `s_j = 2πj/(Mq)` (odd `q`, `N = Mq`) or `4πj/(Mq)` (even `q`, `N = Mq/2`).
//!
//! The `M`-fold symmetry `T_{j+n} = R_z(2π/M) T_j`, `n = N/M`, confines the
//! spectrum to `k ≡ 0, ±1 (mod M)` and reduces it to two length-`n` transforms.

use crate::error::{invalid, Result};
use crate::fourier::{dft, root_of_unity};
use crate::gauss::RationalTime;
use crate::polygon::{build_polygon, SkewPolygon};
use crate::Vec3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Sampled tangents `T(s_j⁺)`, `j = 0..N`.
pub fn spectral_samples(poly: &SkewPolygon) -> Vec<Vec3> {
    block_samples(poly, poly.time.sides() as usize)
}

/// First `blocks·n` samples, `n = N/M`.
fn block_samples(poly: &SkewPolygon, blocks: usize) -> Vec<Vec3> {
    let q = poly.time.q();
    let (n, stride) = if q % 2 == 1 {
        (poly.time.sides() as u64 * q, 2)
    } else {
        (poly.time.sides() as u64 * q / 2, 4)
    };
    let len = (n as usize / poly.time.sides() as usize) * blocks;
    (0..len as i64).map(|j| poly.tangent_units(stride * j)).collect()
}

/// Per-component `|T̂_{c,s}(k)|` by the defining length-`N` sum.
pub fn hat_ts_direct(poly: &SkewPolygon, k: i64) -> [f64; 3] {
    let samples = spectral_samples(poly);
    let n = samples.len() as i128;
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for (j, t) in samples.iter().enumerate() {
        let w = root_of_unity(-(j as i128) * k as i128, n);
        for c in 0..3 {
            acc[c] += w * t[c];
        }
    }
    let f = sin_factor(k, n as i64);
    [acc[0].norm() * f, acc[1].norm() * f, acc[2].norm() * f]
}

fn sin_factor(k: i64, n: i64) -> f64 {
    // |sin(πk/n)|/π with k reduced mod n first
    let r = k.rem_euclid(n);
    (PI * r as f64 / n as f64).sin().abs() / PI
}

/// `‖T̂_s(k)‖` from one block of `n = N/M` samples.
pub fn hat_ts_reduced(poly: &SkewPolygon, k: i64) -> f64 {
    let samples = spectral_samples(poly);
    let m = poly.time.sides() as i64;
    let big_n = samples.len() as i64;
    let n = (big_n / m) as i128;
    match k.rem_euclid(m) {
        0 => {
            let kk = (k / m) as i128;
            let s: Complex64 = (0..n as usize)
                .map(|j| root_of_unity(-(j as i128) * kk, n) * samples[j].z)
                .sum();
            m as f64 * sin_factor(k, big_n) * s.norm()
        }
        r if r == 1 || r == m - 1 => {
            // k = ±(M k' + 1)
            let kp = if r == 1 { (k - 1) / m } else { (-k - 1) / m } as i128;
            let big = big_n as i128;
            let s: Complex64 = (0..n as usize)
                .map(|j| {
                    let z = Complex64::new(samples[j].x, samples[j].y);
                    root_of_unity(-(j as i128) * (m as i128 * kp + 1), big) * z
                })
                .sum();
            m as f64 * sin_factor(k, big_n) * s.norm() / SQRT_2
        }
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub time: RationalTime,
    /// `√2·max_k |T̂_{1,s}(k)|`, attained on `k ≡ ±1 (mod M)`.
    pub first_component_max: f64,
    pub first_argmax_k: i64,
    /// `max_k |T̂_{3,s}(k)|`, attained on `k ≡ 0 (mod M)`.
    pub third_component_max: f64,
    pub third_argmax_k: i64,
    pub overall_max: f64,
}

/// Report for one polygon via the two length-`n` FFTs.
pub fn spectrum_report(poly: &SkewPolygon) -> SpectrumReport {
    let samples = block_samples(poly, 1);
    let m = poly.time.sides() as i64;
    let n = samples.len();
    let big_n = n as i64 * m;
    let twisted: Vec<Complex64> = (0..n)
        .map(|j| root_of_unity(-(j as i128), big_n as i128) * Complex64::new(samples[j].x, samples[j].y))
        .collect();
    let d = dft(&twisted);
    let third: Vec<Complex64> = samples[..n].iter().map(|t| Complex64::new(t.z, 0.0)).collect();
    let f3 = dft(&third);
    let mf = m as f64;
    let (mut first, mut first_k) = (f64::NEG_INFINITY, 0);
    let (mut third_max, mut third_k) = (f64::NEG_INFINITY, 0);
    for kp in 0..n {
        let k1 = m * kp as i64 + 1;
        let v1 = mf * sin_factor(k1, big_n) * d[kp].norm() / SQRT_2;
        if v1 > first {
            first = v1;
            first_k = k1;
        }
        let k3 = m * kp as i64;
        let v3 = mf * sin_factor(k3, big_n) * f3[kp].norm();
        if v3 > third_max {
            third_max = v3;
            third_k = k3;
        }
    }
    SpectrumReport {
        time: poly.time,
        first_component_max: first,
        first_argmax_k: first_k,
        third_component_max: third_max,
        third_argmax_k: third_k,
        overall_max: first.max(third_max),
    }
}

/// Report at `t = (2π/M²)(p/q)` after reducing the fraction.
pub fn report_at(sides: u32, p: u64, q: u64) -> Result<SpectrumReport> {
    Ok(spectrum_report(&build_polygon(RationalTime::reduced(sides, p, q)?)?))
}

/// One report per `p`, in the order given; parallel over `p`.
pub fn scan_over_p(sides: u32, q: u64, p_set: &[u64]) -> Result<Vec<SpectrumReport>> {
    p_set.par_iter().map(|&p| report_at(sides, p, q)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMax {
    pub q: u64,
    pub first_max: f64,
    pub first_arg_p: u64,
    pub third_max: f64,
    pub third_arg_p: u64,
    /// `Some(true)` when an exhaustive scan over `p ∈ [1, q/4]` found the same maxima.
    pub exhaustive_agrees: Option<bool>,
}

/// Candidate `p` for the first-component maximum.
pub const FIRST_CANDIDATES: [u64; 3] = [1, 2, 3];

fn best(reports: &[(u64, f64)]) -> (u64, f64) {
    // ties keep the smallest p
    reports
        .iter()
        .fold((0, f64::NEG_INFINITY), |acc, &(p, v)| if v > acc.1 || (v == acc.1 && p < acc.0) { (p, v) } else { acc })
}

/// Maxima over `p` of the two component maxima at fixed `q`.
/// The restricted search looks at `p ∈ {1,2,3}` and `p ∈ [⌊q/4⌋-3, ⌊q/4⌋]`.
pub fn global_max(sides: u32, q: u64, exhaustive: bool) -> Result<GlobalMax> {
    if q < 8 {
        return invalid(format!("global maximum search needs q >= 8, got {q}"));
    }
    let quarter = q / 4;
    let third_candidates: Vec<u64> = (quarter - 3..=quarter).collect();
    let firsts = scan_over_p(sides, q, &FIRST_CANDIDATES)?;
    let thirds = scan_over_p(sides, q, &third_candidates)?;
    let (fp, fv) = best(&FIRST_CANDIDATES.iter().zip(&firsts).map(|(&p, r)| (p, r.first_component_max)).collect::<Vec<_>>());
    let (tp, tv) = best(&third_candidates.iter().zip(&thirds).map(|(&p, r)| (p, r.third_component_max)).collect::<Vec<_>>());
    let exhaustive_agrees = if exhaustive {
        let all = exhaustive_max(sides, q)?;
        Some(all.first_arg_p == fp && all.third_arg_p == tp)
    } else {
        None
    };
    Ok(GlobalMax {
        q,
        first_max: fv,
        first_arg_p: fp,
        third_max: tv,
        third_arg_p: tp,
        exhaustive_agrees,
    })
}

/// Maxima over every `p ∈ [1, q/4]`.
pub fn exhaustive_max(sides: u32, q: u64) -> Result<GlobalMax> {
    let ps: Vec<u64> = (1..=q / 4).collect();
    let reps = scan_over_p(sides, q, &ps)?;
    let (fp, fv) = best(&ps.iter().zip(&reps).map(|(&p, r)| (p, r.first_component_max)).collect::<Vec<_>>());
    let (tp, tv) = best(&ps.iter().zip(&reps).map(|(&p, r)| (p, r.third_component_max)).collect::<Vec<_>>());
    Ok(GlobalMax {
        q,
        first_max: fv,
        first_arg_p: fp,
        third_max: tv,
        third_arg_p: tp,
        exhaustive_agrees: None,
    })
}

/// `(a, b)` with `max = a ln q + b` through two points.
pub fn log_fit(p1: (f64, f64), p2: (f64, f64)) -> Result<(f64, f64)> {
    if !(p1.0 > 0.0 && p2.0 > 0.0) || p1.0 == p2.0 {
        return invalid("log fit needs two distinct positive q values");
    }
    let (x1, x2) = (p1.0.ln(), p2.0.ln());
    let a = (p2.1 - p1.1) / (x2 - x1);
    Ok((a, p1.1 - a * x1))
}

/// Primes in `[lo, hi]` by trial division.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi)
        .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}
