//! Linear momentum `∫ X ∧ T ds` of the rational-time polygons.
//!
//! On each side `X ∧ T` is constant (`(X ∧ T)_s = X ∧ T_s = 0` away from the
//! corners), so sampling once per `2π/(Mq)` integrates exactly.

use crate::error::{invalid, Error, Result};
use crate::fourier::dft;
use crate::gauss::RationalTime;
use crate::polygon::{build_polygon, SkewPolygon};
use crate::Vec3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn momentum_sum(poly: &SkewPolygon, samples: u64) -> Vec3 {
    let m = poly.time.sides() as f64;
    let q = poly.time.q() as f64;
    let weight = 2.0 * PI / (m * q);
    (0..samples as i64)
        .map(|j| poly.position_units(2 * j).cross(&poly.tangent_units(2 * j)))
        .sum::<Vec3>()
        * weight
}

/// `(2π/Mq) Σ_{j<Mq} X(s_j) ∧ T(s_j⁺)`, `s_j = 2πj/(Mq)`.
pub fn total_momentum(poly: &SkewPolygon) -> Vec3 {
    momentum_sum(poly, poly.time.sides() as u64 * poly.time.q())
}

/// Same sum restricted to `s ∈ [0, 2π/M)`.
pub fn truncated_momentum(poly: &SkewPolygon) -> Vec3 {
    momentum_sum(poly, poly.time.q())
}

/// `2π²/(M tan(π/M))`.
pub fn total_momentum_third(sides: u32) -> f64 {
    let m = sides as f64;
    2.0 * PI * PI / (m * (PI / m).tan())
}

/// `2π²/(M² tan(π/M))`.
pub fn truncated_momentum_third(sides: u32) -> f64 {
    total_momentum_third(sides) / sides as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumSeries {
    pub sides: u32,
    pub q: u64,
    /// Second component of the truncated momentum at `p = 0..=q`.
    pub values: Vec<f64>,
    /// Largest `|first component|` over the series.
    pub first_max_abs: f64,
    /// Largest deviation of the third component from `2π²/(M² tan(π/M))`.
    pub third_max_dev: f64,
}

/// Invariant components may drift at most this much before the series is rejected.
pub const INVARIANT_TOLERANCE: f64 = 1e-8;

pub fn momentum_at(sides: u32, p: u64, q: u64) -> Result<Vec3> {
    Ok(truncated_momentum(&build_polygon(RationalTime::reduced(sides, p, q)?)?))
}

/// Truncated momentum at every `t = (2π/M²)(p/q)`, `p = 0..=q`.
pub fn momentum_series(sides: u32, q: u64) -> Result<MomentumSeries> {
    let vals: Vec<Vec3> = (0..=q)
        .into_par_iter()
        .map(|p| momentum_at(sides, p, q))
        .collect::<Result<_>>()?;
    series_from_vectors(sides, q, &vals)
}

/// Assembles a series from per-`p` momentum vectors and checks the invariants.
pub fn series_from_vectors(sides: u32, q: u64, vals: &[Vec3]) -> Result<MomentumSeries> {
    if vals.len() as u64 != q + 1 {
        return invalid(format!("expected {} momentum vectors, got {}", q + 1, vals.len()));
    }
    let third = truncated_momentum_third(sides);
    let first_max_abs = vals.iter().map(|v| v.x.abs()).fold(0.0, f64::max);
    let third_max_dev = vals.iter().map(|v| (v.z - third).abs()).fold(0.0, f64::max);
    if first_max_abs > INVARIANT_TOLERANCE || third_max_dev > INVARIANT_TOLERANCE {
        return Err(Error::Construction(format!(
            "momentum invariants broken: |first| = {first_max_abs:e}, third deviation = {third_max_dev:e}"
        )));
    }
    Ok(MomentumSeries {
        sides,
        q,
        values: vals.iter().map(|v| v.y).collect(),
        first_max_abs,
        third_max_dev,
    })
}

/// `c_k`, `k = 1..=k_max`, for `values[p] ≈ -Σ c_k sin(2πkp/q)` over `p = 0..q`.
pub fn sine_coefficients(series: &MomentumSeries, k_max: usize) -> Result<Vec<f64>> {
    let q = series.q as usize;
    if 2 * k_max >= q {
        return invalid(format!("k_max = {k_max} aliases for q = {q}"));
    }
    let f: Vec<Complex64> = series.values[..q].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spec = dft(&f);
    Ok((1..=k_max).map(|k| 2.0 * spec[k].im / q as f64).collect())
}

/// Rebuilds `-Σ_{k ≤ k_max} c_k sin(2πkp/q)` at `p = 0..q` (mean omitted).
pub fn sine_synthesis(coeffs: &[f64], q: u64) -> Vec<f64> {
    (0..q)
        .map(|p| {
            -coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let k = (i + 1) as u64;
                    c * crate::fourier::root_of_unity((k * p) as i128, q as i128).im
                })
                .sum::<f64>()
        })
        .collect()
}

pub fn is_square(k: u64) -> bool {
    let r = (k as f64).sqrt().round() as u64;
    r * r == k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareDominance {
    /// `min c_{n²}·n²` over squares `n² ≤ k_max`.
    pub min_square: f64,
    /// `max |c_k·k|` over non-squares `k ≤ k_max`.
    pub max_nonsquare: f64,
    pub dominant: bool,
}

/// `coeffs[k-1] = c_k`.
pub fn square_dominance(coeffs: &[f64]) -> SquareDominance {
    let mut min_square = f64::INFINITY;
    let mut max_nonsquare: f64 = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let k = (i + 1) as u64;
        let v = c * k as f64;
        if is_square(k) {
            min_square = min_square.min(v);
        } else {
            max_nonsquare = max_nonsquare.max(v.abs());
        }
    }
    SquareDominance {
        min_square,
        max_nonsquare,
        dominant: min_square > max_nonsquare,
    }
}

/// `φ(x) = Σ_{n ≤ n_max} sin(πn²x)/n²`.
/// `n²x` is split exactly into `hi + lo` so the reduction mod 2 loses nothing.
pub fn riemann_phi(x: f64, n_max: u64) -> f64 {
    let mut acc = 0.0;
    for n in 1..=n_max {
        let n2 = (n * n) as f64;
        let hi = n2 * x;
        let lo = n2.mul_add(x, -hi);
        let r = hi - 2.0 * (hi / 2.0).floor();
        acc += (PI * (r + lo)).sin() / n2;
    }
    acc
}

/// Pearson correlation of two equal-length samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
