//! One-corner self-similar solutions `X(s,t) = √t G(s/√t)`.
//!
//! The frame `(T, n, b)` solves `T_s = (c0/√t) n`, `n_s = -(c0/√t) T + (s/2t) b`,
//! `b_s = -(s/2t) n` from `T(0) = e1, n(0) = e2, b(0) = e3`, `X(0) = 2c0√t e3`.
//! Tangents tend to `A± = (A1, ±A2, ±A3)` as `s → ±∞`.

use crate::error::{invalid, Error, Result};
use crate::gamma::{gamma, gamma_imaginary};
use crate::{Mat3, Vec3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// `c0 = [-(2/π) ln cos(π/M)]^{1/2}`: the corner with the regular `M`-gon's angle.
pub fn c0_from_sides(sides: u32) -> Result<f64> {
    if sides < 3 {
        return invalid(format!("polygon needs M >= 3 sides, got {sides}"));
    }
    Ok((-(2.0 / PI) * (PI / sides as f64).cos().ln()).sqrt())
}

/// `c0` of a corner with inner angle `θ ∈ (0, π]`, from `A1 = sin(θ/2) = e^{-πc0²/2}`.
pub fn c0_from_inner_angle(inner: f64) -> Result<f64> {
    if !(inner > 0.0 && inner <= PI) {
        return invalid(format!("inner angle must lie in (0, π], got {inner}"));
    }
    let a1 = (inner / 2.0).sin();
    Ok((-2.0 * a1.ln() / PI).max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticVector {
    pub c0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl AsymptoticVector {
    pub fn plus(&self) -> Vec3 {
        Vec3::new(self.a1, self.a2, self.a3)
    }
    pub fn minus(&self) -> Vec3 {
        Vec3::new(self.a1, -self.a2, -self.a3)
    }
    /// `√(A2² + A3²) = √(1 - A1²)`.
    pub fn transverse(&self) -> f64 {
        self.a2.hypot(self.a3)
    }
}

/// `A⁺` from its Gamma-function representation.
pub fn a_vector(c0: f64) -> Result<AsymptoticVector> {
    if !(c0 >= 0.0) || !c0.is_finite() {
        return invalid(format!("c0 must be finite and nonnegative, got {c0}"));
    }
    if c0 == 0.0 {
        return Ok(AsymptoticVector {
            c0,
            a1: 1.0,
            a2: 0.0,
            a3: 0.0,
        });
    }
    let c2 = c0 * c0;
    let y = c2 / 4.0;
    let pre = (-PI * c2 / 4.0).exp() / (8.0 * PI) * (PI * c2 / 2.0).sinh();
    let g1 = gamma_imaginary(y) * c0;
    let g2 = gamma(Complex64::new(0.5, y)) * 2.0;
    let w = Complex64::from_polar(1.0, FRAC_PI_4);
    let a2 = 1.0 - pre * (g1 + w * g2).norm_sqr();
    let a3 = 1.0 - pre * (g1 - w.conj() * g2).norm_sqr();
    Ok(AsymptoticVector {
        c0,
        a1: (-PI * c2 / 2.0).exp(),
        a2,
        a3,
    })
}

/// Sampled one-corner solution at a fixed time on `s_i = i·ds`, `|i| ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarFrame {
    pub c0: f64,
    pub t: f64,
    pub ds: f64,
    /// Number of steps on each side of `s = 0`.
    pub half: usize,
    pub s: Vec<f64>,
    pub x: Vec<Vec3>,
    pub tangent: Vec<Vec3>,
    pub normal: Vec<Vec3>,
    pub binormal: Vec<Vec3>,
    /// Largest `‖F Fᵀ - I‖_max` of the raw frame over the grid.
    pub max_gram_defect: f64,
}

impl SelfSimilarFrame {
    /// Storage index of the sample at `s = i·ds`.
    pub fn index(&self, i: i64) -> Option<usize> {
        let k = i + self.half as i64;
        (k >= 0 && k < self.s.len() as i64).then_some(k as usize)
    }

    /// Tangent at `s` by linear interpolation between samples.
    pub fn tangent_at(&self, s: f64) -> Option<Vec3> {
        interp(&self.tangent, self, s)
    }

    pub fn position_at(&self, s: f64) -> Option<Vec3> {
        interp(&self.x, self, s)
    }

    /// Mean tangent over the last `fraction` of each half-line: `(s → -∞, s → +∞)`.
    pub fn tail_means(&self, fraction: f64) -> (Vec3, Vec3) {
        let w = ((self.half as f64 * fraction).round() as usize).clamp(1, self.half.max(1));
        let len = self.tangent.len();
        let plus: Vec3 = self.tangent[len - w..].iter().sum::<Vec3>() / w as f64;
        let minus: Vec3 = self.tangent[..w].iter().sum::<Vec3>() / w as f64;
        (minus, plus)
    }

    /// Apply `x ↦ r·x + shift` to positions and `r` to the frame vectors.
    pub fn transformed(&self, r: &Mat3, shift: &Vec3) -> SelfSimilarFrame {
        let mut out = self.clone();
        out.x.iter_mut().for_each(|v| *v = r * *v + shift);
        for field in [&mut out.tangent, &mut out.normal, &mut out.binormal] {
            field.iter_mut().for_each(|v| *v = r * *v);
        }
        out
    }
}

fn interp(field: &[Vec3], frame: &SelfSimilarFrame, s: f64) -> Option<Vec3> {
    let u = s / frame.ds + frame.half as f64;
    if !(u >= 0.0) || u > (field.len() - 1) as f64 {
        return None;
    }
    let k = (u.floor() as usize).min(field.len() - 2);
    let w = u - k as f64;
    Some(field[k] * (1.0 - w) + field[k + 1] * w)
}

fn rk4<const N: usize>(y: &[f64; N], s: f64, h: f64, f: impl Fn(f64, &[f64; N]) -> [f64; N]) -> [f64; N] {
    let add = |a: &[f64; N], b: &[f64; N], c: f64| -> [f64; N] {
        std::array::from_fn(|i| a[i] + c * b[i])
    };
    let k1 = f(s, y);
    let k2 = f(s + h / 2.0, &add(y, &k1, h / 2.0));
    let k3 = f(s + h / 2.0, &add(y, &k2, h / 2.0));
    let k4 = f(s + h, &add(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn gram_defect(t: &Vec3, n: &Vec3, b: &Vec3) -> f64 {
    let f = Mat3::from_rows(&[t.transpose(), n.transpose(), b.transpose()]);
    (f * f.transpose() - Mat3::identity()).amax()
}

/// Raw-frame drift above this aborts the integration.
pub const MAX_FRAME_DRIFT: f64 = 1e-3;

/// Fixed-step RK4 from `s = 0` in both directions; the frame is not re-orthonormalised.
pub fn integrate_frame(c0: f64, t: f64, s_max: f64, ds: f64) -> Result<SelfSimilarFrame> {
    if !(t > 0.0) || !(ds > 0.0) || !(s_max >= ds) || !(c0 >= 0.0) {
        return invalid(format!(
            "need t > 0, ds > 0, s_max >= ds, c0 >= 0 (got t={t}, ds={ds}, s_max={s_max}, c0={c0})"
        ));
    }
    let half = (s_max / ds).round() as usize;
    let len = 2 * half + 1;
    let kappa = c0 / t.sqrt();
    let rhs = |s: f64, y: &[f64; 12]| -> [f64; 12] {
        let tau = s / (2.0 * t);
        [
            y[3],
            y[4],
            y[5],
            kappa * y[6],
            kappa * y[7],
            kappa * y[8],
            -kappa * y[3] + tau * y[9],
            -kappa * y[4] + tau * y[10],
            -kappa * y[5] + tau * y[11],
            -tau * y[6],
            -tau * y[7],
            -tau * y[8],
        ]
    };
    let y0 = [
        0.0,
        0.0,
        2.0 * c0 * t.sqrt(),
        1.0,
        0.0,
        0.0,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        1.0,
    ];
    let mut states = vec![[0.0; 12]; len];
    states[half] = y0;
    for dir in [1.0f64, -1.0] {
        let mut y = y0;
        for i in 0..half {
            let s = dir * (i as f64) * ds;
            y = rk4(&y, s, dir * ds, rhs);
            let k = if dir > 0.0 { half + i + 1 } else { half - i - 1 };
            states[k] = y;
        }
    }
    let v = |y: &[f64; 12], o: usize| Vec3::new(y[o], y[o + 1], y[o + 2]);
    let mut frame = SelfSimilarFrame {
        c0,
        t,
        ds,
        half,
        s: (0..len).map(|k| (k as f64 - half as f64) * ds).collect(),
        x: states.iter().map(|y| v(y, 0)).collect(),
        tangent: states.iter().map(|y| v(y, 3)).collect(),
        normal: states.iter().map(|y| v(y, 6)).collect(),
        binormal: states.iter().map(|y| v(y, 9)).collect(),
        max_gram_defect: 0.0,
    };
    frame.max_gram_defect = (0..len)
        .map(|k| gram_defect(&frame.tangent[k], &frame.normal[k], &frame.binormal[k]))
        .fold(0.0, f64::max);
    if !(frame.max_gram_defect <= MAX_FRAME_DRIFT) {
        return Err(Error::Integration(format!(
            "frame drift {:e} exceeds {MAX_FRAME_DRIFT:e}; reduce ds",
            frame.max_gram_defect
        )));
    }
    Ok(frame)
}

/// Rotation `R` with `R(A⁺+A⁻) ∥ T⁺+T⁻`, `R(A⁺-A⁻) ∥ T⁺-T⁻`, `R(A⁻∧A⁺) ∥ T⁻∧T⁺`.
/// For a straight corner (`T⁻ = T⁺`) it is the shortest-arc rotation taking `e1` to `T⁺`.
pub fn corner_rotation(a: &AsymptoticVector, t_minus: &Vec3, t_plus: &Vec3) -> Result<Mat3> {
    let src = frame_from(&a.plus(), &a.minus());
    let dst = frame_from(t_plus, t_minus);
    match (src, dst) {
        (Some(s), Some(d)) => Ok(d * s.transpose()),
        _ => {
            // degenerate corner: only the common direction matters
            let u = t_plus.normalize();
            let e1 = Vec3::x();
            Ok(nalgebra::Rotation3::rotation_between(&e1, &u)
                .map(|r| r.into_inner())
                .unwrap_or_else(|| Mat3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0))))
        }
    }
}

fn frame_from(plus: &Vec3, minus: &Vec3) -> Option<Mat3> {
    let u = plus + minus;
    let v = plus - minus;
    let w = minus.cross(plus);
    if v.norm() < 1e-14 || u.norm() < 1e-14 {
        return None;
    }
    Some(Mat3::from_columns(&[u.normalize(), v.normalize(), w.normalize()]))
}

/// Vertex of the `t = 0` regular `M`-gon where the corner at `s = 0` sits.
pub fn polygon_anchor(sides: u32) -> Vec3 {
    let a = PI / sides as f64;
    Vec3::new(-a, -a / a.tan(), 0.0)
}

/// Rotation taking the one-corner solution onto the polygon corner at `s = 0`.
pub fn polygon_rotation(sides: u32) -> Result<Mat3> {
    let a = a_vector(c0_from_sides(sides)?)?;
    let r = a.transverse();
    let (s, c) = (PI / sides as f64).sin_cos();
    let rz = Mat3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0);
    let rx = Mat3::new(
        1.0,
        0.0,
        0.0,
        0.0,
        a.a2 / r,
        a.a3 / r,
        0.0,
        -a.a3 / r,
        a.a2 / r,
    );
    Ok(rz * rx)
}

/// `X_rot = anchor + R·X_{c0}` with `c0 = c0_from_sides(M)`.
pub fn rotate_to_polygon(frame: &SelfSimilarFrame, sides: u32) -> Result<SelfSimilarFrame> {
    let c0 = c0_from_sides(sides)?;
    if (frame.c0 - c0).abs() > 1e-12 {
        return invalid(format!(
            "frame has c0 = {} but M = {sides} needs c0 = {c0}",
            frame.c0
        ));
    }
    Ok(frame.transformed(&polygon_rotation(sides)?, &polygon_anchor(sides)))
}

/// `lim H_rot = ln(1 + tan²(π/M))/tan(π/M)`.
pub fn hrot_limit(sides: u32) -> f64 {
    let tn = (PI / sides as f64).tan();
    (tn * tn).ln_1p() / tn
}

/// `∫_ℝ X_rot,3(s, 1) ds = 2πc0²/√(e^{πc0²} - 1)`.
pub fn theorem_value(c0: f64) -> f64 {
    if c0 == 0.0 {
        return 0.0;
    }
    let x = PI * c0 * c0;
    2.0 * x / x.exp_m1().sqrt()
}

/// Samples `(s, H_rot(s))` of `H'''' + (c0² + s²/4)H'' - (s/4)H' = 0`,
/// `H(0) = 0, H'(0) = 2A2c0/r, H''(0) = 0, H'''(0) = -A3c0/r`, `r = √(A2²+A3²)`.
pub fn hrot_profile_c0(c0: f64, s_max: f64, ds: f64, every: usize) -> Result<Vec<(f64, f64)>> {
    if !(ds > 0.0) || !(s_max >= ds) || !(c0 > 0.0) {
        return invalid(format!(
            "need c0 > 0, ds > 0, s_max >= ds (got c0={c0}, ds={ds}, s_max={s_max})"
        ));
    }
    let a = a_vector(c0)?;
    let r = a.transverse();
    let steps = (s_max / ds).round() as usize;
    let every = every.max(1);
    let c2 = c0 * c0;
    let rhs = |s: f64, y: &[f64; 4]| -> [f64; 4] {
        [y[1], y[2], y[3], -(c2 + s * s / 4.0) * y[2] + s / 4.0 * y[1]]
    };
    let mut y = [0.0, 2.0 * a.a2 * c0 / r, 0.0, -a.a3 * c0 / r];
    let mut out = vec![(0.0, 0.0)];
    for i in 0..steps {
        y = rk4(&y, i as f64 * ds, ds, rhs);
        if !y[0].is_finite() {
            return Err(Error::Integration(format!("H_rot diverged at s = {}", (i + 1) as f64 * ds)));
        }
        if (i + 1) % every == 0 || i + 1 == steps {
            out.push(((i + 1) as f64 * ds, y[0]));
        }
    }
    Ok(out)
}

/// `H_rot(s_max)` for the regular `M`-gon corner.
pub fn integrate_hrot(sides: u32, s_max: f64, ds: f64) -> Result<f64> {
    integrate_hrot_c0(c0_from_sides(sides)?, s_max, ds)
}

pub fn integrate_hrot_c0(c0: f64, s_max: f64, ds: f64) -> Result<f64> {
    let steps = (s_max / ds).round() as usize;
    Ok(hrot_profile_c0(c0, s_max, ds, steps.max(1))?.last().map(|p| p.1).unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c0_values() {
        assert!((c0_from_sides(5).unwrap() - 0.367_317_625_190_066).abs() < 1e-14);
        assert!((c0_from_sides(3).unwrap() - 0.664_282_470_267_960).abs() < 1e-14);
        assert!(c0_from_sides(1_000_000).unwrap() < 2e-3);
        assert!(c0_from_sides(2).is_err());
        let inner = PI - 2.0 * PI / 5.0;
        assert!((c0_from_inner_angle(inner).unwrap() - c0_from_sides(5).unwrap()).abs() < 1e-14);
        assert_eq!(c0_from_inner_angle(PI).unwrap(), 0.0);
    }

    #[test]
    fn a_vector_reference_values() {
        // high-precision reference values
        let a = a_vector(c0_from_sides(3).unwrap()).unwrap();
        assert!((a.a1 - 0.5).abs() < 1e-14);
        assert!((a.a2 - 0.514_121_359_652_672).abs() < 1e-12);
        assert!((a.a3 - 0.696_906_900_201_805).abs() < 1e-12);
        let a = a_vector(c0_from_sides(5).unwrap()).unwrap();
        assert!((a.a2 - 0.395_784_770_374_193).abs() < 1e-12);
        assert!((a.a3 - 0.434_564_055_522_743).abs() < 1e-12);
        assert_eq!(a_vector(0.0).unwrap().plus(), Vec3::x());
    }

    #[test]
    fn line_for_zero_c0() {
        let f = integrate_frame(0.0, 1.0, 2.0, 0.01).unwrap();
        for (s, x) in f.s.iter().zip(&f.x) {
            assert!((x - Vec3::new(*s, 0.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn anchored_polygon_rotation_sends_limits_to_sides() {
        for m in 3..9 {
            let a = a_vector(c0_from_sides(m).unwrap()).unwrap();
            let r = polygon_rotation(m).unwrap();
            let ang = 2.0 * PI / m as f64;
            assert!((r * a.plus() - Vec3::x()).norm() < 1e-12);
            assert!((r * a.minus() - Vec3::new(ang.cos(), -ang.sin(), 0.0)).norm() < 1e-12);
            let g = corner_rotation(&a, &Vec3::new(ang.cos(), -ang.sin(), 0.0), &Vec3::x()).unwrap();
            assert!((g - r).amax() < 1e-12);
        }
    }

    #[test]
    fn theorem_value_examples() {
        assert!(theorem_value(1e-6) < 1e-5);
        let c0 = c0_from_sides(3).unwrap();
        assert!((theorem_value(c0) / 2.0 - 0.800_377_422_568_629).abs() < 1e-13);
        assert!((theorem_value(1.0) - 2.0 * PI / (PI.exp() - 1.0).sqrt()).abs() < 1e-14);
        assert!((hrot_limit(4) - 2f64.ln()).abs() < 1e-15);
    }
}
