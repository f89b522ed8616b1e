//! Exact skew polygons at rational times and the constants derived from them.
//!
//! The curvature of `X(·, t_pq)` is a sum of deltas; each delta rotates the
//! parallel frame `(T, e1, e2)` by a [`FrameRotation`]. Arc length is measured
//! in units of `h = π/(Mq)`, so every sampling point used by the analyses is an
//! integer multiple of `h` and side lookups are exact.

use crate::error::{invalid, Error, Result};
use crate::gauss::{delta_coefficients, gcd, period, rho_angle, RationalTime};
use crate::selfsimilar::{c0_from_sides, integrate_frame, rotate_to_polygon};
use crate::{Mat3, Vec3};
use nalgebra::Rotation3;
use serde::Serialize;
use std::f64::consts::PI;

/// Left action on frame rows `(T, e1, e2)`: rotation by `ρ` in the plane of `T`
/// and `cos θ e1 + sin θ e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRotation(pub Mat3);

pub fn frame_rotation(rho: f64, theta: f64) -> FrameRotation {
    let (s, c) = rho.sin_cos();
    let (st, ct) = theta.sin_cos();
    FrameRotation(Mat3::new(
        c,
        s * ct,
        s * st,
        -s * ct,
        c * ct * ct + st * st,
        (c - 1.0) * ct * st,
        -s * st,
        (c - 1.0) * ct * st,
        c * st * st + ct * ct,
    ))
}

/// Rotation by `a` about `e3`.
pub fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Axis and angle of a rotation matrix, angle in `[0, π]`.
pub fn axis_angle(r: &Mat3) -> (Vec3, f64) {
    let vee = Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let angle = (vee.norm() / 2.0).atan2((r.trace() - 1.0) / 2.0);
    let axis = if vee.norm() > 0.0 { vee.normalize() } else { Vec3::z() };
    (axis, angle)
}

/// Polygon `X(·, t_pq)`: side `j` has tangent `tangents[j]` and starts at `vertices[j]`,
/// located at arc length `(offset_units + j·side_units)·h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewPolygon {
    pub time: RationalTime,
    pub n_sides: usize,
    pub tangents: Vec<Vec3>,
    pub vertices: Vec<Vec3>,
    pub side_length: f64,
    /// `h = π/(Mq)`.
    pub unit: f64,
    pub offset_units: i64,
    pub side_units: i64,
}

impl SkewPolygon {
    /// Sides per period `2π/M`.
    pub fn block_len(&self) -> usize {
        self.n_sides / self.time.sides() as usize
    }

    /// Arc length of vertex `j`.
    pub fn vertex_s(&self, j: usize) -> f64 {
        (self.offset_units + j as i64 * self.side_units) as f64 * self.unit
    }

    fn unwrapped_side(&self, k: i64) -> (i64, i64) {
        let d = k - self.offset_units;
        let i = d.div_euclid(self.side_units);
        (i, d - i * self.side_units)
    }

    fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.n_sides as i64) as usize
    }

    /// Side containing `s = k·h` with the right-limit convention.
    pub fn side_index_units(&self, k: i64) -> usize {
        self.wrap(self.unwrapped_side(k).0)
    }

    /// `T(s⁺)` at `s = k·h`.
    pub fn tangent_units(&self, k: i64) -> Vec3 {
        self.tangents[self.side_index_units(k)]
    }

    /// `T(s⁻)` at `s = k·h`.
    pub fn tangent_left_units(&self, k: i64) -> Vec3 {
        let (i, r) = self.unwrapped_side(k);
        self.tangents[self.wrap(if r == 0 { i - 1 } else { i })]
    }

    /// `X(s)` at `s = k·h`.
    pub fn position_units(&self, k: i64) -> Vec3 {
        let (i, r) = self.unwrapped_side(k);
        let j = self.wrap(i);
        self.vertices[j] + self.tangents[j] * (r as f64 * self.unit)
    }

    /// `T(s⁺)` for arbitrary arc length.
    pub fn tangent_at(&self, s: f64) -> Vec3 {
        let u = (s / self.unit - self.offset_units as f64) / self.side_units as f64;
        self.tangents[self.wrap(u.floor() as i64)]
    }

    pub fn position_at(&self, s: f64) -> Vec3 {
        let u = (s / self.unit - self.offset_units as f64) / self.side_units as f64;
        let i = u.floor();
        let j = self.wrap(i as i64);
        self.vertices[j] + self.tangents[j] * ((u - i) * self.side_length)
    }
}

struct Block {
    corners: Vec<usize>,
    tangents: Vec<Vec3>,
    transport: Mat3,
}

fn transport_block(time: RationalTime) -> Result<Block> {
    let coeffs = delta_coefficients(time)?;
    let rho = coeffs.rho;
    let corners: Vec<usize> = (0..coeffs.rho_m.len()).filter(|&m| coeffs.rho_m[m] != 0.0).collect();
    let mut frame = Mat3::identity();
    let mut tangents = Vec::with_capacity(corners.len());
    for &m in &corners {
        frame = frame_rotation(rho, coeffs.theta[m]).0 * frame;
        tangents.push(frame.row(0).transpose());
    }
    Ok(Block {
        corners,
        tangents,
        transport: frame,
    })
}

/// Closure gap `|Σ T_j|·L` above this rejects a construction.
pub const CLOSURE_TOLERANCE: f64 = 1e-6;

pub fn build_polygon(time: RationalTime) -> Result<SkewPolygon> {
    let m = time.sides();
    let block = transport_block(time)?;
    let nb = block.corners.len();
    let n = nb * m as usize;
    // T_{j+nb} = Qᵀ T_j; Qᵀ must turn by 2π/M about the polygon axis
    let (axis, angle) = axis_angle(&block.transport.transpose());
    let want = 2.0 * PI / m as f64;
    if (angle - want).abs() > 1e-6 {
        return Err(Error::Construction(format!(
            "block transport turns by {angle} instead of {want} at {}/{}",
            time.p(),
            time.q()
        )));
    }
    let to_axis = Rotation3::rotation_between(&axis, &Vec3::z())
        .map(|r| r.into_inner())
        .unwrap_or_else(|| Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0)));
    let block_t: Vec<Vec3> = block.tangents.iter().map(|t| to_axis * t).collect();
    let steps: Vec<Mat3> = (0..m).map(|k| rot_z(want * k as f64)).collect();
    let mut tangents: Vec<Vec3> = steps
        .iter()
        .flat_map(|r| block_t.iter().map(move |t| r * t))
        .collect();

    // reflection symmetry about the corner at s = 0 puts T(0⁺) + T(0⁻) at azimuth -π/M
    let corner_at_zero = block.corners[0] == 0;
    let (t_plus, t_minus) = if corner_at_zero {
        (tangents[0], tangents[n - 1])
    } else {
        (tangents[n - 1], tangents[n - 1])
    };
    let w = t_plus + t_minus;
    if w.z.abs() > 1e-6 * w.norm() {
        return Err(Error::Construction(format!(
            "T(0+) + T(0-) is not horizontal (z = {:e})",
            w.z
        )));
    }
    let fix = rot_z(-PI / m as f64 - w.y.atan2(w.x));
    tangents.iter_mut().for_each(|t| *t = fix * *t);

    let side_length = 2.0 * PI / n as f64;
    let mut vertices = Vec::with_capacity(n);
    let mut x = Vec3::zeros();
    for t in &tangents {
        vertices.push(x);
        x += t * side_length;
    }
    if !(x.norm() <= CLOSURE_TOLERANCE) {
        return Err(Error::Construction(format!(
            "polygon fails to close: gap {:e}",
            x.norm()
        )));
    }
    let mean = vertices.iter().sum::<Vec3>() / n as f64;
    vertices.iter_mut().for_each(|v| *v -= mean);

    let q = time.q();
    Ok(SkewPolygon {
        time,
        n_sides: n,
        tangents,
        vertices,
        side_length,
        unit: PI / (m as f64 * q as f64),
        offset_units: 2 * block.corners[0] as i64,
        side_units: if q % 2 == 1 { 2 } else { 4 },
    })
}

fn operator_norm(a: &Mat3) -> f64 {
    a.singular_values().max()
}

/// `‖Π M_m - I‖₂` over all `Mq` deltas of one full turn `s ∈ [0, 2π)`.
pub fn closure_check(sides: u32, p: u64, q: u64) -> Result<f64> {
    let time = RationalTime::new(sides, p, q)?;
    closure_residual(time, rho_angle(sides, q)?)
}

/// Closure residual with the angle `ρ` imposed instead of the law's value.
pub fn closure_residual(time: RationalTime, rho: f64) -> Result<f64> {
    let coeffs = delta_coefficients(time)?;
    let mut frame = Mat3::identity();
    for _ in 0..time.sides() {
        for (m, &r) in coeffs.rho_m.iter().enumerate() {
            if r != 0.0 {
                frame = frame_rotation(rho, coeffs.theta[m]).0 * frame;
            }
        }
    }
    Ok(operator_norm(&(frame - Mat3::identity())))
}

/// Largest `|T_alg - T_rot|` at the side midpoints around the corner at `s = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerComparison {
    pub sides: u32,
    pub q: u64,
    pub s: Vec<f64>,
    pub distance: Vec<f64>,
    pub max: f64,
}

/// Midpoint samples in units of `h = π/(Mq)`, one per side within `|s| ≲ π/M`.
pub fn comparison_samples(q: u64) -> Vec<i64> {
    let q = q as i64;
    if q % 2 == 1 {
        (-(q - 1) / 2..=(q + 1) / 2).map(|j| 2 * j - 1).collect()
    } else if q % 4 == 0 {
        (-q / 4 + 1..=q / 4).map(|j| 4 * j - 2).collect()
    } else {
        (-(q - 2) / 4..=(q - 2) / 4).map(|j| 4 * j).collect()
    }
}

/// Compares the polygon at `t_{1,q}` with the rotated one-corner solution,
/// integrated with `ds = π/(M²q)` so each sample is a grid node.
pub fn compare_to_selfsimilar(sides: u32, q: u64) -> Result<CornerComparison> {
    let time = RationalTime::new(sides, 1, q)?;
    let poly = build_polygon(time)?;
    let ks = comparison_samples(q);
    let per_unit = sides as i64;
    let ds = poly.unit / sides as f64;
    let reach = ks.iter().map(|k| k.abs()).max().unwrap_or(1) * per_unit;
    let frame = integrate_frame(c0_from_sides(sides)?, time.value(), reach as f64 * ds, ds)?;
    let rot = rotate_to_polygon(&frame, sides)?;
    let mut s = Vec::with_capacity(ks.len());
    let mut distance = Vec::with_capacity(ks.len());
    for &k in &ks {
        let idx = rot
            .index(k * per_unit)
            .ok_or_else(|| Error::Analysis(format!("sample {k} outside the integrated window")))?;
        s.push(k as f64 * poly.unit);
        distance.push((poly.tangent_units(k) - rot.tangent[idx]).norm());
    }
    let max = distance.iter().cloned().fold(0.0, f64::max);
    Ok(CornerComparison {
        sides,
        q,
        s,
        distance,
        max,
    })
}

/// `c0 ≈ √t·(Mq/8π)·|T(4h) - T(-4h)|` at `t_{1,q}`, `q ≡ 2 (mod 4)`.
pub fn corner_curvature_estimate(sides: u32, q: u64) -> Result<f64> {
    if q % 4 != 2 {
        return invalid(format!("corner curvature estimate needs q ≡ 2 (mod 4), got {q}"));
    }
    let time = RationalTime::new(sides, 1, q)?;
    let poly = build_polygon(time)?;
    let jump = (poly.tangent_units(4) - poly.tangent_units(-4)).norm();
    Ok(curvature_from_jump(time, jump))
}

/// Same estimate with the jump replaced by its closed form `2 sin ρ`.
pub fn corner_curvature_closed_form(sides: u32, q: u64) -> Result<f64> {
    if q % 4 != 2 {
        return invalid(format!("corner curvature estimate needs q ≡ 2 (mod 4), got {q}"));
    }
    let time = RationalTime::new(sides, 1, q)?;
    Ok(curvature_from_jump(time, 2.0 * rho_angle(sides, q)?.sin()))
}

fn curvature_from_jump(time: RationalTime, jump: f64) -> f64 {
    let mq = time.sides() as f64 * time.q() as f64;
    time.value().sqrt() * mq / (8.0 * PI) * jump
}

/// `e3 · Σ_j T_j ∧ T_{j+1}` over the closed polygon.
pub fn algebraic_momentum_sum(poly: &SkewPolygon) -> f64 {
    let n = poly.n_sides;
    (0..n)
        .map(|j| poly.tangents[j].cross(&poly.tangents[(j + 1) % n]).z)
        .sum()
}

/// `(1 - cos ρ)·n_b·M/tan(π/M)` with `n_b = q` (odd) or `q/2` (even).
pub fn algebraic_momentum_closed_form(time: RationalTime) -> Result<f64> {
    let rho = rho_angle(time.sides(), time.q())?;
    let m = time.sides() as f64;
    Ok((1.0 - rho.cos()) * time.side_count() as f64 / (PI / m).tan())
}

/// `c_M = ln(1 + tan²(π/M))/((π/M) tan(π/M))`.
pub fn cm_closed_form(sides: u32) -> Result<f64> {
    if sides < 3 {
        return invalid(format!("polygon needs M >= 3 sides, got {sides}"));
    }
    let a = PI / sides as f64;
    let tn = a.tan();
    Ok((tn * tn).ln_1p() / (a * tn))
}

/// Center-of-mass speed at `t_pq`:
/// `(1/2π)(ρ/sin ρ)·(1 - cos ρ)·n_b·M/tan(π/M)`; equals 1 at planar instants.
pub fn height_rate(time: RationalTime) -> Result<f64> {
    let rho = rho_angle(time.sides(), time.q())?;
    Ok(rho / rho.sin() * algebraic_momentum_closed_form(time)? / (2.0 * PI))
}

/// Trapezoid estimate of `h(2π/M²)/(2π/M²)` on the nodes `p/q`, `p = 0..=q`.
pub fn height_check(sides: u32, q: u64) -> Result<f64> {
    if q == 0 {
        return invalid("q must be positive");
    }
    let mut total = 0.0;
    for p in 0..=q {
        let g = gcd(p, q);
        let w = if p == 0 || p == q { 0.5 } else { 1.0 };
        total += w * height_rate(RationalTime::new(sides, p / g, q / g)?)?;
    }
    Ok(total / q as f64)
}

/// `height_check` over several `q`, extrapolated to `1/q → 0` by a polynomial in `1/q`.
pub fn height_check_extrapolated(sides: u32, qs: &[u64]) -> Result<f64> {
    if qs.is_empty() {
        return invalid("need at least one q");
    }
    let xs: Vec<f64> = qs.iter().map(|&q| 1.0 / q as f64).collect();
    let ys: Vec<f64> = qs.iter().map(|&q| height_check(sides, q)).collect::<Result<_>>()?;
    Ok(lagrange_at_zero(&xs, &ys))
}

fn lagrange_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    (0..xs.len())
        .map(|i| {
            let w: f64 = (0..xs.len())
                .filter(|&j| j != i)
                .map(|j| xs[j] / (xs[j] - xs[i]))
                .product();
            w * ys[i]
        })
        .sum()
}

/// Period of the regular polygon's time evolution.
pub fn time_period(sides: u32) -> f64 {
    period(sides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rotation_examples() {
        assert!((frame_rotation(0.0, 1.234).0 - Mat3::identity()).amax() < 1e-15);
        let r = PI / 5.0;
        let m = frame_rotation(r, 0.0).0;
        let want = Mat3::new(r.cos(), r.sin(), 0.0, -r.sin(), r.cos(), 0.0, 0.0, 0.0, 1.0);
        assert!((m - want).amax() < 1e-15);
        let m = frame_rotation(PI / 3.0, PI / 4.0).0;
        assert!((m.trace() - 2.0).abs() < 1e-14);
        assert!((m * m.transpose() - Mat3::identity()).amax() < 1e-15);
        assert!((m.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_at_zero() {
        let p = build_polygon(RationalTime::new(3, 0, 1).unwrap()).unwrap();
        assert_eq!(p.n_sides, 3);
        let rad = (PI / 3.0) / (PI / 3.0).sin();
        for v in &p.vertices {
            assert!((v.norm() - rad).abs() < 1e-14);
        }
        assert!((p.vertices[0] - crate::selfsimilar::polygon_anchor(3)).norm() < 1e-14);
        assert!((p.tangents[0] - Vec3::x()).norm() < 1e-14);
    }

    #[test]
    fn momentum_sum_examples() {
        let p = build_polygon(RationalTime::new(3, 0, 1).unwrap()).unwrap();
        assert!((algebraic_momentum_sum(&p) - 2.598_076_211_353_316).abs() < 1e-12);
        for (m, pp, q) in [(5, 1, 3), (4, 1, 2)] {
            let t = RationalTime::new(m, pp, q).unwrap();
            let p = build_polygon(t).unwrap();
            let want = algebraic_momentum_closed_form(t).unwrap();
            assert!((algebraic_momentum_sum(&p) / want - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lagrange_extrapolation_is_exact_for_polynomials() {
        let xs = [0.5, 0.25, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 + 2.0 * x - x * x).collect();
        assert!((lagrange_at_zero(&xs, &ys) - 3.0).abs() < 1e-14);
    }
}
