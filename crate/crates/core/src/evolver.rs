//! Pseudo-spectral evolution of `X_t = X_s ∧ X_ss`, `T_t = T ∧ T_ss` on a
//! uniform periodic grid, RK4 in time.
//!
//! Grid points sit at `s_j = (j + ½)·2π/N` so no sample falls on a corner of
//! the piecewise-linear data used here. A state with `fold = f` stores only
//! the first `N/f` points; the rest follow from `X_{j+N/f} = R_z(2π/f) X_j`.
//! The horizontal part `Z = v₁ + i v₂` of such a field is `e^{is}` times a
//! `2π/f`-periodic function, so its derivatives carry the multiplier
//! `i(f·m + 1)`; the vertical part is `2π/f`-periodic itself.

use crate::error::{invalid, Error, Result};
use crate::polygon::rot_z;
use crate::selfsimilar::{a_vector, c0_from_inner_angle, corner_rotation, integrate_frame};
use crate::Vec3;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilamentState {
    /// Full grid size `N`.
    pub n: usize,
    /// Rotational symmetry order used for storage (1 = none).
    pub fold: usize,
    pub t: f64,
    /// Step used by the last call to the stepper.
    pub dt: f64,
    pub steps: u64,
    /// Positions on the stored block.
    pub x: Vec<Vec3>,
    /// Tangents on the stored block.
    pub tangent: Vec<Vec3>,
    /// Largest `||T| - 1|` seen before renormalisation.
    pub max_norm_drift: f64,
}

impl FilamentState {
    /// Assembles a state from block samples; `x.len() · fold` is the grid size.
    pub fn from_block(x: Vec<Vec3>, tangent: Vec<Vec3>, fold: usize, t: f64) -> Result<Self> {
        if x.is_empty() || x.len() != tangent.len() || fold == 0 {
            return invalid("block samples must be nonempty and of equal length, fold >= 1");
        }
        Ok(Self {
            n: x.len() * fold,
            fold,
            t,
            dt: 0.0,
            steps: 0,
            x,
            tangent,
            max_norm_drift: 0.0,
        })
    }

    pub fn block_len(&self) -> usize {
        self.x.len()
    }

    pub fn ds(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Arc length of grid point `j` of the full grid.
    pub fn s(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.ds()
    }

    fn unfold(&self, field: &[Vec3]) -> Vec<Vec3> {
        let step = 2.0 * PI / self.fold as f64;
        (0..self.fold)
            .flat_map(|b| {
                let r = rot_z(step * b as f64);
                field.iter().map(move |v| r * v)
            })
            .collect()
    }

    pub fn full_positions(&self) -> Vec<Vec3> {
        self.unfold(&self.x)
    }

    pub fn full_tangents(&self) -> Vec<Vec3> {
        self.unfold(&self.tangent)
    }

    /// Mean of `X` over the full grid.
    pub fn mean_position(&self) -> Vec3 {
        let full = self.full_positions();
        full.iter().sum::<Vec3>() / full.len() as f64
    }

    /// `Σ |X_{j+1} - X_j|` around the closed curve.
    pub fn polygonal_length(&self) -> f64 {
        let full = self.full_positions();
        let n = full.len();
        (0..n).map(|j| (full[(j + 1) % n] - full[j]).norm()).sum()
    }

    /// `Σ_k k² |T̂(k)|²` of the full tangent field (discrete `∫|T_s|²`).
    pub fn tangent_energy(&self) -> f64 {
        let full = self.full_tangents();
        let n = full.len();
        let mut total = 0.0;
        for c in 0..3 {
            let f: Vec<Complex64> = full.iter().map(|v| Complex64::new(v[c], 0.0)).collect();
            let spec = crate::fourier::dft(&f);
            for (k, z) in spec.iter().enumerate() {
                let kk = crate::fourier::signed_index(k, n) as f64;
                total += kk * kk * z.norm_sqr();
            }
        }
        2.0 * PI * total / (n as f64 * n as f64)
    }
}

/// Regular planar `M`-gon of perimeter 2π, centred, side `k` along `(cos 2πk/M, sin 2πk/M, 0)`.
pub fn init_regular_polygon(sides: usize, n: usize) -> Result<FilamentState> {
    if sides < 3 || n == 0 || n % sides != 0 {
        return invalid(format!("grid size {n} must be a positive multiple of M = {sides} >= 3"));
    }
    let a = PI / sides as f64;
    let vertex = Vec3::new(-a, -a / a.tan(), 0.0);
    let ds = 2.0 * PI / n as f64;
    let per_side = n / sides;
    let x = (0..per_side).map(|j| vertex + Vec3::x() * ((j as f64 + 0.5) * ds)).collect();
    let tangent = vec![Vec3::x(); per_side];
    FilamentState::from_block(x, tangent, sides, 0.0)
}

/// Closed polygon with side tangents `segments[i].0` over arc fractions `segments[i].1`,
/// first vertex at `s = 0`, centred on the grid mean.
pub fn init_piecewise_tangents(segments: &[(Vec3, f64)], n: usize) -> Result<FilamentState> {
    if segments.is_empty() || n == 0 {
        return invalid("need at least one segment and a nonempty grid");
    }
    let total: f64 = segments.iter().map(|s| s.1).sum();
    if (total - 1.0).abs() > 1e-12 || segments.iter().any(|s| !(s.1 > 0.0)) {
        return invalid(format!("arc fractions must be positive and sum to 1, got {total}"));
    }
    if segments.iter().any(|s| (s.0.norm() - 1.0).abs() > 1e-12) {
        return invalid("segment tangents must be unit vectors");
    }
    let gap: Vec3 = segments.iter().map(|(t, f)| t * *f).sum();
    if gap.norm() > 1e-12 {
        return invalid(format!("tangent loop does not close: gap {:e}", gap.norm()));
    }
    let mut starts = Vec::with_capacity(segments.len());
    let (mut s0, mut x0) = (0.0, Vec3::zeros());
    for (t, f) in segments {
        starts.push((s0, x0));
        let len = 2.0 * PI * f;
        s0 += len;
        x0 += t * len;
    }
    let ds = 2.0 * PI / n as f64;
    let mut x = Vec::with_capacity(n);
    let mut tangent = Vec::with_capacity(n);
    let mut seg = 0;
    for j in 0..n {
        let s = (j as f64 + 0.5) * ds;
        while seg + 1 < segments.len() && s >= starts[seg + 1].0 {
            seg += 1;
        }
        let (sa, xa) = starts[seg];
        x.push(xa + segments[seg].0 * (s - sa));
        tangent.push(segments[seg].0);
    }
    let mean = x.iter().sum::<Vec3>() / n as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    FilamentState::from_block(x, tangent, 1, 0.0)
}

/// The 3-4-12-13 quadrilateral: sides `12, 13, 3, 4` (in units of `2π/32`).
pub fn quadrilateral_datum() -> Vec<(Vec3, f64)> {
    vec![
        (Vec3::new(1.0, 0.0, 0.0), 12.0 / 32.0),
        (Vec3::new(-12.0 / 13.0, 5.0 / 13.0, 0.0), 13.0 / 32.0),
        (Vec3::new(-4.0 / 5.0, -3.0 / 5.0, 0.0), 3.0 / 32.0),
        (Vec3::new(3.0 / 5.0, -4.0 / 5.0, 0.0), 4.0 / 32.0),
    ]
}

/// How positions are advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PositionUpdate {
    /// `X_t = X_s ∧ X_ss` with spectral derivatives of `X`.
    /// Loses length at corners; kept for comparison.
    Binormal,
    /// `X_t = T ∧ T_s` from the evolved tangent.
    #[default]
    FromTangent,
}

struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `i(f·m + σ)` for the horizontal part.
    k_h: Vec<f64>,
    /// `f·m` for the vertical part.
    k_v: Vec<f64>,
    nyquist: Option<usize>,
    /// `e^{iσ s_j}`.
    phase: Vec<Complex64>,
    zb: Vec<Complex64>,
    vb: Vec<Complex64>,
    d1: Vec<Complex64>,
    d2: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    fn new(n_block: usize, fold: usize, ds: f64) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n_block);
        let inv = planner.plan_fft_inverse(n_block);
        let sigma = if fold > 1 { 1.0 } else { 0.0 };
        let k_v: Vec<f64> = (0..n_block)
            .map(|k| crate::fourier::signed_index(k, n_block) as f64 * fold as f64)
            .collect();
        let k_h = k_v.iter().map(|k| k + sigma).collect();
        let phase = (0..n_block)
            .map(|j| Complex64::from_polar(1.0, sigma * (j as f64 + 0.5) * ds))
            .collect();
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let z = Complex64::new(0.0, 0.0);
        Self {
            n: n_block,
            fwd,
            inv,
            k_h,
            k_v,
            nyquist: (n_block % 2 == 0).then_some(n_block / 2),
            phase,
            zb: vec![z; n_block],
            vb: vec![z; n_block],
            d1: vec![z; n_block],
            d2: vec![z; n_block],
            scratch: vec![z; scratch_len],
        }
    }

    /// Second derivative into `d2`, and the first into `d1` when requested.
    fn derivatives(&mut self, f: &[Vec3], first: Option<&mut [Vec3]>, second: &mut [Vec3]) {
        let n = self.n;
        let norm = 1.0 / n as f64;
        for j in 0..n {
            self.zb[j] = Complex64::new(f[j].x, f[j].y) * self.phase[j].conj();
            self.vb[j] = Complex64::new(f[j].z, 0.0);
        }
        self.fwd.process_with_scratch(&mut self.zb, &mut self.scratch);
        self.fwd.process_with_scratch(&mut self.vb, &mut self.scratch);
        let want_first = first.is_some();
        for k in 0..n {
            let (kh, kv) = (self.k_h[k], self.k_v[k]);
            let odd = if Some(k) == self.nyquist { 0.0 } else { 1.0 };
            let z = self.zb[k] * norm;
            let v = self.vb[k] * norm;
            self.d2[k] = z * (-kh * kh);
            if want_first {
                self.d1[k] = z * Complex64::new(0.0, kh * odd);
            }
            // vertical: first derivative in the real part, second in the imaginary part
            let v1 = v * Complex64::new(0.0, kv * odd);
            let v2 = v * (-kv * kv);
            self.vb[k] = v1 + Complex64::i() * v2;
        }
        self.inv.process_with_scratch(&mut self.d2, &mut self.scratch);
        self.inv.process_with_scratch(&mut self.vb, &mut self.scratch);
        if let Some(out) = first {
            self.inv.process_with_scratch(&mut self.d1, &mut self.scratch);
            for j in 0..n {
                let h = self.d1[j] * self.phase[j];
                out[j] = Vec3::new(h.re, h.im, self.vb[j].re);
            }
        }
        for j in 0..n {
            let h = self.d2[j] * self.phase[j];
            second[j] = Vec3::new(h.re, h.im, self.vb[j].im);
        }
    }
}

/// Reusable RK4 stepper for states of one shape.
pub struct Evolver {
    spectral: Spectral,
    update: PositionUpdate,
    n_block: usize,
    fold: usize,
    kx: [Vec<Vec3>; 4],
    kt: [Vec<Vec3>; 4],
    xs: Vec<Vec3>,
    ts: Vec<Vec3>,
    d1: Vec<Vec3>,
    d2: Vec<Vec3>,
}

impl Evolver {
    pub fn new(state: &FilamentState, update: PositionUpdate) -> Self {
        let nb = state.block_len();
        let z = vec![Vec3::zeros(); nb];
        Self {
            spectral: Spectral::new(nb, state.fold, state.ds()),
            update,
            n_block: nb,
            fold: state.fold,
            kx: [z.clone(), z.clone(), z.clone(), z.clone()],
            kt: [z.clone(), z.clone(), z.clone(), z.clone()],
            xs: z.clone(),
            ts: z.clone(),
            d1: z.clone(),
            d2: z,
        }
    }

    fn rhs(&mut self, stage: usize) {
        let n = self.n_block;
        let sp = &mut self.spectral;
        match self.update {
            PositionUpdate::Binormal => {
                sp.derivatives(&self.ts, None, &mut self.d2);
                for j in 0..n {
                    self.kt[stage][j] = self.ts[j].cross(&self.d2[j]);
                }
                sp.derivatives(&self.xs, Some(&mut self.d1), &mut self.d2);
                for j in 0..n {
                    self.kx[stage][j] = self.d1[j].cross(&self.d2[j]);
                }
            }
            PositionUpdate::FromTangent => {
                sp.derivatives(&self.ts, Some(&mut self.d1), &mut self.d2);
                for j in 0..n {
                    self.kt[stage][j] = self.ts[j].cross(&self.d2[j]);
                    self.kx[stage][j] = self.ts[j].cross(&self.d1[j]);
                }
            }
        }
    }

    /// One RK4 step followed by pointwise renormalisation of `T`.
    pub fn step(&mut self, state: &mut FilamentState, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        if state.block_len() != self.n_block || state.fold != self.fold {
            return invalid("state shape differs from the one the stepper was built for");
        }
        let n = self.n_block;
        let coef = [0.0, 0.5, 0.5, 1.0];
        for stage in 0..4 {
            if stage == 0 {
                self.xs.copy_from_slice(&state.x);
                self.ts.copy_from_slice(&state.tangent);
            } else {
                let c = coef[stage] * dt;
                for j in 0..n {
                    self.xs[j] = state.x[j] + self.kx[stage - 1][j] * c;
                    self.ts[j] = state.tangent[j] + self.kt[stage - 1][j] * c;
                }
            }
            self.rhs(stage);
        }
        let w = dt / 6.0;
        let mut drift: f64 = 0.0;
        let mut finite = true;
        for j in 0..n {
            state.x[j] += (self.kx[0][j] + (self.kx[1][j] + self.kx[2][j]) * 2.0 + self.kx[3][j]) * w;
            let t = state.tangent[j] + (self.kt[0][j] + (self.kt[1][j] + self.kt[2][j]) * 2.0 + self.kt[3][j]) * w;
            let len = t.norm();
            finite &= len.is_finite() && state.x[j].iter().all(|v| v.is_finite());
            drift = drift.max((len - 1.0).abs());
            state.tangent[j] = t / len;
        }
        state.steps += 1;
        state.t += dt;
        state.dt = dt;
        if !finite || drift > 0.5 {
            return Err(Error::BlowUp {
                step: state.steps,
                t: state.t,
            });
        }
        state.max_norm_drift = state.max_norm_drift.max(drift);
        Ok(())
    }

    /// `steps` steps of size `dt`.
    pub fn run(&mut self, state: &mut FilamentState, dt: f64, steps: u64) -> Result<()> {
        (0..steps).try_for_each(|_| self.step(state, dt))
    }
}

/// One RK4 step with a freshly planned stepper. Use [`Evolver`] in loops.
pub fn step_rk4(state: &mut FilamentState, dt: f64) -> Result<()> {
    Evolver::new(state, PositionUpdate::default()).step(state, dt)
}

/// Measured and closed-form centre-of-mass speed after one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmMeasurement {
    pub sides: usize,
    pub n: usize,
    pub nt: u64,
    pub estimate: f64,
    pub closed_form: f64,
    pub error: f64,
    pub max_norm_drift: f64,
    pub length_change: f64,
}

/// `mean(X₃)(2π/M²)·M²/(2π)` after `nt` steps from the regular `M`-gon on `N` points.
pub fn measure_cm(sides: usize, n: usize, nt: u64) -> Result<CmMeasurement> {
    measure_cm_with(sides, n, nt, PositionUpdate::default())
}

pub fn measure_cm_with(sides: usize, n: usize, nt: u64, update: PositionUpdate) -> Result<CmMeasurement> {
    if nt == 0 {
        return invalid("need at least one time step");
    }
    let mut state = init_regular_polygon(sides, n)?;
    let len0 = state.polygonal_length();
    let period = 2.0 * PI / (sides * sides) as f64;
    let dt = period / nt as f64;
    Evolver::new(&state, update).run(&mut state, dt, nt)?;
    let estimate = state.mean_position().z / period;
    let closed_form = crate::polygon::cm_closed_form(sides as u32)?;
    Ok(CmMeasurement {
        sides,
        n,
        nt,
        estimate,
        closed_form,
        error: (estimate - closed_form).abs(),
        max_norm_drift: state.max_norm_drift,
        length_change: (state.polygonal_length() - len0).abs() / len0,
    })
}

/// Inner-half block variance above this means the block is not a flat side.
pub const SIDE_VARIANCE_THRESHOLD: f64 = 1e-2;

/// Side tangents from `expected_sides` equal blocks, each averaged over its inner half.
pub fn side_tangents(state: &FilamentState, expected_sides: usize) -> Result<Vec<Vec3>> {
    let full = state.full_tangents();
    let n = full.len();
    if expected_sides == 0 || n % expected_sides != 0 || n / expected_sides < 4 {
        return invalid(format!("cannot split {n} points into {expected_sides} blocks"));
    }
    let b = n / expected_sides;
    let mut out = Vec::with_capacity(expected_sides);
    for m in 0..expected_sides {
        let inner = &full[m * b + b / 4..m * b + 3 * b / 4];
        let mean = inner.iter().sum::<Vec3>() / inner.len() as f64;
        let var = inner.iter().map(|t| (t - mean).norm_squared()).sum::<f64>() / inner.len() as f64;
        if var > SIDE_VARIANCE_THRESHOLD || mean.norm() < 1e-12 {
            return Err(Error::Analysis(format!(
                "block {m} is not a flat side (variance {var:e})"
            )));
        }
        out.push(mean.normalize());
    }
    Ok(out)
}

/// `P = [Π_m (1 + T_m·T_{m+1})/2]^{1/2}` over the detected sides.
pub fn conservation_product(state: &FilamentState, expected_sides: usize) -> Result<f64> {
    let sides = side_tangents(state, expected_sides)?;
    Ok(product_of_tangents(&sides))
}

pub fn product_of_tangents(sides: &[Vec3]) -> f64 {
    let k = sides.len();
    (0..k)
        .map(|m| (1.0 + sides[m].dot(&sides[(m + 1) % k])) / 2.0)
        .product::<f64>()
        .sqrt()
}

/// A corner of the initial datum: arc position and the adjacent side tangents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSpec {
    pub s: f64,
    pub incoming: Vec3,
    pub outgoing: Vec3,
}

impl CornerSpec {
    /// `θ` with `cos θ = -T⁻·T⁺`.
    pub fn inner_angle(&self) -> f64 {
        (-self.incoming.dot(&self.outgoing)).clamp(-1.0, 1.0).acos()
    }
}

/// Largest `|T_num - T_rot|` over grid points with `|s - s_c| ≤ window`, where `T_rot`
/// is the one-corner solution with the corner's angle, rotated onto its sides.
pub fn compare_corner_evolution(state: &FilamentState, corner: &CornerSpec, window: f64) -> Result<f64> {
    if !(state.t > 0.0) || !(window > 0.0) {
        return invalid("corner comparison needs t > 0 and a positive window");
    }
    let c0 = c0_from_inner_angle(corner.inner_angle())?;
    let r = corner_rotation(&a_vector(c0)?, &corner.incoming, &corner.outgoing)?;
    let rt = state.t.sqrt();
    let reach = window / rt;
    // RK4 frame drift grows like reach⁶ds⁴; keep it well under the abort level
    let ds = 1e-3f64.min(0.25 * state.ds() / rt).min(0.5 * reach.max(1.0).powf(-1.5));
    let frame = integrate_frame(c0, 1.0, reach + 2.0 * ds, ds)?;
    let full = state.full_tangents();
    let mut worst: f64 = 0.0;
    for (j, t) in full.iter().enumerate() {
        let mut d = state.s(j) - corner.s;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        if d.abs() > window {
            continue;
        }
        let model = r * frame
            .tangent_at(d / rt)
            .ok_or_else(|| Error::Analysis("sample outside the self-similar window".into()))?;
        worst = worst.max((t - model).norm());
    }
    Ok(worst)
}
