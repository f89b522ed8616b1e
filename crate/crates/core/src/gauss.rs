//! Rational times, generalized quadratic Gauss sums and the delta
//! coefficients `ρ_m e^{iθ_m}` of the polygon's curvature at `t_pq`.

use crate::error::{invalid, Error, Result};
use crate::fourier::{dft_backward, root_of_unity};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `t_pq = (2π/M²)(p/q)` with `gcd(p, q) = 1`, `0 ≤ p`, `q ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalTime {
    sides: u32,
    p: u64,
    q: u64,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RationalTime {
    /// Rejects non-coprime pairs, `q = 0` and `M < 3`.
    pub fn new(sides: u32, p: u64, q: u64) -> Result<Self> {
        if sides < 3 {
            return invalid(format!("polygon needs M >= 3 sides, got {sides}"));
        }
        if q == 0 {
            return invalid("q must be positive");
        }
        if gcd(p, q) != 1 {
            return invalid(format!("time p/q = {p}/{q} is not in lowest terms"));
        }
        Ok(Self { sides, p, q })
    }

    /// Same instant as `p/q` after dividing out `gcd(p, q)`.
    pub fn reduced(sides: u32, p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return invalid("q must be positive");
        }
        let g = gcd(p, q);
        Self::new(sides, p / g, q / g)
    }

    pub fn sides(&self) -> u32 {
        self.sides
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Numerical value of the instant.
    pub fn value(&self) -> f64 {
        period(self.sides) * (self.p as f64) / (self.q as f64)
    }

    /// Number of sides of the skew polygon: `Mq` for odd `q`, `Mq/2` otherwise.
    pub fn side_count(&self) -> u64 {
        let m = self.sides as u64;
        if self.q % 2 == 1 {
            m * self.q
        } else {
            m * self.q / 2
        }
    }
}

/// Time period `2π/M²` of the regular `M`-gon evolution.
pub fn period(sides: u32) -> f64 {
    2.0 * PI / (sides as f64 * sides as f64)
}

/// `G(a, b, c) = Σ_{l=0}^{c-1} e^{2πi(al² + bl)/c}` by direct summation.
pub fn gauss_sum(a: i64, b: i64, c: i64) -> Result<Complex64> {
    if c <= 0 {
        return invalid(format!("Gauss sum modulus must be positive, got {c}"));
    }
    let (a, b, c) = (a as i128, b as i128, c as i128);
    Ok((0..c)
        .map(|l| root_of_unity((a * ((l * l) % c) + b * l) % c, c))
        .sum())
}

/// `G(a, b, c)` for every `b = 0..c` from one length-`c` FFT of the
/// chirp `e^{2πi a l²/c}`.
pub fn gauss_sum_row(a: i64, c: i64) -> Result<Vec<Complex64>> {
    if c <= 0 {
        return invalid(format!("Gauss sum modulus must be positive, got {c}"));
    }
    let (a, c) = (a as i128, c as i128);
    let chirp: Vec<Complex64> = (0..c)
        .map(|l| root_of_unity(a * ((l * l) % c), c))
        .collect();
    Ok(dft_backward(&chirp))
}

/// Angle `ρ` between consecutive sides at `t_pq`:
/// `cos(ρ/2) = cos^{1/q}(π/M)` for odd `q`, `cos^{2/q}(π/M)` for even `q`.
pub fn rho_angle(sides: u32, q: u64) -> Result<f64> {
    if sides < 3 {
        return invalid(format!("polygon needs M >= 3 sides, got {sides}"));
    }
    if q == 0 {
        return invalid("q must be positive");
    }
    let expo = if q % 2 == 1 { 1.0 / q as f64 } else { 2.0 / q as f64 };
    // x = ln cos(ρ/2); write ρ/2 via atan2 so large q keeps full precision
    let x = (PI / sides as f64).cos().ln() * expo;
    let c = x.exp();
    let s = (-(2.0 * x).exp_m1()).sqrt();
    Ok(2.0 * s.atan2(c))
}

/// Curvature mass `ψ̂(0)` of one delta block.
pub fn psi_hat_zero(sides: u32, q: u64, rho: f64) -> f64 {
    let m = sides as f64;
    let qq = if q % 2 == 1 { q as f64 } else { q as f64 / 2.0 };
    rho * m * qq.sqrt() / (2.0 * PI)
}

/// Delta coefficients at `s = 2πk/M + 2πm/(Mq)`; they depend only on `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCoefficients {
    pub time: RationalTime,
    pub rho: f64,
    pub psi_hat0: f64,
    /// `ρ_m` for `m = 0..q`; either `ρ` or exactly zero.
    pub rho_m: Vec<f64>,
    /// `θ_m = arg G(-p, m, q)`; zero where `ρ_m` vanishes.
    pub theta: Vec<f64>,
}

/// Magnitudes below this are treated as vanishing sums.
pub const ZERO_SUM_THRESHOLD: f64 = 1e-9;

/// Whether `G(-p, m, q) ≠ 0` for `gcd(p, q) = 1`.
pub fn is_corner(q: u64, m: u64) -> bool {
    q % 2 == 1 || (m % 2) == ((q / 2) % 2)
}

pub fn delta_coefficients(time: RationalTime) -> Result<DeltaCoefficients> {
    let q = time.q();
    let rho = rho_angle(time.sides(), q)?;
    let psi_hat0 = psi_hat_zero(time.sides(), q, rho);
    let qi = q as i64;
    let a = -((time.p() % q) as i64);
    let sums = gauss_sum_row(a, qi)?;
    let nominal = if q % 2 == 1 {
        (q as f64).sqrt()
    } else {
        (2.0 * q as f64).sqrt()
    };
    let mut rho_m = vec![0.0; q as usize];
    let mut theta = vec![0.0; q as usize];
    for (m, g) in sums.iter().enumerate() {
        let nonzero = g.norm() >= ZERO_SUM_THRESHOLD;
        if nonzero != is_corner(q, m as u64) {
            return Err(Error::Construction(format!(
                "Gauss sum G({a}, {m}, {q}) = {g} breaks the parity pattern"
            )));
        }
        if nonzero {
            if (g.norm() - nominal).abs() > 1e-8 * nominal {
                return Err(Error::Construction(format!(
                    "|G({a}, {m}, {q})| = {} differs from {nominal}",
                    g.norm()
                )));
            }
            rho_m[m] = rho;
            theta[m] = g.arg();
        }
    }
    Ok(DeltaCoefficients {
        time,
        rho,
        psi_hat0,
        rho_m,
        theta,
    })
}
