//! Constructors for the named quasi-probability states: Gaussian packets,
//! harmonic-oscillator eigenstate distributions, box and Cauchy states,
//! classical action-shell (ring) states, and products on composite grids.

use crate::error::{Error, Result};
use crate::grid::{FieldKind, PhaseField, PhaseGrid};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tail mass allowed outside the grid before a constructor refuses.
pub const TAIL_LIMIT: f64 = 1e-8;

/// Recipe for a state on a single 2D grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum StateSpec {
    /// Ground-width Gaussian centered at `(q0, p0)`: `exp(-((q-q0)^2+(p-p0)^2)/hbar) / (pi hbar)`.
    Gaussian { q0: f64, p0: f64, hbar: f64 },
    /// n-th harmonic-oscillator eigenstate distribution (Laguerre form).
    ShoEigen { n: usize, hbar: f64 },
    /// Uniform box of size `eps x delta` at `(q0, p0)`; sizes snap to whole cells.
    Box { q0: f64, p0: f64, eps: f64, delta: f64 },
    /// Heavy-tailed `hbar / (pi (q^2 + p^2 + hbar))`, truncation-normalized.
    Cauchy { hbar: f64 },
    /// Gaussian shell in action `I = (q^2+p^2)/2` around `action`, width `width`.
    Ring { action: f64, width: f64 },
}

/// Laguerre polynomial `L_n(x)` by the stable three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut lm1 = 1.0;
    let mut l = 1.0 - x;
    for m in 1..n {
        let next = ((2 * m + 1) as f64 - x) * l - m as f64 * lm1;
        let next = next / (m + 1) as f64;
        lm1 = l;
        l = next;
    }
    l
}

/// `W_n(q, p) = (-1)^n / (pi hbar) * L_n(2 rho^2 / hbar) * exp(-rho^2 / hbar)`.
pub fn sho_eigen_value(n: usize, hbar: f64, q: f64, p: f64) -> f64 {
    let rho2 = q * q + p * p;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign / (PI * hbar) * laguerre(n, 2.0 * rho2 / hbar) * (-rho2 / hbar).exp()
}

/// Radial tail mass of `|W_n|` outside radius `r`, by fine radial quadrature.
fn sho_tail_mass(n: usize, hbar: f64, r: f64) -> f64 {
    let r_stop = r + 10.0 * hbar.sqrt() + (2.0 * (2 * n + 1) as f64 * hbar).sqrt();
    let steps = 4000;
    let dr = (r_stop - r) / steps as f64;
    let mut mass = 0.0;
    for s in 0..steps {
        let rho = r + (s as f64 + 0.5) * dr;
        mass += sho_eigen_value(n, hbar, rho, 0.0).abs() * 2.0 * PI * rho * dr;
    }
    mass
}

/// Half-extent a centered state needs so its tail mass stays under `TAIL_LIMIT`.
fn required_half_extent(n: usize, hbar: f64) -> f64 {
    let mut r = (2.0 * (2 * n + 1) as f64 * hbar).sqrt() + hbar.sqrt();
    while sho_tail_mass(n, hbar, r) > TAIL_LIMIT {
        r += 0.5 * hbar.sqrt();
    }
    r
}

fn check_tail(tail: f64, required: f64) -> Result<()> {
    if tail > TAIL_LIMIT {
        return Err(Error::TailMass { tail, limit: TAIL_LIMIT, required_extent: required });
    }
    Ok(())
}

/// Builds the state described by `spec` on `grid`, normalized to unit integral.
pub fn build_state(spec: &StateSpec, grid: PhaseGrid) -> Result<PhaseField> {
    match *spec {
        StateSpec::Gaussian { q0, p0, hbar } => {
            if hbar <= 0.0 {
                return Err(Error::NonPositiveScale(hbar));
            }
            let margin = [
                grid.q_max - q0,
                q0 - grid.q_min,
                grid.p_max - p0,
                p0 - grid.p_min,
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
            let tail = sho_tail_mass(0, hbar, margin.max(0.0));
            check_tail(tail, required_half_extent(0, hbar) + q0.abs().max(p0.abs()))?;
            PhaseField::from_fn(grid, FieldKind::Generic, |q, p| {
                sho_eigen_value(0, hbar, q - q0, p - p0)
            })?
            .into_state()
        }
        StateSpec::ShoEigen { n, hbar } => {
            if hbar <= 0.0 {
                return Err(Error::NonPositiveScale(hbar));
            }
            let margin = [grid.q_max, -grid.q_min, grid.p_max, -grid.p_min]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let tail = sho_tail_mass(n, hbar, margin.max(0.0));
            check_tail(tail, required_half_extent(n, hbar))?;
            PhaseField::from_fn(grid, FieldKind::Generic, |q, p| sho_eigen_value(n, hbar, q, p))?
                .into_state()
        }
        StateSpec::Box { q0, p0, eps, delta } => build_box(grid, q0, p0, eps, delta),
        StateSpec::Cauchy { hbar } => {
            if hbar <= 0.0 {
                return Err(Error::NonPositiveScale(hbar));
            }
            // heavy tails: truncation-normalized on the grid, no tail check
            PhaseField::from_fn(grid, FieldKind::Generic, |q, p| {
                hbar / (PI * (q * q + p * p + hbar))
            })?
            .into_state()
        }
        StateSpec::Ring { action, width } => {
            if width <= 0.0 {
                return Err(Error::NonPositiveScale(width));
            }
            if action < 0.0 {
                return Err(Error::Config(format!("ring action must be >= 0, got {action}")));
            }
            let margin = [grid.q_max, -grid.q_min, grid.p_max, -grid.p_min]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let shell_radius = (2.0 * action).sqrt();
            // Gaussian in I: I(margin) must exceed the shell by many widths
            let i_margin = margin * margin / 2.0;
            let tail = 0.5 * erfc_upper((i_margin - action) / (std::f64::consts::SQRT_2 * width));
            let needed = (2.0 * (action + 6.0 * width)).sqrt();
            check_tail(tail, needed.max(shell_radius))?;
            PhaseField::from_fn(grid, FieldKind::Generic, |q, p| {
                let i = (q * q + p * p) / 2.0;
                (-(i - action).powi(2) / (2.0 * width * width)).exp()
            })?
            .into_state()
        }
    }
}

fn erfc_upper(x: f64) -> f64 {
    // crude complementary-error bound, only used for the tail check
    if x <= 0.0 {
        return 1.0;
    }
    (-x * x).exp() / (x * PI.sqrt()).max(1.0)
}

fn build_box(grid: PhaseGrid, q0: f64, p0: f64, eps: f64, delta: f64) -> Result<PhaseField> {
    if eps <= 0.0 || delta <= 0.0 {
        return Err(Error::NonPositiveScale(eps.min(delta)));
    }
    let m = (eps / grid.dq()).round().max(1.0) as usize;
    let n = (delta / grid.dp()).round().max(1.0) as usize;
    if m > grid.n_q || n > grid.n_p {
        return Err(Error::Config("box does not fit in the grid".into()));
    }
    // snap the corner to the grid so the support is exactly m x n cells
    let i0 = ((q0 - grid.q_min) / grid.dq()).round() as i64;
    let j0 = ((p0 - grid.p_min) / grid.dp()).round() as i64;
    let height = 1.0 / (m as f64 * grid.dq() * n as f64 * grid.dp());
    let mut values = vec![0.0; grid.len()];
    for a in 0..m {
        let i = (i0 + a as i64).rem_euclid(grid.n_q as i64) as usize;
        for b in 0..n {
            let j = (j0 + b as i64).rem_euclid(grid.n_p as i64) as usize;
            values[grid.idx(i, j)] = height;
        }
    }
    PhaseField::from_values(grid, values, FieldKind::State)
}

/// Real sample array over a product of two 2D grids, indexed
/// `[i1][j1][i2][j2]`.
#[derive(Debug, Clone)]
pub struct Field4 {
    pub grid1: PhaseGrid,
    pub grid2: PhaseGrid,
    pub values: Vec<f64>,
}

/// Cap on product-field samples (16 MB of f64 by default).
pub const PRODUCT_POINT_CAP: usize = 1 << 21;

impl Field4 {
    #[inline]
    pub fn idx(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> usize {
        ((i1 * self.grid1.n_p + j1) * self.grid2.n_q + i2) * self.grid2.n_p + j2
    }

    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid1.cell() * self.grid2.cell()
    }

    pub fn inner_product(&self, other: &Field4) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid1.cell()
            * self.grid2.cell())
    }

    pub fn zeros_like(grid1: PhaseGrid, grid2: PhaseGrid) -> Result<Field4> {
        let points = grid1.len() * grid2.len();
        if points > PRODUCT_POINT_CAP {
            return Err(Error::MemoryCap { points, cap: PRODUCT_POINT_CAP });
        }
        Ok(Field4 { grid1, grid2, values: vec![0.0; points] })
    }

    pub fn axpy(&mut self, c: f64, other: &Field4) -> Result<()> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.values.iter_mut().zip(other.values.iter()) {
            *a += c * b;
        }
        Ok(())
    }
}

/// `f12(z1, z2) = f1(z1) * f2(z2)` on the product grid.
pub fn product_state(f1: &PhaseField, f2: &PhaseField) -> Result<Field4> {
    let mut out = Field4::zeros_like(*f1.grid(), *f2.grid())?;
    let v2 = f2.values();
    for (a, &x) in f1.values().iter().enumerate() {
        let base = a * v2.len();
        for (b, &y) in v2.iter().enumerate() {
            out.values[base + b] = x * y;
        }
    }
    Ok(out)
}
