//! Hamiltonian fields fit for the periodic grid.
//!
//! Polynomial Hamiltonians are not periodic; sampling them raw puts a
//! derivative kink at the wrap boundary whose spectral ringing pollutes
//! bracket operations everywhere. The builders here either use trigonometric
//! stand-ins (exactly band-limited) or window the polynomial to a constant
//! before the boundary with a smooth radial taper, which keeps the field
//! exactly polynomial on the working region and spectrally clean.

use crate::error::{Error, Result};
use crate::grid::{FieldKind, PhaseField, PhaseGrid};

/// C^7 polynomial step: 0 for `u <= 0`, 1 for `u >= 1`, proportional to
/// `integral of (t(1-t))^7`. High order keeps the spectral tail of windowed
/// fields far below bracket tolerances at working wavenumbers.
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    // integral of t^7 (1-t)^7 = sum_j C(7,j) (-1)^j t^(8+j) / (8+j), and
    // 1 / B(8,8) = 51480 * 7 + ... = 360360 * 1.4; use the exact constant
    const COEF: [f64; 8] = [1.0, -7.0, 21.0, -35.0, 35.0, -21.0, 7.0, -1.0];
    let mut acc = 0.0;
    let mut upow = u.powi(8);
    for (j, c) in COEF.iter().enumerate() {
        acc += c * upow / (8 + j) as f64;
        upow *= u;
    }
    // normalization 1/B(8,8) with B(8,8) = 7!^2/15!
    acc * 51480.0
}

/// Radial taper: 1 inside `r_flat`, 0 outside `r_zero`, smooth in between.
pub fn radial_taper(r: f64, r_flat: f64, r_zero: f64) -> f64 {
    1.0 - smooth_step((r - r_flat) / (r_zero - r_flat))
}

fn check_radii(grid: &PhaseGrid, r_flat: f64, r_zero: f64) -> Result<()> {
    if !(0.0 < r_flat && r_flat < r_zero) {
        return Err(Error::Config(format!(
            "taper radii must satisfy 0 < r_flat < r_zero, got {r_flat}, {r_zero}"
        )));
    }
    let half = [grid.q_max, -grid.q_min, grid.p_max, -grid.p_min]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if r_zero > half {
        return Err(Error::Config(format!(
            "taper radius {r_zero} reaches past the half-extent {half}"
        )));
    }
    Ok(())
}

/// `H = stiffness * (q^2 + p^2)` inside `r_flat`, smoothly saturating to the
/// constant `stiffness * r_flat^2` outside `r_zero`.
///
/// Exactly quadratic on the working disk, constant near the wrap boundary,
/// so the periodic extension is smooth and bracket operations see no kink.
pub fn windowed_harmonic(
    grid: PhaseGrid,
    stiffness: f64,
    r_flat: f64,
    r_zero: f64,
) -> Result<PhaseField> {
    check_radii(&grid, r_flat, r_zero)?;
    let cap = stiffness * r_flat * r_flat;
    Ok(PhaseField::from_fn(grid, FieldKind::Hamiltonian, |q, p| {
        let r = (q * q + p * p).sqrt();
        let w = radial_taper(r, r_flat, r_zero);
        w * stiffness * (q * q + p * p) + (1.0 - w) * cap
    })?)
}

/// Coordinate field `q` (or `p`) tapered to zero outside `r_zero`.
pub fn windowed_coordinate(
    grid: PhaseGrid,
    axis: CoordinateAxis,
    r_flat: f64,
    r_zero: f64,
) -> Result<PhaseField> {
    check_radii(&grid, r_flat, r_zero)?;
    Ok(PhaseField::from_fn(grid, FieldKind::Generic, |q, p| {
        let r = (q * q + p * p).sqrt();
        let w = radial_taper(r, r_flat, r_zero);
        match axis {
            CoordinateAxis::Q => w * q,
            CoordinateAxis::P => w * p,
        }
    })?)
}

#[derive(Debug, Clone, Copy)]
pub enum CoordinateAxis {
    Q,
    P,
}

/// Pendulum-type Hamiltonian `p^2/2 (band-limited stand-in) + cos(q)`.
///
/// The kinetic term is `(1 - cos(nu p)) / nu^2` with `nu` the fundamental
/// p-wavenumber: a trig polynomial matching `p^2/2` to fourth order, exactly
/// representable on the grid. Requires the extents to be multiples of `2 pi`
/// so `cos(q)` is periodic on the domain.
pub fn pendulum_standin(grid: PhaseGrid) -> Result<PhaseField> {
    let two_pi = 2.0 * std::f64::consts::PI;
    for len in [grid.q_max - grid.q_min, grid.p_max - grid.p_min] {
        let m = len / two_pi;
        if (m - m.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "domain length {len} is not a multiple of 2 pi; cos(q) would not be periodic"
            )));
        }
    }
    let nu = two_pi / (grid.p_max - grid.p_min);
    Ok(PhaseField::from_fn(grid, FieldKind::Hamiltonian, |q, p| {
        (1.0 - (nu * p).cos()) / (nu * nu) + q.cos()
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taper_is_flat_then_zero() {
        assert_eq!(radial_taper(0.5, 2.0, 3.0), 1.0);
        assert_eq!(radial_taper(2.0, 2.0, 3.0), 1.0);
        assert_eq!(radial_taper(3.5, 2.0, 3.0), 0.0);
        let mid = radial_taper(2.5, 2.0, 3.0);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn windowed_harmonic_quadratic_inside() {
        let grid = PhaseGrid::square(64, 12.0).unwrap();
        let h = windowed_harmonic(grid, 1.5, 4.0, 5.5).unwrap();
        for (i, j) in [(32usize, 40usize), (40, 32), (28, 28)] {
            let (q, p) = (grid.q(i), grid.p(j));
            assert!((q * q + p * p).sqrt() < 4.0);
            assert!((h.at(i, j) - 1.5 * (q * q + p * p)).abs() < 1e-15);
        }
    }

    #[test]
    fn taper_radius_must_fit() {
        let grid = PhaseGrid::square(32, 8.0).unwrap();
        assert!(windowed_harmonic(grid, 1.0, 3.0, 4.5).is_err());
    }
}
