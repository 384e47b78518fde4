//! Star products and transforms at arbitrary commutator scale `k`.
//!
//! The Moyal product is computed in the Fourier domain as a twisted
//! convolution: the mode pair `(a, b)` of the left factor and `(c, d)` of the
//! right factor combine with phase `exp(-i k (a d - b c) / 2)`. Its
//! antisymmetric part is the sine bracket `(2/k) f sin(k Lambda / 2) H`, which
//! tends to the Poisson bracket as `k -> 0`.
//!
//! On grids satisfying `n_q * dq * dp = 2 pi k` the same algebra is realized
//! exactly by `n_q x n_q` matrices through a discrete Weyl transform; that
//! matrix route is the verification oracle, the twisted convolution is the
//! production path valid for any `k`.

use crate::error::{Error, Result};
use crate::fourier::{self, signed_mode};
use crate::grid::{FieldKind, PhaseField, PhaseGrid};
use crate::kernels::Kernel;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex sample array over a [`PhaseGrid`]; intermediate spectral data.
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: PhaseGrid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn from_real(f: &PhaseField) -> ComplexField {
        ComplexField { grid: *f.grid(), values: fourier::to_complex(f.values()) }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn integrate(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        fourier::max_imag(&self.values)
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ComplexField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add_scaled(&mut self, c: f64, other: &ComplexField) -> Result<()> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.values.iter_mut().zip(other.values.iter()) {
            *a += c * b;
        }
        Ok(())
    }

    /// Real part as a field; errors if the imaginary residue exceeds `tol`.
    pub fn into_real(self, tol: f64) -> Result<PhaseField> {
        let residual = self.max_imag();
        if residual > tol {
            return Err(Error::ImaginaryResidue { residual, tol });
        }
        PhaseField::from_values(self.grid, fourier::real_part(&self.values), FieldKind::Generic)
    }

    pub fn real_lossy(&self) -> PhaseField {
        PhaseField::from_values(
            self.grid,
            fourier::real_part(&self.values),
            FieldKind::Generic,
        )
        .expect("finite values")
    }
}

fn check_same_grid(f: &PhaseField, g: &PhaseField) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Moyal product `f * g` at scale `k` (twisted convolution). `k = 0` is the
/// plain pointwise product, the commutative limit.
pub fn moyal_product(f: &PhaseField, g: &PhaseField, k: f64) -> Result<ComplexField> {
    check_same_grid(f, g)?;
    if k < 0.0 {
        return Err(Error::NonPositiveScale(k));
    }
    let grid = *f.grid();
    if k == 0.0 {
        let values = f
            .values()
            .iter()
            .zip(g.values().iter())
            .map(|(&a, &b)| Complex64::new(a * b, 0.0))
            .collect();
        return Ok(ComplexField { grid, values });
    }
    if grid.n_q == grid.n_p && grid.is_commensurate(k) {
        moyal_half_shift(f, g)
    } else {
        moyal_mode_convolution(f, g, k)
    }
}

/// Direct quadruple-loop twisted convolution. Reference implementation for
/// the FFT routes; identical mode-wrap convention, any `k`.
pub fn moyal_product_reference(f: &PhaseField, g: &PhaseField, k: f64) -> Result<ComplexField> {
    check_same_grid(f, g)?;
    let grid = *f.grid();
    let (nq, np) = (grid.n_q, grid.n_p);
    let fm = f.modes();
    let gm = g.modes();
    let mut out = vec![Complex64::default(); nq * np];
    for ia in 0..nq {
        let a = grid.kappa(signed_mode(ia, nq));
        for jb in 0..np {
            let b = grid.nu(signed_mode(jb, np));
            let fc = fm[ia * np + jb];
            if fc.norm_sqr() < 1e-260 {
                continue;
            }
            for ic in 0..nq {
                let c = grid.kappa(signed_mode(ic, nq));
                let iu = (ia + ic) % nq;
                for jd in 0..np {
                    let d = grid.nu(signed_mode(jd, np));
                    let gc = gm[ic * np + jd];
                    let phase = Complex64::from_polar(1.0, -0.5 * k * (a * d - b * c));
                    out[iu * np + (jb + jd) % np] += fc * gc * phase;
                }
            }
        }
    }
    let values = fourier::fft2_inverse(&out, nq, np);
    Ok(ComplexField { grid, values })
}

/// FFT route for arbitrary `k`: for each pair of p-modes, the q-mode sum is a
/// cyclic convolution of phase-twisted rows.
fn moyal_mode_convolution(f: &PhaseField, g: &PhaseField, k: f64) -> Result<ComplexField> {
    let grid = *f.grid();
    let (nq, np) = (grid.n_q, grid.n_p);
    let fm = f.modes();
    let gm = g.modes();

    // column-major copies: col[b][a]
    let col = |m: &[Complex64]| -> Vec<Vec<Complex64>> {
        (0..np)
            .map(|j| (0..nq).map(|i| m[i * np + j]).collect())
            .collect()
    };
    let fcol = col(&fm);
    let gcol = col(&gm);

    let kappa: Vec<f64> = (0..nq).map(|i| grid.kappa(signed_mode(i, nq))).collect();
    let nu: Vec<f64> = (0..np).map(|j| grid.nu(signed_mode(j, np))).collect();

    let mut out_modes = vec![Complex64::default(); nq * np];
    let mut x = vec![Complex64::default(); nq];
    let mut y = vec![Complex64::default(); nq];
    for jb in 0..np {
        // pre-twist g columns against this b once per (b, d) pair below
        for jd in 0..np {
            for ia in 0..nq {
                x[ia] = fcol[jb][ia] * Complex64::from_polar(1.0, -0.5 * k * kappa[ia] * nu[jd]);
            }
            for ic in 0..nq {
                y[ic] = gcol[jd][ic] * Complex64::from_polar(1.0, 0.5 * k * nu[jb] * kappa[ic]);
            }
            fourier::fft_in_place(&mut x, false);
            fourier::fft_in_place(&mut y, false);
            for (xa, ya) in x.iter_mut().zip(y.iter()) {
                *xa *= ya;
            }
            fourier::fft_in_place(&mut x, true);
            let jv = (jb + jd) % np;
            let scale = 1.0 / nq as f64;
            for iu in 0..nq {
                out_modes[iu * np + jv] += x[iu] * scale;
            }
        }
    }
    let values = fourier::fft2_inverse(&out_modes, nq, np);
    Ok(ComplexField { grid, values })
}

/// Exact half-shift route for commensurate `k` on square grids:
/// `(f*g)(q,p) = sum_{b,d} e^{i(nu_b+nu_d)p} F_b(q - d dq/2) G_d(q + b dq/2)`
/// with the shifted factors read off a doubled lattice.
fn moyal_half_shift(f: &PhaseField, g: &PhaseField) -> Result<ComplexField> {
    let grid = *f.grid();
    let n = grid.n_q;
    let f_fine = half_grid_rows(f);
    let g_fine = half_grid_rows(g);

    let mut out_mixed = vec![Complex64::default(); n * n]; // [i][v]
    for (jb, fb) in f_fine.iter().enumerate() {
        let sb = signed_mode(jb, n);
        for (jd, gd) in g_fine.iter().enumerate() {
            let sd = signed_mode(jd, n);
            let jv = (jb + jd) % n;
            for i in 0..n {
                let fa = fb[(2 * i as i64 - sd).rem_euclid(2 * n as i64) as usize];
                let ga = gd[(2 * i as i64 + sb).rem_euclid(2 * n as i64) as usize];
                out_mixed[i * n + jv] += fa * ga;
            }
        }
    }
    // inverse partial transform over the p-mode index
    let mut values = out_mixed;
    for row in values.chunks_mut(n) {
        fourier::fft_in_place(row, true);
    }
    Ok(ComplexField { grid, values })
}

/// For each p-mode `b`, the partial wave `F_b` evaluated on the doubled
/// q-lattice.
fn half_grid_rows(f: &PhaseField) -> Vec<Vec<Complex64>> {
    let grid = *f.grid();
    let n = grid.n_q;
    // mixed[i][b]: forward transform over p only
    let mut mixed = fourier::to_complex(f.values());
    for row in mixed.chunks_mut(n) {
        fourier::fft_in_place(row, false);
    }
    let np_scale = 1.0 / n as f64;
    let mut rows = vec![vec![Complex64::default(); 2 * n]; n];
    let mut colbuf = vec![Complex64::default(); n];
    for b in 0..n {
        for i in 0..n {
            colbuf[i] = mixed[i * n + b] * np_scale;
        }
        fourier::fft_in_place(&mut colbuf, false);
        let modes: Vec<Complex64> = colbuf.iter().map(|v| v / n as f64).collect();
        let mut fine = fourier::zero_pad_double(&modes);
        fourier::fft_in_place(&mut fine, true);
        rows[b] = fine;
    }
    rows
}

/// Sine bracket `(2/k) f sin(k Lambda / 2) H`, the commutator part of the
/// star algebra: equals `(moyal(H, f, k) - moyal(f, H, k)) / (i k)` and tends
/// to `poisson_bracket(f, H)` as `k -> 0`.
pub fn sine_bracket(f: &PhaseField, h: &PhaseField, k: f64) -> Result<PhaseField> {
    if k <= 0.0 {
        return Err(Error::NonPositiveScale(k));
    }
    let m = moyal_product(f, h, k)?;
    let values = m.values.iter().map(|v| -2.0 / k * v.im).collect();
    PhaseField::from_values(m.grid, values, FieldKind::Generic)
}

/// `df/dp dH/dq - df/dq dH/dp` by spectral differentiation.
pub fn poisson_bracket(f: &PhaseField, h: &PhaseField) -> Result<PhaseField> {
    check_same_grid(f, h)?;
    let f_q = spectral_derivative(f, Axis::Q);
    let f_p = spectral_derivative(f, Axis::P);
    let h_q = spectral_derivative(h, Axis::Q);
    let h_p = spectral_derivative(h, Axis::P);
    let mut out = f_p.mul_pointwise(&h_q)?;
    let other = f_q.mul_pointwise(&h_p)?;
    out.axpy(-1.0, &other)?;
    Ok(out)
}

#[derive(Clone, Copy)]
pub enum Axis {
    Q,
    P,
}

/// Spectral partial derivative; the unmatched Nyquist mode is dropped, the
/// standard convention for real fields.
pub fn spectral_derivative(f: &PhaseField, axis: Axis) -> PhaseField {
    let grid = *f.grid();
    let (nq, np) = (grid.n_q, grid.n_p);
    let mut modes = f.modes();
    for i in 0..nq {
        for j in 0..np {
            let w = match axis {
                Axis::Q => {
                    let m = signed_mode(i, nq);
                    if m == -(nq as i64) / 2 {
                        0.0
                    } else {
                        grid.kappa(m)
                    }
                }
                Axis::P => {
                    let m = signed_mode(j, np);
                    if m == -(np as i64) / 2 {
                        0.0
                    } else {
                        grid.nu(m)
                    }
                }
            };
            modes[i * np + j] *= Complex64::new(0.0, w);
        }
    }
    let back = fourier::fft2_inverse(&modes, nq, np);
    PhaseField::from_values(grid, fourier::real_part(&back), FieldKind::Generic)
        .expect("finite derivative")
}

/// Kernel-weighted star product `sum_i w_i moyal(f, g, k_i)`; non-associative
/// whenever the kernel has more than one distinct scale.
pub fn hybrid_moyal_product(f: &PhaseField, g: &PhaseField, kernel: &Kernel) -> Result<ComplexField> {
    check_same_grid(f, g)?;
    let mut acc: Option<ComplexField> = None;
    for c in kernel.components() {
        let term = moyal_product(f, g, c.k)?;
        match &mut acc {
            None => {
                let mut t = term;
                for v in &mut t.values {
                    *v *= c.w;
                }
                acc = Some(t);
            }
            Some(a) => a.add_scaled(c.w, &term)?,
        }
    }
    Ok(acc.expect("kernel is nonempty"))
}

/// Hybrid product of complex intermediates, for chaining associativity checks.
pub fn hybrid_moyal_product_c(
    f: &ComplexField,
    g: &ComplexField,
    kernel: &Kernel,
) -> Result<ComplexField> {
    // split into real and imaginary parts; the product is bilinear
    let fr = f.real_lossy();
    let fi = PhaseField::from_values(
        f.grid,
        f.values.iter().map(|v| v.im).collect(),
        FieldKind::Generic,
    )?;
    let gr = g.real_lossy();
    let gi = PhaseField::from_values(
        g.grid,
        g.values.iter().map(|v| v.im).collect(),
        FieldKind::Generic,
    )?;
    let rr = hybrid_moyal_product(&fr, &gr, kernel)?;
    let ri = hybrid_moyal_product(&fr, &gi, kernel)?;
    let ir = hybrid_moyal_product(&fi, &gr, kernel)?;
    let ii = hybrid_moyal_product(&fi, &gi, kernel)?;
    let i = Complex64::i();
    let values = (0..rr.values.len())
        .map(|n| rr.values[n] + i * ri.values[n] + i * ir.values[n] - ii.values[n])
        .collect();
    Ok(ComplexField { grid: f.grid, values })
}

/// Operator in the discrete position basis, tied to the scale `k` of the
/// Weyl transform that produced it.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    dim: usize,
    scale: f64,
    /// row-major `dim x dim`
    entries: Vec<Complex64>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim + c]
    }

    pub fn identity(dim: usize, scale: f64) -> Self {
        let mut entries = vec![Complex64::default(); dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = Complex64::new(1.0, 0.0);
        }
        OperatorMatrix { dim, scale, entries }
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut entries = vec![Complex64::default(); n * n];
        for r in 0..n {
            for inner in 0..n {
                let a = self.entries[r * n + inner];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[inner * n + c];
                }
            }
        }
        OperatorMatrix { dim: n, scale: self.scale, entries }
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> OperatorMatrix {
        let ab = self.matmul(other);
        let ba = other.matmul(self);
        let entries = ab
            .entries
            .iter()
            .zip(ba.entries.iter())
            .map(|(x, y)| x - y)
            .collect();
        OperatorMatrix { dim: self.dim, scale: self.scale, entries }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|r| self.at(r, r)).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max((self.at(r, c) - self.at(c, r).conj()).norm());
            }
        }
        worst
    }
}

fn require_commensurate(grid: &PhaseGrid, k: f64) -> Result<()> {
    if grid.n_q != grid.n_p {
        return Err(Error::NonSquareGrid { n_q: grid.n_q, n_p: grid.n_p });
    }
    if !grid.is_commensurate(k) {
        return Err(Error::Incommensurate { k, admissible: grid.commensurate_scale() });
    }
    Ok(())
}

/// Discrete Weyl transform: plane-wave mode `(m, n)` maps to the phase-point
/// operator `exp(i pi m n / N) D_m S^n` with `D_m = diag(e^{i kappa_m q})`
/// and `S` the one-step cyclic shift. Requires `n_q dq dp = 2 pi k`.
pub fn weyl_transform(f: &PhaseField, k: f64) -> Result<OperatorMatrix> {
    let grid = *f.grid();
    require_commensurate(&grid, k)?;
    let n = grid.n_q;
    let modes = f.modes();
    let mut entries = vec![Complex64::default(); n * n];
    for r in 0..n {
        for c in 0..n {
            let nbin = (c + n - r) % n; // S^n sends column r to r+n
            let sn = signed_mode(nbin, n) as f64;
            let mut sum = Complex64::default();
            for mbin in 0..n {
                let sm = signed_mode(mbin, n) as f64;
                let theta = 2.0 * PI * sm * r as f64 / n as f64 + PI * sm * sn / n as f64;
                sum += modes[mbin * n + nbin] * Complex64::from_polar(1.0, theta);
            }
            entries[r * n + c] = sum;
        }
    }
    Ok(OperatorMatrix { dim: n, scale: k, entries })
}

/// Inverse of [`weyl_transform`]; Hermitian input gives a real field (the
/// imaginary residue is checked and discarded).
pub fn wigner_transform(op: &OperatorMatrix, grid: &PhaseGrid) -> Result<PhaseField> {
    wigner_transform_tol(op, grid, 1e-10)
}

pub fn wigner_transform_tol(op: &OperatorMatrix, grid: &PhaseGrid, tol: f64) -> Result<PhaseField> {
    require_commensurate(grid, op.scale)?;
    let n = grid.n_q;
    if op.dim != n {
        return Err(Error::BadLength { got: op.dim, want: n });
    }
    let mut modes = vec![Complex64::default(); n * n];
    for mbin in 0..n {
        let sm = signed_mode(mbin, n) as f64;
        for nbin in 0..n {
            let sn = signed_mode(nbin, n) as f64;
            let mut sum = Complex64::default();
            for r in 0..n {
                let c = (r + nbin) % n;
                let theta = -(2.0 * PI * sm * r as f64 / n as f64 + PI * sm * sn / n as f64);
                sum += op.at(r, c) * Complex64::from_polar(1.0, theta);
            }
            modes[mbin * n + nbin] = sum / n as f64;
        }
    }
    let values = fourier::fft2_inverse(&modes, n, n);
    ComplexField { grid: *grid, values }.into_real(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::kernels::KernelComponent;
    use crate::states::{build_state, StateSpec};

    // 64-point square grid commensurate with k = 8 pi / 64
    fn commensurate_setup() -> (PhaseGrid, f64) {
        let grid = PhaseGrid::square(64, 4.0 * PI).unwrap();
        let k = grid.commensurate_scale();
        (grid, k)
    }

    fn gaussian(grid: PhaseGrid, q0: f64, p0: f64) -> PhaseField {
        build_state(&StateSpec::Gaussian { q0, p0, hbar: 1.0 }, grid).unwrap()
    }

    #[test]
    fn commensurate_scale_value() {
        let (grid, k) = commensurate_setup();
        assert!((k - PI / 8.0).abs() < 1e-14);
        assert!(grid.is_commensurate(k));
        assert!(!grid.is_commensurate(k * 1.01));
    }

    #[test]
    fn unit_is_identity_of_the_algebra() {
        let (grid, k) = commensurate_setup();
        let f = gaussian(grid, 0.3, -0.2);
        let one = PhaseField::constant(grid, 1.0, FieldKind::Generic);
        let left = moyal_product(&one, &f, k).unwrap().into_real(1e-11).unwrap();
        let right = moyal_product(&f, &one, k).unwrap().into_real(1e-11).unwrap();
        assert!(left.sub(&f).unwrap().max_abs() < 1e-11);
        assert!(right.sub(&f).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn fft_routes_match_reference() {
        let (grid, k) = commensurate_setup();
        let f = gaussian(grid, 0.5, 0.0);
        let g = gaussian(grid, -0.3, 0.4);
        // commensurate: half-shift route
        let fast = moyal_product(&f, &g, k).unwrap();
        let reference = moyal_product_reference(&f, &g, k).unwrap();
        let err = fast.sub(&reference).unwrap().max_abs();
        assert!(err < 1e-10, "half-shift vs reference: {err}");
        // non-commensurate: mode-convolution route
        let k2 = 0.7 * k;
        let conv = moyal_product(&f, &g, k2).unwrap();
        let reference2 = moyal_product_reference(&f, &g, k2).unwrap();
        let err2 = conv.sub(&reference2).unwrap().max_abs();
        assert!(err2 < 1e-10, "mode-convolution vs reference: {err2}");
    }

    #[test]
    fn ground_state_idempotent_under_star() {
        // W0 * W0 = W0 / h for k = hbar
        let grid = PhaseGrid::square(64, 8.0).unwrap();
        let k = grid.commensurate_scale();
        let w0 = build_state(&StateSpec::Gaussian { q0: 0.0, p0: 0.0, hbar: k }, grid).unwrap();
        let prod = moyal_product(&w0, &w0, k).unwrap().into_real(1e-9).unwrap();
        let expect = w0.scaled(1.0 / (2.0 * PI * k));
        assert!(prod.sub(&expect).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn canonical_commutator_on_states() {
        // [q, p]_star = i k, probed against a localized state; the taper
        // region is several star-product jump lengths away
        let grid = PhaseGrid::square(96, 16.0).unwrap();
        let k = grid.commensurate_scale();
        let single = Kernel::quantum(k).unwrap();
        let qf = crate::hamiltonians::windowed_coordinate(
            grid,
            crate::hamiltonians::CoordinateAxis::Q,
            4.0,
            7.8,
        )
        .unwrap();
        let pf = crate::hamiltonians::windowed_coordinate(
            grid,
            crate::hamiltonians::CoordinateAxis::P,
            4.0,
            7.8,
        )
        .unwrap();
        let f = build_state(&StateSpec::Gaussian { q0: 0.0, p0: 0.0, hbar: k }, grid).unwrap();
        let pf_f = hybrid_moyal_product(&pf, &f, &single).unwrap();
        let qf_f = hybrid_moyal_product(&qf, &f, &single).unwrap();
        let q_pf =
            hybrid_moyal_product_c(&ComplexField::from_real(&qf), &pf_f, &single).unwrap();
        let p_qf =
            hybrid_moyal_product_c(&ComplexField::from_real(&pf), &qf_f, &single).unwrap();
        let mut worst = 0.0f64;
        for (n, v) in q_pf.values().iter().enumerate() {
            let expect = Complex64::new(0.0, k) * f.values()[n];
            worst = worst.max((v - p_qf.values()[n] - expect).norm());
        }
        assert!(worst < 1e-8, "commutator-on-state residual {worst}");

        // matrix oracle: [Q, P] applied to the state operator equals ik
        let oq = weyl_transform(&qf, k).unwrap();
        let op = weyl_transform(&pf, k).unwrap();
        let of = weyl_transform(&f, k).unwrap();
        let comm = oq.commutator(&op);
        let lhs = comm.matmul(&of);
        let mut worst_m = 0.0f64;
        for (a, b) in lhs.entries().iter().zip(of.entries().iter()) {
            worst_m = worst_m.max((a - Complex64::new(0.0, k) * b).norm());
        }
        assert!(worst_m < 1e-8, "matrix-oracle commutator residual {worst_m}");
    }

    #[test]
    fn weyl_of_constant_is_identity() {
        let (grid, k) = commensurate_setup();
        let one = PhaseField::constant(grid, 1.0, FieldKind::Generic);
        let op = weyl_transform(&one, k).unwrap();
        for r in 0..op.dim() {
            for c in 0..op.dim() {
                let expect = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::default() };
                assert!((op.at(r, c) - expect).norm() < 1e-12);
            }
        }
        let back = wigner_transform(&OperatorMatrix::identity(grid.n_q, k), &grid).unwrap();
        assert!(back.sub(&one).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn weyl_wigner_round_trip() {
        let (grid, k) = commensurate_setup();
        let f = gaussian(grid, 0.4, -0.7);
        let op = weyl_transform(&f, k).unwrap();
        assert!(op.hermiticity_residual() < 1e-10, "hermiticity {}", op.hermiticity_residual());
        let back = wigner_transform(&op, &grid).unwrap();
        assert!(back.sub(&f).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn ground_state_maps_to_projector() {
        let grid = PhaseGrid::square(64, 8.0).unwrap();
        let k = grid.commensurate_scale();
        let h = 2.0 * PI * k;
        let w0 = build_state(&StateSpec::Gaussian { q0: 0.0, p0: 0.0, hbar: k }, grid).unwrap();
        let rho = weyl_transform(&w0.scaled(h), k).unwrap();
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        assert!(rho.hermiticity_residual() < 1e-8);
        // idempotence pins the spectrum to {0, 1}; with unit trace that is a
        // rank-1 projector
        let rho2 = rho.matmul(&rho);
        let mut worst = 0.0f64;
        for (a, b) in rho.entries().iter().zip(rho2.entries().iter()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-6, "projector residual {worst}");
    }

    #[test]
    fn operator_product_matches_star_product() {
        let (grid, k) = commensurate_setup();
        let f = gaussian(grid, 0.5, 0.2);
        let g = gaussian(grid, -0.4, -0.1);
        let star = moyal_product(&f, &g, k).unwrap();
        let opf = weyl_transform(&f, k).unwrap();
        let opg = weyl_transform(&g, k).unwrap();
        let prod = opf.matmul(&opg);
        // complex field: compare via two real transforms of the Hermitian and
        // anti-Hermitian parts
        let n = grid.n_q;
        let mut herm = vec![Complex64::default(); n * n];
        let mut anti = vec![Complex64::default(); n * n];
        for r in 0..n {
            for c in 0..n {
                let x = prod.at(r, c);
                let y = prod.at(c, r).conj();
                herm[r * n + c] = 0.5 * (x + y);
                anti[r * n + c] = Complex64::new(0.0, -0.5) * (x - y);
            }
        }
        let herm_f = wigner_transform(
            &OperatorMatrix { dim: n, scale: k, entries: herm },
            &grid,
        )
        .unwrap();
        let anti_f = wigner_transform(
            &OperatorMatrix { dim: n, scale: k, entries: anti },
            &grid,
        )
        .unwrap();
        let mut worst = 0.0f64;
        for i in 0..n * n {
            let oracle = Complex64::new(herm_f.values()[i], anti_f.values()[i]);
            worst = worst.max((oracle - star.values()[i]).norm());
        }
        assert!(worst < 1e-8, "oracle equivalence residual {worst}");
    }

    #[test]
    fn trace_correspondence() {
        let (grid, k) = commensurate_setup();
        let f = gaussian(grid, 0.5, 0.2);
        let g = gaussian(grid, -0.4, -0.1);
        let star = moyal_product(&f, &g, k).unwrap();
        let plain = f.mul_pointwise(&g).unwrap().integrate();
        let st = star.integrate();
        assert!((st.re - plain).abs() < 1e-12);
        assert!(st.im.abs() < 1e-12);
    }

    #[test]
    fn sine_bracket_identities() {
        let (grid, k) = commensurate_setup();
        let f = gaussian(grid, 0.5, 0.0);
        let h = PhaseField::from_fn(grid, FieldKind::Generic, |q, p| q.cos() + 0.5 * p.sin())
            .unwrap();
        let sb = sine_bracket(&f, &h, k).unwrap();
        // antisymmetry
        let sb_rev = sine_bracket(&h, &f, k).unwrap();
        assert!(sb.add(&sb_rev).unwrap().max_abs() < 1e-12);
        // probability conservation
        assert!(sb.integrate().abs() < 1e-12);
        // commutator identity (2/k) f sin(k L/2) H = (moyal(H,f) - moyal(f,H)) / (i k)
        let hf = moyal_product(&h, &f, k).unwrap();
        let fh = moyal_product(&f, &h, k).unwrap();
        let diff = hf.sub(&fh).unwrap();
        let div_ik: Vec<Complex64> =
            diff.values().iter().map(|v| v / Complex64::new(0.0, k)).collect();
        let mut worst = 0.0f64;
        for (a, b) in div_ik.iter().zip(sb.values().iter()) {
            worst = worst.max((a - Complex64::new(*b, 0.0)).norm());
        }
        assert!(worst < 1e-12, "commutator route residual {worst}");
        // constants are central
        let c = PhaseField::constant(grid, 3.25, FieldKind::Generic);
        assert!(sine_bracket(&f, &c, k).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn sine_bracket_matches_matrix_commutator() {
        let (grid, k) = commensurate_setup();
        let f = gaussian(grid, 0.5, -0.3);
        let h = PhaseField::from_fn(grid, FieldKind::Generic, |q, _| q.cos()).unwrap();
        let sb = sine_bracket(&f, &h, k).unwrap();
        let opf = weyl_transform(&f, k).unwrap();
        let oph = weyl_transform(&h, k).unwrap();
        // (2/k) f sin(kL/2) H <-> [H, f] / (i k)
        let comm = oph.commutator(&opf);
        let scaled = OperatorMatrix {
            dim: comm.dim,
            scale: comm.scale,
            entries: comm
                .entries
                .iter()
                .map(|v| v / Complex64::new(0.0, k))
                .collect(),
        };
        let oracle = wigner_transform(&scaled, &grid).unwrap();
        let err = sb.sub(&oracle).unwrap().max_abs();
        assert!(err < 1e-8, "matrix oracle residual {err}");
    }

    #[test]
    fn quadratic_hamiltonian_reduces_to_poisson() {
        // all higher Lambda powers vanish where H is exactly quadratic; the
        // taper keeps the periodic extension smooth
        let grid = PhaseGrid::square(128, 16.0).unwrap();
        let k = grid.commensurate_scale();
        let f = gaussian(grid, 0.8, 0.0);
        let h = crate::hamiltonians::windowed_harmonic(grid, 1.0, 4.0, 7.8).unwrap();
        let sb = sine_bracket(&f, &h, k).unwrap();
        let pb = poisson_bracket(&f, &h).unwrap();
        let n = grid.n_q;
        // compare a couple of star-product jump lengths away from the taper
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if grid.q(i).hypot(grid.p(j)) < 2.5 {
                    worst = worst.max((sb.at(i, j) - pb.at(i, j)).abs());
                }
            }
        }
        assert!(worst < 1e-7, "sine vs poisson on quadratic: {worst}");
    }

    #[test]
    fn poisson_bracket_basics() {
        let grid = PhaseGrid::square(64, 4.0 * PI).unwrap();
        let h = PhaseField::from_fn(grid, FieldKind::Generic, |q, p| q.cos() + p.sin()).unwrap();
        // antisymmetry: {H, H} = 0
        assert!(poisson_bracket(&h, &h).unwrap().max_abs() < 1e-12);
        // free streaming: H = p^2/2 (trig stand-in differentiates exactly)
        let f = gaussian(grid, 0.5, -0.2);
        let kin = PhaseField::from_fn(grid, FieldKind::Generic, |_, p| (0.5 * p).sin()).unwrap();
        let pb = poisson_bracket(&f, &kin).unwrap();
        let fq = spectral_derivative(&f, Axis::Q);
        let expect = PhaseField::from_fn(grid, FieldKind::Generic, |_, p| {
            -0.5 * (0.5 * p).cos()
        })
        .unwrap()
        .mul_pointwise(&fq)
        .unwrap();
        assert!(pb.sub(&expect).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn sine_bracket_limits_to_poisson_at_second_order() {
        let grid = PhaseGrid::square(64, 4.0 * PI).unwrap();
        let f = gaussian(grid, 0.5, 0.0);
        let h = PhaseField::from_fn(grid, FieldKind::Generic, |q, p| q.cos() + p.cos()).unwrap();
        let pb = poisson_bracket(&f, &h).unwrap();
        let norm = pb.l2_norm();
        let resid = |eps: f64| {
            let sb = sine_bracket(&f, &h, eps).unwrap();
            sb.sub(&pb).unwrap().l2_norm() / norm
        };
        let (r20, r10, r05) = (resid(0.2), resid(0.1), resid(0.05));
        let p1 = (r20 / r10).log2();
        let p2 = (r10 / r05).log2();
        assert!((p1 - 2.0).abs() < 0.3, "order {p1}");
        assert!((p2 - 2.0).abs() < 0.3, "order {p2}");
    }

    #[test]
    fn hybrid_product_unit_scaling_and_associativity() {
        let grid = PhaseGrid::square(48, 12.0).unwrap();
        let f = build_state(&StateSpec::Gaussian { q0: 0.0, p0: 0.0, hbar: 0.5 }, grid).unwrap();
        let g = build_state(&StateSpec::Gaussian { q0: 0.8, p0: 0.0, hbar: 0.5 }, grid).unwrap();
        let h = build_state(&StateSpec::Gaussian { q0: 0.0, p0: 0.8, hbar: 0.5 }, grid).unwrap();
        let one = PhaseField::constant(grid, 1.0, FieldKind::Generic);

        let single = Kernel::quantum(1.0).unwrap();
        let double = Kernel::new(vec![
            KernelComponent { w: 1.0, k: 1.0 },
            KernelComponent { w: 1.0, k: 2.0 },
        ])
        .unwrap();

        // unit scaling: f *_H 1 = (sum w) f
        let scaled = hybrid_moyal_product(&f, &one, &double).unwrap();
        let expect = f.scaled(2.0);
        assert!(scaled.real_lossy().sub(&expect).unwrap().max_abs() < 1e-10);
        assert!(scaled.max_imag() < 1e-10);

        // single component: associative
        let lhs = hybrid_moyal_product_c(&hybrid_moyal_product(&f, &g, &single).unwrap(),
            &ComplexField { grid, values: fourier::to_complex(h.values()) }, &single).unwrap();
        let rhs = hybrid_moyal_product_c(
            &ComplexField { grid, values: fourier::to_complex(f.values()) },
            &hybrid_moyal_product(&g, &h, &single).unwrap(),
            &single,
        )
        .unwrap();
        let assoc_single = lhs.sub(&rhs).unwrap().max_abs();
        assert!(assoc_single < 1e-10, "single-scale associator {assoc_single}");

        // two components: associator is macroscopic
        let lhs2 = hybrid_moyal_product_c(
            &hybrid_moyal_product(&f, &g, &double).unwrap(),
            &ComplexField::from_real(&h),
            &double,
        )
        .unwrap();
        let rhs2 = hybrid_moyal_product_c(
            &ComplexField::from_real(&f),
            &hybrid_moyal_product(&g, &h, &double).unwrap(),
            &double,
        )
        .unwrap();
        let assoc_double = lhs2.sub(&rhs2).unwrap().max_abs();
        assert!(assoc_double > 1e-3, "two-scale associator {assoc_double}");
    }
}
