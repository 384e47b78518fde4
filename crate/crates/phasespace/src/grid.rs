//! Periodic phase-space grids, quadrature, the inner product and field
//! utilities.
//!
//! A [`PhaseGrid`] discretizes a rectangle `[q_min, q_max) x [p_min, p_max)`
//! with periodic wraparound, so plain Riemann sums are spectrally accurate
//! for smooth fields and the discrete Fourier machinery is exact.

use crate::error::{Error, Result};
use crate::fourier;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Discretized periodic rectangle in `(q, p)`.
///
/// Point counts must be even so the half-grid shifts used by the Weyl
/// transform land on the refined lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub n_q: usize,
    pub n_p: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl PhaseGrid {
    pub fn new(n_q: usize, n_p: usize, q_min: f64, q_max: f64, p_min: f64, p_max: f64) -> Result<Self> {
        if n_q == 0 || n_p == 0 || n_q % 2 != 0 || n_p % 2 != 0 {
            return Err(Error::BadGridShape { n_q, n_p });
        }
        if !(q_max > q_min) || !q_min.is_finite() || !q_max.is_finite() {
            return Err(Error::BadGridExtent { min: q_min, max: q_max });
        }
        if !(p_max > p_min) || !p_min.is_finite() || !p_max.is_finite() {
            return Err(Error::BadGridExtent { min: p_min, max: p_max });
        }
        Ok(PhaseGrid { n_q, n_p, q_min, q_max, p_min, p_max })
    }

    /// Square grid centered on the origin with side length `extent`.
    pub fn square(n: usize, extent: f64) -> Result<Self> {
        let h = extent / 2.0;
        PhaseGrid::new(n, n, -h, h, -h, h)
    }

    #[inline]
    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / self.n_q as f64
    }

    #[inline]
    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.n_p as f64
    }

    /// Quadrature weight of one cell.
    #[inline]
    pub fn cell(&self) -> f64 {
        self.dq() * self.dp()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_q * self.n_p
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    #[inline]
    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    #[inline]
    pub fn idx(&self, i_q: usize, i_p: usize) -> usize {
        i_q * self.n_p + i_p
    }

    /// Angular wavenumber of signed q-mode `m`.
    #[inline]
    pub fn kappa(&self, m: i64) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 / (self.q_max - self.q_min)
    }

    /// Angular wavenumber of signed p-mode `n`.
    #[inline]
    pub fn nu(&self, n: i64) -> f64 {
        2.0 * std::f64::consts::PI * n as f64 / (self.p_max - self.p_min)
    }

    /// The scale for which `n_q * dq * dp = 2*pi*k`, the value admissible for
    /// the exact discrete operator correspondence on this grid.
    pub fn commensurate_scale(&self) -> f64 {
        self.n_q as f64 * self.dq() * self.dp() / (2.0 * std::f64::consts::PI)
    }

    pub fn is_commensurate(&self, k: f64) -> bool {
        let adm = self.commensurate_scale();
        (k - adm).abs() <= 1e-12 * adm.max(1.0)
    }

    fn same_shape(&self, other: &PhaseGrid) -> bool {
        self.n_q == other.n_q
            && self.n_p == other.n_p
            && (self.q_min - other.q_min).abs() < 1e-12
            && (self.q_max - other.q_max).abs() < 1e-12
            && (self.p_min - other.p_min).abs() < 1e-12
            && (self.p_max - other.p_max).abs() < 1e-12
    }
}

/// What a field represents; only affects validation and bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    State,
    EffectDensity,
    Hamiltonian,
    Generic,
}

/// Real sample array over a [`PhaseGrid`], indexed `[i_q][i_p]` row-major.
///
/// States are quasi-probabilities: normalized to unit integral but allowed
/// to be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    grid: PhaseGrid,
    values: Vec<f64>,
    kind: FieldKind,
}

/// How far a state's Riemann sum may sit from 1.
pub const STATE_NORM_TOL: f64 = 1e-6;

impl PhaseField {
    /// Wraps a sample array, rejecting non-finite entries (and, for states,
    /// integrals away from 1).
    pub fn from_values(grid: PhaseGrid, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::BadLength { got: values.len(), want: grid.len() });
        }
        for (idx, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { i_q: idx / grid.n_p, i_p: idx % grid.n_p, value: v });
            }
        }
        let field = PhaseField { grid, values, kind };
        if kind == FieldKind::State {
            let norm = field.integrate();
            if (norm - 1.0).abs() > STATE_NORM_TOL {
                return Err(Error::Config(format!(
                    "state integral is {norm}, expected 1 within {STATE_NORM_TOL:e}"
                )));
            }
        }
        Ok(field)
    }

    /// Samples `f(q, p)` on the grid.
    pub fn from_fn(grid: PhaseGrid, kind: FieldKind, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_q {
            for j in 0..grid.n_p {
                values.push(f(grid.q(i), grid.p(j)));
            }
        }
        PhaseField::from_values(grid, values, kind)
    }

    pub fn constant(grid: PhaseGrid, value: f64, kind: FieldKind) -> Self {
        PhaseField { grid, values: vec![value; grid.len()], kind }
    }

    pub fn zeros(grid: PhaseGrid) -> Self {
        PhaseField::constant(grid, 0.0, FieldKind::Generic)
    }

    #[inline]
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    #[inline]
    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i_q: usize, i_p: usize) -> f64 {
        self.values[self.grid.idx(i_q, i_p)]
    }

    pub fn with_kind(mut self, kind: FieldKind) -> Self {
        self.kind = kind;
        self
    }

    /// Periodic Riemann sum `sum(f) * dq * dp`.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell()
    }

    /// Largest absolute sample.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `integral(|f|^2)^(1/2)` under the grid quadrature.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell()).sqrt()
    }

    pub fn scaled(&self, c: f64) -> PhaseField {
        PhaseField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
            kind: FieldKind::Generic,
        }
    }

    pub fn add(&self, other: &PhaseField) -> Result<PhaseField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PhaseField) -> Result<PhaseField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul_pointwise(&self, other: &PhaseField) -> Result<PhaseField> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with(&self, other: &PhaseField, f: impl Fn(f64, f64) -> f64) -> Result<PhaseField> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(PhaseField { grid: self.grid, values, kind: FieldKind::Generic })
    }

    pub fn axpy(&mut self, c: f64, other: &PhaseField) -> Result<()> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.values.iter_mut().zip(other.values.iter()) {
            *a += c * b;
        }
        Ok(())
    }

    /// Normalize in place so the integral is exactly 1 and tag as a state.
    pub fn into_state(mut self) -> Result<PhaseField> {
        let norm = self.integrate();
        if norm.abs() < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        for v in &mut self.values {
            *v /= norm;
        }
        self.kind = FieldKind::State;
        Ok(self)
    }

    /// Forward 2D mode coefficients (plane-wave amplitudes).
    pub fn modes(&self) -> Vec<Complex64> {
        fourier::fft2_forward(&fourier::to_complex(&self.values), self.grid.n_q, self.grid.n_p)
    }

    /// Swap the q and p axes of a square field.
    pub fn transpose(&self) -> Result<PhaseField> {
        if self.grid.n_q != self.grid.n_p {
            return Err(Error::NonSquareGrid { n_q: self.grid.n_q, n_p: self.grid.n_p });
        }
        let n = self.grid.n_q;
        let mut values = vec![0.0; self.values.len()];
        for i in 0..n {
            for j in 0..n {
                values[j * n + i] = self.values[i * n + j];
            }
        }
        let grid = PhaseGrid {
            n_q: self.grid.n_p,
            n_p: self.grid.n_q,
            q_min: self.grid.p_min,
            q_max: self.grid.p_max,
            p_min: self.grid.q_min,
            p_max: self.grid.q_max,
        };
        Ok(PhaseField { grid, values, kind: self.kind })
    }

    /// Reflect `p -> -p` (exact index permutation on the periodic grid).
    pub fn reflect_p(&self) -> PhaseField {
        let (n_q, n_p) = (self.grid.n_q, self.grid.n_p);
        let mut values = vec![0.0; self.values.len()];
        for i in 0..n_q {
            for j in 0..n_p {
                // p_j = p_min + j dp maps to -p_j = p_min + ((n_p - j) mod n_p) dp
                // on a symmetric grid
                let jr = (n_p - j) % n_p;
                values[self.grid.idx(i, jr)] = self.values[self.grid.idx(i, j)];
            }
        }
        PhaseField { grid: self.grid, values, kind: self.kind }
    }

    /// Clockwise quarter turn about the origin of a centered square grid:
    /// `out(q, p) = f(-p, q)`, an exact index permutation. This is the
    /// quarter-period map of the harmonic flow `qdot = 2p, pdot = -2q`.
    pub fn rotate90(&self) -> Result<PhaseField> {
        let n = self.grid.n_q;
        if self.grid.n_p != n {
            return Err(Error::NonSquareGrid { n_q: self.grid.n_q, n_p: self.grid.n_p });
        }
        if (self.grid.q_min + self.grid.q_max).abs() > 1e-12
            || (self.grid.p_min + self.grid.p_max).abs() > 1e-12
            || (self.grid.q_min - self.grid.p_min).abs() > 1e-12
        {
            return Err(Error::Config("rotation needs a centered square grid".into()));
        }
        let mut values = vec![0.0; self.values.len()];
        for i in 0..n {
            for j in 0..n {
                // out(q_i, p_j) = f(-p_j, q_i); -p_j sits at index (n - j) mod n
                let src_i = (n - j) % n;
                let src_j = i;
                values[self.grid.idx(i, j)] = self.values[self.grid.idx(src_i, src_j)];
            }
        }
        Ok(PhaseField { grid: self.grid, values, kind: self.kind })
    }
}

/// `integral(f1 * f2) dq dp`, the unique translation/switch/time-reversal
/// invariant bilinear pairing of two fields. No prefactor: the Born-rule
/// factor `h` is applied by the measurement layer.
pub fn inner_product(f1: &PhaseField, f2: &PhaseField) -> Result<f64> {
    if !f1.grid.same_shape(&f2.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(f1
        .values
        .iter()
        .zip(f2.values.iter())
        .map(|(&a, &b)| a * b)
        .sum::<f64>()
        * f1.grid.cell())
}

/// `(T f)(q, p) = f(q + a, p + b)` with periodic wraparound.
///
/// Grid-commensurate shifts are exact index rolls; anything else goes through
/// the Fourier interpolant, which is spectrally accurate for smooth fields.
pub fn translate(f: &PhaseField, a: f64, b: f64) -> PhaseField {
    let grid = f.grid;
    let sa = a / grid.dq();
    let sb = b / grid.dp();
    let ia = sa.round();
    let ib = sb.round();
    if (sa - ia).abs() < 1e-12 && (sb - ib).abs() < 1e-12 {
        return roll(f, ia as i64, ib as i64);
    }
    let mut modes = f.modes();
    for i in 0..grid.n_q {
        let km = grid.kappa(fourier::signed_mode(i, grid.n_q));
        for j in 0..grid.n_p
        {
            let nn = grid.nu(fourier::signed_mode(j, grid.n_p));
            let phase = Complex64::from_polar(1.0, km * a + nn * b);
            modes[grid.idx(i, j)] *= phase;
        }
    }
    let back = fourier::fft2_inverse(&modes, grid.n_q, grid.n_p);
    PhaseField { grid, values: fourier::real_part(&back), kind: f.kind }
}

fn roll(f: &PhaseField, shift_q: i64, shift_p: i64) -> PhaseField {
    let grid = f.grid;
    let mut values = vec![0.0; f.values.len()];
    for i in 0..grid.n_q {
        let si = (i as i64 + shift_q).rem_euclid(grid.n_q as i64) as usize;
        for j in 0..grid.n_p {
            let sj = (j as i64 + shift_p).rem_euclid(grid.n_p as i64) as usize;
            values[grid.idx(i, j)] = f.values[grid.idx(si, sj)];
        }
    }
    PhaseField { grid, values, kind: f.kind }
}

fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the field as CSV: a `# grid ...` header then `i_q,i_p,value` rows
/// with 17 significant digits, enough to round-trip every f64 exactly.
pub fn write_csv<W: Write>(f: &PhaseField, mut out: W) -> Result<()> {
    let g = f.grid;
    writeln!(
        out,
        "# grid {} {} {} {} {} {}",
        g.n_q,
        g.n_p,
        fmt_g17(g.q_min),
        fmt_g17(g.q_max),
        fmt_g17(g.p_min),
        fmt_g17(g.p_max)
    )?;
    for i in 0..g.n_q {
        for j in 0..g.n_p {
            writeln!(out, "{},{},{}", i, j, fmt_g17(f.values[g.idx(i, j)]))?;
        }
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(reader: R, kind: FieldKind) -> Result<PhaseField> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty field file".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 8 || parts[0] != "#" || parts[1] != "grid" {
        return Err(Error::Parse(format!("bad field header: {header}")));
    }
    let n_q: usize = parts[2].parse().map_err(|e| Error::Parse(format!("n_q: {e}")))?;
    let n_p: usize = parts[3].parse().map_err(|e| Error::Parse(format!("n_p: {e}")))?;
    let nums: Vec<f64> = parts[4..8]
        .iter()
        .map(|s| s.parse().map_err(|e| Error::Parse(format!("grid bound: {e}"))))
        .collect::<Result<_>>()?;
    let grid = PhaseGrid::new(n_q, n_p, nums[0], nums[1], nums[2], nums[3])?;
    let mut values = vec![f64::NAN; grid.len()];
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("bad field row: {line}")));
        }
        let i: usize = cols[0].trim().parse().map_err(|e| Error::Parse(format!("i_q: {e}")))?;
        let j: usize = cols[1].trim().parse().map_err(|e| Error::Parse(format!("i_p: {e}")))?;
        let v: f64 = cols[2].trim().parse().map_err(|e| Error::Parse(format!("value: {e}")))?;
        if i >= n_q || j >= n_p {
            return Err(Error::Parse(format!("index ({i}, {j}) outside {n_q}x{n_p}")));
        }
        values[grid.idx(i, j)] = v;
    }
    PhaseField::from_values(grid, values, kind)
}
