//! Time-derivative generators, the explicit jump-kernel form of the equation
//! of motion, its symmetry checks, and fixed-step RK4 integration with
//! conservation monitors.
//!
//! The Hamiltonian-driven generator is
//!
//! `df/dt = 4 pi / (V_p kbar2) * sum_i w_i k_i^2 * (k_i/2) sine_bracket(f, H, k_i)`
//!
//! over the kernel components with `k_i > 0`. A classical component `(w, 0)`
//! contributes `w * poisson_bracket(f, H)` directly — the analytic limit in
//! which the kernel `delta(k)` reproduces the Liouville equation exactly.

use crate::error::{Error, Result};
use crate::fourier::{self, mode_bin, signed_mode};
use crate::grid::{inner_product, FieldKind, PhaseField, PhaseGrid};
use crate::kernels::Kernel;
use crate::transforms::{poisson_bracket, sine_bracket};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Right-hand side `df/dt` for a state `f` under Hamiltonian field `h`,
/// dynamics kernel `kernel` and pure-state volume `v_p`.
pub fn generator_from_hamiltonian(
    f: &PhaseField,
    h: &PhaseField,
    kernel: &Kernel,
    v_p: f64,
) -> Result<PhaseField> {
    if v_p <= 0.0 {
        return Err(Error::NonPositiveScale(v_p));
    }
    let k2 = kernel.k2_moment();
    let mut out = PhaseField::zeros(*f.grid());
    for c in kernel.quantum_components() {
        let factor = 4.0 * PI / (v_p * k2) * c.w * c.k * c.k * (c.k / 2.0);
        out.axpy(factor, &sine_bracket(f, h, c.k)?)?;
    }
    let wc = kernel.classical_weight();
    if wc > 0.0 {
        out.axpy(wc, &poisson_bracket(f, h)?)?;
    }
    Ok(out)
}

/// Right-hand side driven directly by pure stationary states `g_i` with rate
/// parameters `rate_i`:
///
/// `df/dt = sum_i rate_i * pi^2 * sum_j w_j k_j^2 (k_j/2) sine_bracket(f, g_i, k_j)`
///
/// plus `rate_i * (pi V_p kbar2 / 4) * w_cl * poisson_bracket(f, g_i)` for
/// classical kernel weight. Equals [`generator_from_hamiltonian`] when the
/// Hamiltonian is reconstructed from the same spectrum with
/// `E_i = pi * rate_i * V_p * kbar2 / (4 V_i)`.
pub fn generator_from_stationary(
    f: &PhaseField,
    entries: &[(&PhaseField, f64)],
    kernel: &Kernel,
    v_p: f64,
) -> Result<PhaseField> {
    if entries.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    for (_, rate) in entries {
        if !rate.is_finite() {
            return Err(Error::Config(format!("non-finite rate parameter {rate}")));
        }
    }
    let k2 = kernel.k2_moment();
    let wc = kernel.classical_weight();
    let mut out = PhaseField::zeros(*f.grid());
    for (g, rate) in entries {
        if *rate == 0.0 {
            continue;
        }
        for c in kernel.quantum_components() {
            let factor = rate * PI * PI * c.w * c.k * c.k * (c.k / 2.0);
            out.axpy(factor, &sine_bracket(f, g, c.k)?)?;
        }
        if wc > 0.0 {
            out.axpy(rate * PI * v_p * k2 / 4.0 * wc, &poisson_bracket(f, g)?)?;
        }
    }
    Ok(out)
}

/// Largest grid (points per axis) for which the dense jump kernel is built.
pub const DENSE_JUMP_MAX: usize = 32;

/// The non-localized generator `J(q, p, l, j)` stored densely over the full
/// displacement lattice.
#[derive(Debug, Clone)]
pub struct JumpKernel {
    grid: PhaseGrid,
    scale: f64,
    /// `[(i_q * n_p + i_p) * n_q + i_l] * n_p + i_j`, row-major
    values: Vec<f64>,
}

impl JumpKernel {
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn at(&self, i_q: usize, i_p: usize, i_l: usize, i_j: usize) -> f64 {
        let g = &self.grid;
        self.values[((i_q * g.n_p + i_p) * g.n_q + i_l) * g.n_p + i_j]
    }

    #[inline]
    fn set(&mut self, i_q: usize, i_p: usize, i_l: usize, i_j: usize, v: f64) {
        let g = self.grid;
        self.values[((i_q * g.n_p + i_p) * g.n_q + i_l) * g.n_p + i_j] = v;
    }
}

/// Significant modes of `h` with an aliasing guard: every mode carrying more
/// than `1e-12` of the peak magnitude must sit inside the half band.
fn significant_modes(h: &PhaseField) -> Result<Vec<(i64, i64, Complex64)>> {
    let grid = *h.grid();
    let modes = h.modes();
    let peak = modes.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let threshold = 1e-12 * peak.max(f64::MIN_POSITIVE);
    let half_q = grid.n_q as i64 / 4;
    let half_p = grid.n_p as i64 / 4;
    let mut out = Vec::new();
    for i in 0..grid.n_q {
        let m = signed_mode(i, grid.n_q);
        for j in 0..grid.n_p {
            let n = signed_mode(j, grid.n_p);
            let c = modes[i * grid.n_p + j];
            if c.norm() <= threshold {
                continue;
            }
            if m.abs() > half_q || n.abs() > half_p {
                return Err(Error::Aliased { m, n, half_band: half_q.min(half_p) });
            }
            out.push((m, n, c));
        }
    }
    Ok(out)
}

/// Displacement comb for one Hamiltonian mode: the band-limited realization
/// of the paired delta ridges, with the Nyquist row split symmetrically so
/// the comb is exactly odd under displacement negation.
fn displacement_comb(grid: &PhaseGrid, k: f64, m: i64, n: i64) -> Vec<Complex64> {
    let (nq, np) = (grid.n_q, grid.n_p);
    let kap_m = grid.kappa(m);
    let nu_n = grid.nu(n);
    let l_q = grid.q_max - grid.q_min;
    let l_p = grid.p_max - grid.p_min;
    let mut bins = vec![Complex64::default(); nq * np];
    for ia in 0..nq {
        let a_set: &[(f64, f64)] = if ia == nq / 2 {
            &[(0.5, -0.5), (0.5, 0.5)]
        } else {
            &[(1.0, 0.0)]
        };
        let base_a = if ia == nq / 2 { 0.0 } else { signed_mode(ia, nq) as f64 };
        for ib in 0..np {
            let b_set: &[(f64, f64)] = if ib == np / 2 {
                &[(0.5, -0.5), (0.5, 0.5)]
            } else {
                &[(1.0, 0.0)]
            };
            let base_b = if ib == np / 2 { 0.0 } else { signed_mode(ib, np) as f64 };
            let mut coeff = 0.0;
            for (wa, da) in a_set {
                let kap_a = 2.0 * PI * (base_a + da * nq as f64) / l_q;
                for (wb, db) in b_set {
                    let nu_b = 2.0 * PI * (base_b + db * np as f64) / l_p;
                    coeff += wa * wb * (2.0 / k) * (0.5 * k * (kap_a * nu_n - nu_b * kap_m)).sin();
                }
            }
            bins[ia * np + ib] = Complex64::new(coeff, 0.0);
        }
    }
    // comb(l, j) = sum_ab coeff * exp(-i (kappa_a l + nu_b j)): unnormalized
    // forward transform of the coefficient array
    let fwd = fourier::fft2_forward(&bins, nq, np);
    fwd.iter().map(|v| v * (nq * np) as f64).collect()
}

/// Builds the dense jump kernel realizing `sine_bracket(., h, k)` as
/// `df/dt(q,p) = sum_{l,j} f(q+l, p+j) J(q,p,l,j) dq dp`.
pub fn build_jump_kernel(h: &PhaseField, k: f64) -> Result<JumpKernel> {
    if k <= 0.0 {
        return Err(Error::NonPositiveScale(k));
    }
    let grid = *h.grid();
    if grid.n_q > DENSE_JUMP_MAX || grid.n_p > DENSE_JUMP_MAX {
        return Err(Error::JumpKernelTooLarge {
            got: grid.n_q.max(grid.n_p),
            max: DENSE_JUMP_MAX,
        });
    }
    let modes = significant_modes(h)?;
    let (nq, np) = (grid.n_q, grid.n_p);
    let area = (grid.q_max - grid.q_min) * (grid.p_max - grid.p_min);
    let mut acc = vec![Complex64::default(); nq * np * nq * np];
    for (m, n, c) in modes {
        let comb = displacement_comb(&grid, k, m, n);
        for iq in 0..nq {
            for ip in 0..np {
                let phase = Complex64::from_polar(
                    1.0,
                    2.0 * PI * (m as f64 * iq as f64 / nq as f64 + n as f64 * ip as f64 / np as f64),
                );
                let w = c * phase / area;
                let base = (iq * np + ip) * nq * np;
                for (d, cv) in comb.iter().enumerate() {
                    acc[base + d] += w * cv;
                }
            }
        }
    }
    let mut kernel = JumpKernel { grid, scale: k, values: vec![0.0; acc.len()] };
    for (slot, v) in kernel.values.iter_mut().zip(acc.iter()) {
        *slot = v.re;
    }
    Ok(kernel)
}

/// `df/dt(q,p) = sum_{l,j} f(q+l, p+j) J(q,p,l,j) dq dp`.
pub fn apply_jump_kernel(f: &PhaseField, j: &JumpKernel) -> Result<PhaseField> {
    if f.grid() != &j.grid {
        return Err(Error::GridMismatch);
    }
    let g = j.grid;
    let (nq, np) = (g.n_q, g.n_p);
    let cell = g.cell();
    let mut out = vec![0.0; nq * np];
    for iq in 0..nq {
        for ip in 0..np {
            let base = (iq * np + ip) * nq * np;
            let mut acc = 0.0;
            for il in 0..nq {
                let src_q = (iq + il) % nq;
                for ij in 0..np {
                    let src_p = (ip + ij) % np;
                    acc += f.values()[src_q * np + src_p] * j.values[base + il * np + ij];
                }
            }
            out[iq * np + ip] = acc * cell;
        }
    }
    PhaseField::from_values(g, out, FieldKind::Generic)
}

/// Residuals of the two structural symmetries of a jump kernel.
#[derive(Debug, Clone, Copy)]
pub struct JumpSymmetryReport {
    /// max `|J(q,p,l,j) + J(q,p,-l,-j)|`
    pub antisymmetry: f64,
    /// max `|J(q,p,l,j) + J(q+2l, p+2j, -l, -j)|`
    pub conservation_pairing: f64,
}

pub fn verify_j_symmetries(j: &JumpKernel) -> JumpSymmetryReport {
    let g = j.grid;
    let (nq, np) = (g.n_q, g.n_p);
    let mut anti = 0.0f64;
    let mut pairing = 0.0f64;
    for iq in 0..nq {
        for ip in 0..np {
            for il in 0..nq {
                let neg_l = (nq - il) % nq;
                for ij in 0..np {
                    let neg_j = (np - ij) % np;
                    let v = j.at(iq, ip, il, ij);
                    anti = anti.max((v + j.at(iq, ip, neg_l, neg_j)).abs());
                    let q2 = (iq + 2 * il) % nq;
                    let p2 = (ip + 2 * ij) % np;
                    pairing = pairing.max((v + j.at(q2, p2, neg_l, neg_j)).abs());
                }
            }
        }
    }
    JumpSymmetryReport { antisymmetry: anti, conservation_pairing: pairing }
}

/// Flips one entry in place; detector sanity-checking only.
pub fn corrupt_jump_entry(j: &mut JumpKernel, amount: f64) {
    let v = j.at(1, 2, 3, 1);
    j.set(1, 2, 3, 1, v + amount);
}

/// Jump kernel for band-limited Hamiltonians in factored form: one half-grid
/// displacement per Hamiltonian mode. Requires a square grid commensurate
/// with `k` so the jumps land on the doubled lattice.
#[derive(Debug, Clone)]
pub struct SparseJumpKernel {
    grid: PhaseGrid,
    scale: f64,
    /// (half-steps in q, half-steps in p, complex coefficient field)
    terms: Vec<(i64, i64, Vec<Complex64>)>,
}

impl SparseJumpKernel {
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Displacements in physical units, one per Hamiltonian mode.
    pub fn displacements(&self) -> Vec<(f64, f64)> {
        self.terms
            .iter()
            .map(|(hl, hj, _)| {
                (*hl as f64 * self.grid.dq() / 2.0, *hj as f64 * self.grid.dp() / 2.0)
            })
            .collect()
    }
}

pub fn build_jump_kernel_sparse(h: &PhaseField, k: f64) -> Result<SparseJumpKernel> {
    let grid = *h.grid();
    if grid.n_q != grid.n_p {
        return Err(Error::NonSquareGrid { n_q: grid.n_q, n_p: grid.n_p });
    }
    if !grid.is_commensurate(k) {
        return Err(Error::Incommensurate { k, admissible: grid.commensurate_scale() });
    }
    let modes = significant_modes(h)?;
    let (nq, np) = (grid.n_q, grid.n_p);
    let mut terms = Vec::new();
    for (m, n, c) in modes {
        if m == 0 && n == 0 {
            continue; // constant offset, zero displacement, no contribution
        }
        // jump displacement (l, j) = (-k nu_n / 2, +k kappa_m / 2)
        // = (-n, +m) in half-grid steps on a commensurate square grid
        let mut coeff = vec![Complex64::default(); nq * np];
        for iq in 0..nq {
            for ip in 0..np {
                let phase = Complex64::from_polar(
                    1.0,
                    2.0 * PI * (m as f64 * iq as f64 / nq as f64 + n as f64 * ip as f64 / np as f64),
                );
                coeff[iq * np + ip] = Complex64::new(0.0, 1.0 / k) * c * phase;
            }
        }
        terms.push((-n, m, coeff));
    }
    Ok(SparseJumpKernel { grid, scale: k, terms })
}

pub fn apply_jump_kernel_sparse(f: &PhaseField, j: &SparseJumpKernel) -> Result<PhaseField> {
    if f.grid() != &j.grid {
        return Err(Error::GridMismatch);
    }
    let g = j.grid;
    let (nq, np) = (g.n_q, g.n_p);
    let fine = upsample_double(f);
    let (fq, fp) = (2 * nq as i64, 2 * np as i64);
    let mut out = vec![Complex64::default(); nq * np];
    for (hl, hj, coeff) in &j.terms {
        for iq in 0..nq {
            let plus_q = (2 * iq as i64 + hl).rem_euclid(fq) as usize;
            let minus_q = (2 * iq as i64 - hl).rem_euclid(fq) as usize;
            for ip in 0..np {
                let plus_p = (2 * ip as i64 + hj).rem_euclid(fp) as usize;
                let minus_p = (2 * ip as i64 - hj).rem_euclid(fp) as usize;
                let diff = fine[plus_q * 2 * np + plus_p] - fine[minus_q * 2 * np + minus_p];
                out[iq * np + ip] += coeff[iq * np + ip] * diff;
            }
        }
    }
    let values = out.iter().map(|v| v.re).collect();
    PhaseField::from_values(g, values, FieldKind::Generic)
}

/// Spectral upsampling of a real field onto the doubled lattice.
fn upsample_double(f: &PhaseField) -> Vec<Complex64> {
    let g = *f.grid();
    let (nq, np) = (g.n_q, g.n_p);
    let modes = fourier::fft2_forward(&fourier::to_complex(f.values()), nq, np);
    let mut padded = vec![Complex64::default(); 4 * nq * np];
    for i in 0..nq {
        let m = signed_mode(i, nq);
        let (mi, mw): (&[i64], &[f64]) = if m == -(nq as i64) / 2 {
            (&[-(nq as i64) / 2, nq as i64 / 2], &[0.5, 0.5])
        } else {
            (std::slice::from_ref(&m), &[1.0])
        };
        for j in 0..np {
            let n = signed_mode(j, np);
            let (ni, nw): (&[i64], &[f64]) = if n == -(np as i64) / 2 {
                (&[-(np as i64) / 2, np as i64 / 2], &[0.5, 0.5])
            } else {
                (std::slice::from_ref(&n), &[1.0])
            };
            let c = modes[i * np + j];
            for (mm, wm) in mi.iter().zip(mw.iter()) {
                for (nn, wn) in ni.iter().zip(nw.iter()) {
                    padded[mode_bin(*mm, 2 * nq) * 2 * np + mode_bin(*nn, 2 * np)] +=
                        c * wm * wn;
                }
            }
        }
    }
    fourier::fft2_inverse(&padded, 2 * nq, 2 * np)
}

/// One classical Runge-Kutta step of `df/dt = gen(f)`.
pub fn step_rk4(
    f: &PhaseField,
    gen: &dyn Fn(&PhaseField) -> Result<PhaseField>,
    dt: f64,
) -> Result<PhaseField> {
    let k1 = gen(f)?;
    let mut f2 = f.clone();
    f2.axpy(dt / 2.0, &k1)?;
    let k2 = gen(&f2)?;
    let mut f3 = f.clone();
    f3.axpy(dt / 2.0, &k2)?;
    let k3 = gen(&f3)?;
    let mut f4 = f.clone();
    f4.axpy(dt, &k3)?;
    let k4 = gen(&f4)?;
    let mut out = f.clone();
    out.axpy(dt / 6.0, &k1)?;
    out.axpy(dt / 3.0, &k2)?;
    out.axpy(dt / 3.0, &k3)?;
    out.axpy(dt / 6.0, &k4)?;
    Ok(out)
}

/// Fixed-step integration plan with monitor sampling.
#[derive(Debug, Clone)]
pub struct EvolutionRun {
    pub dt: f64,
    pub steps: usize,
    /// Monitors (and snapshots, when enabled) are sampled every `stride` steps.
    pub stride: usize,
    pub keep_snapshots: bool,
    /// Stability guard: requires `dt * rate(f0) <= cfl_factor`.
    pub cfl_factor: f64,
}

impl EvolutionRun {
    pub fn new(dt: f64, steps: usize) -> Self {
        EvolutionRun { dt, steps, stride: 1, keep_snapshots: false, cfl_factor: 0.5 }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn with_snapshots(mut self) -> Self {
        self.keep_snapshots = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct MonitorSeries {
    pub name: String,
    pub samples: Vec<(f64, f64)>,
}

impl MonitorSeries {
    fn new(name: &str) -> Self {
        MonitorSeries { name: name.to_string(), samples: Vec::new() }
    }

    /// Largest deviation from the initial sample.
    pub fn drift(&self) -> f64 {
        let first = match self.samples.first() {
            Some((_, v)) => *v,
            None => return 0.0,
        };
        self.samples.iter().fold(0.0f64, |m, (_, v)| m.max((v - first).abs()))
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: PhaseField,
    pub snapshots: Vec<(f64, PhaseField)>,
    pub monitors: Vec<MonitorSeries>,
    /// Set when the run stopped early on a non-finite state; `final_state`
    /// is the last finite snapshot.
    pub aborted: Option<String>,
}

fn guard_step(
    f0: &PhaseField,
    gen: &dyn Fn(&PhaseField) -> Result<PhaseField>,
    run: &EvolutionRun,
) -> Result<()> {
    if run.dt <= 0.0 {
        return Err(Error::NonPositiveScale(run.dt));
    }
    let rate = gen(f0)?.max_abs() / f0.max_abs().max(f64::MIN_POSITIVE);
    if run.dt * rate > run.cfl_factor {
        return Err(Error::StepTooLarge { dt: run.dt, limit: run.cfl_factor / rate });
    }
    Ok(())
}

/// Evolves one state, recording norm, state volume and (if `energy_field` is
/// given) the energy expectation at every stride.
pub fn evolve(
    f0: &PhaseField,
    gen: &dyn Fn(&PhaseField) -> Result<PhaseField>,
    run: &EvolutionRun,
    energy_field: Option<&PhaseField>,
) -> Result<Trajectory> {
    guard_step(f0, gen, run)?;
    let mut monitors = vec![MonitorSeries::new("norm"), MonitorSeries::new("state-volume")];
    if energy_field.is_some() {
        monitors.push(MonitorSeries::new("energy"));
    }
    let mut snapshots = Vec::new();
    let mut state = f0.clone();
    let mut aborted = None;
    let record = |state: &PhaseField,
                  t: f64,
                  monitors: &mut Vec<MonitorSeries>,
                  snapshots: &mut Vec<(f64, PhaseField)>|
     -> Result<()> {
        monitors[0].samples.push((t, state.integrate()));
        monitors[1].samples.push((t, 1.0 / inner_product(state, state)?));
        if let Some(h) = energy_field {
            let e = inner_product(state, h)?;
            monitors[2].samples.push((t, e));
        }
        if run.keep_snapshots {
            snapshots.push((t, state.clone()));
        }
        Ok(())
    };
    record(&state, 0.0, &mut monitors, &mut snapshots)?;
    for step in 1..=run.steps {
        let next = step_rk4(&state, gen, run.dt)?;
        if !next.max_abs().is_finite() {
            aborted = Some(format!("non-finite state at step {step}"));
            break;
        }
        state = next;
        if step % run.stride == 0 || step == run.steps {
            record(&state, step as f64 * run.dt, &mut monitors, &mut snapshots)?;
        }
    }
    Ok(Trajectory { final_state: state, snapshots, monitors, aborted })
}

/// Evolves two states under the same generator, recording their mutual inner
/// product and each state's volume.
pub fn evolve_pair(
    f1: &PhaseField,
    f2: &PhaseField,
    gen: &dyn Fn(&PhaseField) -> Result<PhaseField>,
    run: &EvolutionRun,
) -> Result<(PhaseField, PhaseField, Vec<MonitorSeries>)> {
    guard_step(f1, gen, run)?;
    let mut monitors = vec![
        MonitorSeries::new("pair-inner-product"),
        MonitorSeries::new("volume-1"),
        MonitorSeries::new("volume-2"),
    ];
    let mut a = f1.clone();
    let mut b = f2.clone();
    let mut record = |a: &PhaseField, b: &PhaseField, t: f64, ms: &mut Vec<MonitorSeries>| -> Result<()> {
        ms[0].samples.push((t, inner_product(a, b)?));
        ms[1].samples.push((t, 1.0 / inner_product(a, a)?));
        ms[2].samples.push((t, 1.0 / inner_product(b, b)?));
        Ok(())
    };
    record(&a, &b, 0.0, &mut monitors)?;
    for step in 1..=run.steps {
        a = step_rk4(&a, gen, run.dt)?;
        b = step_rk4(&b, gen, run.dt)?;
        if !a.max_abs().is_finite() || !b.max_abs().is_finite() {
            return Err(Error::Blowup { step });
        }
        if step % run.stride == 0 || step == run.steps {
            record(&a, &b, step as f64 * run.dt, &mut monitors)?;
        }
    }
    Ok((a, b, monitors))
}
