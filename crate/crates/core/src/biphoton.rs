//! Two-photon amplitude ψ(τ) = (L/2π)∫κ(ω)Φ(ω)e^{−iωτ}dω and what is
//! measured from it: G2(τ) = |ψ(τ)|², pair rate, coincidence histograms.
//!
//! τ = t_as − t_s. The global phase e^{−i(ω_c+ω_p)t_s} is dropped.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexSpectrum, OmegaGrid, TauGrid, TauOffset, Waveform};
use crate::medium::{characteristic_scales, DriveParams, MediumParams, Response, SPEED_OF_LIGHT};
use crate::phasematch::{detuning_function, lossless_form, pole_form, DetuningFunction, PhiVariant};

const MIN_SAMPLES: usize = 1 << 14;

impl Response {
    /// κ(ω) = −i(√(ϖ_as ϖ_s)/2c)·χ3(ω), field amplitudes inside `dipole_scale`.
    pub fn kappa(&self, omega: f64) -> Result<Complex64> {
        let d = &self.drive;
        let pre = (d.omega_as_central * d.omega_s_central).sqrt() / (2.0 * SPEED_OF_LIGHT);
        Ok(Complex64::new(0.0, -pre) * self.chi3(omega)?)
    }
}

pub fn kappa(omega: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    Response::new(m, d)?.kappa(omega)
}

pub fn kappa_spectrum(grid: &OmegaGrid, m: &MediumParams, d: &DriveParams) -> Result<ComplexSpectrum> {
    let r = Response::new(m, d)?;
    ComplexSpectrum::from_fn(*grid, d.omega_as_central, |w| r.kappa(w))
}

/// Explicit grid choices; anything left `None` follows the automatic policy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOverrides {
    pub samples: Option<usize>,
    /// Full ω span (rad/s).
    pub span: Option<f64>,
}

/// Picks a symmetric ω grid for a scenario.
///
/// The span starts at max(40γe, 8|Ωe|, 64π/τg) and grows until |κΦ| at the
/// edges is below half the 1e-6 edge gate. The spacing resolves a τ window of
/// ±(2τg + max(5τe, 8/Γ)), Γ being the slowest amplitude decay rate present.
pub fn choose_grid(
    m: &MediumParams,
    d: &DriveParams,
    variant: PhiVariant,
    overrides: &GridOverrides,
) -> Result<OmegaGrid> {
    let r = Response::new(m, d)?;
    let s = characteristic_scales(m, d)?;
    let rabi = if s.rabi_is_real { s.omega_e } else { s.beta_e };
    let (tau_g, alpha_l) = match variant {
        PhiVariant::Unity => (0.0, 0.0),
        _ => {
            if !s.tau_g.is_finite() {
                return Err(Error::NonPhysicalParams {
                    name: "omega_c",
                    value: d.omega_c,
                    reason: "phase matching without a coupling field; use the unity variant",
                });
            }
            (s.tau_g, s.alpha * m.length)
        }
    };

    // |Φ| envelope used to size the span
    let envelope = |w: f64| -> f64 {
        match variant {
            PhiVariant::Exact | PhiVariant::Unity => 1.0,
            PhiVariant::Lossy | PhiVariant::Lossless => {
                let bound = 2.0 / (w.abs() * tau_g);
                bound.min(1.0)
            }
            PhiVariant::Pole => pole_form(w, tau_g, alpha_l).norm() * alpha_l,
        }
    };
    let weight = |w: f64| -> Result<f64> { Ok(r.kappa(w)?.norm() * envelope(w)) };

    let mut base = (40.0 * s.gamma_e).max(8.0 * rabi);
    if tau_g > 0.0 {
        base = base.max(64.0 * PI / tau_g);
    }
    let probe = rabi + 4.0 * s.gamma_e;
    let mut peak = 0.0f64;
    for k in 0..=2000 {
        let w = -probe + 2.0 * probe * k as f64 / 2000.0;
        peak = peak.max(weight(w)?);
    }
    let mut half = base / 2.0;
    while weight(half)?.max(weight(-half)?) > 0.5e-6 * peak {
        half *= 1.05;
    }
    let span = overrides.span.unwrap_or(2.0 * half);

    let len = match overrides.samples {
        Some(n) => n,
        None => {
            let mut slow = s.gamma_e;
            if !s.rabi_is_real {
                slow = s.gamma_e - s.beta_e / 2.0;
            }
            if variant == PhiVariant::Pole {
                slow = slow.min(alpha_l / tau_g);
            }
            let window = 2.0 * tau_g + (5.0 * s.tau_e).max(8.0 / slow);
            let step_max = PI / window;
            ((span / step_max).ceil() as usize)
                .next_power_of_two()
                .max(MIN_SAMPLES)
        }
    };
    OmegaGrid::centered(len, span / len as f64)
}

/// Gates and layout for ω → τ transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformOptions {
    /// Max allowed |F(edge)| / max|F|.
    pub edge_tolerance: f64,
    /// Max allowed energy fraction within 3 samples of either τ boundary.
    pub alias_tolerance: f64,
    pub tau_offset: TauOffset,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            edge_tolerance: 1e-6,
            alias_tolerance: 1e-4,
            tau_offset: TauOffset::HalfSample,
        }
    }
}

impl TransformOptions {
    /// No gates; for kernels such as Φ̃ that are not expected to decay.
    pub fn ungated(tau_offset: TauOffset) -> Self {
        TransformOptions {
            edge_tolerance: f64::INFINITY,
            alias_tolerance: f64::INFINITY,
            tau_offset,
        }
    }
}

fn check_edges(spec: &ComplexSpectrum, tol: f64) -> Result<()> {
    if tol.is_infinite() {
        return Ok(());
    }
    let peak = spec.max_norm();
    if peak == 0.0 {
        return Ok(());
    }
    let n = spec.values.len();
    let edge = spec.values[0].norm().max(spec.values[n - 1].norm());
    let ratio = edge / peak;
    if ratio > tol {
        return Err(Error::GridTooNarrow { ratio, limit: tol });
    }
    Ok(())
}

fn check_aliasing(values: &[Complex64], tol: f64) -> Result<()> {
    if tol.is_infinite() {
        return Ok(());
    }
    let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(());
    }
    let n = values.len();
    let rim: f64 = values[..3]
        .iter()
        .chain(&values[n - 3..])
        .map(|v| v.norm_sqr())
        .sum();
    let fraction = rim / total;
    if fraction > tol {
        return Err(Error::AliasingDetected {
            fraction,
            limit: tol,
        });
    }
    Ok(())
}

/// f(τ) = (1/2π)∫F(ω)e^{−iωτ}dω on the τ grid implied by the ω grid.
pub fn time_domain(spec: &ComplexSpectrum, opts: &TransformOptions) -> Result<Waveform> {
    check_edges(spec, opts.edge_tolerance)?;
    let grid = spec.grid;
    let n = grid.len;
    let half = (n / 2) as f64;
    let s = opts.tau_offset.fraction();
    // ω_jτ_m = (2π/N)(j − N/2)(m − N/2 + s); with N/2 even the cross term
    // splits into e^{−2πijm/N}(−1)^{j+m} and a per-j twist for s
    let mut buf: Vec<Complex64> = spec
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let twist = -2.0 * PI * s * (j as f64 - half) / n as f64;
            v * Complex64::from_polar(sign, twist)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = grid.step / (2.0 * PI);
    for (m, v) in buf.iter_mut().enumerate() {
        let sign = if m % 2 == 0 { scale } else { -scale };
        *v *= sign;
    }
    check_aliasing(&buf, opts.alias_tolerance)?;
    Waveform::new(TauGrid::for_omega(&grid, opts.tau_offset), buf)
}

/// ψ(τ) from the κΦ spectrum via FFT.
pub fn psi_from_spectrum(
    spec: &ComplexSpectrum,
    length: f64,
    opts: &TransformOptions,
) -> Result<Waveform> {
    Ok(time_domain(spec, opts)?.scaled(Complex64::new(length, 0.0)))
}

/// ψ at a single delay by direct summation of the spectral integral.
pub fn psi_at(spec: &ComplexSpectrum, length: f64, tau: f64) -> Complex64 {
    let g = spec.grid;
    let sum: Complex64 = spec
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * Complex64::from_polar(1.0, -g.omega(j) * tau))
        .sum();
    sum * (length * g.step / (2.0 * PI))
}

/// ψ = L·(κ̃ ∗ Φ̃) by direct circular convolution.
///
/// The output sample m sits at start_κ + start_Φ + mΔτ; it is rotated onto
/// the grid that starts near −NΔτ/2 (the implied functions are NΔτ-periodic).
pub fn psi_by_convolution(kappa_t: &Waveform, phi_t: &Waveform, length: f64) -> Result<Waveform> {
    let (a, b) = (&kappa_t.grid, &phi_t.grid);
    if a.len != b.len || (a.step - b.step).abs() > 1e-12 * a.step {
        return Err(Error::GridMismatch(format!(
            "kernel grids differ: {} x {:e} vs {} x {:e}",
            a.len, a.step, b.len, b.step
        )));
    }
    let n = a.len;
    let ka = &kappa_t.values;
    let pb = &phi_t.values;
    let scale = length * a.step;
    let raw: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            // a[(m − k) mod n]·b[k], split to avoid the modulo in the loop
            for k in 0..=m {
                acc += ka[m - k] * pb[k];
            }
            for k in m + 1..n {
                acc += ka[n + m - k] * pb[k];
            }
            acc * scale
        })
        .collect();
    let shift = n / 2;
    let values: Vec<Complex64> = (0..n).map(|m| raw[(m + shift) % n]).collect();
    let grid = TauGrid {
        start: a.start + b.start + shift as f64 * a.step,
        step: a.step,
        len: n,
    };
    Waveform::new(grid, values)
}

/// G2(τ) = |ψ(τ)|².
pub fn g2(w: &Waveform) -> Vec<f64> {
    w.g2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRate {
    /// (L²/2π)∫|κΦ|²dω
    pub spectral: f64,
    /// ∫|ψ|²dτ
    pub temporal: f64,
}

impl PairRate {
    pub fn relative_discrepancy(&self) -> f64 {
        let r = self.temporal.abs().max(self.spectral.abs());
        if r == 0.0 {
            0.0
        } else {
            (self.temporal - self.spectral).abs() / r
        }
    }
}

pub fn pair_rate_spectral(spec: &ComplexSpectrum, length: f64) -> f64 {
    let s: f64 = spec.values.iter().map(|v| v.norm_sqr()).sum();
    length * length * s * spec.grid.step / (2.0 * PI)
}

pub fn pair_rate_temporal(w: &Waveform) -> f64 {
    w.norm()
}

pub fn pair_rate(spec: &ComplexSpectrum, waveform: &Waveform, length: f64) -> PairRate {
    PairRate {
        spectral: pair_rate_spectral(spec, length),
        temporal: pair_rate_temporal(waveform),
    }
}

/// ∫ of the piecewise-linear interpolant of samples on a uniform grid,
/// zero outside the grid.
struct LinearIntegral<'a, T> {
    grid: TauGrid,
    values: &'a [T],
    cumulative: Vec<T>,
}

impl<'a, T> LinearIntegral<'a, T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    fn new(grid: TauGrid, values: &'a [T]) -> Self {
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = T::default();
        cumulative.push(acc);
        for w in values.windows(2) {
            acc = acc + (w[0] + w[1]) * (0.5 * grid.step);
            cumulative.push(acc);
        }
        LinearIntegral {
            grid,
            values,
            cumulative,
        }
    }

    /// ∫ from the first sample to x.
    fn upto(&self, x: f64) -> T {
        let g = &self.grid;
        if x <= g.start {
            return T::default();
        }
        let pos = (x - g.start) / g.step;
        let n = self.values.len();
        if pos >= (n - 1) as f64 {
            return self.cumulative[n - 1];
        }
        let i = pos.floor() as usize;
        let h = x - g.tau(i);
        let slope = (self.values[i + 1] - self.values[i]) * (1.0 / g.step);
        self.cumulative[i] + self.values[i] * h + slope * (0.5 * h * h)
    }

    fn between(&self, a: f64, b: f64) -> T {
        self.upto(b) - self.upto(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HistogramWarning {
    /// Bin wider than a tenth of the coherence time; R_cc no longer tracks G2·t_c.
    BinTooWide { bin_width: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bin_width: f64,
    pub start: f64,
    pub end: f64,
    /// Constant added to every bin (accidental coincidences).
    pub floor: f64,
    /// τe, for the bin-width warning.
    pub coherence_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    pub bin_edges: Vec<f64>,
    pub counts_rate: Vec<f64>,
    pub bin_width: f64,
    pub warnings: Vec<HistogramWarning>,
}

impl CoincidenceHistogram {
    pub fn total(&self) -> f64 {
        self.counts_rate.iter().sum()
    }
}

/// R_cc(τ) = ∫G2(τ′)Π(τ′; τ, τ + t_c)dτ′ over consecutive bins.
pub fn coincidence_histogram(w: &Waveform, spec: &HistogramSpec) -> Result<CoincidenceHistogram> {
    let tc = spec.bin_width;
    if !(tc > 0.0 && tc.is_finite()) {
        return Err(Error::InvalidArgument(format!("bin width {tc} must be > 0")));
    }
    if !(spec.end > spec.start) {
        return Err(Error::InvalidArgument(format!(
            "histogram range [{}, {}] is empty",
            spec.start, spec.end
        )));
    }
    let mut warnings = Vec::new();
    if let Some(te) = spec.coherence_time {
        if tc > te / 10.0 {
            warnings.push(HistogramWarning::BinTooWide {
                bin_width: tc,
                limit: te / 10.0,
            });
        }
    }
    let g = w.g2();
    let integral = LinearIntegral::new(w.grid, &g);
    let bins = (((spec.end - spec.start) / tc) - 1e-9).ceil().max(1.0) as usize;
    let bin_edges: Vec<f64> = (0..=bins).map(|k| spec.start + k as f64 * tc).collect();
    let counts_rate = bin_edges
        .windows(2)
        .map(|e| (integral.between(e[0], e[1]) + spec.floor).max(0.0))
        .collect();
    Ok(CoincidenceHistogram {
        bin_edges,
        counts_rate,
        bin_width: tc,
        warnings,
    })
}

/// Counter-propagating degenerate pairs: ψ ∝ [κ̃(τ) + κ̃(−τ)] ∗ Π(τ; −τg, τg),
/// normalized to unit peak |ψ|.
///
/// Needs a τ grid symmetric about 0. Half the samples are computed and
/// mirrored, so the result is even by construction.
pub fn interference_bidirectional(kappa_t: &Waveform, tau_g: f64) -> Result<Waveform> {
    let g = kappa_t.grid;
    let n = g.len;
    if (g.start + g.end()).abs() > 1e-9 * g.step {
        return Err(Error::GridMismatch(
            "bidirectional interference needs a tau grid symmetric about 0".into(),
        ));
    }
    if !(tau_g >= 0.0 && tau_g.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau_g = {tau_g} must be >= 0")));
    }
    let sym: Vec<Complex64> = (0..n)
        .map(|m| kappa_t.values[m] + kappa_t.values[n - 1 - m])
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if tau_g == 0.0 {
        out.copy_from_slice(&sym);
    } else {
        let integral = LinearIntegral::new(g, &sym);
        for m in n / 2..n {
            let t = g.tau(m);
            out[m] = integral.between(t - tau_g, t + tau_g);
        }
        for m in 0..n / 2 {
            out[m] = out[n - 1 - m];
        }
    }
    let peak = out.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        for v in &mut out {
            *v /= peak;
        }
    }
    Waveform::new(g, out)
}

/// Extent of the region where G2 ≥ `fraction`·max G2 (first to last sample).
pub fn correlation_width(w: &Waveform, fraction: f64) -> f64 {
    let g = w.g2();
    let peak = g.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let above: Vec<usize> = (0..g.len()).filter(|&m| g[m] >= fraction * peak).collect();
    match (above.first(), above.last()) {
        (Some(&a), Some(&b)) => w.grid.tau(b) - w.grid.tau(a),
        _ => 0.0,
    }
}

/// One configured pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub medium: MediumParams,
    pub drive: DriveParams,
    pub variant: PhiVariant,
    pub conjugate_stokes: bool,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: OmegaGrid,
    pub kappa: ComplexSpectrum,
    pub phi: DetuningFunction,
    /// κΦ
    pub spectrum: ComplexSpectrum,
    pub waveform: Waveform,
    pub rate: PairRate,
}

impl Scenario {
    pub fn grid(&self, overrides: &GridOverrides) -> Result<OmegaGrid> {
        choose_grid(&self.medium, &self.drive, self.variant, overrides)
    }

    pub fn simulate(&self, overrides: &GridOverrides, opts: &TransformOptions) -> Result<Simulation> {
        let grid = self.grid(overrides)?;
        self.simulate_on(&grid, opts)
    }

    pub fn simulate_on(&self, grid: &OmegaGrid, opts: &TransformOptions) -> Result<Simulation> {
        let (m, d) = (&self.medium, &self.drive);
        let kappa = kappa_spectrum(grid, m, d)?;
        let phi = detuning_function(grid, m, d, self.variant, self.conjugate_stokes)?;
        let spectrum = kappa.product(&phi.values)?;
        let waveform = psi_from_spectrum(&spectrum, m.length, opts)?;
        let rate = pair_rate(&spectrum, &waveform, m.length);
        Ok(Simulation {
            grid: *grid,
            kappa,
            phi,
            spectrum,
            waveform,
            rate,
        })
    }
}

impl Simulation {
    /// ψ rebuilt as L·(κ̃ ∗ Φ̃): κ̃ on the half-sample grid, Φ̃ on the
    /// integer grid, so the result lands on the half-sample grid.
    pub fn psi_via_convolution(&self, length: f64) -> Result<Waveform> {
        let kt = time_domain(&self.kappa, &TransformOptions::ungated(TauOffset::HalfSample))?;
        let pt = time_domain(&self.phi.values, &TransformOptions::ungated(TauOffset::Integer))?;
        psi_by_convolution(&kt, &pt, length)
    }
}

/// κ0·Φ_lossless(ω) on a grid: the ideal group-delay spectrum with the
/// nonlinear coupling held flat.
pub fn constant_kappa_lossless(grid: &OmegaGrid, kappa0: Complex64, tau_g: f64, center: f64) -> ComplexSpectrum {
    ComplexSpectrum {
        grid: *grid,
        values: grid.iter().map(|w| kappa0 * lossless_form(w, tau_g)).collect(),
        center_freq: center,
    }
}
