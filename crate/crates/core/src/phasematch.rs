//! Longitudinal phase matching: Δk(ω) and the detuning function
//! Φ(ω) = sinc(ΔkL/2)·e^{i(k_as+k_s)L/2}.
//!
//! Wave numbers enter only through their detuning-dependent parts
//! k(ϖ+ω) − ϖ/c; the pump and coupling wave vectors are taken to cancel the
//! central terms, so Δk(0) is the medium-induced mismatch alone.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexSpectrum, OmegaGrid};
use crate::medium::{
    characteristic_scales, DriveParams, Geometry, MediumParams, Response,
};

const SINC_SERIES_RADIUS: f64 = 1e-4;
const SINC_IM_LIMIT: f64 = 700.0;

/// sin(z)/z for complex z, with a short series near the origin.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < SINC_SERIES_RADIUS {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiVariant {
    Exact,
    /// sinc(ωτg/2 + iαL/2)·e^{iωτg/2 − αL/2}
    Lossy,
    /// sinc(ωτg/2)·e^{iωτg/2}
    Lossless,
    /// i/(ωτg + iαL)
    Pole,
    /// Φ ≡ 1: no phase-matching filter (short, dilute medium).
    Unity,
}

impl std::str::FromStr for PhiVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(PhiVariant::Exact),
            "lossy" => Ok(PhiVariant::Lossy),
            "lossless" => Ok(PhiVariant::Lossless),
            "pole" => Ok(PhiVariant::Pole),
            "unity" => Ok(PhiVariant::Unity),
            other => Err(format!(
                "unknown phi variant '{other}' (expected exact, lossy, lossless, pole or unity)"
            )),
        }
    }
}

impl std::fmt::Display for PhiVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PhiVariant::Exact => "exact",
            PhiVariant::Lossy => "lossy",
            PhiVariant::Lossless => "lossless",
            PhiVariant::Pole => "pole",
            PhiVariant::Unity => "unity",
        };
        f.write_str(s)
    }
}

/// Δk sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMismatch {
    pub grid: OmegaGrid,
    pub delta_k: Vec<Complex64>,
    pub geometry: Geometry,
    pub conjugation_applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningFunction {
    pub values: ComplexSpectrum,
    pub variant: PhiVariant,
}

/// Combines detuning parts of the two wave numbers into Δk.
///
/// Forward: Δk = k_as + k_s; backward: Δk = k_as − k_s (the Stokes offset
/// already carries the −ω of energy conservation). With `conjugate_stokes`,
/// k_s is replaced by k_s*.
pub fn combine_mismatch(
    k_as: Complex64,
    k_s: Complex64,
    geometry: Geometry,
    conjugate_stokes: bool,
) -> Complex64 {
    let ks = if conjugate_stokes { k_s.conj() } else { k_s };
    match geometry {
        Geometry::Forward => k_as + ks,
        Geometry::Backward => k_as - ks,
    }
}

pub fn delta_k(
    omega: f64,
    m: &MediumParams,
    d: &DriveParams,
    conjugate_stokes: bool,
) -> Result<Complex64> {
    let r = Response::new(m, d)?;
    Ok(combine_mismatch(
        r.k_as_offset(omega)?,
        r.k_s_offset(omega)?,
        d.geometry,
        conjugate_stokes,
    ))
}

pub fn phase_mismatch(
    grid: &OmegaGrid,
    m: &MediumParams,
    d: &DriveParams,
    conjugate_stokes: bool,
) -> Result<PhaseMismatch> {
    let r = Response::new(m, d)?;
    let delta_k = grid
        .iter()
        .map(|w| {
            Ok(combine_mismatch(
                r.k_as_offset(w)?,
                r.k_s_offset(w)?,
                d.geometry,
                conjugate_stokes,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseMismatch {
        grid: *grid,
        delta_k,
        geometry: d.geometry,
        conjugation_applied: conjugate_stokes,
    })
}

fn checked_sinc(z: Complex64, omega: f64) -> Result<Complex64> {
    if z.im.abs() > SINC_IM_LIMIT {
        return Err(Error::Overflow {
            omega,
            im: z.im.abs(),
        });
    }
    Ok(sinc(z))
}

/// Φ at one detuning from the detuning parts of k_as and k_s.
pub fn phi_from_wave_numbers(
    omega: f64,
    k_as: Complex64,
    k_s: Complex64,
    geometry: Geometry,
    conjugate_stokes: bool,
    length: f64,
) -> Result<Complex64> {
    let dk = combine_mismatch(k_as, k_s, geometry, conjugate_stokes);
    let s = checked_sinc(dk * (length / 2.0), omega)?;
    let phase = (Complex64::i() * (k_as + k_s) * (length / 2.0)).exp();
    Ok(s * phase)
}

pub fn phi_exact(grid: &OmegaGrid, m: &MediumParams, d: &DriveParams) -> Result<DetuningFunction> {
    phi_exact_with(grid, m, d, true)
}

pub fn phi_exact_with(
    grid: &OmegaGrid,
    m: &MediumParams,
    d: &DriveParams,
    conjugate_stokes: bool,
) -> Result<DetuningFunction> {
    let r = Response::new(m, d)?;
    let values = ComplexSpectrum::from_fn(*grid, d.omega_as_central, |w| {
        phi_from_wave_numbers(
            w,
            r.k_as_offset(w)?,
            r.k_s_offset(w)?,
            d.geometry,
            conjugate_stokes,
            m.length,
        )
    })?;
    Ok(DetuningFunction {
        values,
        variant: PhiVariant::Exact,
    })
}

/// Linearized lossy form with explicit τg and αL.
pub fn lossy_form(omega: f64, tau_g: f64, alpha_l: f64) -> Result<Complex64> {
    let x = omega * tau_g / 2.0;
    let s = checked_sinc(Complex64::new(x, alpha_l / 2.0), omega)?;
    Ok(s * Complex64::new(-alpha_l / 2.0, x).exp())
}

pub fn lossless_form(omega: f64, tau_g: f64) -> Complex64 {
    let x = omega * tau_g / 2.0;
    sinc(Complex64::new(x, 0.0)) * Complex64::new(0.0, x).exp()
}

pub fn pole_form(omega: f64, tau_g: f64, alpha_l: f64) -> Complex64 {
    Complex64::i() / Complex64::new(omega * tau_g, alpha_l)
}

fn delay_and_loss(m: &MediumParams, d: &DriveParams) -> Result<(f64, f64)> {
    let s = characteristic_scales(m, d)?;
    if !s.tau_g.is_finite() {
        return Err(Error::NonPhysicalParams {
            name: "omega_c",
            value: d.omega_c,
            reason: "approximate phase matching needs a coupling field",
        });
    }
    Ok((s.tau_g, s.alpha * m.length))
}

pub fn phi_approx_lossy(
    grid: &OmegaGrid,
    m: &MediumParams,
    d: &DriveParams,
) -> Result<DetuningFunction> {
    let (tg, al) = delay_and_loss(m, d)?;
    Ok(DetuningFunction {
        values: ComplexSpectrum::from_fn(*grid, d.omega_as_central, |w| lossy_form(w, tg, al))?,
        variant: PhiVariant::Lossy,
    })
}

pub fn phi_approx_lossless(
    grid: &OmegaGrid,
    m: &MediumParams,
    d: &DriveParams,
) -> Result<DetuningFunction> {
    let (tg, _) = delay_and_loss(m, d)?;
    Ok(DetuningFunction {
        values: ComplexSpectrum::from_fn(*grid, d.omega_as_central, |w| Ok(lossless_form(w, tg)))?,
        variant: PhiVariant::Lossless,
    })
}

pub fn phi_approx_pole(
    grid: &OmegaGrid,
    m: &MediumParams,
    d: &DriveParams,
) -> Result<DetuningFunction> {
    let (tg, al) = delay_and_loss(m, d)?;
    if al <= 0.0 {
        return Err(Error::NonPhysicalParams {
            name: "gamma12",
            value: m.gamma12,
            reason: "pole form needs EIT loss (alpha L > 0)",
        });
    }
    Ok(DetuningFunction {
        values: ComplexSpectrum::from_fn(*grid, d.omega_as_central, |w| Ok(pole_form(w, tg, al)))?,
        variant: PhiVariant::Pole,
    })
}

pub fn phi_unity(grid: &OmegaGrid, d: &DriveParams) -> DetuningFunction {
    DetuningFunction {
        values: ComplexSpectrum {
            grid: *grid,
            values: vec![Complex64::new(1.0, 0.0); grid.len],
            center_freq: d.omega_as_central,
        },
        variant: PhiVariant::Unity,
    }
}

pub fn detuning_function(
    grid: &OmegaGrid,
    m: &MediumParams,
    d: &DriveParams,
    variant: PhiVariant,
    conjugate_stokes: bool,
) -> Result<DetuningFunction> {
    match variant {
        PhiVariant::Exact => phi_exact_with(grid, m, d, conjugate_stokes),
        PhiVariant::Lossy => phi_approx_lossy(grid, m, d),
        PhiVariant::Lossless => phi_approx_lossless(grid, m, d),
        PhiVariant::Pole => phi_approx_pole(grid, m, d),
        PhiVariant::Unity => Ok(phi_unity(grid, d)),
    }
}
