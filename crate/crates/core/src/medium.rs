//! Optical response of the four-level double-Λ atom.
//!
//! Level scheme: ground states |1⟩, |2⟩; excited |3⟩, |4⟩. The pump drives
//! |1⟩→|4⟩ with detuning Δp, the coupling laser drives |2⟩→|3⟩ on resonance.
//! Anti-Stokes photons come out near ω31 (EIT channel), Stokes photons near ω42.
//!
//! Frequencies are angular. The argument `omega` of the response functions is
//! the anti-Stokes detuning ω = ω_as − ϖ_as; energy conservation puts the
//! Stokes photon at ϖ_s − ω.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Forward,
    Backward,
}

/// Atomic and sample constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Ground-state dephasing rate (rad/s). Zero is allowed (ideal EIT).
    pub gamma12: f64,
    pub gamma13: f64,
    pub gamma14: f64,
    /// Atomic density (1/m³).
    pub density: f64,
    /// On-resonance absorption cross section of |1⟩→|3⟩ (m²).
    pub sigma13: f64,
    /// Medium length (m).
    pub length: f64,
    /// μ13μ32μ24μ41 E_p E_c / (ε0 ħ³), folded into one real number.
    pub dipole_scale: f64,
    /// |μ24|² / |μ13|², sets the Stokes linear response.
    pub stokes_dipole_ratio: f64,
}

impl MediumParams {
    /// Builds params from an optical depth instead of a density.
    pub fn from_optical_depth(
        gamma12: f64,
        gamma13: f64,
        gamma14: f64,
        optical_depth: f64,
        sigma13: f64,
        length: f64,
    ) -> Self {
        MediumParams {
            gamma12,
            gamma13,
            gamma14,
            density: optical_depth / (sigma13 * length),
            sigma13,
            length,
            dipole_scale: 1.0,
            stokes_dipole_ratio: 1.0,
        }
    }

    pub fn optical_depth(&self) -> f64 {
        self.density * self.sigma13 * self.length
    }

    /// Same sample with the density rescaled to the given optical depth.
    pub fn with_optical_depth(mut self, optical_depth: f64) -> Self {
        self.density = optical_depth / (self.sigma13 * self.length);
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("gamma13", self.gamma13)?;
        positive("gamma14", self.gamma14)?;
        if !(self.gamma12 >= 0.0 && self.gamma12.is_finite()) {
            return Err(Error::NonPhysicalParams {
                name: "gamma12",
                value: self.gamma12,
                reason: "must be finite and >= 0",
            });
        }
        positive("density", self.density)?;
        positive("sigma13", self.sigma13)?;
        positive("length", self.length)?;
        if !self.dipole_scale.is_finite() {
            return Err(Error::NonPhysicalParams {
                name: "dipole_scale",
                value: self.dipole_scale,
                reason: "must be finite",
            });
        }
        if !(self.stokes_dipole_ratio >= 0.0 && self.stokes_dipole_ratio.is_finite()) {
            return Err(Error::NonPhysicalParams {
                name: "stokes_dipole_ratio",
                value: self.stokes_dipole_ratio,
                reason: "must be finite and >= 0",
            });
        }
        Ok(())
    }
}

/// Laser drive and output-mode description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega_c: f64,
    pub omega_p: f64,
    /// Pump detuning Δp = ω_p − ω41 (sign kept as given).
    pub delta_p: f64,
    /// ϖ_as = ω31.
    pub omega_as_central: f64,
    /// ϖ_s = ω_c + ω_p − ϖ_as.
    pub omega_s_central: f64,
    pub geometry: Geometry,
    /// ω42, carried as metadata only.
    #[serde(default)]
    pub stokes_transition: Option<f64>,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c >= 0.0 && self.omega_c.is_finite()) {
            return Err(Error::NonPhysicalParams {
                name: "omega_c",
                value: self.omega_c,
                reason: "must be finite and >= 0",
            });
        }
        if !(self.omega_p >= 0.0 && self.omega_p.is_finite()) {
            return Err(Error::NonPhysicalParams {
                name: "omega_p",
                value: self.omega_p,
                reason: "must be finite and >= 0",
            });
        }
        if !self.delta_p.is_finite() {
            return Err(Error::NonPhysicalParams {
                name: "delta_p",
                value: self.delta_p,
                reason: "must be finite",
            });
        }
        positive("omega_as_central", self.omega_as_central)?;
        positive("omega_s_central", self.omega_s_central)?;
        Ok(())
    }

    /// |Ωp| / |Δp|; the linearized phase matching assumes this is ≪ 1.
    pub fn far_off_resonance_ratio(&self) -> f64 {
        self.omega_p.abs() / self.delta_p.abs()
    }

    pub fn validity_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let r = self.far_off_resonance_ratio();
        if !(r < 0.1) {
            out.push(format!(
                "pump not far off resonance: |omega_p|/|delta_p| = {r:.3} (linearized phase matching assumes << 1)"
            ));
        }
        out
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPhysicalParams {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

/// Validated medium + drive with the frequency-independent factors cached.
///
/// Cheap to copy; evaluate on as many detunings as needed.
#[derive(Debug, Clone, Copy)]
pub struct Response {
    pub medium: MediumParams,
    pub drive: DriveParams,
    chi3_num: Complex64,
    // N σ13 γ13 c / ϖ31, i.e. N|μ13|²/(ε0ħ)
    linear_scale: f64,
    stokes_factor: f64,
}

impl Response {
    pub fn new(m: &MediumParams, d: &DriveParams) -> Result<Self> {
        m.validate()?;
        d.validate()?;
        let chi3_num = Complex64::new(m.density * m.dipole_scale, 0.0)
            / Complex64::new(d.delta_p, m.gamma14);
        let linear_scale = m.density * m.sigma13 * m.gamma13 * SPEED_OF_LIGHT / d.omega_as_central;
        let stokes_factor = m.stokes_dipole_ratio * d.omega_p * d.omega_p
            / (d.delta_p * d.delta_p + m.gamma14 * m.gamma14);
        Ok(Response {
            medium: *m,
            drive: *d,
            chi3_num,
            linear_scale,
            stokes_factor,
        })
    }

    /// Ωc² − 4(ω + iγ13)(ω + iγ12): vanishes at ω = ±Ωe/2 − iγe.
    fn two_photon_denominator(&self, omega: f64) -> Complex64 {
        let m = &self.medium;
        let oc = self.drive.omega_c;
        Complex64::new(oc * oc, 0.0)
            - 4.0 * Complex64::new(omega, m.gamma13) * Complex64::new(omega, m.gamma12)
    }

    /// Third-order susceptibility for the anti-Stokes field.
    ///
    /// N·s / [(Δp + iγ14)(Ωc² − 4(ω+iγ13)(ω+iγ12))], which factors into the
    /// two-resonance form −N·s / [4(Δp+iγ14)(ω−Ωe/2+iγe)(ω+Ωe/2+iγe)] and stays
    /// valid when Ωe is imaginary.
    pub fn chi3(&self, omega: f64) -> Result<Complex64> {
        let den = self.two_photon_denominator(omega);
        if den == Complex64::new(0.0, 0.0) {
            return Err(Error::NonPhysicalParams {
                name: "omega_c",
                value: self.drive.omega_c,
                reason: "chi3 denominator vanishes (omega_c = gamma12 = 0 at zero detuning)",
            });
        }
        Ok(self.chi3_num / den)
    }

    /// Anti-Stokes linear susceptibility, standard EIT form.
    pub fn chi_as(&self, omega: f64) -> Result<Complex64> {
        let m = &self.medium;
        if self.drive.omega_c == 0.0 {
            // two-level absorber; the (ω + iγ12) factors cancel
            return Ok(-self.linear_scale / Complex64::new(omega, m.gamma13));
        }
        let den = self.two_photon_denominator(omega);
        Ok(4.0 * self.linear_scale * Complex64::new(omega, m.gamma12) / den)
    }

    /// Stokes linear susceptibility; Raman gain shows up as Im χ_s < 0.
    pub fn chi_s(&self, omega: f64) -> Result<Complex64> {
        if self.stokes_factor == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let m = &self.medium;
        let oc = self.drive.omega_c;
        let a = Complex64::new(omega, -m.gamma13);
        let den = Complex64::new(oc * oc, 0.0) - 4.0 * a * Complex64::new(omega, -m.gamma12);
        if den == Complex64::new(0.0, 0.0) {
            return Err(Error::NonPhysicalParams {
                name: "omega_c",
                value: oc,
                reason: "Stokes susceptibility denominator vanishes",
            });
        }
        Ok(self.stokes_factor * self.linear_scale * a / den)
    }

    /// k_as(ϖ_as + ω) − ϖ_as/c.
    pub fn k_as_offset(&self, omega: f64) -> Result<Complex64> {
        wave_number_offset(self.drive.omega_as_central, omega, self.chi_as(omega)?)
    }

    /// k_s(ϖ_s − ω) − ϖ_s/c.
    pub fn k_s_offset(&self, omega: f64) -> Result<Complex64> {
        wave_number_offset(self.drive.omega_s_central, -omega, self.chi_s(omega)?)
    }

    /// Effective Rabi frequency as a complex number: real Ωe, or i·βe when
    /// over-damped.
    pub fn effective_rabi(&self) -> Complex64 {
        let m = &self.medium;
        let dg = m.gamma13 - m.gamma12;
        let oc = self.drive.omega_c;
        Complex64::new(oc * oc - dg * dg, 0.0).sqrt()
    }
}

pub fn chi3(omega: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    Response::new(m, d)?.chi3(omega)
}

pub fn chi_as(omega: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    Response::new(m, d)?.chi_as(omega)
}

pub fn chi_s(omega: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    Response::new(m, d)?.chi_s(omega)
}

fn index(chi: Complex64) -> Result<Complex64> {
    let z = Complex64::new(1.0, 0.0) + chi;
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::BranchCut(z));
    }
    Ok(z.sqrt())
}

/// k = (ω/c)√(1+χ) on the principal branch (Re √ ≥ 0).
pub fn wave_number(omega: f64, chi: Complex64) -> Result<Complex64> {
    Ok(index(chi)? * (omega / SPEED_OF_LIGHT))
}

/// k(ϖ + ω) − ϖ/c without cancelling the large central term.
pub fn wave_number_offset(central: f64, detuning: f64, chi: Complex64) -> Result<Complex64> {
    let s = index(chi)?;
    Ok(s * (detuning / SPEED_OF_LIGHT) + chi / (s + 1.0) * (central / SPEED_OF_LIGHT))
}

/// EIT loss coefficient α = 2Nσ13γ12γ13 / (Ωc² + 4γ12γ13).
pub fn eit_alpha(m: &MediumParams, d: &DriveParams) -> Result<f64> {
    m.validate()?;
    d.validate()?;
    let g = m.gamma12 * m.gamma13;
    let den = d.omega_c * d.omega_c + 4.0 * g;
    if den == 0.0 {
        // Ωc = γ12 = 0: limit of the formula along γ12 → 0 is Nσ/2
        return Ok(m.density * m.sigma13 / 2.0);
    }
    Ok(2.0 * m.density * m.sigma13 * g / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayMode {
    Approximate,
    ExactDerivative,
}

/// Anti-Stokes group delay through the medium.
pub fn group_delay(m: &MediumParams, d: &DriveParams, mode: DelayMode) -> Result<f64> {
    let r = Response::new(m, d)?;
    if d.omega_c <= 0.0 {
        return Err(Error::NonPhysicalParams {
            name: "omega_c",
            value: d.omega_c,
            reason: "group delay needs a coupling field",
        });
    }
    match mode {
        DelayMode::Approximate => {
            Ok(2.0 * m.gamma13 * m.optical_depth() / (d.omega_c * d.omega_c))
        }
        DelayMode::ExactDerivative => {
            let g = 4.0 * m.gamma12 * m.gamma13;
            if d.omega_c * d.omega_c <= g {
                return Err(Error::DivergentDelay(format!(
                    "omega_c^2 = {:e} <= 4 gamma12 gamma13 = {:e}: no transparency window",
                    d.omega_c * d.omega_c,
                    g
                )));
            }
            let h = 1e-4 * m.gamma13;
            let slope = |h: f64| -> Result<f64> {
                Ok((r.k_as_offset(h)?.re - r.k_as_offset(-h)?.re) / (2.0 * h))
            };
            let coarse = slope(h)?;
            let fine = slope(0.5 * h)?;
            let spread = (coarse - fine).abs();
            if !(spread <= 1e-6 * fine.abs()) {
                return Err(Error::DivergentDelay(format!(
                    "Richardson check failed: slopes {coarse:e} and {fine:e}"
                )));
            }
            Ok(m.length * (4.0 * fine - coarse) / 3.0)
        }
    }
}

/// Characteristic times and bandwidths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    /// Ωe when real, otherwise 0.
    pub omega_e: f64,
    /// βe = √((γ13−γ12)² − Ωc²) when over-damped, otherwise 0.
    pub beta_e: f64,
    pub rabi_is_real: bool,
    pub gamma_e: f64,
    /// 2π/Ωe; infinite when over-damped.
    pub tau_r: f64,
    pub tau_e: f64,
    /// Approximate group delay (2γ13/Ωc²)·OD; infinite without coupling.
    pub tau_g: f64,
    pub alpha: f64,
    pub v_g: f64,
    /// 2π·0.88/τg.
    pub d_omega_g: f64,
    /// Ωc²/(2γ13√OD).
    pub d_omega_tr: f64,
    pub optical_depth: f64,
}

pub fn characteristic_scales(m: &MediumParams, d: &DriveParams) -> Result<DerivedScales> {
    let r = Response::new(m, d)?;
    let dg = (m.gamma13 - m.gamma12).abs();
    let rabi_is_real = d.omega_c > dg;
    let oe = r.effective_rabi();
    let (omega_e, beta_e) = if rabi_is_real { (oe.re, 0.0) } else { (0.0, oe.im) };
    let gamma_e = (m.gamma12 + m.gamma13) / 2.0;
    let od = m.optical_depth();
    let tau_g = if d.omega_c > 0.0 {
        group_delay(m, d, DelayMode::Approximate)?
    } else {
        f64::INFINITY
    };
    Ok(DerivedScales {
        omega_e,
        beta_e,
        rabi_is_real,
        gamma_e,
        tau_r: if rabi_is_real {
            2.0 * std::f64::consts::PI / omega_e
        } else {
            f64::INFINITY
        },
        tau_e: 1.0 / (2.0 * gamma_e),
        tau_g,
        alpha: eit_alpha(m, d)?,
        v_g: m.length / tau_g,
        d_omega_g: 2.0 * std::f64::consts::PI * 0.88 / tau_g,
        d_omega_tr: d.omega_c * d.omega_c / (2.0 * m.gamma13 * od.sqrt()),
        optical_depth: od,
    })
}

/// Δωtr > Δωg with Δωg ≃ 2π/τg; algebraically equivalent to OD > 4π².
pub fn transparency_exceeds_phase_matching(m: &MediumParams, d: &DriveParams) -> Result<bool> {
    let s = characteristic_scales(m, d)?;
    Ok(s.d_omega_tr > 2.0 * std::f64::consts::PI / s.tau_g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const G: f64 = 2.0 * PI * 3.0e6;

    fn sample(gamma12: f64, od: f64, omega_c: f64, omega_p: f64, delta_p: f64) -> (MediumParams, DriveParams) {
        let w = 2.0 * PI * SPEED_OF_LIGHT / 795e-9;
        let m = MediumParams::from_optical_depth(gamma12 * G, G, G, od, 3.0e-13, 0.015);
        let d = DriveParams {
            omega_c: omega_c * G,
            omega_p: omega_p * G,
            delta_p: delta_p * G,
            omega_as_central: w,
            omega_s_central: w - 2.0 * PI * 6.834e9,
            geometry: Geometry::Backward,
            stokes_transition: None,
        };
        (m, d)
    }

    fn fig3() -> (MediumParams, DriveParams) {
        sample(0.02, 53.0, 4.2, 1.16, 48.67)
    }

    // factored two-resonance form, evaluated independently of the library
    fn chi3_factored(omega: f64, m: &MediumParams, d: &DriveParams) -> Complex64 {
        let ge = (m.gamma12 + m.gamma13) / 2.0;
        let dg = m.gamma13 - m.gamma12;
        let oe = Complex64::new(d.omega_c * d.omega_c - dg * dg, 0.0).sqrt();
        let num = Complex64::new(-m.density * m.dipole_scale, 0.0);
        let den = 4.0
            * Complex64::new(d.delta_p, m.gamma14)
            * (Complex64::new(omega, ge) - oe / 2.0)
            * (Complex64::new(omega, ge) + oe / 2.0);
        num / den
    }

    #[test]
    fn chi3_matches_two_resonance_form() {
        for &(g12, oc) in &[(0.6, 4.0), (0.1, 0.05), (0.02, 4.2), (1.0, 0.0)] {
            let (m, d) = sample(g12, 11.0, oc, 0.8, -7.5);
            for k in -50..=50 {
                let w = k as f64 * 0.2 * G;
                let a = chi3(w, &m, &d).unwrap();
                let b = chi3_factored(w, &m, &d);
                assert!((a - b).norm() <= 1e-12 * b.norm(), "{g12} {oc} {k}");
            }
        }
    }

    #[test]
    fn chi3_peaks_symmetric_when_rates_equal() {
        let (m, d) = sample(1.0, 11.0, 3.0, 0.8, -7.5);
        let r = Response::new(&m, &d).unwrap();
        let half = d.omega_c / 2.0;
        let p = r.chi3(half).unwrap().norm();
        let q = r.chi3(-half).unwrap().norm();
        assert!((p - q).abs() <= 1e-12 * p);
        // |χ3|² ∝ 1/[((ω−a)²+γ²)((ω+a)²+γ²)] peaks at ω² = a² − γ², where it
        // exceeds the value at ω = a by √(4a²+γ²)/(2a)
        let peak = (-40000..=40000)
            .map(|k| r.chi3(k as f64 * 1e-4 * G).unwrap().norm())
            .fold(0.0, f64::max);
        let (oe, ge) = (d.omega_c, m.gamma13);
        let expected = oe / (oe * oe + ge * ge).sqrt();
        assert!((p / peak - expected).abs() < 1e-6, "{} vs {expected}", p / peak);
    }

    #[test]
    fn chi3_resonances_sit_at_half_effective_rabi() {
        // scan |χ3| for its two maxima p±, then undo the γe pull:
        // poles at ±Ωe/2 − iγe put the maxima at ±√(Ωe²/4 − γe²)
        let (m, d) = sample(0.6, 11.0, 4.0, 0.8, -7.5);
        let r = Response::new(&m, &d).unwrap();
        let step = 1e-4 * G;
        let n = 40000;
        let vals: Vec<f64> = (0..=2 * n)
            .map(|k| r.chi3((k as f64 - n as f64) * step).unwrap().norm())
            .collect();
        let argmax_pos = (n..=2 * n).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let argmax_neg = (0..=n).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let p_pos = (argmax_pos as f64 - n as f64) * step;
        let p_neg = (argmax_neg as f64 - n as f64) * step;
        assert!((p_pos + p_neg).abs() <= step);
        let ge = 0.8 * G;
        let sep = 2.0 * (p_pos * p_pos + ge * ge).sqrt();
        let oe = (16.0f64 - 0.16).sqrt() * G;
        // dω/dp ≈ 2p/√(p²+γe²) < 2, so one scan step maps to < 2 steps in Ωe
        assert!((sep - oe).abs() <= 2.0 * step, "{sep} vs {oe}");
    }

    #[test]
    fn chi3_decays_as_inverse_square() {
        let (m, d) = sample(0.6, 11.0, 4.0, 0.8, -7.5);
        let r = Response::new(&m, &d).unwrap();
        let ratio = r.chi3(1e3 * G).unwrap().norm() / r.chi3(0.0).unwrap().norm();
        assert!(ratio < 1e-5);
        let far = r.chi3(1e4 * G).unwrap().norm() / r.chi3(1e3 * G).unwrap().norm();
        assert!((far - 1e-2).abs() < 1e-4);
    }

    #[test]
    fn chi3_rejects_bad_rates() {
        let (mut m, d) = sample(0.6, 11.0, 4.0, 0.8, -7.5);
        m.gamma13 = 0.0;
        assert!(matches!(chi3(0.0, &m, &d), Err(Error::NonPhysicalParams { .. })));
        m.gamma13 = G;
        m.gamma14 = -1.0;
        assert!(matches!(chi3(0.0, &m, &d), Err(Error::NonPhysicalParams { .. })));
    }

    #[test]
    fn chi_as_transparent_on_resonance_without_dephasing() {
        let (m, d) = sample(0.0, 53.0, 4.2, 1.16, 48.67);
        assert_eq!(chi_as(0.0, &m, &d).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn chi_s_vanishes_without_pump() {
        let (m, d) = sample(0.02, 53.0, 4.2, 0.0, 48.67);
        let r = Response::new(&m, &d).unwrap();
        for k in -20..=20 {
            let w = k as f64 * 0.3 * G;
            assert_eq!(r.chi_s(w).unwrap(), Complex64::new(0.0, 0.0));
            let ks = r.k_s_offset(w).unwrap();
            assert_eq!(ks, Complex64::new(-w / SPEED_OF_LIGHT, 0.0));
        }
    }

    #[test]
    fn chi_s_shows_raman_gain() {
        let (m, d) = fig3();
        let r = Response::new(&m, &d).unwrap();
        assert!(r.chi_s(0.0).unwrap().im < 0.0);
    }

    #[test]
    fn transparency_width_from_loss_curvature() {
        // 2·Im k_as·L ≈ 2αL + (ω/w)² near ω = 0 defines the 1/e intensity
        // half-width w; the full window width 2w should match Δωtr
        let (m, d) = fig3();
        let r = Response::new(&m, &d).unwrap();
        let h = 1e-3 * G;
        let f = |w: f64| 2.0 * r.k_as_offset(w).unwrap().im * m.length;
        let curv = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let width = 2.0 * (2.0 / curv).sqrt();
        let s = characteristic_scales(&m, &d).unwrap();
        let rel = (width - s.d_omega_tr) / s.d_omega_tr;
        assert!(rel.abs() < 0.05, "window {width:e} vs {:e}", s.d_omega_tr);
        assert!(((s.d_omega_tr / (2.0 * PI)) / 3.63e6 - 1.0).abs() < 0.01);
    }

    #[test]
    fn wave_number_vacuum_and_first_order_loss() {
        let w = 2.4e15;
        assert_eq!(wave_number(w, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(w / SPEED_OF_LIGHT, 0.0));
        let alpha = 3.0;
        let chi = Complex64::new(0.0, 2.0 * alpha * SPEED_OF_LIGHT / w);
        let k = wave_number(w, chi).unwrap();
        assert!((k.im - alpha).abs() <= 1e-6 * alpha);
    }

    #[test]
    fn wave_number_branch_cut() {
        assert!(matches!(wave_number(1.0, Complex64::new(-1.0, 0.0)), Err(Error::BranchCut(_))));
        assert!(matches!(wave_number(1.0, Complex64::new(-3.0, 0.0)), Err(Error::BranchCut(_))));
        // just off the cut is fine and has Re ≥ 0
        let k = wave_number(1.0, Complex64::new(-3.0, 1e-9)).unwrap();
        assert!(k.re >= 0.0);
    }

    #[test]
    fn offset_matches_direct_wave_number() {
        let (m, d) = fig3();
        let r = Response::new(&m, &d).unwrap();
        let w = 0.7 * G;
        let chi = r.chi_as(w).unwrap();
        let direct = wave_number(d.omega_as_central + w, chi).unwrap() - d.omega_as_central / SPEED_OF_LIGHT;
        let off = r.k_as_offset(w).unwrap();
        // direct form loses ~1e-16·ϖ/c ≈ 1e-9 absolute
        assert!((direct - off).norm() < 1e-7);
    }

    #[test]
    fn fig3_loss_matches_alpha() {
        let (m, d) = fig3();
        let r = Response::new(&m, &d).unwrap();
        let im_kl = r.k_as_offset(0.0).unwrap().im * m.length;
        let al = eit_alpha(&m, &d).unwrap() * m.length;
        assert!((im_kl - al).abs() < 0.01 * al);
    }

    #[test]
    fn alpha_limits() {
        let (m, d) = sample(0.0, 53.0, 4.2, 1.16, 48.67);
        assert_eq!(eit_alpha(&m, &d).unwrap(), 0.0);
        let (m, d) = sample(0.3, 53.0, 1e-6, 1.16, 48.67);
        let a = eit_alpha(&m, &d).unwrap();
        assert!((a / (m.density * m.sigma13 / 2.0) - 1.0).abs() < 1e-9);
        let (m, d) = sample(0.0, 53.0, 0.0, 1.16, 48.67);
        assert_eq!(eit_alpha(&m, &d).unwrap(), m.density * m.sigma13 / 2.0);
    }

    #[test]
    fn fig3_tail_time_finite() {
        let (m, d) = fig3();
        let s = characteristic_scales(&m, &d).unwrap();
        let al = s.alpha * m.length;
        let tail = s.tau_g / (2.0 * al);
        assert!(tail.is_finite() && tail > 0.0);
        assert!((-al).exp() < 1.0 && (-al).exp() > 0.8);
    }

    #[test]
    fn fig3_group_delay() {
        let (m, d) = fig3();
        let approx = group_delay(&m, &d, DelayMode::Approximate).unwrap();
        let expected = 2.0 * 53.0 / (4.2 * 4.2 * G);
        assert!((approx - expected).abs() <= 1e-12 * expected);
        assert!((approx - 319e-9).abs() < 1e-9);
        assert!((approx / 300e-9 - 1.0).abs() < 0.10);
        let exact = group_delay(&m, &d, DelayMode::ExactDerivative).unwrap();
        assert!((exact / approx - 1.0).abs() < 0.15, "{exact:e} {approx:e}");
        let m2 = m.with_optical_depth(106.0);
        assert_eq!(group_delay(&m2, &d, DelayMode::Approximate).unwrap(), 2.0 * approx);
    }

    #[test]
    fn exact_delay_refuses_without_window() {
        let (m, d) = sample(0.5, 10.0, 1.0, 0.0, 48.0);
        // Ωc² = 1 ≤ 4·0.5 = 2
        assert!(matches!(
            group_delay(&m, &d, DelayMode::ExactDerivative),
            Err(Error::DivergentDelay(_))
        ));
        let (m, d) = sample(0.5, 10.0, 0.0, 0.0, 48.0);
        assert!(group_delay(&m, &d, DelayMode::Approximate).is_err());
    }

    #[test]
    fn fig3_bandwidths() {
        let (m, d) = fig3();
        let s = characteristic_scales(&m, &d).unwrap();
        let tr = s.d_omega_tr / (2.0 * PI);
        let expected = 17.64 * G / (2.0 * 53f64.sqrt() * 2.0 * PI);
        assert!((tr - expected).abs() < 1e-9 * expected);
        assert!((tr / 3.63e6 - 1.0).abs() < 0.01);
        let dg: f64 = 0.88 / 300e-9;
        assert!((dg / 2.93e6 - 1.0).abs() < 0.01);
    }

    #[test]
    fn equal_rates_give_bare_rabi() {
        let (m, d) = sample(1.0, 11.0, 5.0, 0.8, -7.5);
        let s = characteristic_scales(&m, &d).unwrap();
        assert!(s.rabi_is_real);
        assert!((s.omega_e - 5.0 * G).abs() <= 1e-12 * 5.0 * G);
        assert!((s.tau_r - 2.0 * PI / (5.0 * G)).abs() <= 1e-12 * s.tau_r);
    }

    #[test]
    fn over_damped_flagged() {
        let (m, d) = sample(0.1, 11.0, 0.05, 0.0, 48.0);
        let s = characteristic_scales(&m, &d).unwrap();
        assert!(!s.rabi_is_real);
        assert_eq!(s.omega_e, 0.0);
        let b = s.beta_e / G;
        assert!((b * b - (0.81 - 0.0025)).abs() < 1e-12);
        assert!(s.tau_r.is_infinite());
    }

    #[test]
    fn far_off_resonance_warning() {
        let (_, d) = fig3();
        assert!(d.validity_warnings().is_empty());
        let (_, d) = sample(0.6, 11.0, 4.0, 0.8, -7.5);
        // 0.8/7.5 ≈ 0.107 sits just above the 0.1 threshold
        assert_eq!(d.validity_warnings().len(), 1);
    }

    #[test]
    fn od_bound_across_four_pi_squared() {
        let thr = 4.0 * PI * PI;
        for &od in &[5.0, 20.0, 39.0, 39.4, 39.6, 40.0, 60.0, 200.0] {
            let (m, d) = sample(0.02, od, 4.2, 1.16, 48.67);
            assert_eq!(transparency_exceeds_phase_matching(&m, &d).unwrap(), od > thr, "{od}");
        }
    }

    proptest! {
        #[test]
        fn gamma_e_is_mean(g12 in 0.0f64..2.0, oc in 0.0f64..10.0) {
            let (m, d) = sample(g12, 20.0, oc, 0.5, 30.0);
            let s = characteristic_scales(&m, &d).unwrap();
            prop_assert_eq!(s.gamma_e, (m.gamma12 + m.gamma13) / 2.0);
            let dg = m.gamma13 - m.gamma12;
            let oc2 = d.omega_c * d.omega_c;
            if s.rabi_is_real {
                prop_assert!((s.omega_e * s.omega_e + dg * dg - oc2).abs() <= 1e-9 * (oc2 + dg * dg));
            } else {
                prop_assert!((s.beta_e * s.beta_e - (dg * dg - oc2)).abs() <= 1e-9 * (oc2 + dg * dg));
            }
        }

        #[test]
        fn chi3_magnitude_even(g12 in 0.0f64..0.99, oc in 1.05f64..10.0, w in -50.0f64..50.0) {
            // real Ωe
            let (m, d) = sample(g12, 20.0, oc, 0.5, 30.0);
            let r = Response::new(&m, &d).unwrap();
            let a = r.chi3(w * G).unwrap().norm();
            let b = r.chi3(-w * G).unwrap().norm();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn no_anti_stokes_gain_without_dephasing(oc in 0.1f64..10.0, w in -50.0f64..50.0, od in 0.1f64..500.0) {
            let (m, d) = sample(0.0, od, oc, 0.5, 30.0);
            let r = Response::new(&m, &d).unwrap();
            prop_assert!(r.chi_as(w * G).unwrap().im >= 0.0);
            prop_assert_eq!(r.chi_as(0.0).unwrap().im, 0.0);
        }

        #[test]
        fn small_chi_loss_is_alpha(g12 in 0.001f64..0.5, oc in 1.0f64..10.0) {
            let (m, d) = sample(g12, 0.01, oc, 0.5, 30.0);
            let r = Response::new(&m, &d).unwrap();
            let chi = r.chi_as(0.0).unwrap();
            prop_assume!(chi.norm() < 1e-3);
            let k = wave_number(d.omega_as_central, chi).unwrap();
            let a = eit_alpha(&m, &d).unwrap();
            prop_assert!((k.im - a).abs() <= 0.01 * a);
        }

        #[test]
        fn optical_depth_is_product(od in 0.01f64..1000.0, len in 1e-3f64..0.1) {
            let m = MediumParams::from_optical_depth(0.1, 1.0, 1.0, od, 3e-13, len);
            prop_assert!((m.optical_depth() - m.density * m.sigma13 * m.length).abs() == 0.0);
            prop_assert!((m.optical_depth() / od - 1.0).abs() < 1e-12);
        }
    }
}
