//! Limiting regimes: closed-form waveforms, classification by the ordering of
//! τr, τe and τg, and numeric-vs-closed-form comparison.
//!
//! Closed forms drop the central-frequency phase. Θ(0) = 1/2.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::biphoton::{PairRate, Scenario, Simulation};
use crate::error::{Error, Result};
use crate::grid::{TauGrid, Waveform};
use crate::medium::{characteristic_scales, DerivedScales, DriveParams, MediumParams, Response};
use crate::phasematch::{sinc, PhiVariant};

/// Required ratio between competing scales before a regime is called.
pub const MARGIN: f64 = 2.0;
/// αL at or below this counts as lossless.
pub const LOSSLESS_MAX_ALPHA_L: f64 = 0.5;
/// αL at or above this counts as lossy (e^{−αL} ≤ 0.05).
pub const LOSSY_MIN_ALPHA_L: f64 = 3.0;
/// Without EIT, Φ ≈ 1 needs a dilute sample.
pub const DILUTE_MAX_OD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    DampedRabi,
    OverdampedRabi,
    GroupDelayLossless,
    GroupDelayLossy,
    Mixed,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// The inequalities behind a label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCriteria {
    pub phase_model: PhiVariant,
    /// τg seen by the classifier; 0 when Φ ≡ 1.
    pub tau_g: f64,
    pub tau_r_over_tau_g: f64,
    pub tau_e_over_tau_g: f64,
    pub omega_c_over_rate_gap: f64,
    pub rabi_real: bool,
    pub transparency_exceeds_phase_matching: bool,
    pub alpha_l: f64,
    pub transmission: f64,
    pub optical_depth: f64,
    pub rabi_chain: bool,
    pub overdamped_chain: bool,
    pub group_delay_chain: bool,
    pub lossless: bool,
    pub lossy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: RegimeLabel,
    pub criteria: RegimeCriteria,
}

/// Classification with the exact phase-matching model.
pub fn classify(m: &MediumParams, d: &DriveParams) -> Result<Classification> {
    classify_with_variant(m, d, PhiVariant::Exact)
}

/// Classification for a chosen Φ model; with `Unity` there is no
/// phase-matching filter, so the effective τg is 0.
pub fn classify_with_variant(
    m: &MediumParams,
    d: &DriveParams,
    variant: PhiVariant,
) -> Result<Classification> {
    let s = characteristic_scales(m, d)?;
    let unity = variant == PhiVariant::Unity;
    let tau_g = if unity { 0.0 } else { s.tau_g };
    let ratio = |a: f64| if tau_g == 0.0 { f64::INFINITY } else { a / tau_g };
    let gap = (m.gamma13 - m.gamma12).abs();
    let alpha_l = s.alpha * m.length;

    let rabi_chain = s.rabi_is_real
        && ratio(s.tau_r) >= MARGIN
        && ratio(s.tau_e) >= MARGIN;
    let overdamped_chain = !s.rabi_is_real && (unity || s.optical_depth <= DILUTE_MAX_OD);
    let group_delay_chain = !unity && s.rabi_is_real && tau_g >= MARGIN * s.tau_r;
    let lossless = alpha_l <= LOSSLESS_MAX_ALPHA_L;
    let lossy = alpha_l >= LOSSY_MIN_ALPHA_L;

    let label = if rabi_chain {
        RegimeLabel::DampedRabi
    } else if overdamped_chain {
        RegimeLabel::OverdampedRabi
    } else if group_delay_chain && lossless {
        RegimeLabel::GroupDelayLossless
    } else if group_delay_chain && lossy {
        RegimeLabel::GroupDelayLossy
    } else {
        RegimeLabel::Mixed
    };

    Ok(Classification {
        label,
        criteria: RegimeCriteria {
            phase_model: variant,
            tau_g,
            tau_r_over_tau_g: ratio(s.tau_r),
            tau_e_over_tau_g: ratio(s.tau_e),
            omega_c_over_rate_gap: if gap == 0.0 { f64::INFINITY } else { d.omega_c / gap },
            rabi_real: s.rabi_is_real,
            transparency_exceeds_phase_matching: s.d_omega_tr
                > 2.0 * std::f64::consts::PI / s.tau_g,
            alpha_l,
            transmission: (-alpha_l).exp(),
            optical_depth: s.optical_depth,
            rabi_chain,
            overdamped_chain,
            group_delay_chain,
            lossless,
            lossy,
        },
    })
}

/// Φ ≈ 1 gate for the Rabi-regime closed forms: Δωg > 4·max(Ωe, 2γe).
pub fn rabi_oracle_trusted(s: &DerivedScales, variant: PhiVariant) -> bool {
    if variant == PhiVariant::Unity {
        return true;
    }
    let rabi = if s.rabi_is_real { s.omega_e } else { s.beta_e };
    s.d_omega_g > 4.0 * rabi.max(2.0 * s.gamma_e)
}

fn step(tau: f64) -> f64 {
    if tau > 0.0 {
        1.0
    } else if tau == 0.0 {
        0.5
    } else {
        0.0
    }
}

/// K in κ(ω) = K / [(ω − Ωe/2 + iγe)(ω + Ωe/2 + iγe)].
fn pole_residue_scale(r: &Response) -> Complex64 {
    let m = &r.medium;
    let d = &r.drive;
    let pre = (d.omega_as_central * d.omega_s_central).sqrt() / (2.0 * crate::SPEED_OF_LIGHT);
    Complex64::new(0.0, pre * m.density * m.dipole_scale)
        / (4.0 * Complex64::new(d.delta_p, m.gamma14))
}

/// B = −2K/Ωe (complex Ωe allowed).
pub fn rabi_prefactor(m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    let r = Response::new(m, d)?;
    let oe = r.effective_rabi();
    if oe.norm() == 0.0 {
        return Err(Error::InvalidArgument(
            "B is undefined at critical damping (omega_c = |gamma13 - gamma12|)".into(),
        ));
    }
    Ok(-2.0 * pole_residue_scale(&r) / oe)
}

/// κ̃(τ) = B e^{−γeτ} sin(Ωeτ/2) Θ(τ), written as −Kτ·sinc(Ωeτ/2)e^{−γeτ}
/// so it stays finite through critical damping and covers imaginary Ωe.
pub fn analytic_kappa_t(tau: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    let r = Response::new(m, d)?;
    Ok(kappa_t_with(&r, tau))
}

fn kappa_t_with(r: &Response, tau: f64) -> Complex64 {
    let th = step(tau);
    if th == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let m = &r.medium;
    let ge = (m.gamma12 + m.gamma13) / 2.0;
    let oe = r.effective_rabi();
    -pole_residue_scale(r) * tau * sinc(oe * (tau / 2.0)) * (-ge * tau).exp() * th
}

/// (1/2)|BL|² e^{−2γeτ}[1 − cos(Ωeτ)] Θ(τ).
pub fn analytic_g2_rabi(tau: f64, m: &MediumParams, d: &DriveParams) -> Result<f64> {
    let s = characteristic_scales(m, d)?;
    if !s.rabi_is_real {
        return Err(Error::InvalidArgument("damped Rabi form needs a real effective Rabi frequency".into()));
    }
    let bl = rabi_prefactor(m, d)?.norm() * m.length;
    let th = step(tau);
    Ok(0.5 * bl * bl * (-2.0 * s.gamma_e * tau).exp() * (1.0 - (s.omega_e * tau).cos()) * th * th)
}

/// BL e^{−γeτ} sinh(βeτ/2) Θ(τ), with B = −2K/βe.
pub fn analytic_overdamped(tau: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    let s = characteristic_scales(m, d)?;
    if s.rabi_is_real || s.beta_e == 0.0 {
        return Err(Error::InvalidArgument("over-damped form needs omega_c < |gamma13 - gamma12|".into()));
    }
    let r = Response::new(m, d)?;
    let b = -2.0 * pole_residue_scale(&r) / s.beta_e;
    Ok(b * m.length * (-s.gamma_e * tau).exp() * (s.beta_e * tau / 2.0).sinh() * step(tau))
}

/// Weak-coupling limit (BL/2)(e^{−γ12τ} − e^{−γ13τ}) Θ(τ), B = −2K/(γ13 − γ12).
pub fn analytic_weak_coupling(tau: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    let r = Response::new(m, d)?;
    let gap = m.gamma13 - m.gamma12;
    if gap == 0.0 {
        return Err(Error::InvalidArgument("weak-coupling form needs gamma13 != gamma12".into()));
    }
    let b = -2.0 * pole_residue_scale(&r) / gap;
    Ok(b * (m.length / 2.0) * ((-m.gamma12 * tau).exp() - (-m.gamma13 * tau).exp()) * step(tau))
}

/// κ0 Vg Π(τ; 0, τg).
pub fn analytic_rect(tau: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    let (k0, tg) = rect_parts(m, d)?;
    let window = step(tau) * step(tg - tau);
    Ok(k0 * (m.length / tg) * window)
}

/// κ0 Vg e^{−αVgτ} Θ(τ).
pub fn analytic_lossy(tau: f64, m: &MediumParams, d: &DriveParams) -> Result<Complex64> {
    let (k0, tg) = rect_parts(m, d)?;
    let s = characteristic_scales(m, d)?;
    let vg = m.length / tg;
    Ok(k0 * vg * (-s.alpha * vg * tau).exp() * step(tau))
}

fn rect_parts(m: &MediumParams, d: &DriveParams) -> Result<(Complex64, f64)> {
    let r = Response::new(m, d)?;
    let s = characteristic_scales(m, d)?;
    if !s.tau_g.is_finite() {
        return Err(Error::InvalidArgument("group-delay forms need a coupling field".into()));
    }
    Ok((r.kappa(0.0)?, s.tau_g))
}

/// Time of the first G2 maximum in the damped Rabi form:
/// tan(Ωeτ/2) = Ωe/(2γe).
pub fn first_rabi_peak(m: &MediumParams, d: &DriveParams) -> Result<f64> {
    let s = characteristic_scales(m, d)?;
    if !s.rabi_is_real {
        return Err(Error::InvalidArgument("no oscillation when over-damped".into()));
    }
    Ok(2.0 / s.omega_e * (s.omega_e / (2.0 * s.gamma_e)).atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnalyticForm {
    /// L·κ̃(τ), damped Rabi oscillation
    Rabi,
    /// sinh form
    Overdamped,
    /// difference of exponentials
    WeakCoupling,
    /// rectangle on [0, τg]
    Rect,
    /// exponential tail
    Lossy,
}

/// A closed form sampled on a τ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticWaveform {
    pub waveform: Waveform,
    pub form: AnalyticForm,
    /// B for the Rabi/over-damped families, κ0 for the group-delay ones.
    pub prefactor: Complex64,
}

impl AnalyticWaveform {
    pub fn sample(form: AnalyticForm, grid: TauGrid, m: &MediumParams, d: &DriveParams) -> Result<Self> {
        let r = Response::new(m, d)?;
        let values = grid
            .iter()
            .map(|t| match form {
                AnalyticForm::Rabi => Ok(kappa_t_with(&r, t) * m.length),
                AnalyticForm::Overdamped => analytic_overdamped(t, m, d),
                AnalyticForm::WeakCoupling => analytic_weak_coupling(t, m, d),
                AnalyticForm::Rect => analytic_rect(t, m, d),
                AnalyticForm::Lossy => analytic_lossy(t, m, d),
            })
            .collect::<Result<Vec<_>>>()?;
        let prefactor = match form {
            AnalyticForm::Rect | AnalyticForm::Lossy => r.kappa(0.0)?,
            AnalyticForm::WeakCoupling => {
                -2.0 * pole_residue_scale(&r) / (m.gamma13 - m.gamma12)
            }
            AnalyticForm::Overdamped | AnalyticForm::Rabi => {
                let oe = r.effective_rabi();
                if oe.norm() == 0.0 {
                    Complex64::new(f64::NAN, f64::NAN)
                } else if oe.re == 0.0 {
                    -2.0 * pole_residue_scale(&r) / oe.im
                } else {
                    -2.0 * pole_residue_scale(&r) / oe
                }
            }
        };
        Ok(AnalyticWaveform {
            waveform: Waveform::new(grid, values)?,
            form,
            prefactor,
        })
    }

    /// The closed form matching a regime label, if any.
    pub fn for_label(label: RegimeLabel, grid: TauGrid, m: &MediumParams, d: &DriveParams) -> Result<Option<Self>> {
        let form = match label {
            RegimeLabel::DampedRabi => AnalyticForm::Rabi,
            RegimeLabel::OverdampedRabi => AnalyticForm::Overdamped,
            RegimeLabel::GroupDelayLossless => AnalyticForm::Rect,
            RegimeLabel::GroupDelayLossy => AnalyticForm::Lossy,
            RegimeLabel::Mixed => return Ok(None),
        };
        Self::sample(form, grid, m, d).map(Some)
    }
}

/// Shape agreement between a numeric and a closed-form waveform.
///
/// Both |ψ|² profiles are normalized to unit area, the closed form is then
/// scaled by the least-squares optimal positive factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMetrics {
    /// ‖g_n − s·g_a‖ / ‖g_n‖
    pub rms_rel: f64,
    /// |argmax g_n − argmax g_a| (s)
    pub peak_shift: f64,
    /// Duration where exactly one profile is above 10% of its peak (s).
    pub support_mismatch: f64,
}

pub fn compare(numeric: &Waveform, analytic: &AnalyticWaveform) -> Result<ComparisonMetrics> {
    compare_where(numeric, analytic, |_| true)
}

/// [`compare`] restricted to delays where `keep(τ)` holds.
pub fn compare_where(
    numeric: &Waveform,
    analytic: &AnalyticWaveform,
    keep: impl Fn(f64) -> bool,
) -> Result<ComparisonMetrics> {
    let a = &analytic.waveform;
    if !numeric.grid.matches(&a.grid) {
        return Err(Error::GridMismatch("numeric and closed-form tau grids differ".into()));
    }
    let idx: Vec<usize> = (0..numeric.grid.len).filter(|&m| keep(numeric.grid.tau(m))).collect();
    if idx.is_empty() {
        return Err(Error::InvalidArgument("comparison window is empty".into()));
    }
    let gn: Vec<f64> = idx.iter().map(|&m| numeric.values[m].norm_sqr()).collect();
    let ga: Vec<f64> = idx.iter().map(|&m| a.values[m].norm_sqr()).collect();
    let (sn, sa): (f64, f64) = (gn.iter().sum(), ga.iter().sum());
    if sn == 0.0 || sa == 0.0 {
        return Err(Error::InvalidArgument("cannot normalize a zero waveform".into()));
    }
    let gn: Vec<f64> = gn.iter().map(|v| v / sn).collect();
    let ga: Vec<f64> = ga.iter().map(|v| v / sa).collect();
    let cross: f64 = gn.iter().zip(&ga).map(|(x, y)| x * y).sum();
    let aa: f64 = ga.iter().map(|y| y * y).sum();
    let scale = (cross / aa).max(0.0);
    let resid: f64 = gn.iter().zip(&ga).map(|(x, y)| (x - scale * y).powi(2)).sum();
    let nn: f64 = gn.iter().map(|x| x * x).sum();

    let argmax = |v: &[f64]| {
        v.iter()
            .enumerate()
            .max_by(|p, q| p.1.total_cmp(q.1))
            .map(|(i, _)| i)
            .unwrap()
    };
    let (pn, pa) = (argmax(&gn), argmax(&ga));
    let tau = |i: usize| numeric.grid.tau(idx[i]);
    let (mn, ma) = (gn[pn], ga[pa]);
    let differing = gn
        .iter()
        .zip(&ga)
        .filter(|(x, y)| (**x >= 0.1 * mn) != (**y >= 0.1 * ma))
        .count();
    Ok(ComparisonMetrics {
        rms_rel: (resid / nn).sqrt(),
        peak_shift: (tau(pn) - tau(pa)).abs(),
        support_mismatch: differing as f64 * numeric.grid.step,
    })
}

/// Log-linear least-squares fit of |ψ|² over [t0, t1]; returns the decay
/// time τd of |ψ|² ∝ e^{−τ/τd}.
pub fn fit_decay_time(w: &Waveform, t0: f64, t1: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = w
        .grid
        .iter()
        .zip(&w.values)
        .filter(|(t, v)| *t >= t0 && *t <= t1 && v.norm_sqr() > 0.0)
        .map(|(t, v)| (t, v.norm_sqr().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!("too few samples in [{t0:e}, {t1:e}]")));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::InvalidArgument("|psi|^2 is not decaying in the fit window".into()));
    }
    Ok(-1.0 / slope)
}

/// Everything known about one scenario run, ready to serialize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub scales: DerivedScales,
    pub label: RegimeLabel,
    pub criteria: RegimeCriteria,
    pub oracle: Option<AnalyticForm>,
    pub oracle_trusted: bool,
    pub comparison: Option<ComparisonMetrics>,
    pub pair_rate: PairRate,
    pub correlation_width: f64,
    pub warnings: Vec<String>,
}

pub fn report(scenario: &Scenario, sim: &Simulation) -> Result<RegimeReport> {
    let (m, d) = (&scenario.medium, &scenario.drive);
    let scales = characteristic_scales(m, d)?;
    let class = classify_with_variant(m, d, scenario.variant)?;
    let oracle = AnalyticWaveform::for_label(class.label, sim.waveform.grid, m, d)?;
    let comparison = match &oracle {
        Some(a) => Some(compare(&sim.waveform, a)?),
        None => None,
    };
    let oracle_trusted = match class.label {
        RegimeLabel::DampedRabi | RegimeLabel::OverdampedRabi => {
            rabi_oracle_trusted(&scales, scenario.variant)
        }
        RegimeLabel::GroupDelayLossless | RegimeLabel::GroupDelayLossy => {
            class.criteria.transparency_exceeds_phase_matching
        }
        RegimeLabel::Mixed => false,
    };
    let mut warnings = d.validity_warnings();
    if sim.rate.relative_discrepancy() > 1e-6 {
        warnings.push(format!(
            "pair rate paths disagree by {:e}",
            sim.rate.relative_discrepancy()
        ));
    }
    Ok(RegimeReport {
        scales,
        label: class.label,
        criteria: class.criteria,
        oracle: oracle.as_ref().map(|a| a.form),
        oracle_trusted,
        comparison,
        pair_rate: sim.rate,
        correlation_width: crate::biphoton::correlation_width(&sim.waveform, 0.1),
        warnings,
    })
}
