//! Uniform detuning and delay grids, and the sampled functions living on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ω_j = (j − len/2)·step, j = 0..len. Symmetric about 0 up to one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaGrid {
    pub step: f64,
    pub len: usize,
}

impl OmegaGrid {
    pub fn centered(len: usize, step: f64) -> Result<Self> {
        if len < 4 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid length {len} must be a power of two >= 4"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid step {step} must be > 0")));
        }
        Ok(OmegaGrid { step, len })
    }

    pub fn start(&self) -> f64 {
        -((self.len / 2) as f64) * self.step
    }

    pub fn omega(&self, j: usize) -> f64 {
        (j as f64 - (self.len / 2) as f64) * self.step
    }

    pub fn span(&self) -> f64 {
        self.len as f64 * self.step
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |j| self.omega(j))
    }

    /// Δτ = 2π / (len·step).
    pub fn tau_step(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.span()
    }
}

/// Where the τ samples sit relative to τ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauOffset {
    /// τ_m = (m − len/2)·Δτ, samples τ = 0 exactly.
    Integer,
    /// τ_m = (m − len/2 + 1/2)·Δτ, symmetric about 0 and never samples it.
    HalfSample,
}

impl TauOffset {
    pub fn fraction(self) -> f64 {
        match self {
            TauOffset::Integer => 0.0,
            TauOffset::HalfSample => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TauGrid {
    pub fn for_omega(grid: &OmegaGrid, offset: TauOffset) -> Self {
        let step = grid.tau_step();
        TauGrid {
            start: (offset.fraction() - (grid.len / 2) as f64) * step,
            step,
            len: grid.len,
        }
    }

    pub fn tau(&self, m: usize) -> f64 {
        self.start + m as f64 * self.step
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |m| self.tau(m))
    }

    pub fn end(&self) -> f64 {
        self.tau(self.len - 1)
    }

    /// Same spacing, length and sample positions to 1e-12 relative.
    pub fn matches(&self, other: &TauGrid) -> bool {
        self.len == other.len
            && (self.step - other.step).abs() <= 1e-12 * self.step.abs()
            && (self.start - other.start).abs() <= 1e-9 * self.step.abs()
    }

    /// Index of the sample nearest to τ, if inside the grid.
    pub fn nearest(&self, tau: f64) -> Option<usize> {
        let x = ((tau - self.start) / self.step).round();
        if x < 0.0 || x >= self.len as f64 {
            None
        } else {
            Some(x as usize)
        }
    }
}

/// Complex samples on an [`OmegaGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub grid: OmegaGrid,
    pub values: Vec<Complex64>,
    /// ϖ_as, kept as metadata.
    pub center_freq: f64,
}

impl ComplexSpectrum {
    pub fn new(grid: OmegaGrid, values: Vec<Complex64>, center_freq: f64) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {}",
                values.len(),
                grid.len
            )));
        }
        Ok(ComplexSpectrum {
            grid,
            values,
            center_freq,
        })
    }

    pub fn from_fn(
        grid: OmegaGrid,
        center_freq: f64,
        mut f: impl FnMut(f64) -> Result<Complex64>,
    ) -> Result<Self> {
        let values = grid.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(ComplexSpectrum {
            grid,
            values,
            center_freq,
        })
    }

    /// Pointwise product; grids must agree.
    pub fn product(&self, other: &ComplexSpectrum) -> Result<ComplexSpectrum> {
        if self.grid.len != other.grid.len
            || (self.grid.step - other.grid.step).abs() > 1e-12 * self.grid.step
        {
            return Err(Error::GridMismatch("spectra on different omega grids".into()));
        }
        Ok(ComplexSpectrum {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            center_freq: self.center_freq,
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Complex ψ(τ) samples on a [`TauGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub grid: TauGrid,
    pub values: Vec<Complex64>,
}

impl Waveform {
    pub fn new(grid: TauGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {}",
                values.len(),
                grid.len
            )));
        }
        Ok(Waveform { grid, values })
    }

    pub fn from_fn(grid: TauGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Waveform {
            grid,
            values: grid.iter().map(f).collect(),
        }
    }

    /// ∫|ψ|² dτ (rectangle rule, exact for the band-limited samples).
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step
    }

    pub fn g2(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn scaled(&self, s: Complex64) -> Waveform {
        Waveform {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}
