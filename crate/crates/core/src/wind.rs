//! Atmospheric disturbance models: turbulence spectra, spectral synthesis of
//! gust series, wind-shear response and airflow drag.
//!
//! Spectra are functions of the spatial frequency `Ω` in rad/m and are
//! two-sided: integrating `Φ(Ω)` over the whole real line yields the gust
//! variance `σ²`. Both models share the intercept `Φ_u(0) = σ_u² L_u / π`.
//!
//! The lateral and vertical forms are evaluated exactly as written below,
//! including the Von Kármán denominator `(1 + 2a(LΩ)²)^(11/6)`:
//!
//! ```text
//! Dryden      Φ_u = σ²L/π · 1 / (1 + (LΩ)²)
//!             Φ_v = Φ_w = σ²L/π · (1 + 12(LΩ)²) / (1 + 4(LΩ)²)²
//! Von Kármán  Φ_u = σ²L/π · (1 + (aLΩ)²)^(−5/6)
//!             Φ_v = Φ_w = σ²L/π · (1 + (8/3)(2aLΩ)²) / (1 + 2a(LΩ)²)^(11/6)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Von Kármán shape constant.
pub const VON_KARMAN_A: f64 = 1.339;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurbulenceModel {
    Dryden,
    VonKarman,
}

/// Body-axis gust component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    U,
    V,
    W,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::U, Component::V, Component::W];

    fn index(self) -> usize {
        match self {
            Component::U => 0,
            Component::V => 1,
            Component::W => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceSpec {
    /// Gust intensities `(σ_u, σ_v, σ_w)` in m/s.
    pub sigma: [f64; 3],
    /// Scale lengths `(L_u, L_v, L_w)` in m.
    pub length: [f64; 3],
    pub model: TurbulenceModel,
}

impl TurbulenceSpec {
    pub fn new(sigma: [f64; 3], length: [f64; 3], model: TurbulenceModel) -> Result<Self> {
        let spec = Self { sigma, length, model };
        spec.validate()?;
        Ok(spec)
    }

    /// Same intensity and scale on all three axes.
    pub fn isotropic(sigma: f64, length: f64, model: TurbulenceModel) -> Result<Self> {
        Self::new([sigma; 3], [length; 3], model)
    }

    pub fn von_karman_a(&self) -> f64 {
        VON_KARMAN_A
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::domain("sigma must be >= 0 on every axis"));
        }
        if self.length.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::domain("length must be > 0 on every axis"));
        }
        Ok(())
    }

    fn axis(&self, c: Component) -> (f64, f64) {
        (self.sigma[c.index()], self.length[c.index()])
    }

    /// Evaluates the configured model.
    pub fn psd(&self, component: Component, omega: f64) -> Result<f64> {
        match self.model {
            TurbulenceModel::Dryden => dryden_psd(self, component, omega),
            TurbulenceModel::VonKarman => von_karman_psd(self, component, omega),
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega >= 0.0) {
        return Err(Error::domain(format!("spatial frequency must be >= 0, got {omega}")));
    }
    Ok(())
}

/// Dryden spectrum of one component, in (m/s)²·m per rad/m.
pub fn dryden_psd(spec: &TurbulenceSpec, component: Component, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let (sigma, l) = spec.axis(component);
    let base = sigma * sigma * l / PI;
    let lo2 = (l * omega).powi(2);
    Ok(match component {
        Component::U => base / (1.0 + lo2),
        Component::V | Component::W => base * (1.0 + 12.0 * lo2) / (1.0 + 4.0 * lo2).powi(2),
    })
}

/// Von Kármán spectrum of one component with `a = 1.339`.
///
/// The v/w denominator is `(1 + 2a(LΩ)²)^(11/6)`, not `(1 + (2aLΩ)²)^(11/6)`;
/// their two-sided integral is about `3.83σ²`.
pub fn von_karman_psd(spec: &TurbulenceSpec, component: Component, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let (sigma, l) = spec.axis(component);
    let a = VON_KARMAN_A;
    let base = sigma * sigma * l / PI;
    Ok(match component {
        Component::U => base * (1.0 + (a * l * omega).powi(2)).powf(-5.0 / 6.0),
        Component::V | Component::W => {
            let num = 1.0 + (8.0 / 3.0) * (2.0 * a * l * omega).powi(2);
            let den = (1.0 + 2.0 * a * (l * omega).powi(2)).powf(11.0 / 6.0);
            base * num / den
        }
    })
}

/// Spatial frequency of DFT bin `k` for `n` samples spaced `spacing` metres.
pub fn bin_frequency(k: usize, n: usize, spacing: f64) -> f64 {
    2.0 * PI * k as f64 / (n as f64 * spacing)
}

/// Generates a zero-mean gust series whose spectrum follows the configured
/// model.
///
/// White Gaussian noise is shaped in the frequency domain: bin `k` (spatial
/// frequency `Ω_k = 2πk / (nΔx)`) receives a complex Gaussian amplitude with
/// `E|X_k|² = n² Φ(Ω_k) ΔΩ`, Hermitian symmetry makes the inverse transform
/// real, and the DC bin is zero. The expected sample variance is therefore
/// `Σ_k Φ(Ω_k) ΔΩ` over the two-sided grid, which tends to `σ²` as the record
/// grows and the spacing shrinks.
pub fn synthesize_turbulence(
    spec: &TurbulenceSpec,
    component: Component,
    sample_spacing: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if n_samples < 2 || !n_samples.is_power_of_two() {
        return Err(Error::domain(format!(
            "n_samples must be a power of two >= 2, got {n_samples}"
        )));
    }
    if !(sample_spacing > 0.0 && sample_spacing.is_finite()) {
        return Err(Error::domain("sample_spacing must be > 0"));
    }

    let n = n_samples;
    let d_omega = bin_frequency(1, n, sample_spacing);
    let mut rng = rng_from_seed(seed);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    let nf = n as f64;

    for k in 1..n / 2 {
        let phi = spec.psd(component, bin_frequency(k, n, sample_spacing))?;
        let scale = nf * (phi * d_omega / 2.0).sqrt();
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        spectrum[k] = Complex64::new(re, im) * scale;
        spectrum[n - k] = spectrum[k].conj();
    }
    let phi_nyq = spec.psd(component, bin_frequency(n / 2, n, sample_spacing))?;
    let re: f64 = StandardNormal.sample(&mut rng);
    spectrum[n / 2] = Complex64::new(re * nf * (phi_nyq * d_omega).sqrt(), 0.0);

    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    Ok(spectrum.into_iter().map(|c| c.re / nf).collect())
}

/// Expected variance of [`synthesize_turbulence`] output for the given grid.
pub fn synthesized_variance(
    spec: &TurbulenceSpec,
    component: Component,
    sample_spacing: f64,
    n_samples: usize,
) -> Result<f64> {
    let d_omega = bin_frequency(1, n_samples, sample_spacing);
    let mut total = 0.0;
    for k in 1..n_samples / 2 {
        total += 2.0 * spec.psd(component, bin_frequency(k, n_samples, sample_spacing))?;
    }
    total += spec.psd(component, bin_frequency(n_samples / 2, n_samples, sample_spacing))?;
    Ok(total * d_omega)
}

/// Coupling between a change in mean wind and the airframe's ground speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindShearCoeff {
    pub p: f64,
}

impl WindShearCoeff {
    pub fn new(p: f64) -> Result<Self> {
        let c = Self { p };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.abs() < 1.0) {
            return Err(Error::domain(format!("|p| must be < 1, got {}", self.p)));
        }
        Ok(())
    }
}

/// Splits a mean-wind change into `(ΔV_g, ΔV_a) = (P ΔV_w, (1 − P) ΔV_w)`.
///
/// The two parts add up to `ΔV_w` exactly in floating point. `ΔV_a` is
/// rounded once and `ΔV_g` is recovered as `ΔV_w − ΔV_a`. For `|P| < 1` that
/// subtraction is exact (Sterbenz), so `ΔV_g` may differ from `P·ΔV_w` by one
/// rounding.
pub fn wind_shear_response(coeff: &WindShearCoeff, delta_vw: f64) -> Result<(f64, f64)> {
    coeff.validate()?;
    let dva = delta_vw - coeff.p * delta_vw;
    Ok((delta_vw - dva, dva))
}

/// Airflow force `F_D = ρ v² C_D S`.
///
/// There is deliberately no ½ factor, so the result is twice the textbook
/// drag-equation value for the same inputs.
pub fn airflow_drag_force(air_density: f64, airflow_speed: f64, drag_coeff: f64, windward_area: f64) -> f64 {
    air_density * airflow_speed * airflow_speed * drag_coeff * windward_area
}
