//! Physical-layer models: free-space and two-ray path loss, QPSK mapping,
//! AWGN / Rician / Rayleigh channels and bit-error rates.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed, SimRng, UnitDraw};
use crate::{Error, Result};

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn ground_reflection_default() -> f64 {
    -1.0
}

/// Geometry and gains of one radio link.
///
/// The two-ray model uses separate gain products for the direct and the
/// ground-reflected path; both default to `tx_gain · rx_gain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// W
    pub tx_power: f64,
    /// linear
    pub tx_gain: f64,
    /// linear
    pub rx_gain: f64,
    /// m
    pub wavelength: f64,
    /// Horizontal separation, m.
    pub distance: f64,
    #[serde(default)]
    pub tx_height: f64,
    #[serde(default)]
    pub rx_height: f64,
    /// In `[-1, 0]`; `-1` is a perfect reflector.
    #[serde(default = "ground_reflection_default")]
    pub ground_reflection: f64,
    #[serde(default)]
    pub los_gain: Option<f64>,
    #[serde(default)]
    pub reflected_gain: Option<f64>,
}

impl LinkParams {
    pub fn at_distance(&self, distance: f64) -> Self {
        Self {
            distance,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power", self.tx_power),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("wavelength", self.wavelength),
            ("distance", self.distance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(-1.0..=0.0).contains(&self.ground_reflection) {
            return Err(Error::domain(format!(
                "ground_reflection must lie in [-1, 0], got {}",
                self.ground_reflection
            )));
        }
        for g in [self.los_gain, self.reflected_gain].into_iter().flatten() {
            if !(g > 0.0) {
                return Err(Error::domain("path gains must be > 0"));
            }
        }
        Ok(())
    }

    fn check_heights(&self) -> Result<()> {
        if !(self.tx_height > 0.0 && self.rx_height > 0.0) {
            return Err(Error::domain("two-ray model needs tx_height > 0 and rx_height > 0"));
        }
        Ok(())
    }

    /// Direct-path distance `√(d² + (h_t − h_r)²)`.
    pub fn d_los(&self) -> f64 {
        self.distance.hypot(self.tx_height - self.rx_height)
    }

    /// Reflected-path distance `√(d² + (h_t + h_r)²)`.
    pub fn d_ref(&self) -> f64 {
        self.distance.hypot(self.tx_height + self.rx_height)
    }

    /// Distance beyond which the two-ray power falls as `d⁻⁴`:
    /// `4π h_t h_r / λ`.
    pub fn crossover_distance(&self) -> f64 {
        4.0 * PI * self.tx_height * self.rx_height / self.wavelength
    }
}

/// `Pr = Pt·Gt·Gr·λ² / (4πd)²`, W.
pub fn friis_received_power(link: &LinkParams) -> Result<f64> {
    link.validate()?;
    let d = link.distance;
    Ok(link.tx_power * link.tx_gain * link.rx_gain * link.wavelength.powi(2) / (4.0 * PI * d).powi(2))
}

/// Coherent sum of the direct and ground-reflected rays:
/// `Pt·(λ/4π)²·|√G_los/d_los + R·e^{−jφ}·√G_ref/d_ref|²` with
/// `φ = 2π(d_ref − d_los)/λ`.
pub fn two_ray_received_power(link: &LinkParams) -> Result<f64> {
    link.validate()?;
    link.check_heights()?;
    let g = link.tx_gain * link.rx_gain;
    let g_los = link.los_gain.unwrap_or(g);
    let g_ref = link.reflected_gain.unwrap_or(g);
    let (d_los, d_ref) = (link.d_los(), link.d_ref());
    let phi = TAU * (d_ref - d_los) / link.wavelength;
    let field = Complex64::new(g_los.sqrt() / d_los, 0.0)
        + Complex64::from_polar(link.ground_reflection * g_ref.sqrt() / d_ref, -phi);
    Ok(link.tx_power * (link.wavelength / (4.0 * PI)).powi(2) * field.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub distance: f64,
    pub friis_dbm: f64,
    pub two_ray_dbm: f64,
}

pub fn received_power_sweep(link: &LinkParams, distances: &[f64]) -> Result<Vec<PowerSample>> {
    distances
        .iter()
        .map(|&d| {
            let l = link.at_distance(d);
            Ok(PowerSample {
                distance: d,
                friis_dbm: watts_to_dbm(friis_received_power(&l)?),
                two_ray_dbm: watts_to_dbm(two_ray_received_power(&l)?),
            })
        })
        .collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

// ---------------------------------------------------------------------------
// QPSK

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqSymbol {
    pub in_phase: f64,
    pub quadrature: f64,
}

impl IqSymbol {
    pub fn new(in_phase: f64, quadrature: f64) -> Self {
        Self { in_phase, quadrature }
    }

    pub fn energy(&self) -> f64 {
        self.in_phase.powi(2) + self.quadrature.powi(2)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.in_phase, self.quadrature)
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self::new(c.re, c.im)
    }
}

/// Gray map: first bit of a pair sets the sign of I, second the sign of Q,
/// with `0 → +1/√2` and `1 → −1/√2`. Adjacent points differ in one bit.
pub fn qpsk_map(b0: u8, b1: u8) -> IqSymbol {
    let level = |b: u8| if b == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    IqSymbol::new(level(b0), level(b1))
}

pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<IqSymbol>> {
    if bits.len() % 2 != 0 {
        return Err(Error::domain(format!(
            "QPSK needs an even bit count, got {}",
            bits.len()
        )));
    }
    if let Some(b) = bits.iter().find(|b| **b > 1) {
        return Err(Error::domain(format!("bits must be 0 or 1, got {b}")));
    }
    Ok(bits.chunks_exact(2).map(|p| qpsk_map(p[0], p[1])).collect())
}

/// Sign decisions; a component of exactly zero decides `0`.
pub fn qpsk_decide(s: IqSymbol) -> [u8; 2] {
    [(s.in_phase < 0.0) as u8, (s.quadrature < 0.0) as u8]
}

pub fn qpsk_demodulate(symbols: &[IqSymbol]) -> Vec<u8> {
    symbols.iter().flat_map(|s| qpsk_decide(*s)).collect()
}

// ---------------------------------------------------------------------------
// Fading channels

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingKind {
    Awgn,
    Rician,
    Rayleigh,
}

fn default_rician_k() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    pub kind: FadingKind,
    /// Linear LOS-to-scatter power ratio; the default 10 is 10 dB.
    #[serde(default = "default_rician_k")]
    pub rician_k: f64,
    #[serde(default)]
    pub seed: u64,
}

impl FadingParams {
    pub fn awgn(seed: u64) -> Self {
        Self {
            kind: FadingKind::Awgn,
            rician_k: default_rician_k(),
            seed,
        }
    }

    pub fn rician(k: f64, seed: u64) -> Self {
        Self {
            kind: FadingKind::Rician,
            rician_k: k,
            seed,
        }
    }

    pub fn rayleigh(seed: u64) -> Self {
        Self {
            kind: FadingKind::Rayleigh,
            rician_k: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rician_k >= 0.0) {
            return Err(Error::domain(format!("rician_k must be >= 0, got {}", self.rician_k)));
        }
        Ok(())
    }

    /// K actually applied: Rayleigh is the `K = 0` case of Rician.
    fn effective_k(&self) -> Option<f64> {
        match self.kind {
            FadingKind::Awgn => None,
            FadingKind::Rician => Some(self.rician_k),
            FadingKind::Rayleigh => Some(0.0),
        }
    }
}

/// Per-component noise standard deviation for unit-energy QPSK symbols.
///
/// `Es = 2·Eb = 1`, so `N0 = 1/(2·Eb/N0)` and each of I and Q gets `N0/2`.
fn noise_sigma(ebn0_db: f64) -> f64 {
    (1.0 / (4.0 * db_to_linear(ebn0_db))).sqrt()
}

fn complex_normal(rng: &mut SimRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// `h = √(K/(K+1)) + √(1/(K+1))·CN(0, 1)`; `E|h|² = 1`.
fn fading_gain(k: f64, rng: &mut SimRng) -> Complex64 {
    let scatter = complex_normal(rng) * FRAC_1_SQRT_2;
    if k.is_infinite() {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::new((k / (k + 1.0)).sqrt(), 0.0) + scatter * (1.0 / (k + 1.0)).sqrt()
}

/// Draw order per symbol: fading pair (re, im) when fading, then noise pair.
fn pass_symbol(s: IqSymbol, k: Option<f64>, sigma: f64, rng: &mut SimRng) -> (Complex64, Complex64) {
    let h = k.map_or(Complex64::new(1.0, 0.0), |k| fading_gain(k, rng));
    let n = complex_normal(rng) * sigma;
    (h * s.to_complex() + n, h)
}

/// Received symbols and the channel gain that hit each one.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput {
    pub received: Vec<IqSymbol>,
    pub gains: Vec<Complex64>,
}

impl ChannelOutput {
    /// Zero-forcing equalization `y/h` with the true gains.
    pub fn equalized(&self) -> Vec<IqSymbol> {
        self.received
            .iter()
            .zip(&self.gains)
            .map(|(y, h)| IqSymbol::from_complex(y.to_complex() / h))
            .collect()
    }
}

/// Passes symbols through the channel without equalizing.
pub fn transmit(symbols: &[IqSymbol], fading: &FadingParams, ebn0_db: f64) -> Result<ChannelOutput> {
    fading.validate()?;
    let mut rng = rng_from_seed(derive_seed(fading.seed, "channel"));
    let sigma = noise_sigma(ebn0_db);
    let k = fading.effective_k();
    let (received, gains) = symbols
        .iter()
        .map(|s| {
            let (y, h) = pass_symbol(*s, k, sigma, &mut rng);
            (IqSymbol::from_complex(y), h)
        })
        .unzip();
    Ok(ChannelOutput { received, gains })
}

/// Channel followed by ideal-CSI equalization; deterministic per
/// `fading.seed`.
pub fn apply_channel(symbols: &[IqSymbol], fading: &FadingParams, ebn0_db: f64) -> Result<Vec<IqSymbol>> {
    Ok(transmit(symbols, fading, ebn0_db)?.equalized())
}

/// `½·erfc(√(Eb/N0))`.
pub fn ber_qpsk_awgn_theoretical(ebn0_db: f64) -> f64 {
    0.5 * libm::erfc(db_to_linear(ebn0_db).sqrt())
}

/// Average bit-error rate over Rayleigh fading, `½(1 − √(γ/(1+γ)))`.
pub fn ber_qpsk_rayleigh_theoretical(ebn0_db: f64) -> f64 {
    let g = db_to_linear(ebn0_db);
    0.5 * (1.0 - (g / (1.0 + g)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub ber: f64,
    pub n_errors: u64,
    pub n_bits: u64,
}

impl BerEstimate {
    /// Binomial standard deviation of the estimate around `p`.
    pub fn std_dev_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n_bits as f64).sqrt()
    }
}

/// Bits per Monte Carlo shard. Together with the seed and bit count it fixes
/// the result, whatever the number of workers.
pub const SHARD_BITS: u64 = 1 << 16;

pub const MIN_MONTE_CARLO_BITS: u64 = 10_000;

fn run_shard(shard: u64, bits: u64, k: Option<f64>, sigma: f64, seed: u64) -> u64 {
    let mut rng = rng_from_seed(derive_seed(seed, &format!("ber-shard-{shard}")));
    let mut errors = 0;
    for _ in 0..bits / 2 {
        let b = [(rng.unit() < 0.5) as u8, (rng.unit() < 0.5) as u8];
        let (y, h) = pass_symbol(qpsk_map(b[0], b[1]), k, sigma, &mut rng);
        let d = qpsk_decide(IqSymbol::from_complex(y / h));
        errors += (d[0] != b[0]) as u64 + (d[1] != b[1]) as u64;
    }
    errors
}

/// Random bits through modulation, channel, equalization and decision.
///
/// Uses `seed`, not `fading.seed`. With `parallel` the shards run on the
/// rayon pool; the count is identical either way.
pub fn ber_monte_carlo_with(
    fading: &FadingParams,
    ebn0_db: f64,
    n_bits: u64,
    seed: u64,
    parallel: bool,
) -> Result<BerEstimate> {
    fading.validate()?;
    if n_bits % 2 != 0 || n_bits < MIN_MONTE_CARLO_BITS {
        return Err(Error::domain(format!(
            "n_bits must be even and >= {MIN_MONTE_CARLO_BITS}, got {n_bits}"
        )));
    }
    let k = fading.effective_k();
    let sigma = noise_sigma(ebn0_db);
    let n_shards = n_bits.div_ceil(SHARD_BITS);
    let shard_bits = |i: u64| SHARD_BITS.min(n_bits - i * SHARD_BITS);
    let n_errors: u64 = if parallel {
        (0..n_shards)
            .into_par_iter()
            .map(|i| run_shard(i, shard_bits(i), k, sigma, seed))
            .sum()
    } else {
        (0..n_shards).map(|i| run_shard(i, shard_bits(i), k, sigma, seed)).sum()
    };
    Ok(BerEstimate {
        ber: n_errors as f64 / n_bits as f64,
        n_errors,
        n_bits,
    })
}

pub fn ber_monte_carlo(fading: &FadingParams, ebn0_db: f64, n_bits: u64, seed: u64) -> Result<BerEstimate> {
    ber_monte_carlo_with(fading, ebn0_db, n_bits, seed, false)
}
