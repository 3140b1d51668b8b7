//! Link-budget ledger and derived RF quantities.
//!
//! Budget items are relative dB values applied on top of a transmit power
//! expressed in the same reference. Two modes exist because the reference
//! worked example contains printed totals that do not match their own items:
//!
//! - [`BudgetMode::PaperLiteral`] takes configured printed totals and the
//!   printed noise-figure line so that every downstream printed number is
//!   reproduced;
//! - [`BudgetMode::CorrectedSum`] re-adds every table and uses `10·log10` for
//!   the noise figure.
//!
//! Both attach a list of [`Discrepancy`] entries, one per printed value that
//! differs from what its inputs give.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::{self, LinkParams};
use crate::{Error, Result};

/// Speed of light used for wavelengths, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
/// Thermal noise density at room temperature, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;
/// Printed values closer than this to the computed ones are not flagged.
pub const DISCREPANCY_TOLERANCE: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    PaperLiteral,
    CorrectedSum,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be > 0, got {v}")))
    }
}

/// `20·log10(λ/(4πd))`; negative for any realistic link.
pub fn path_loss_db(wavelength: f64, distance: f64) -> Result<f64> {
    positive("wavelength", wavelength)?;
    positive("distance", distance)?;
    Ok(20.0 * (wavelength / (4.0 * PI * distance)).log10())
}

pub fn wavelength(freq: f64) -> Result<f64> {
    positive("frequency", freq)?;
    Ok(SPEED_OF_LIGHT / freq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFigure {
    pub linear: f64,
    pub db: f64,
}

/// `F = 1 + Te/To`; `20·log10 F` in PaperLiteral mode, `10·log10 F` otherwise.
pub fn noise_figure(te: f64, to: f64, mode: BudgetMode) -> Result<NoiseFigure> {
    if !(te >= 0.0) {
        return Err(Error::domain(format!("te must be >= 0, got {te}")));
    }
    positive("to", to)?;
    let linear = 1.0 + te / to;
    let db = match mode {
        BudgetMode::PaperLiteral => 20.0 * linear.log10(),
        BudgetMode::CorrectedSum => 10.0 * linear.log10(),
    };
    Ok(NoiseFigure { linear, db })
}

/// `−174 + 10·log10(B) + F_dB`, dBm.
pub fn noise_power_dbm(bandwidth: f64, noise_figure_db: f64) -> Result<f64> {
    positive("bandwidth", bandwidth)?;
    Ok(THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth.log10() + noise_figure_db)
}

/// `ρ = (VSWR − 1)/(VSWR + 1)`.
pub fn vswr_to_reflection(vswr: f64) -> Result<f64> {
    if !(vswr >= 1.0) {
        return Err(Error::domain(format!("vswr >= 1 required, got {vswr}")));
    }
    if vswr.is_infinite() {
        return Ok(1.0);
    }
    Ok((vswr - 1.0) / (vswr + 1.0))
}

/// `VSWR = (1 + |ρ|)/(1 − |ρ|)`.
pub fn reflection_to_vswr(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::domain(format!("|rho| < 1 required, got {rho}")));
    }
    Ok((1.0 + rho.abs()) / (1.0 - rho.abs()))
}

/// `P_i = P_t/(1 − ρ²)`.
pub fn incident_power(delivered: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::domain(format!("|rho| < 1 required, got {rho}")));
    }
    Ok(delivered / (1.0 - rho * rho))
}

/// Solves `ρ = (Z_i − Z_o)/(Z_i + Z_o)` for `Z_o`.
pub fn output_impedance(rho: f64, zi: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::domain(format!("|rho| < 1 required, got {rho}")));
    }
    Ok(zi * (1.0 - rho) / (1.0 + rho))
}

// ---------------------------------------------------------------------------
// Budget

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLineItem {
    pub label: String,
    /// Losses are negative.
    pub value_db: f64,
}

impl BudgetLineItem {
    pub fn new(label: impl Into<String>, value_db: f64) -> Self {
        Self {
            label: label.into(),
            value_db,
        }
    }
}

fn default_standard_temp() -> f64 {
    298.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaSpec {
    /// Hz
    pub freq_low: f64,
    /// Hz
    pub freq_high: f64,
    pub gain_dbi: f64,
    pub vswr: f64,
    /// Power delivered to the antenna, W.
    pub input_power: f64,
    /// Ω
    pub input_impedance: f64,
    /// Threshold quoted with the antenna data, dBm.
    pub rx_threshold_dbm: f64,
    /// m
    pub link_length: f64,
    /// `Te`, K.
    pub operational_temp: f64,
    /// `To`, K.
    #[serde(default = "default_standard_temp")]
    pub standard_temp: f64,
}

impl AntennaSpec {
    /// 2.2-2.4 GHz, 3 dBi, VSWR 1.5, 50 W into 50 Ω over 2 km.
    pub fn reference() -> Self {
        Self {
            freq_low: 2.2e9,
            freq_high: 2.4e9,
            gain_dbi: 3.0,
            vswr: 1.5,
            input_power: 50.0,
            input_impedance: 50.0,
            rx_threshold_dbm: -85.0,
            link_length: 2000.0,
            operational_temp: 358.0,
            standard_temp: 298.0,
        }
    }

    /// Lists every violated constraint.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.vswr >= 1.0) {
            v.push(format!("vswr: vswr >= 1 (got {})", self.vswr));
        }
        if !(self.freq_low > 0.0 && self.freq_low < self.freq_high) {
            v.push("freq_low: 0 < freq_low < freq_high".into());
        }
        if !(self.input_impedance > 0.0) {
            v.push("input_impedance: impedance > 0".into());
        }
        if !(self.input_power > 0.0) {
            v.push("input_power: power > 0".into());
        }
        if !(self.link_length > 0.0) {
            v.push("link_length: length > 0".into());
        }
        if !(self.operational_temp >= 0.0 && self.standard_temp > 0.0) {
            v.push("operational_temp: te >= 0 and to > 0".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some(m) => Err(Error::domain(m.clone())),
        }
    }
}

/// Totals and line values as printed in a reference table. In PaperLiteral
/// mode the first three replace the computed sums, and `noise_figure_db`
/// replaces the computed noise figure. All are compared against the computed
/// values for the discrepancy list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrintedValues {
    pub eirp_db: Option<f64>,
    pub total_path_loss_db: Option<f64>,
    pub total_rx_gain_db: Option<f64>,
    pub noise_figure_db: Option<f64>,
    /// RSL as printed in the RSL table.
    pub rsl_db: Option<f64>,
    /// RSL as carried into the noise table.
    pub rsl_carried_db: Option<f64>,
    pub noise_power_dbm: Option<f64>,
    pub link_margin_db: Option<f64>,
    /// Free-space path loss quoted in the antenna text.
    pub path_loss_text_db: Option<f64>,
    /// Transmit power as printed, with the unit the text gives it (dBm).
    pub tx_power_dbm: Option<f64>,
    /// Antenna gain as printed in the tables.
    pub antenna_gain_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub antenna: AntennaSpec,
    pub tx_items: Vec<BudgetLineItem>,
    pub loss_items: Vec<BudgetLineItem>,
    pub rx_items: Vec<BudgetLineItem>,
    pub interference_margin_db: f64,
    /// Hz
    pub noise_bandwidth: f64,
    /// Threshold used in the margin, dB on the same reference as the RSL.
    pub rx_threshold_db: f64,
    #[serde(default)]
    pub printed: PrintedValues,
}

impl BudgetConfig {
    /// The reference worked example: three item tables, a 25 MHz noise
    /// bandwidth, a −88 dB threshold and the printed totals.
    pub fn reference() -> Self {
        let items = |v: &[(&str, f64)]| v.iter().map(|(l, x)| BudgetLineItem::new(*l, *x)).collect();
        Self {
            antenna: AntennaSpec::reference(),
            tx_items: items(&[
                ("Tx Gain", 2.0),
                ("Tx Loss", -0.1),
                ("Tx Power", 16.989),
                ("Radome Loss", -0.1),
            ]),
            loss_items: items(&[
                ("Path Loss", -101.06),
                ("Tx Pointing Error", -0.5),
                ("Rain Loss", -1.0),
                ("Multipath", -1.0),
                ("Atmospheric Loss", -0.1),
            ]),
            rx_items: items(&[
                ("Rx Gain", 2.0),
                ("Polarisation Loss", -0.1),
                ("Rx Loss", -0.1),
                ("Rx Pointing Loss", -0.5),
            ]),
            interference_margin_db: -1.0,
            noise_bandwidth: 25e6,
            rx_threshold_db: -88.0,
            printed: PrintedValues {
                eirp_db: Some(18.789),
                total_path_loss_db: Some(-101.66),
                total_rx_gain_db: Some(1.1),
                noise_figure_db: Some(6.84),
                rsl_db: Some(-81.171),
                rsl_carried_db: Some(-81.771),
                noise_power_dbm: Some(-93.18),
                link_margin_db: Some(6.229),
                path_loss_text_db: Some(-106.06),
                tx_power_dbm: Some(16.989),
                antenna_gain_db: Some(2.0),
            },
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = self.antenna.violations();
        for (name, items) in [
            ("tx_items", &self.tx_items),
            ("loss_items", &self.loss_items),
            ("rx_items", &self.rx_items),
        ] {
            if items.is_empty() {
                v.push(format!("{name}: at least one line item"));
            }
            if items.iter().any(|i| !i.value_db.is_finite()) {
                v.push(format!("{name}: values finite"));
            }
        }
        if !(self.noise_bandwidth > 0.0) {
            v.push("noise_bandwidth: bandwidth > 0".into());
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub printed: f64,
    pub computed: f64,
    pub note: String,
}

/// Antenna-derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRf {
    pub wavelength_low_m: f64,
    pub wavelength_high_m: f64,
    /// Free-space loss over the link length at the upper band edge, dB.
    pub free_space_loss_db: f64,
    pub reflection_coefficient: f64,
    pub incident_power_w: f64,
    pub output_impedance_ohm: f64,
    pub antenna_gain_linear: f64,
    pub tx_power_dbw: f64,
    pub tx_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub mode: BudgetMode,
    pub tx_items: Vec<BudgetLineItem>,
    pub loss_items: Vec<BudgetLineItem>,
    pub rx_items: Vec<BudgetLineItem>,
    pub eirp_db: f64,
    pub total_path_loss_db: f64,
    pub total_rx_gain_db: f64,
    pub rsl_db: f64,
    pub interference_margin_db: f64,
    pub noise_figure: NoiseFigure,
    pub noise_bandwidth_hz: f64,
    pub noise_power_dbm: f64,
    pub rx_threshold_db: f64,
    pub link_margin_db: f64,
    pub derived: DerivedRf,
    pub discrepancies: Vec<Discrepancy>,
}

fn sum(items: &[BudgetLineItem]) -> f64 {
    items.iter().map(|i| i.value_db).sum()
}

fn derive_rf(a: &AntennaSpec) -> Result<DerivedRf> {
    let lambda_hi = wavelength(a.freq_high)?;
    let rho = vswr_to_reflection(a.vswr)?;
    let dbw = 10.0 * a.input_power.log10();
    Ok(DerivedRf {
        wavelength_low_m: wavelength(a.freq_low)?,
        wavelength_high_m: lambda_hi,
        free_space_loss_db: path_loss_db(lambda_hi, a.link_length)?,
        reflection_coefficient: rho,
        incident_power_w: incident_power(a.input_power, rho)?,
        output_impedance_ohm: output_impedance(rho, a.input_impedance)?,
        antenna_gain_linear: 10f64.powf(a.gain_dbi / 10.0),
        tx_power_dbw: dbw,
        tx_power_dbm: dbw + 30.0,
    })
}

/// Builds the ledger in the requested mode.
///
/// `EIRP = Σ tx`, `L = Σ loss`, `G = Σ rx` (PaperLiteral substitutes printed
/// totals where configured), `RSL = EIRP + G + L`,
/// `margin = EIRP + L + G − threshold`.
pub fn compute_budget(config: &BudgetConfig, mode: BudgetMode) -> Result<LinkBudget> {
    if let Some(v) = config.violations().first() {
        return Err(Error::Config(v.clone()));
    }
    let a = &config.antenna;
    let p = &config.printed;
    let derived = derive_rf(a)?;
    let literal = mode == BudgetMode::PaperLiteral;
    let pick = |printed: Option<f64>, computed: f64| if literal { printed.unwrap_or(computed) } else { computed };

    let (eirp_sum, loss_sum, rx_sum) = (sum(&config.tx_items), sum(&config.loss_items), sum(&config.rx_items));
    let eirp = pick(p.eirp_db, eirp_sum);
    let path_loss = pick(p.total_path_loss_db, loss_sum);
    let rx_gain = pick(p.total_rx_gain_db, rx_sum);
    let rsl = eirp + rx_gain + path_loss;

    let computed_nf = noise_figure(a.operational_temp, a.standard_temp, mode)?;
    let nf = NoiseFigure {
        linear: computed_nf.linear,
        db: pick(p.noise_figure_db, computed_nf.db),
    };
    let noise = noise_power_dbm(config.noise_bandwidth, nf.db)?;
    let margin = eirp + path_loss + rx_gain - config.rx_threshold_db;

    let mut d = Vec::new();
    let mut flag = |quantity: &str, printed: Option<f64>, computed: f64, note: String| {
        if let Some(pv) = printed {
            if (pv - computed).abs() > DISCREPANCY_TOLERANCE {
                d.push(Discrepancy {
                    quantity: quantity.into(),
                    printed: pv,
                    computed,
                    note,
                });
            }
        }
    };
    flag(
        "eirp_db",
        p.eirp_db,
        eirp_sum,
        "printed EIRP differs from the sum of the tx items".into(),
    );
    flag(
        "total_path_loss_db",
        p.total_path_loss_db,
        loss_sum,
        "printed total differs from the sum of the loss items".into(),
    );
    flag(
        "total_rx_gain_db",
        p.total_rx_gain_db,
        rx_sum,
        "printed total differs from the sum of the rx items".into(),
    );
    let table_path_loss = config
        .loss_items
        .iter()
        .find(|i| i.label.eq_ignore_ascii_case("path loss"))
        .map(|i| i.value_db);
    if let Some(item) = table_path_loss {
        flag(
            "path_loss_db",
            p.path_loss_text_db,
            item,
            format!(
                "quoted free-space loss differs from the path-loss line item; 20log10(λ/4πd) gives {:.3} dB",
                derived.free_space_loss_db
            ),
        );
    }
    flag(
        "rsl_db",
        p.rsl_db,
        eirp + rx_gain + path_loss,
        "printed RSL differs from EIRP + Rx gain + path loss".into(),
    );
    flag(
        "rsl_carried_db",
        p.rsl_carried_db,
        rsl,
        "RSL carried into the noise table differs from EIRP + Rx gain + path loss".into(),
    );
    flag(
        "rx_threshold_db",
        Some(a.rx_threshold_dbm),
        config.rx_threshold_db,
        "threshold quoted with the antenna differs from the one used in the margin".into(),
    );
    let nf_20log = 20.0 * computed_nf.linear.log10();
    let nf_power = 10.0 * computed_nf.linear.log10();
    flag(
        "noise_figure_db",
        p.noise_figure_db,
        computed_nf.db,
        format!(
            "F = {:.4}: 20log10 F = {nf_20log:.3} dB, 10log10 F = {nf_power:.3} dB (a power ratio takes 10log10)",
            computed_nf.linear
        ),
    );
    flag(
        "noise_power_dbm",
        p.noise_power_dbm,
        noise_power_dbm(config.noise_bandwidth, computed_nf.db)?,
        "printed noise power differs from −174 + 10log10(B) + F_dB with the computed F_dB".into(),
    );
    flag(
        "link_margin_db",
        p.link_margin_db,
        eirp_sum + loss_sum + rx_sum - config.rx_threshold_db,
        "printed margin differs from the margin of the re-added tables".into(),
    );
    flag(
        "tx_power_dbm",
        p.tx_power_dbm,
        derived.tx_power_dbm,
        format!(
            "10log10({} W) = {:.3} is in dBW; the same power is {:.3} dBm",
            a.input_power, derived.tx_power_dbw, derived.tx_power_dbm
        ),
    );
    flag(
        "antenna_gain_db",
        p.antenna_gain_db,
        a.gain_dbi,
        format!(
            "printed gain {:.3} is the linear ratio of {} dBi, not a dB value",
            derived.antenna_gain_linear, a.gain_dbi
        ),
    );

    Ok(LinkBudget {
        mode,
        tx_items: config.tx_items.clone(),
        loss_items: config.loss_items.clone(),
        rx_items: config.rx_items.clone(),
        eirp_db: eirp,
        total_path_loss_db: path_loss,
        total_rx_gain_db: rx_gain,
        rsl_db: rsl,
        interference_margin_db: config.interference_margin_db,
        noise_figure: nf,
        noise_bandwidth_hz: config.noise_bandwidth,
        noise_power_dbm: noise,
        rx_threshold_db: config.rx_threshold_db,
        link_margin_db: margin,
        derived,
        discrepancies: d,
    })
}

const LABEL_WIDTH: usize = 24;

fn line(out: &mut String, label: &str, value: f64, unit: &str) {
    let _ = writeln!(out, "{}", format!("{label:>LABEL_WIDTH$} {value:.3} {unit}").trim_end());
}

/// Aligned plain-text report: labels right-aligned, one space, value, unit.
pub fn render_report(b: &LinkBudget) -> String {
    let mut out = String::new();
    let mode = match b.mode {
        BudgetMode::PaperLiteral => "paper-literal",
        BudgetMode::CorrectedSum => "corrected-sum",
    };
    let _ = writeln!(out, "Link budget ({mode})");
    for (title, items, total_label, total) in [
        ("Tx", &b.tx_items, "EIRP", b.eirp_db),
        ("Losses", &b.loss_items, "Total Path Loss", b.total_path_loss_db),
        ("Rx", &b.rx_items, "Total Rx Gain", b.total_rx_gain_db),
    ] {
        let _ = writeln!(out, "\n[{title}]");
        for i in items {
            line(&mut out, &i.label, i.value_db, "dB");
        }
        line(&mut out, total_label, total, "dB");
    }
    let _ = writeln!(out, "\n[Noise]");
    line(&mut out, "RSL", b.rsl_db, "dB");
    line(&mut out, "Interference Margin", b.interference_margin_db, "dB");
    line(&mut out, "Rx Noise Figure", b.noise_figure.db, "dB");
    line(&mut out, "Noise Bandwidth", b.noise_bandwidth_hz / 1e6, "MHz");
    line(&mut out, "Total Noise Power", b.noise_power_dbm, "dBm");
    line(&mut out, "Threshold Rx", b.rx_threshold_db, "dB");
    let _ = writeln!(out, "\n[Margin]");
    line(&mut out, "Link Margin", b.link_margin_db, "dB");

    let r = &b.derived;
    let _ = writeln!(out, "\n[Derived]");
    line(&mut out, "Wavelength (low)", r.wavelength_low_m, "m");
    line(&mut out, "Wavelength (high)", r.wavelength_high_m, "m");
    line(&mut out, "Free-space Loss", r.free_space_loss_db, "dB");
    line(&mut out, "Noise Factor", b.noise_figure.linear, "");
    line(&mut out, "Reflection Coefficient", r.reflection_coefficient, "");
    line(&mut out, "Incident Power", r.incident_power_w, "W");
    line(&mut out, "Output Impedance", r.output_impedance_ohm, "Ohm");

    let _ = writeln!(out, "\n[Discrepancies]");
    if b.discrepancies.is_empty() {
        let _ = writeln!(out, "none");
    }
    for d in &b.discrepancies {
        let _ = writeln!(
            out,
            "{}: printed {:.3}, computed {:.3}; {}",
            d.quantity, d.printed, d.computed, d.note
        );
    }
    out
}

// ---------------------------------------------------------------------------
// BER against distance

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BerFormula {
    /// `½·erfc(√(Eb/N0))`
    Standard,
    /// `½·√(erfc(Eb/N0))`, as printed for the distance curve.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub distance_m: f64,
    pub pr_dbm: f64,
    pub ebn0_db: f64,
    pub ber: f64,
}

/// BER of a free-space link at each distance.
///
/// The noise power is taken over a bandwidth equal to the data rate, so
/// `N0 = Pn/R` and `Eb/N0 = (Pr/R)/N0 = Pr/Pn`.
pub fn ber_vs_distance(
    link: &LinkParams,
    data_rate: f64,
    noise_power_dbm: f64,
    distances: &[f64],
    formula: BerFormula,
) -> Result<Vec<BerPoint>> {
    positive("data_rate", data_rate)?;
    let n0 = channel::dbm_to_watts(noise_power_dbm) / data_rate;
    distances
        .iter()
        .map(|&d| {
            let pr = channel::friis_received_power(&link.at_distance(d))?;
            let ebn0 = (pr / data_rate) / n0;
            let ber = match formula {
                BerFormula::Standard => 0.5 * libm::erfc(ebn0.sqrt()),
                BerFormula::PaperLiteral => 0.5 * libm::erfc(ebn0).sqrt(),
            };
            Ok(BerPoint {
                distance_m: d,
                pr_dbm: channel::watts_to_dbm(pr),
                ebn0_db: 10.0 * ebn0.log10(),
                ber,
            })
        })
        .collect()
}

/// Default distance-curve link: 50 mW, gains of 2 at both ends, 2.4 GHz.
pub fn default_distance_link() -> LinkParams {
    LinkParams {
        tx_power: 0.05,
        tx_gain: 2.0,
        rx_gain: 2.0,
        wavelength: SPEED_OF_LIGHT / 2.4e9,
        distance: 1.0,
        tx_height: 0.0,
        rx_height: 0.0,
        ground_reflection: -1.0,
        los_gain: None,
        reflected_gain: None,
    }
}

pub const DEFAULT_DATA_RATE: f64 = 1e6;
pub const DEFAULT_NOISE_POWER_DBM: f64 = -90.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_examples() {
        assert!((path_loss_db(0.125, 2000.0).unwrap() + 106.0666).abs() < 1e-3);
        assert!(path_loss_db(4.0 * PI, 1.0).unwrap().abs() < 1e-12);
        assert!(path_loss_db(0.0, 1.0).is_err());
        assert!((wavelength(2.2e9).unwrap() - 0.136).abs() < 5e-4);
        assert!((wavelength(2.6e9).unwrap() - 0.115).abs() < 5e-4);
        assert_eq!(wavelength(3e8).unwrap(), 1.0);

        let zero = noise_figure(0.0, 298.0, BudgetMode::CorrectedSum).unwrap();
        assert_eq!((zero.linear, zero.db), (1.0, 0.0));
        let two = noise_figure(298.0, 298.0, BudgetMode::CorrectedSum).unwrap();
        assert!((two.db - 3.0103).abs() < 1e-4);
        assert!((noise_power_dbm(1.0, 0.0).unwrap() + 174.0).abs() < 1e-12);
        assert!((noise_power_dbm(1e6, 3.0).unwrap() + 111.0).abs() < 1e-12);
        assert!((noise_power_dbm(25e6, 6.84).unwrap() + 93.18).abs() < 0.01);
    }

    #[test]
    fn matching_network_examples() {
        assert!((vswr_to_reflection(1.5).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(vswr_to_reflection(1.0).unwrap(), 0.0);
        assert_eq!(vswr_to_reflection(3.0).unwrap(), 0.5);
        assert!(vswr_to_reflection(0.5).is_err());
        assert!((incident_power(50.0, 0.2).unwrap() - 52.083_333).abs() < 1e-6);
        assert!((incident_power(96.0, 0.2).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(incident_power(7.0, 0.0).unwrap(), 7.0);
        assert!(incident_power(1.0, 1.0).is_err());
        assert!((output_impedance(0.2, 50.0).unwrap() - 33.333_333).abs() < 1e-6);
        assert!((output_impedance(0.5, 50.0).unwrap() - 16.666_667).abs() < 1e-6);
        assert_eq!(output_impedance(0.0, 50.0).unwrap(), 50.0);
    }

    #[test]
    fn literal_budget_reproduces_printed_chain() {
        let b = compute_budget(&BudgetConfig::reference(), BudgetMode::PaperLiteral).unwrap();
        assert!((b.eirp_db - 18.789).abs() < 1e-9);
        assert!((b.rsl_db + 81.771).abs() < 1e-9);
        assert!((b.link_margin_db - 6.229).abs() < 1e-9);
        assert!((b.noise_power_dbm + 93.18).abs() < 0.01);
        assert!(render_report(&b).contains("Link Margin 6.229 dB"));
    }

    #[test]
    fn corrected_budget_re_adds_tables() {
        let b = compute_budget(&BudgetConfig::reference(), BudgetMode::CorrectedSum).unwrap();
        assert!((b.total_path_loss_db + 103.66).abs() < 1e-9);
        assert!((b.total_rx_gain_db - 1.3).abs() < 1e-9);
        // 18.789 - 103.66 + 1.3 + 88
        assert!((b.link_margin_db - 4.429).abs() < 1e-9);
        let flagged: Vec<&str> = b.discrepancies.iter().map(|d| d.quantity.as_str()).collect();
        for q in [
            "total_path_loss_db",
            "path_loss_db",
            "rx_threshold_db",
            "total_rx_gain_db",
            "rsl_db",
        ] {
            assert!(flagged.contains(&q), "{q} not flagged in {flagged:?}");
        }
        assert!(!flagged.contains(&"eirp_db"));
    }

    #[test]
    fn missing_items_is_config_error() {
        let mut c = BudgetConfig::reference();
        c.rx_items.clear();
        assert!(matches!(
            compute_budget(&c, BudgetMode::CorrectedSum),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn ber_distance_default_scenario_endpoints() {
        let link = default_distance_link();
        let pts = ber_vs_distance(
            &link,
            DEFAULT_DATA_RATE,
            DEFAULT_NOISE_POWER_DBM,
            &[100.0, 10_000.0],
            BerFormula::Standard,
        )
        .unwrap();
        assert!(pts[0].ber < 1e-9);
        assert!(pts[1].ber > 0.01);
        let lit = ber_vs_distance(
            &link,
            DEFAULT_DATA_RATE,
            DEFAULT_NOISE_POWER_DBM,
            &[10_000.0],
            BerFormula::PaperLiteral,
        )
        .unwrap();
        let g = 10f64.powf(lit[0].ebn0_db / 10.0);
        assert!((lit[0].ber - 0.5 * libm::erfc(g).sqrt()).abs() < 1e-15);
    }
}
