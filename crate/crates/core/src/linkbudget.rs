//! Aligned-state link budget of a sectored-antenna terahertz link.
//!
//! Both ends carry square planar arrays (`N×N` elements) modelled as flat
//! cones: gain `N²` inside a beamwidth of `102°/N`, nothing outside.
//! All quantities are SI and linear; dBm only appears in the conversion helpers.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Beamwidth constant in degrees.
const BEAM_DEGREES: f64 = 102.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Thermal noise `k_B·T·B·F`, times a calibration factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub temperature_k: f64,
    pub noise_figure_db: f64,
    /// Multiplies the thermal noise power; `1.0` when uncalibrated.
    pub calibration_scale: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            temperature_k: 290.0,
            noise_figure_db: 10.0,
            calibration_scale: 1.0,
        }
    }
}

impl NoiseModel {
    pub fn power(&self, bandwidth_hz: f64) -> f64 {
        BOLTZMANN
            * self.temperature_k
            * bandwidth_hz
            * db_to_linear(self.noise_figure_db)
            * self.calibration_scale
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibration_scale != 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    /// Molecular absorption coefficient, 1/m.
    pub absorption_per_m: f64,
    pub noise: NoiseModel,
    pub distance_m: f64,
    /// Access-point array side, `N_A`.
    pub n_ap: u32,
    /// User-equipment array side, `N_U`.
    pub n_ue: u32,
    /// Time to probe one beam direction, s.
    pub beam_step_delay_s: f64,
    /// Outage detection latency added to every realignment, s.
    pub detection_latency_s: f64,
}

impl Default for SystemConfig {
    /// 300 GHz carrier, 50 GHz bandwidth, 20 dBm, 5 µs per beam step,
    /// 10 m separation, 100×100 AP array and 20×20 UE array.
    fn default() -> Self {
        SystemConfig {
            carrier_freq_hz: 300e9,
            bandwidth_hz: 50e9,
            tx_power_w: dbm_to_watts(20.0),
            absorption_per_m: 0.0033,
            noise: NoiseModel::default(),
            distance_m: 10.0,
            n_ap: 100,
            n_ue: 20,
            beam_step_delay_s: 5e-6,
            detection_latency_s: 0.0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq", self.carrier_freq_hz),
            ("bandwidth", self.bandwidth_hz),
            ("tx_power", self.tx_power_w),
            ("distance", self.distance_m),
            ("noise_temperature", self.noise.temperature_k),
            ("noise_calibration_scale", self.noise.calibration_scale),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(
                    field,
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if !(self.beam_step_delay_s >= 0.0) {
            return Err(Error::validation("beam_step_delay", "must be non-negative"));
        }
        if !(self.absorption_per_m >= 0.0) {
            return Err(Error::validation(
                "absorption_coeff",
                "must be non-negative",
            ));
        }
        if !(self.detection_latency_s >= 0.0) {
            return Err(Error::validation(
                "detection_latency",
                "must be non-negative",
            ));
        }
        if !self.noise.noise_figure_db.is_finite() {
            return Err(Error::validation("noise_figure", "must be finite"));
        }
        if self.n_ue < 1 {
            return Err(Error::validation("n_ue", "must be at least 1"));
        }
        if self.n_ap < self.n_ue {
            return Err(Error::validation(
                "n_ap",
                format!(
                    "AP array ({}) must not be smaller than UE array ({})",
                    self.n_ap, self.n_ue
                ),
            ));
        }
        if !self.small_array_ratio_ok() {
            log::debug!(
                "n_ap = {} is less than 3·n_ue = {}; beam boundary approximations degrade",
                self.n_ap,
                3 * self.n_ue
            );
        }
        Ok(())
    }

    /// The boundary approximations assume `N_A ≥ 3·N_U`.
    pub fn small_array_ratio_ok(&self) -> bool {
        self.n_ap >= 3 * self.n_ue
    }

    pub fn with_distance(mut self, d: f64) -> Self {
        self.distance_m = d;
        self
    }

    pub fn with_arrays(mut self, n_ap: u32, n_ue: u32) -> Self {
        self.n_ap = n_ap;
        self.n_ue = n_ue;
        self
    }

    pub fn noise_power_w(&self) -> f64 {
        self.noise.power(self.bandwidth_hz)
    }
}

/// Misalignment thresholds: lateral offset `M_XY` and rotation `M_φθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub linear_m: f64,
    pub angular_rad: f64,
}

/// Full beamwidth of an `n×n` array, radians.
pub fn beamwidth(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("array size must be at least 1".into()));
    }
    Ok(BEAM_DEGREES * PI / (180.0 * n as f64))
}

/// Linear gain of an `n×n` array.
pub fn gain(n: u32) -> f64 {
    let n = n as f64;
    n * n
}

/// Aligned-state SNR at the user equipment (linear).
pub fn snr(cfg: &SystemConfig) -> f64 {
    let wavelength_factor = SPEED_OF_LIGHT * SPEED_OF_LIGHT
        / (16.0 * PI * PI * cfg.carrier_freq_hz * cfg.carrier_freq_hz);
    let d = cfg.distance_m;
    cfg.tx_power_w * gain(cfg.n_ap) * gain(cfg.n_ue) * wavelength_factor
        / cfg.noise_power_w()
        / (d * d)
        * (-cfg.absorption_per_m * d).exp()
}

/// Spectral efficiency and capacity with aligned beams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedLimits {
    /// `L_max`, bit/s/Hz.
    pub spectral_efficiency: f64,
    /// `C_max`, bit/s.
    pub capacity: f64,
}

pub fn limits_from_snr(snr: f64, bandwidth_hz: f64) -> AlignedLimits {
    let se = snr.ln_1p() / std::f64::consts::LN_2;
    AlignedLimits {
        spectral_efficiency: se,
        capacity: bandwidth_hz * se,
    }
}

pub fn se_capacity_max(cfg: &SystemConfig) -> AlignedLimits {
    limits_from_snr(snr(cfg), cfg.bandwidth_hz)
}

pub fn misalignment_boundaries(cfg: &SystemConfig) -> Boundaries {
    let half_ap = BEAM_DEGREES * PI / (360.0 * cfg.n_ap as f64);
    Boundaries {
        linear_m: cfg.distance_m * half_ap.tan(),
        angular_rad: BEAM_DEGREES * PI / 360.0 * (1.0 / cfg.n_ue as f64 + 1.0 / cfg.n_ap as f64),
    }
}

/// Duration of a sequential sweep over both codebooks, `(N_A² + N_U²)·δ`.
pub fn alignment_duration(cfg: &SystemConfig) -> f64 {
    (gain(cfg.n_ap) + gain(cfg.n_ue)) * cfg.beam_step_delay_s
}

/// Time the link is down per realignment: sweep plus detection latency.
pub fn outage_per_realignment(cfg: &SystemConfig) -> f64 {
    alignment_duration(cfg) + cfg.detection_latency_s
}

/// Geometry at which the noise level is pinned by [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub distance_m: f64,
    pub n_ap: u32,
    pub n_ue: u32,
}

impl Default for CalibrationPoint {
    fn default() -> Self {
        CalibrationPoint {
            distance_m: 10.0,
            n_ap: 100,
            n_ue: 21,
        }
    }
}

/// Rescales the noise so that `L_max` at `point` equals `target_se`.
/// Every other field of `cfg` is kept.
pub fn calibrate(
    cfg: &SystemConfig,
    point: &CalibrationPoint,
    target_se: f64,
) -> Result<SystemConfig> {
    if !(target_se > 0.0) || !target_se.is_finite() {
        return Err(Error::validation(
            "calibration.target_se",
            "must be positive",
        ));
    }
    let mut reference = cfg
        .with_distance(point.distance_m)
        .with_arrays(point.n_ap, point.n_ue);
    reference.noise.calibration_scale = 1.0;
    let raw = snr(&reference);
    let wanted = target_se.exp2() - 1.0;
    let mut out = *cfg;
    out.noise.calibration_scale = raw / wanted;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beamwidth_values() {
        assert!((beamwidth(100).unwrap() - 0.017_802_358).abs() < 1e-9);
        assert!((beamwidth(1).unwrap() - 1.780_235_837).abs() < 1e-9);
        assert!((beamwidth(40).unwrap() - beamwidth(20).unwrap() / 2.0).abs() < 1e-15);
        assert!(matches!(beamwidth(0), Err(Error::Domain(_))));
    }

    #[test]
    fn gains() {
        assert_eq!(gain(100), 10_000.0);
        assert_eq!(gain(1), 1.0);
        assert_eq!(gain(20), 400.0);
    }

    #[test]
    fn snr_scaling() {
        let mut cfg = SystemConfig::default();
        cfg.absorption_per_m = 0.0;
        let s1 = snr(&cfg.with_distance(1.0));
        let s2 = snr(&cfg.with_distance(2.0));
        assert!((s2 / s1 - 0.25).abs() < 1e-12);
        let base = snr(&cfg);
        let doubled = snr(&cfg.with_arrays(200, 20));
        assert!((doubled / base - 4.0).abs() < 1e-12);
    }

    #[test]
    fn default_snr_lands_in_tens_of_db() {
        let l = se_capacity_max(&SystemConfig::default()).spectral_efficiency;
        assert!((10.0..20.0).contains(&l), "{l}");
    }

    #[test]
    fn limits_from_snr_cases() {
        let b = 50e9;
        assert_eq!(
            limits_from_snr(0.0, b),
            AlignedLimits {
                spectral_efficiency: 0.0,
                capacity: 0.0
            }
        );
        let one = limits_from_snr(1.0, b);
        assert!((one.spectral_efficiency - 1.0).abs() < 1e-15 && (one.capacity - b).abs() < 1e-3);
        let s17 = limits_from_snr(131_071.0, b);
        assert!((s17.spectral_efficiency - 17.0).abs() < 1e-12);
        assert_eq!(s17.capacity, b * s17.spectral_efficiency);
    }

    #[test]
    fn boundary_values() {
        let b = misalignment_boundaries(&SystemConfig::default());
        assert!((b.linear_m - 0.089_014_14).abs() < 1e-8, "{}", b.linear_m);
        assert!((b.linear_m - 0.089_012).abs() < 5e-6);
        assert!(
            (b.angular_rad - 0.053_407).abs() < 1e-6,
            "{}",
            b.angular_rad
        );
        let far = misalignment_boundaries(&SystemConfig::default().with_distance(20.0));
        assert!((far.linear_m - 2.0 * b.linear_m).abs() < 1e-15);
    }

    #[test]
    fn alignment_duration_values() {
        assert!((alignment_duration(&SystemConfig::default()) - 0.052).abs() < 1e-15);
        let mut cfg = SystemConfig::default().with_arrays(1, 1);
        cfg.beam_step_delay_s = 1.0;
        assert_eq!(alignment_duration(&cfg), 2.0);
        cfg.beam_step_delay_s = 0.0;
        assert_eq!(alignment_duration(&cfg), 0.0);
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg = SystemConfig::default();
        cfg.bandwidth_hz = -1.0;
        assert!(matches!(
            cfg.validate(),
            Err(Error::Validation {
                field: "bandwidth",
                ..
            })
        ));
        let small_ap = SystemConfig::default().with_arrays(10, 20);
        assert!(matches!(
            small_ap.validate(),
            Err(Error::Validation { field: "n_ap", .. })
        ));
    }

    #[test]
    fn calibration_hits_target() {
        let cfg = calibrate(&SystemConfig::default(), &CalibrationPoint::default(), 18.0).unwrap();
        let at_ref = se_capacity_max(&cfg.with_arrays(100, 21)).spectral_efficiency;
        assert!((at_ref - 18.0).abs() < 1e-12);
        assert!(cfg.noise.is_calibrated());
        // Boundaries and sweep time do not see the noise level.
        assert_eq!(
            misalignment_boundaries(&cfg),
            misalignment_boundaries(&SystemConfig::default())
        );
    }

    #[test]
    fn dbm_round_trip() {
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((watts_to_dbm(0.1) - 20.0).abs() < 1e-12);
    }
}
