//! Scenario files: JSON in engineering units, resolved to the SI model.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thzlab::linkbudget::dbm_to_watts;
use thzlab::{
    calibrate, calibrate_mean_se, AggregateMode, AngularMuBoundary, CalibrationPoint,
    CrossingDetection, FptOptions, MobilityParams, Model, MuConvention, NoiseModel,
    RealignmentMobility, SchemeChoice, SimSpec, SystemConfig,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub carrier_freq_ghz: f64,
    pub bandwidth_ghz: f64,
    pub tx_power_dbm: f64,
    pub absorption_per_m: f64,
    pub noise_temperature_k: f64,
    pub noise_figure_db: f64,
    pub distance_m: f64,
    pub n_ap: u32,
    pub n_ue: u32,
    pub beam_step_delay_us: f64,
    pub detection_latency_ms: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            carrier_freq_ghz: 300.0,
            bandwidth_ghz: 50.0,
            tx_power_dbm: 20.0,
            absorption_per_m: 0.0033,
            noise_temperature_k: 290.0,
            noise_figure_db: 10.0,
            distance_m: 10.0,
            n_ap: 100,
            n_ue: 20,
            beam_step_delay_us: 5.0,
            detection_latency_ms: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilitySection {
    pub dx_m: f64,
    pub dy_m: f64,
    pub dphi_deg: f64,
    pub dtheta_deg: f64,
}

impl Default for MobilitySection {
    fn default() -> Self {
        MobilitySection {
            dx_m: 0.1,
            dy_m: 0.1,
            dphi_deg: 3.0,
            dtheta_deg: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    #[default]
    OnDemand,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    /// Periodic update period, ms. Absent means optimized.
    pub update_period_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    pub mu_convention: MuConvention,
    pub aggregate_mode: AggregateMode,
    pub angular_mu_boundary: AngularMuBoundary,
}

/// Pins the noise level. Exactly one target is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    /// Aligned spectral efficiency at the reference point, bit/s/Hz.
    pub target_l_max: Option<f64>,
    /// On-demand mean spectral efficiency at the reference point, bit/s/Hz.
    pub target_mean_se: Option<f64>,
    pub distance_m: f64,
    pub n_ap: u32,
    pub n_ue: u32,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        let p = CalibrationPoint::default();
        CalibrationSection {
            target_l_max: None,
            target_mean_se: None,
            distance_m: p.distance_m,
            n_ap: p.n_ap,
            n_ue: p.n_ue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub trials: usize,
    /// Absent picks a step from the shortest single-axis mean passage time.
    pub dt_s: Option<f64>,
    pub horizon_s: f64,
    pub seed: u64,
    pub crossing: CrossingDetection,
    pub during_realignment: RealignmentMobility,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            trials: 20_000,
            dt_s: None,
            horizon_s: 1_000.0,
            seed: 0,
            crossing: CrossingDetection::default(),
            during_realignment: RealignmentMobility::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub system: SystemSection,
    pub mobility: MobilitySection,
    pub scheme: SchemeSection,
    pub flags: Flags,
    pub calibration: Option<CalibrationSection>,
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationState {
    pub target: &'static str,
    pub target_value: f64,
    pub point: CalibrationPoint,
    /// Aligned spectral efficiency at the reference point after calibration.
    pub l_max: f64,
    pub noise_calibration_scale: f64,
}

/// A scenario converted to SI and validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: Model,
    pub scheme: SchemeChoice,
    pub sim: SimSpec,
    pub calibration: Option<CalibrationState>,
}

impl ScenarioFile {
    pub fn parse(text: &str, allow_empty: bool) -> Result<Self, CliError> {
        if allow_empty && text.trim().is_empty() {
            return Ok(ScenarioFile::default());
        }
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path, allow_empty: bool) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, allow_empty)
    }

    /// Canonical JSON: every field present, keys sorted.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("scenario serializes")
    }

    pub fn fpt_options(&self) -> FptOptions {
        FptOptions {
            mode: self.flags.aggregate_mode,
            mu: self.flags.mu_convention,
            angular_mu_boundary: self.flags.angular_mu_boundary,
            ..FptOptions::default()
        }
    }

    pub fn system_config(&self) -> SystemConfig {
        let s = &self.system;
        SystemConfig {
            carrier_freq_hz: s.carrier_freq_ghz * 1e9,
            bandwidth_hz: s.bandwidth_ghz * 1e9,
            tx_power_w: dbm_to_watts(s.tx_power_dbm),
            absorption_per_m: s.absorption_per_m,
            noise: NoiseModel {
                temperature_k: s.noise_temperature_k,
                noise_figure_db: s.noise_figure_db,
                calibration_scale: 1.0,
            },
            distance_m: s.distance_m,
            n_ap: s.n_ap,
            n_ue: s.n_ue,
            beam_step_delay_s: s.beam_step_delay_us * 1e-6,
            detection_latency_s: s.detection_latency_ms * 1e-3,
        }
    }

    pub fn mobility(&self) -> MobilityParams {
        let m = &self.mobility;
        MobilityParams {
            dx: m.dx_m,
            dy: m.dy_m,
            dphi: m.dphi_deg.to_radians(),
            dtheta: m.dtheta_deg.to_radians(),
        }
    }

    pub fn scheme_choice(&self) -> Result<SchemeChoice, CliError> {
        Ok(match (self.scheme.kind, self.scheme.update_period_ms) {
            (SchemeKind::OnDemand, _) => SchemeChoice::OnDemand,
            (SchemeKind::Periodic, None) => SchemeChoice::PeriodicOptimal,
            (SchemeKind::Periodic, Some(ms)) => {
                if !(ms > 0.0) || !ms.is_finite() {
                    return Err(CliError::validation(
                        "update_period",
                        format!("must be positive, got {ms} ms"),
                    ));
                }
                SchemeChoice::Periodic(ms * 1e-3)
            }
        })
    }

    pub fn sim_spec(&self) -> SimSpec {
        let s = &self.simulation;
        SimSpec {
            dt: s.dt_s,
            n_trials: s.trials,
            horizon: s.horizon_s,
            seed: s.seed,
            crossing: s.crossing,
            during_realignment: s.during_realignment,
            record_events: false,
        }
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let mut model = Model::new(self.system_config(), self.mobility(), self.fpt_options());
        model.validate()?;
        if !model.system.small_array_ratio_ok() {
            log::warn!(
                "n_ap = {} is less than 3·n_ue = {}; beam boundary approximations degrade",
                model.system.n_ap,
                3 * model.system.n_ue
            );
        }
        let scheme = self.scheme_choice()?;
        let sim = self.sim_spec();
        sim.validate()?;
        let calibration = match &self.calibration {
            None => None,
            Some(c) => {
                let point = CalibrationPoint {
                    distance_m: c.distance_m,
                    n_ap: c.n_ap,
                    n_ue: c.n_ue,
                };
                let (target, value, l_max, system) = match (c.target_l_max, c.target_mean_se) {
                    (Some(l), None) => ("l_max", l, l, calibrate(&model.system, &point, l)?),
                    (None, Some(se)) => {
                        let cal = calibrate_mean_se(&model, &point, se)?;
                        ("mean_se", se, cal.l_max, cal.system)
                    }
                    _ => {
                        return Err(CliError::validation(
                            "calibration",
                            "give exactly one of target_l_max and target_mean_se",
                        ))
                    }
                };
                model.system = system;
                Some(CalibrationState {
                    target,
                    target_value: value,
                    point,
                    l_max,
                    noise_calibration_scale: system.noise.calibration_scale,
                })
            }
        };
        Ok(Resolved {
            model,
            scheme,
            sim,
            calibration,
        })
    }
}
