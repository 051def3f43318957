//! Config-driven experiment runner.
//!
//! Configs are TOML documents with dotted sections (`shell.counts`,
//! `sinr.threshold_db`, ...). Unknown keys are rejected so a preset cannot
//! drift silently. Built-in presets are available through
//! [`ExperimentConfig::preset`] and are mirrored by the files in `presets/`.

mod run;
mod validate;

use serde::{Deserialize, Serialize};

use crate::analysis::CandidateRegion;
use crate::channel::{ChannelSpec, LargeScaleModel, SmallScaleModel};
use crate::coverage::{GroundLink, LinkDistance, NlosInterference, SinrConfig, SystemType};
use crate::error::{Error, Result};
use crate::geometry::SurfacePoint;
use crate::latency::{ProgressMetric, RelaySource, RoutingMode, RoutingPolicy, UplinkRule};
use crate::point_process::{GroundField, PppIntensity, ShellSpec};

pub use run::{calibrate_noise, run, CalibrationOutcome, ExperimentResult};
pub use validate::{run_validation_suite, CheckResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig3,
    Fig4,
    Fig5,
    Custom,
    Validate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Fig4 => "fig4",
            ExperimentKind::Fig5 => "fig5",
            ExperimentKind::Custom => "custom",
            ExperimentKind::Validate => "validate",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Self::Fig3, Self::Fig4, Self::Fig5, Self::Custom, Self::Validate]
            .into_iter()
            .find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessName {
    Bpp,
    Ppp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShellConfig {
    pub process: ProcessName,
    /// Satellite counts (mean counts for `ppp`).
    pub counts: Vec<usize>,
    pub altitudes_km: Vec<f64>,
    pub tx_power_dbw: f64,
}

impl Default for ShellConfig {
    fn default() -> Self {
        Self { process: ProcessName::Bpp, counts: Vec::new(), altitudes_km: Vec::new(), tx_power_dbw: 15.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingName {
    NonFading,
    Rayleigh,
    Rician,
    ShadowedRician,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub path_loss_exponent: f64,
    pub small_scale: FadingName,
    pub rician_k: f64,
    pub sr_omega: f64,
    pub sr_b: f64,
    pub sr_m: f64,
    pub shadowing_sigma_db: f64,
    pub rain_attenuation_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            path_loss_exponent: 2.0,
            small_scale: FadingName::ShadowedRician,
            rician_k: 10.0,
            sr_omega: 1.29,
            sr_b: 0.158,
            sr_m: 19.4,
            shadowing_sigma_db: 0.0,
            rain_attenuation_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemName {
    Ideal,
    NoiseLimited,
    InterferenceLimited,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlosName {
    Zero,
    Constant,
    Faded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Direct,
    GwRelayed,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SinrSection {
    pub threshold_db: f64,
    /// Receiver noise; the starting point when calibration is enabled.
    pub noise_dbw: Option<f64>,
    pub system: SystemName,
    pub nlos_interference: NlosName,
    /// Per-satellite power for `nlos_interference = "constant"`.
    pub nlos_constant_dbw: f64,
    pub bands: u32,
    pub scenario: ScenarioName,
    /// Receive-beam limit in degrees from zenith.
    pub max_zenith_deg: Option<f64>,
}

impl Default for SinrSection {
    fn default() -> Self {
        Self {
            threshold_db: -10.0,
            noise_dbw: None,
            system: SystemName::Generic,
            nlos_interference: NlosName::Zero,
            nlos_constant_dbw: -120.0,
            bands: 1,
            scenario: ScenarioName::Direct,
            max_zenith_deg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GatewayConfig {
    pub densities_per_km2: Vec<f64>,
    pub tx_power_dbw: f64,
    /// Defaults to the satellite-link noise (after calibration).
    pub noise_dbw: Option<f64>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self { densities_per_km2: vec![3.0], tx_power_dbw: -60.0, noise_dbw: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UplinkName {
    Associated,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgressName {
    GreatCircle,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutingConfig {
    pub relay_gw_count: usize,
    pub uplink: UplinkName,
    pub progress: ProgressName,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        Self { relay_gw_count: 200, uplink: UplinkName::Associated, progress: ProgressName::GreatCircle }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub enabled: bool,
    pub target_peak_n: usize,
    pub altitude_km: f64,
    /// Half-width of the noise search window around `sinr.noise_dbw`.
    pub window_db: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { enabled: false, target_peak_n: 30, altitude_km: 1000.0, window_db: 60.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub earth_radius_km: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub output_dir: String,
    pub shell: ShellConfig,
    pub channel: ChannelConfig,
    pub sinr: SinrSection,
    pub gateway: GatewayConfig,
    pub routing: RoutingConfig,
    pub calibration: CalibrationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            earth_radius_km: crate::EARTH_RADIUS_KM,
            trials: 2000,
            master_seed: 1,
            output_dir: ".".into(),
            shell: ShellConfig::default(),
            channel: ChannelConfig::default(),
            sinr: SinrSection::default(),
            gateway: GatewayConfig::default(),
            routing: RoutingConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }
}

/// Satellite counts 5, 10, ..., 200.
fn coverage_count_grid() -> Vec<usize> {
    (1..=40).map(|k| 5 * k).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Built-in configuration for a figure preset.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut c = Self { experiment: Some(kind), ..Self::default() };
        match kind {
            ExperimentKind::Fig3 => {
                c.trials = 2000;
                c.shell.counts = vec![100, 300, 1000];
                c.shell.altitudes_km = vec![500.0, 750.0, 1000.0, 1250.0, 1500.0];
            }
            ExperimentKind::Fig4 | ExperimentKind::Fig5 => {
                c.trials = 20_000;
                c.shell.counts = coverage_count_grid();
                // Starting point for calibration only.
                c.sinr.noise_dbw = Some(-100.0);
                c.sinr.nlos_interference = NlosName::Constant;
                c.sinr.nlos_constant_dbw = -117.0;
                c.sinr.scenario = ScenarioName::GwRelayed;
                c.calibration.enabled = true;
                if kind == ExperimentKind::Fig4 {
                    c.shell.altitudes_km = vec![1000.0];
                    c.gateway.densities_per_km2 = vec![0.3, 1.0, 3.0];
                } else {
                    c.shell.altitudes_km = vec![500.0, 1000.0, 1500.0];
                    c.gateway.densities_per_km2 = vec![3.0];
                }
            }
            ExperimentKind::Custom => {
                c.shell.counts = vec![10, 30, 100];
                c.shell.altitudes_km = vec![550.0, 1000.0];
                c.sinr.noise_dbw = Some(-106.0);
                c.sinr.nlos_interference = NlosName::Constant;
                c.sinr.nlos_constant_dbw = -117.0;
                c.sinr.scenario = ScenarioName::Hybrid;
            }
            ExperimentKind::Validate => {}
        }
        c
    }

    /// Checks everything the chosen experiment needs.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        if !(self.earth_radius_km > 0.0 && self.earth_radius_km.is_finite()) {
            return Err(Error::config("earth_radius_km must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if kind == ExperimentKind::Validate {
            return Ok(());
        }
        if matches!(kind, ExperimentKind::Fig3 | ExperimentKind::Fig4 | ExperimentKind::Fig5) && self.trials < 100 {
            return Err(Error::config("figure presets need at least 100 trials"));
        }
        if self.shell.counts.is_empty() || self.shell.altitudes_km.is_empty() {
            return Err(Error::config("shell.counts and shell.altitudes_km must be nonempty"));
        }
        if let Some(a) = self.shell.altitudes_km.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::config(format!("altitude {a} km must be positive")));
        }
        for s in self.shells_at(self.shell.altitudes_km[0], self.shell.counts[0]) {
            s.validate()?;
        }
        self.channel_spec()?.validate()?;
        match kind {
            ExperimentKind::Fig3 => {
                self.routing_mode().validate()?;
            }
            _ => {
                if self.sinr.noise_dbw.is_none() {
                    return Err(Error::config("sinr.noise_dbw is required for coverage experiments"));
                }
                if matches!(kind, ExperimentKind::Fig4 | ExperimentKind::Fig5) && self.shell.process != ProcessName::Bpp {
                    return Err(Error::config("figure presets sweep binomial shells"));
                }
                if self.sinr.scenario != ScenarioName::Direct {
                    if self.gateway.densities_per_km2.is_empty() {
                        return Err(Error::config("gateway.densities_per_km2 must be nonempty"));
                    }
                    if let Some(d) = self.gateway.densities_per_km2.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
                        return Err(Error::config(format!("gateway density {d} must be positive")));
                    }
                }
                if let Some(z) = self.sinr.max_zenith_deg {
                    if !(z > 0.0 && z <= 90.0) {
                        return Err(Error::config("sinr.max_zenith_deg must be in (0, 90]"));
                    }
                }
                self.sinr_config(self.shell.altitudes_km[0], self.shell.counts[0], self.sinr.noise_dbw.unwrap())
                    .validate()?;
                if self.calibration.enabled {
                    if !self.shell.counts.contains(&self.calibration.target_peak_n) {
                        return Err(Error::config("calibration.target_peak_n must be on the count grid"));
                    }
                    if !(self.calibration.window_db > 0.0) {
                        return Err(Error::config("calibration.window_db must be positive"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn channel_spec(&self) -> Result<ChannelSpec> {
        let c = &self.channel;
        let small_scale = match c.small_scale {
            FadingName::NonFading => SmallScaleModel::NonFading,
            FadingName::Rayleigh => SmallScaleModel::Rayleigh,
            FadingName::Rician => SmallScaleModel::Rician { k_factor: c.rician_k },
            FadingName::ShadowedRician => SmallScaleModel::ShadowedRician { b: c.sr_b, m: c.sr_m, omega: c.sr_omega },
        };
        let spec = ChannelSpec {
            large_scale: LargeScaleModel {
                shadowing_sigma_db: c.shadowing_sigma_db,
                rain_attenuation_db: c.rain_attenuation_db,
                ..LargeScaleModel::default()
            },
            small_scale,
            path_loss_exponent: c.path_loss_exponent,
            ..ChannelSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn shells_at(&self, altitude_km: f64, count: usize) -> Vec<ShellSpec> {
        let tx = self.shell.tx_power_dbw;
        vec![match self.shell.process {
            ProcessName::Bpp => ShellSpec::bpp(count, altitude_km, tx),
            ProcessName::Ppp => ShellSpec::ppp(PppIntensity::MeanCount(count as f64), altitude_km, tx),
        }]
    }

    pub fn sinr_config(&self, altitude_km: f64, count: usize, noise_dbw: f64) -> SinrConfig {
        let channel = self.channel_spec().unwrap_or_default();
        let mut c = SinrConfig::new(self.shells_at(altitude_km, count), channel, noise_dbw, self.sinr.threshold_db);
        c.bands = self.sinr.bands;
        c.system_type = match self.sinr.system {
            SystemName::Ideal => SystemType::Ideal,
            SystemName::NoiseLimited => SystemType::NoiseLimited,
            SystemName::InterferenceLimited => SystemType::InterferenceLimited,
            SystemName::Generic => SystemType::Generic,
        };
        c.nlos_interference = match self.sinr.nlos_interference {
            NlosName::Zero => NlosInterference::Zero,
            NlosName::Constant => NlosInterference::Constant(self.sinr.nlos_constant_dbw),
            NlosName::Faded => NlosInterference::Faded,
        };
        c.region = CandidateRegion { visible_only: true, max_zenith: self.sinr.max_zenith_deg.map(f64::to_radians) };
        c.r_earth = self.earth_radius_km;
        c.user = SurfacePoint::north_pole(self.earth_radius_km);
        c
    }

    pub fn ground_link(&self, density_per_km2: f64, satellite_noise_dbw: f64) -> GroundLink {
        GroundLink {
            distance: LinkDistance::NearestGround(GroundField::gateways(density_per_km2)),
            channel: self.channel_spec().unwrap_or_default(),
            tx_power_dbw: self.gateway.tx_power_dbw,
            noise_dbw: self.gateway.noise_dbw.unwrap_or(satellite_noise_dbw),
            threshold_db: self.sinr.threshold_db,
        }
    }

    pub fn routing_mode(&self) -> RoutingMode {
        RoutingMode::GwRelay(RelaySource::Count(self.routing.relay_gw_count))
    }

    pub fn routing_policy(&self) -> RoutingPolicy {
        RoutingPolicy {
            uplink: match self.routing.uplink {
                UplinkName::Associated => UplinkRule::Associated,
                UplinkName::Greedy => UplinkRule::Greedy,
            },
            metric: match self.routing.progress {
                ProgressName::GreatCircle => ProgressMetric::GreatCircle,
                ProgressName::Euclidean => ProgressMetric::Euclidean,
            },
        }
    }
}
