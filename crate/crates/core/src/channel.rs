//! Link budgets: antenna gains, large-scale attenuation with LoS/NLoS mixing,
//! and small-scale fading samplers.
//!
//! Received power follows `P·η·G·r^(−α)` where `P` folds transmit power and
//! antenna gain, `η` is the large-scale gain, `G` the small-scale power gain
//! and `r` the distance in metres. The path-loss exponent `α` is stored as a
//! positive number (2 for free space, up to 4 with heavy clutter).
//!
//! Shadowed-Rician parameters are always named: `omega` is the mean LoS power,
//! `b` half the scatter power and `m` the Nakagami shape of the LoS amplitude.
//! The common light-shadowing triple is `omega = 1.29, b = 0.158, m = 19.4`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AntennaModel {
    /// Same gain in every direction.
    Isotropic { eirp_gain_db: f64 },
    /// Flat main lobe out to `half_beamwidth` radians, flat side lobe beyond.
    Directional {
        main_lobe_gain_db: f64,
        side_lobe_gain_db: f64,
        half_beamwidth: f64,
    },
}

impl Default for AntennaModel {
    fn default() -> Self {
        Self::Isotropic { eirp_gain_db: 0.0 }
    }
}

impl AntennaModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Isotropic { eirp_gain_db } if !eirp_gain_db.is_finite() => {
                Err(Error::config("antenna gain must be finite"))
            }
            Self::Directional { main_lobe_gain_db, side_lobe_gain_db, half_beamwidth } => {
                if !(main_lobe_gain_db >= side_lobe_gain_db) {
                    return Err(Error::config("main-lobe gain must be at least the side-lobe gain"));
                }
                if !(half_beamwidth > 0.0 && half_beamwidth <= PI) {
                    return Err(Error::config("half beamwidth must lie in (0, pi]"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Gain in dB at angle `off_boresight` from the antenna axis.
pub fn antenna_gain(model: &AntennaModel, off_boresight: f64) -> f64 {
    match *model {
        AntennaModel::Isotropic { eirp_gain_db } => eirp_gain_db,
        AntennaModel::Directional { main_lobe_gain_db, side_lobe_gain_db, half_beamwidth } => {
            if off_boresight <= half_beamwidth {
                main_lobe_gain_db
            } else {
                side_lobe_gain_db
            }
        }
    }
}

/// Probability that a link at a given zenith angle is line-of-sight.
/// Always zero below the horizon.
#[derive(Clone, Default)]
pub enum LosProbability {
    /// 1 above the horizon.
    #[default]
    Step,
    Constant(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for LosProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Step => write!(f, "Step"),
            Self::Constant(p) => write!(f, "Constant({p})"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl LosProbability {
    pub fn at(&self, zenith: f64) -> f64 {
        if zenith > FRAC_PI_2 {
            return 0.0;
        }
        match self {
            Self::Step => 1.0,
            Self::Constant(p) => p.clamp(0.0, 1.0),
            Self::Custom(f) => f(zenith).clamp(0.0, 1.0),
        }
    }
}

/// Extra log-normal loss of the NLoS mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NlosLoss {
    pub mean_db: f64,
    pub sigma_db: f64,
}

#[derive(Debug, Clone)]
pub struct LargeScaleModel {
    pub carrier_frequency_ghz: f64,
    pub shadowing_sigma_db: f64,
    pub rain_attenuation_db: f64,
    pub los_probability: LosProbability,
    pub nlos_extra_loss: NlosLoss,
    /// Include the (λ/4π)² free-space constant in the deterministic gain.
    pub free_space_term: bool,
}

impl Default for LargeScaleModel {
    /// 0 dB in LoS range: no shadowing, no rain, no free-space constant.
    fn default() -> Self {
        Self {
            carrier_frequency_ghz: 2.0,
            shadowing_sigma_db: 0.0,
            rain_attenuation_db: 0.0,
            los_probability: LosProbability::Step,
            nlos_extra_loss: NlosLoss::default(),
            free_space_term: false,
        }
    }
}

impl LargeScaleModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_frequency_ghz > 0.0) {
            return Err(Error::config("carrier frequency must be positive"));
        }
        if !(self.shadowing_sigma_db >= 0.0 && self.nlos_extra_loss.sigma_db >= 0.0) {
            return Err(Error::config("shadowing sigmas must be nonnegative"));
        }
        if !self.rain_attenuation_db.is_finite() || !self.nlos_extra_loss.mean_db.is_finite() {
            return Err(Error::config("attenuations must be finite"));
        }
        Ok(())
    }

    /// The non-random part of the LoS gain, in dB.
    pub fn deterministic_gain_db(&self) -> f64 {
        let fs = if self.free_space_term {
            free_space_constant_db(self.carrier_frequency_ghz)
        } else {
            0.0
        };
        fs - self.rain_attenuation_db
    }
}

/// 20·log10(c / (4π f)): the frequency-dependent free-space constant for
/// distances in metres.
pub fn free_space_constant_db(carrier_frequency_ghz: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT_M_S / (carrier_frequency_ghz * 1e9);
    20.0 * (wavelength / (4.0 * PI)).log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmallScaleModel {
    NonFading,
    Rayleigh,
    Rician { k_factor: f64 },
    ShadowedRician { b: f64, m: f64, omega: f64 },
}

impl SmallScaleModel {
    /// Light shadowing: Ω = 1.29, b = 0.158, m = 19.4.
    pub const LIGHT_SHADOWING: SmallScaleModel =
        SmallScaleModel::ShadowedRician { b: 0.158, m: 19.4, omega: 1.29 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Rician { k_factor } if !(k_factor >= 0.0 && k_factor.is_finite()) => {
                Err(Error::config("Rician K must be nonnegative"))
            }
            Self::ShadowedRician { b, m, omega } if !(b > 0.0 && m > 0.0 && omega >= 0.0) => {
                Err(Error::config("Shadowed-Rician needs b > 0, m > 0, omega >= 0"))
            }
            _ => Ok(()),
        }
    }

    /// Mean power gain.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::ShadowedRician { b, omega, .. } => omega + 2.0 * b,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub antenna: AntennaModel,
    pub large_scale: LargeScaleModel,
    pub small_scale: SmallScaleModel,
    pub path_loss_exponent: f64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            antenna: AntennaModel::default(),
            large_scale: LargeScaleModel::default(),
            small_scale: SmallScaleModel::LIGHT_SHADOWING,
            path_loss_exponent: 2.0,
        }
    }
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(2.0..=4.0).contains(&self.path_loss_exponent) {
            return Err(Error::config(format!(
                "path-loss exponent {} outside [2, 4]",
                self.path_loss_exponent
            )));
        }
        self.antenna.validate()?;
        self.large_scale.validate()?;
        self.small_scale.validate()
    }
}

/// Received power in watts with unit small-scale gain; `distance_km` is
/// converted to metres before applying `distance^(−α)`.
pub fn mean_rx_power(
    tx_power_dbw: f64,
    antenna_gain_db: f64,
    large_scale_gain_db: f64,
    distance_km: f64,
    alpha: f64,
) -> Result<f64> {
    if !(distance_km > 0.0) {
        return Err(Error::domain(format!("distance {distance_km} km must be positive")));
    }
    Ok(db_to_linear(tx_power_dbw + antenna_gain_db + large_scale_gain_db)
        * (distance_km * 1e3).powf(-alpha))
}

/// Draws one small-scale power gain.
pub fn sample_small_scale<R: Rng + ?Sized>(model: &SmallScaleModel, rng: &mut R) -> f64 {
    match *model {
        SmallScaleModel::NonFading => 1.0,
        SmallScaleModel::Rayleigh => Exp1.sample(rng),
        SmallScaleModel::Rician { k_factor } => {
            let los = (k_factor / (k_factor + 1.0)).sqrt();
            let sigma = (0.5 / (k_factor + 1.0)).sqrt();
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            (los + sigma * x).powi(2) + (sigma * y).powi(2)
        }
        SmallScaleModel::ShadowedRician { b, m, omega } => {
            let amp = if omega > 0.0 {
                let a2: f64 = Gamma::new(m, omega / m).expect("valid gamma").sample(rng);
                a2.sqrt()
            } else {
                0.0
            };
            let theta: f64 = 2.0 * PI * rng.random::<f64>();
            let sigma = b.sqrt();
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            let re = amp * theta.cos() + sigma * x;
            let im = amp * theta.sin() + sigma * y;
            re * re + im * im
        }
    }
}

/// Natural log of Kummer's ₁F₁(a; b; x) for a, b > 0 and x ≥ 0.
///
/// Series with log-domain accumulation, term-ratio stop at relative 1e-12 and
/// a 10 000-term cap; beyond the cap the large-x asymptotic form is used.
pub fn ln_hyp1f1(a: f64, b: f64, x: f64) -> f64 {
    const MAX_TERMS: usize = 10_000;
    const REL_TOL: f64 = 1e-12;
    if x == 0.0 {
        return 0.0;
    }
    let mut ln_term = 0.0f64;
    let mut ln_sum = 0.0f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) / (b + kf) * x / (kf + 1.0);
        ln_term += ratio.ln();
        ln_sum = log_add_exp(ln_sum, ln_term);
        // Once terms shrink geometrically the tail is bounded by t·r/(1−r).
        let next_ratio = (a + kf + 1.0) / (b + kf + 1.0) * x / (kf + 2.0);
        if next_ratio < 1.0 {
            let tail = ln_term + next_ratio.ln() - (1.0 - next_ratio).ln();
            if tail - ln_sum < REL_TOL.ln() {
                return ln_sum;
            }
        }
    }
    // Asymptotic expansion: Γ(b)/Γ(a)·eˣ·x^(a−b)·Σ (b−a)ₛ(1−a)ₛ/(s!·xˢ).
    let mut series = 1.0;
    let mut term = 1.0;
    for s in 0..8 {
        let sf = s as f64;
        term *= (b - a + sf) * (1.0 - a + sf) / ((sf + 1.0) * x);
        series += term;
    }
    ln_gamma(b) - ln_gamma(a) + x + (a - b) * x.ln() + series.ln()
}

fn log_add_exp(p: f64, q: f64) -> f64 {
    let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
    hi + (lo - hi).exp().ln_1p()
}

/// Shadowed-Rician power density:
/// (2bm/(2bm+Ω))^m · 1/(2b) · e^(−w/2b) · ₁F₁(m; 1; Ωw / (2b(2bm+Ω))).
pub fn sr_pdf(w: f64, b: f64, m: f64, omega: f64) -> Result<f64> {
    if !(b > 0.0 && m > 0.0 && omega >= 0.0) {
        return Err(Error::domain("Shadowed-Rician needs b > 0, m > 0, omega >= 0"));
    }
    if w < 0.0 {
        return Err(Error::domain("power gain must be nonnegative"));
    }
    let denom = 2.0 * b * m + omega;
    let ln_pre = m * (2.0 * b * m / denom).ln() - (2.0 * b).ln() - w / (2.0 * b);
    let x = omega * w / (2.0 * b * denom);
    Ok((ln_pre + ln_hyp1f1(m, 1.0, x)).exp())
}

/// Outcome of one large-scale draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScaleDraw {
    pub gain_db: f64,
    pub los: bool,
}

/// Draws the LoS/NLoS branch and its log-normal gain for a link at `zenith`.
pub fn sample_large_scale<R: Rng + ?Sized>(
    model: &LargeScaleModel,
    zenith: f64,
    rng: &mut R,
) -> LargeScaleDraw {
    let p_los = model.los_probability.at(zenith);
    let los = rng.random::<f64>() < p_los;
    let z: f64 = StandardNormal.sample(rng);
    let gain_db = if los {
        model.shadowing_sigma_db * z
    } else {
        -model.nlos_extra_loss.mean_db + model.nlos_extra_loss.sigma_db * z
    };
    LargeScaleDraw { gain_db: gain_db + model.deterministic_gain_db(), los }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance_km: f64,
    pub zenith: f64,
    pub off_boresight: f64,
}

/// One random received-power sample (watts) over a link.
pub fn rx_power_sample<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    tx_power_dbw: f64,
    geometry: &LinkGeometry,
    rng: &mut R,
) -> Result<f64> {
    let large = sample_large_scale(&spec.large_scale, geometry.zenith, rng);
    let g = sample_small_scale(&spec.small_scale, rng);
    let mean = mean_rx_power(
        tx_power_dbw,
        antenna_gain(&spec.antenna, geometry.off_boresight),
        large.gain_db,
        geometry.distance_km,
        spec.path_loss_exponent,
    )?;
    Ok(mean * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::adaptive_simpson;
    use crate::rng::RngStream;

    #[test]
    fn mean_rx_power_examples() {
        let p1 = mean_rx_power(0.0, 0.0, 0.0, 1.0, 2.0).unwrap();
        let p2 = mean_rx_power(0.0, 0.0, 0.0, 2.0, 2.0).unwrap();
        assert!((p1 / p2 - 4.0).abs() < 1e-12);
        assert!((db_to_linear(15.0) - 31.622_776_601_683_79).abs() < 1e-9);
        let a2 = mean_rx_power(0.0, 0.0, 0.0, 0.01, 2.0).unwrap();
        let a4 = mean_rx_power(0.0, 0.0, 0.0, 0.01, 4.0).unwrap();
        assert!((linear_to_db(a2 / a4) - 20.0).abs() < 1e-9);
        assert!(mean_rx_power(0.0, 0.0, 0.0, 0.0, 2.0).is_err());
        assert!(mean_rx_power(0.0, 0.0, 0.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn antenna_gain_examples() {
        let iso = AntennaModel::Isotropic { eirp_gain_db: 3.0 };
        assert_eq!(antenna_gain(&iso, 0.0), 3.0);
        assert_eq!(antenna_gain(&iso, 2.9), 3.0);
        let dir = AntennaModel::Directional {
            main_lobe_gain_db: 30.0,
            side_lobe_gain_db: -10.0,
            half_beamwidth: 0.1,
        };
        assert_eq!(antenna_gain(&dir, 0.05), 30.0);
        assert_eq!(antenna_gain(&dir, 0.2), -10.0);
        let bad = AntennaModel::Directional {
            main_lobe_gain_db: -1.0,
            side_lobe_gain_db: 0.0,
            half_beamwidth: 0.1,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn non_fading_is_one() {
        let mut rng = RngStream::from_seed(0).rng();
        for _ in 0..10 {
            assert_eq!(sample_small_scale(&SmallScaleModel::NonFading, &mut rng), 1.0);
        }
    }

    #[test]
    fn sr_pdf_normalisation_and_mean() {
        let (b, m, omega) = (0.158, 19.4, 1.29);
        let f = |w: f64| sr_pdf(w, b, m, omega).unwrap();
        let total = adaptive_simpson(&f, 0.0, 60.0, 1e-11);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        let mean = adaptive_simpson(&|w: f64| w * f(w), 0.0, 60.0, 1e-11);
        assert!((mean - (2.0 * b + omega)).abs() < 1e-6, "{mean}");
    }

    #[test]
    fn sr_pdf_no_los_limit_is_exponential() {
        let b = 0.3;
        for &w in &[0.0, 0.1, 0.5, 1.0, 3.0, 7.0] {
            let got = sr_pdf(w, b, 2.0, 0.0).unwrap();
            let want = (-w / (2.0 * b)).exp() / (2.0 * b);
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn sr_pdf_large_w_is_finite() {
        let v = sr_pdf(5_000.0, 0.158, 19.4, 1.29).unwrap();
        assert!(v.is_finite() && v >= 0.0);
        assert!(sr_pdf(-1.0, 0.158, 19.4, 1.29).is_err());
    }

    #[test]
    fn hyp1f1_known_values() {
        // ₁F₁(1; 1; x) = eˣ and ₁F₁(a; a; x) = eˣ.
        for &x in &[0.0, 0.5, 3.0, 40.0, 700.0] {
            assert!((ln_hyp1f1(1.0, 1.0, x) - x).abs() < 1e-10 * x.max(1.0), "x={x}");
        }
        // ₁F₁(2; 1; x) = (1 + x)eˣ.
        for &x in &[0.25f64, 2.0, 10.0] {
            let want = (1.0 + x).ln() + x;
            assert!((ln_hyp1f1(2.0, 1.0, x) - want).abs() < 1e-11);
        }
        // Asymptotic branch agrees with the exact closed form at large x.
        let x = 20_000.0;
        assert!((ln_hyp1f1(2.0, 1.0, x) - ((1.0 + x).ln() + x)).abs() < 1e-9 * x);
    }

    #[test]
    fn large_scale_los_is_zero_db() {
        let mut rng = RngStream::from_seed(5).rng();
        let m = LargeScaleModel::default();
        for _ in 0..100 {
            let d = sample_large_scale(&m, 0.3, &mut rng);
            assert!(d.los);
            assert_eq!(d.gain_db, 0.0);
        }
        // Below the horizon the default step model never gives LoS.
        for _ in 0..100 {
            assert!(!sample_large_scale(&m, 2.0, &mut rng).los);
        }
    }

    #[test]
    fn free_space_doubling_costs_six_db() {
        let d = free_space_constant_db(2.0) - free_space_constant_db(4.0);
        assert!((d - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!((d - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn deterministic_rx_power_sample() {
        let spec = ChannelSpec {
            small_scale: SmallScaleModel::NonFading,
            ..ChannelSpec::default()
        };
        let geo = LinkGeometry { distance_km: 1200.0, zenith: 0.4, off_boresight: 0.0 };
        let mut rng = RngStream::from_seed(1).rng();
        let p = rx_power_sample(&spec, 15.0, &geo, &mut rng).unwrap();
        let want = mean_rx_power(15.0, 0.0, 0.0, 1200.0, 2.0).unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn validation_rejects_bad_models() {
        assert!(SmallScaleModel::ShadowedRician { b: 0.0, m: 1.0, omega: 1.0 }.validate().is_err());
        assert!(SmallScaleModel::Rician { k_factor: -1.0 }.validate().is_err());
        let spec = ChannelSpec { path_loss_exponent: 5.0, ..ChannelSpec::default() };
        assert!(spec.validate().is_err());
    }
}
