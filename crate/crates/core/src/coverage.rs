//! Monte Carlo SINR engine.
//!
//! One trial draws every satellite of every tier, picks the server by mean
//! received power among admissible satellites, and treats the remaining
//! visible satellites as interferers. Below-horizon satellites contribute
//! according to [`NlosInterference`].
//!
//! Each satellite consumes its random draws in a fixed order (position,
//! large-scale, small-scale) whether or not it is visible, so a binomial shell
//! of `n` satellites is an exact prefix of one with `n + k` under the same
//! stream. [`CoverageSweep`] relies on that to evaluate a whole satellite-count
//! grid from one set of draws.

use rand::Rng;

use crate::analysis::CandidateRegion;
use crate::channel::{
    antenna_gain, db_to_linear, mean_rx_power, sample_large_scale, sample_small_scale, ChannelSpec,
};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::geometry::{is_visible, SurfacePoint};
use crate::numeric::pairwise_sum;
use crate::point_process::{sample_nearest_ground_distance, GroundField, ProcessKind, ShellSpec};
use crate::rng::RngStream;

const SATELLITE_LINK: u64 = 0;
const GROUND_LINK: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SystemType {
    /// No noise, no interference: covered whenever a server exists.
    Ideal,
    NoiseLimited,
    InterferenceLimited,
    #[default]
    Generic,
}

/// Contribution of satellites below the user's horizon.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NlosInterference {
    #[default]
    Zero,
    /// Fixed power in dBW per below-horizon satellite.
    Constant(f64),
    /// Full path loss, NLoS large-scale branch and small-scale fading.
    Faded,
}

#[derive(Debug, Clone)]
pub struct SinrConfig {
    pub shells: Vec<ShellSpec>,
    pub channel: ChannelSpec,
    pub noise_dbw: f64,
    pub threshold_db: f64,
    pub bands: u32,
    pub system_type: SystemType,
    pub nlos_interference: NlosInterference,
    pub region: CandidateRegion,
    pub r_earth: f64,
    pub user: SurfacePoint,
}

impl SinrConfig {
    pub fn new(shells: Vec<ShellSpec>, channel: ChannelSpec, noise_dbw: f64, threshold_db: f64) -> Self {
        Self {
            shells,
            channel,
            noise_dbw,
            threshold_db,
            bands: 1,
            system_type: SystemType::Generic,
            nlos_interference: NlosInterference::Zero,
            region: CandidateRegion::HORIZON,
            r_earth: crate::EARTH_RADIUS_KM,
            user: SurfacePoint::north_pole(crate::EARTH_RADIUS_KM),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands == 0 {
            return Err(Error::config("bands must be at least 1"));
        }
        if self.threshold_db.is_nan() || self.threshold_db == f64::INFINITY {
            return Err(Error::config("threshold must be finite or -inf"));
        }
        if self.noise_dbw.is_nan() || self.noise_dbw == f64::INFINITY {
            return Err(Error::config("noise power must be finite or -inf"));
        }
        if !(self.r_earth > 0.0) {
            return Err(Error::config("earth radius must be positive"));
        }
        if let NlosInterference::Constant(c) = self.nlos_interference {
            if c.is_nan() || c == f64::INFINITY {
                return Err(Error::config("NLoS constant must be finite or -inf"));
            }
        }
        if let Some(z) = self.region.max_zenith {
            if !(z > 0.0) {
                return Err(Error::config("candidate zenith limit must be positive"));
            }
        }
        for s in &self.shells {
            s.validate()?;
        }
        self.channel.validate()
    }

    fn noise_w(&self) -> f64 {
        db_to_linear(self.noise_dbw)
    }

    fn threshold_linear(&self) -> f64 {
        db_to_linear(self.threshold_db)
    }
}

/// Distance law of a single noise-limited terrestrial link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkDistance {
    Fixed(f64),
    /// Distance to the nearest node of a planar field.
    NearestGround(GroundField),
}

/// Noise-limited point-to-point link (gateway to user, or a pinned test link).
#[derive(Debug, Clone)]
pub struct GroundLink {
    pub distance: LinkDistance,
    pub channel: ChannelSpec,
    pub tx_power_dbw: f64,
    pub noise_dbw: f64,
    pub threshold_db: f64,
}

impl GroundLink {
    pub fn validate(&self) -> Result<()> {
        match self.distance {
            LinkDistance::Fixed(d) if !(d > 0.0 && d.is_finite()) => {
                return Err(Error::config(format!("link distance {d} km must be positive")))
            }
            LinkDistance::NearestGround(f) if !(f.density_per_km2 > 0.0 && f.density_per_km2.is_finite()) => {
                return Err(Error::config("ground density must be positive"))
            }
            _ => {}
        }
        if self.threshold_db.is_nan() || self.noise_dbw.is_nan() || self.tx_power_dbw.is_nan() {
            return Err(Error::config("ground link powers and threshold must be numbers"));
        }
        self.channel.validate()
    }

    /// Mean SNR at distance `d` km (unit small-scale gain).
    pub fn mean_snr(&self, distance_km: f64) -> Result<f64> {
        let s = mean_rx_power(
            self.tx_power_dbw,
            antenna_gain(&self.channel.antenna, 0.0),
            self.channel.large_scale.deterministic_gain_db(),
            distance_km,
            self.channel.path_loss_exponent,
        )?;
        Ok(s / db_to_linear(self.noise_dbw))
    }

    fn sample_snr<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let d = match self.distance {
            LinkDistance::Fixed(d) => d,
            LinkDistance::NearestGround(f) => sample_nearest_ground_distance(&f, rng)?,
        };
        let large = sample_large_scale(&self.channel.large_scale, 0.0, rng);
        let g = sample_small_scale(&self.channel.small_scale, rng);
        // A gateway sitting on the user is clamped to one metre.
        let s = mean_rx_power(
            self.tx_power_dbw,
            antenna_gain(&self.channel.antenna, 0.0),
            large.gain_db,
            d.max(1e-3),
            self.channel.path_loss_exponent,
        )?;
        Ok(s * g / db_to_linear(self.noise_dbw))
    }
}

#[derive(Debug, Clone)]
pub enum LinkScenario {
    Direct,
    /// Satellite to gateway, gateway to user.
    GwRelayed(GroundLink),
    /// Terrestrial base station and satellite in tandem; outage if either fails.
    Hybrid(GroundLink),
}

impl LinkScenario {
    fn ground(&self) -> Option<&GroundLink> {
        match self {
            LinkScenario::Direct => None,
            LinkScenario::GwRelayed(g) | LinkScenario::Hybrid(g) => Some(g),
        }
    }
}

/// One satellite of a realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteDraw {
    pub tier: usize,
    pub position: SurfacePoint,
    pub visible: bool,
    /// May serve the user (visible and inside the candidate region).
    pub admissible: bool,
    /// Received power without random terms; used for association.
    pub mean_power_w: f64,
    /// Power actually received, or the NLoS contribution when not visible.
    pub rx_power_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub satellites: Vec<SatelliteDraw>,
    pub serving: Option<usize>,
    pub interferers: Vec<usize>,
    /// Aggregate power from satellites below the horizon.
    pub nlos_power_w: f64,
}

impl NetworkRealization {
    pub fn interference_w(&self) -> f64 {
        let visible: Vec<f64> = self.interferers.iter().map(|&i| self.satellites[i].rx_power_w).collect();
        pairwise_sum(&visible) + self.nlos_power_w
    }
}

fn draw_satellite<R: Rng + ?Sized>(
    config: &SinrConfig,
    tier: usize,
    shell: &ShellSpec,
    rng: &mut R,
) -> Result<SatelliteDraw> {
    let position = shell.sample_point(config.r_earth, rng)?;
    let user = &config.user;
    let zenith = user.zenith_to(&position);
    let large = sample_large_scale(&config.channel.large_scale, zenith, rng);
    let g = sample_small_scale(&config.channel.small_scale, rng);

    let visible = is_visible(user, &position, config.r_earth);
    let admissible = visible && config.region.admits(user, &position, config.r_earth);
    let distance = user.distance(&position);
    // Satellite antennas point at nadir.
    let to_user = user.position() - position.position();
    let off_boresight = (-position.direction()).dot(to_user * (1.0 / distance)).clamp(-1.0, 1.0).acos();
    let ant = antenna_gain(&config.channel.antenna, off_boresight);
    let alpha = config.channel.path_loss_exponent;
    let mean_power_w = mean_rx_power(
        shell.tx_power_dbw,
        ant,
        config.channel.large_scale.deterministic_gain_db(),
        distance,
        alpha,
    )?;
    let rx_power_w = if visible {
        mean_rx_power(shell.tx_power_dbw, ant, large.gain_db, distance, alpha)? * g
    } else {
        match config.nlos_interference {
            NlosInterference::Zero => 0.0,
            NlosInterference::Constant(dbw) => db_to_linear(dbw),
            NlosInterference::Faded => mean_rx_power(shell.tx_power_dbw, ant, large.gain_db, distance, alpha)? * g,
        }
    };
    Ok(SatelliteDraw { tier, position, visible, admissible, mean_power_w, rx_power_w })
}

fn better_server(candidate: &SatelliteDraw, current: Option<&SatelliteDraw>, shells: &[ShellSpec]) -> bool {
    match current {
        None => true,
        Some(c) => {
            candidate.mean_power_w > c.mean_power_w
                || (candidate.mean_power_w == c.mean_power_w
                    && shells[candidate.tier].tier_id < shells[c.tier].tier_id)
        }
    }
}

/// Samples one network around `config.user`.
pub fn realize<R: Rng + ?Sized>(config: &SinrConfig, rng: &mut R) -> Result<NetworkRealization> {
    let mut satellites = Vec::new();
    for (tier, shell) in config.shells.iter().enumerate() {
        let n = shell.sample_count(config.r_earth, rng);
        for _ in 0..n {
            satellites.push(draw_satellite(config, tier, shell, rng)?);
        }
    }
    let mut serving: Option<usize> = None;
    for (i, s) in satellites.iter().enumerate() {
        if s.admissible && better_server(s, serving.map(|j| &satellites[j]), &config.shells) {
            serving = Some(i);
        }
    }
    let interferers: Vec<usize> =
        (0..satellites.len()).filter(|&i| satellites[i].visible && Some(i) != serving).collect();
    let nlos: Vec<f64> = satellites.iter().filter(|s| !s.visible).map(|s| s.rx_power_w).collect();
    Ok(NetworkRealization { satellites, serving, interferers, nlos_power_w: pairwise_sum(&nlos) })
}

/// SINR from serving power, visible interference and NLoS interference.
fn combine(system: SystemType, nlos: NlosInterference, s: Option<f64>, i_vis: f64, i_nlos: f64, noise: f64) -> f64 {
    let Some(s) = s else { return 0.0 };
    let denom = match system {
        SystemType::Ideal => return f64::INFINITY,
        SystemType::NoiseLimited => {
            noise + if matches!(nlos, NlosInterference::Constant(_)) { i_nlos } else { 0.0 }
        }
        SystemType::InterferenceLimited => i_vis + i_nlos,
        SystemType::Generic => i_vis + i_nlos + noise,
    };
    if denom == 0.0 {
        f64::INFINITY
    } else {
        s / denom
    }
}

/// SINR of a realisation; zero when nothing can serve.
///
/// An interference-limited system with a server and no interferers returns
/// `+inf`, which counts as covered.
pub fn sinr(realization: &NetworkRealization, config: &SinrConfig) -> f64 {
    let visible: Vec<f64> =
        realization.interferers.iter().map(|&i| realization.satellites[i].rx_power_w).collect();
    combine(
        config.system_type,
        config.nlos_interference,
        realization.serving.map(|i| realization.satellites[i].rx_power_w),
        pairwise_sum(&visible),
        realization.nlos_power_w,
        config.noise_w(),
    )
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    fn binomial(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self { value: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials }
    }

    fn sample_mean(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = pairwise_sum(values) / n;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
        let var = if values.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
        Self { value: mean, stderr: (var / n).sqrt(), trials: values.len() as u64 }
    }

    /// Product of two independent estimates (delta-method standard error).
    pub fn product(a: Estimate, b: Estimate) -> Self {
        Self {
            value: a.value * b.value,
            stderr: ((b.value * a.stderr).powi(2) + (a.value * b.stderr).powi(2)).sqrt(),
            trials: a.trials,
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    Ok(())
}

fn satellite_sinrs(config: &SinrConfig, trials: u64, stream: RngStream) -> Result<Vec<f64>> {
    config.validate()?;
    let link = stream.child(SATELLITE_LINK);
    map_indexed(trials, |t| {
        let mut rng = link.child(t).rng();
        realize(config, &mut rng).map(|r| sinr(&r, config))
    })
    .into_iter()
    .collect()
}

fn ground_snrs(link: &GroundLink, trials: u64, stream: RngStream) -> Result<Vec<f64>> {
    link.validate()?;
    let s = stream.child(GROUND_LINK);
    map_indexed(trials, |t| link.sample_snr(&mut s.child(t).rng())).into_iter().collect()
}

fn count_above(values: &[f64], threshold: f64) -> u64 {
    values.iter().filter(|&&v| v > threshold).count() as u64
}

/// Coverage of a single noise-limited link.
pub fn ground_link_coverage(link: &GroundLink, trials: u64, stream: RngStream) -> Result<Estimate> {
    check_trials(trials)?;
    let snrs = ground_snrs(link, trials, stream)?;
    Ok(Estimate::binomial(count_above(&snrs, db_to_linear(link.threshold_db)), trials))
}

/// P(SINR > T). Relayed scenarios multiply independently estimated link
/// coverages; the satellite link uses the same substreams in every scenario.
pub fn coverage_probability(
    config: &SinrConfig,
    scenario: &LinkScenario,
    trials: u64,
    stream: RngStream,
) -> Result<Estimate> {
    check_trials(trials)?;
    let sinrs = satellite_sinrs(config, trials, stream)?;
    let sat = Estimate::binomial(count_above(&sinrs, config.threshold_linear()), trials);
    match scenario.ground() {
        None => Ok(sat),
        Some(g) => Ok(Estimate::product(sat, ground_link_coverage(g, trials, stream)?)),
    }
}

/// Mean of log₂(1 + SINR) divided by the band count.
///
/// For relayed scenarios each trial takes the weaker of the two hops, pairing
/// trial `t` of both links.
pub fn average_rate(config: &SinrConfig, scenario: &LinkScenario, trials: u64, stream: RngStream) -> Result<Estimate> {
    check_trials(trials)?;
    if config.system_type == SystemType::Ideal {
        return Err(Error::config("average rate is unbounded for the ideal system type"));
    }
    let sinrs = satellite_sinrs(config, trials, stream)?;
    let mut rates: Vec<f64> = sinrs.iter().map(|s| s.ln_1p() / std::f64::consts::LN_2).collect();
    if let Some(g) = scenario.ground() {
        let snrs = ground_snrs(g, trials, stream)?;
        for (r, s) in rates.iter_mut().zip(&snrs) {
            *r = r.min(s.ln_1p() / std::f64::consts::LN_2);
        }
    }
    let bands = config.bands as f64;
    for r in &mut rates {
        *r /= bands;
    }
    Ok(Estimate::sample_mean(&rates))
}

/// E[exp(−s·I)] for each `s` in `s_grid`, all from the same realisations.
pub fn interference_laplace(config: &SinrConfig, s_grid: &[f64], trials: u64, stream: RngStream) -> Result<Vec<f64>> {
    check_trials(trials)?;
    config.validate()?;
    if let Some(s) = s_grid.iter().find(|s| !(**s >= 0.0)) {
        return Err(Error::domain(format!("Laplace argument {s} must be nonnegative")));
    }
    let link = stream.child(SATELLITE_LINK);
    let interference: Vec<f64> = map_indexed(trials, |t| {
        let mut rng = link.child(t).rng();
        realize(config, &mut rng).map(|r| r.interference_w())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(s_grid
        .iter()
        .map(|&s| {
            let terms: Vec<f64> = interference.iter().map(|i| (-s * i).exp()).collect();
            pairwise_sum(&terms) / trials as f64
        })
        .collect())
}

/// Serving and interference powers for every prefix size of one binomial
/// shell, kept so the threshold and noise can be changed without resampling.
#[derive(Debug, Clone)]
pub struct CoverageSweep {
    pub counts: Vec<usize>,
    /// `signal[k][t]`: serving power for `counts[k]` in trial `t` (0 if none).
    signal: Vec<Vec<f64>>,
    /// Interference excluding noise, laid out like `signal`.
    interference: Vec<Vec<f64>>,
    trials: u64,
    system_type: SystemType,
    nlos_only: Vec<Vec<f64>>,
    nlos: NlosInterference,
}

impl CoverageSweep {
    /// Draws `trials` networks of `max(counts)` satellites on a single BPP
    /// shell and records every prefix in `counts`.
    pub fn sample(config: &SinrConfig, counts: &[usize], trials: u64, stream: RngStream) -> Result<Self> {
        check_trials(trials)?;
        if counts.is_empty() {
            return Err(Error::config("satellite-count grid is empty"));
        }
        let [shell] = config.shells.as_slice() else {
            return Err(Error::config("a count sweep needs exactly one shell"));
        };
        if !matches!(shell.kind, ProcessKind::Bpp { .. }) {
            return Err(Error::config("a count sweep needs a binomial shell"));
        }
        let n_max = *counts.iter().max().expect("nonempty");
        let mut full = config.clone();
        full.shells = vec![ShellSpec { kind: ProcessKind::Bpp { count: n_max }, ..shell.clone() }];
        full.validate()?;

        let link = stream.child(SATELLITE_LINK);
        let per_trial = map_indexed(trials, |t| -> Result<Vec<(f64, f64, f64)>> {
            let mut rng = link.child(t).rng();
            let mut serving: Option<SatelliteDraw> = None;
            let (mut vis_sum, mut nlos_sum) = (0.0f64, 0.0f64);
            let mut done = 0usize;
            let mut sorted: Vec<(usize, usize)> = counts.iter().copied().enumerate().collect();
            sorted.sort_by_key(|&(_, n)| n);
            let mut slots = vec![(0.0, 0.0, 0.0); counts.len()];
            for &(slot, n) in &sorted {
                while done < n {
                    let s = draw_satellite(&full, 0, &full.shells[0], &mut rng)?;
                    if s.visible {
                        vis_sum += s.rx_power_w;
                    } else {
                        nlos_sum += s.rx_power_w;
                    }
                    if s.admissible && better_server(&s, serving.as_ref(), &full.shells) {
                        serving = Some(s);
                    }
                    done += 1;
                }
                let sig = serving.map_or(0.0, |s| s.rx_power_w);
                // Round-off can leave a tiny negative remainder.
                slots[slot] = (sig, (vis_sum - sig).max(0.0), nlos_sum);
            }
            Ok(slots)
        });
        let mut signal = vec![Vec::with_capacity(trials as usize); counts.len()];
        let mut interference = vec![Vec::with_capacity(trials as usize); counts.len()];
        let mut nlos_only = vec![Vec::with_capacity(trials as usize); counts.len()];
        for row in per_trial {
            for (k, (s, i, n)) in row?.into_iter().enumerate() {
                signal[k].push(s);
                interference[k].push(i);
                nlos_only[k].push(n);
            }
        }
        Ok(Self {
            counts: counts.to_vec(),
            signal,
            interference,
            trials,
            system_type: config.system_type,
            nlos_only,
            nlos: config.nlos_interference,
        })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    /// Coverage for each count at the given noise and threshold.
    pub fn coverage(&self, noise_dbw: f64, threshold_db: f64) -> Vec<Estimate> {
        let noise = db_to_linear(noise_dbw);
        let t = db_to_linear(threshold_db);
        (0..self.counts.len())
            .map(|k| {
                let hits = (0..self.trials as usize)
                    .filter(|&j| {
                        let s = self.signal[k][j];
                        let sig = if s > 0.0 { Some(s) } else { None };
                        combine(self.system_type, self.nlos, sig, self.interference[k][j], self.nlos_only[k][j], noise)
                            > t
                    })
                    .count() as u64;
                Estimate::binomial(hits, self.trials)
            })
            .collect()
    }
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}
