//! Closed-form contact-distance, nearest-neighbour and availability laws, and
//! the Monte Carlo tier-association estimator.
//!
//! The laws follow from void probabilities of spherical caps: a user sees no
//! satellite closer than `d0` exactly when the cap cut out by the cone of side
//! `d0` is empty.

use std::f64::consts::FRAC_PI_2;

use crate::channel::{antenna_gain, mean_rx_power, ChannelSpec};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::geometry::{
    is_visible, max_slant_range, polar_angle_from_slant, slant_from_zenith, SurfacePoint,
};
use crate::point_process::{ProcessKind, ShellSpec};
use crate::rng::RngStream;

/// Contact-distance law of one shell seen from the ground.
#[derive(Debug, Clone)]
pub struct DistanceLaw {
    pub shell: ShellSpec,
    pub r_earth: f64,
}

impl DistanceLaw {
    pub fn new(shell: ShellSpec, r_earth: f64) -> Result<Self> {
        shell.validate()?;
        if !(r_earth > 0.0) {
            return Err(Error::config("earth radius must be positive"));
        }
        Ok(Self { shell, r_earth })
    }

    pub fn shell_radius(&self) -> f64 {
        self.shell.radius(self.r_earth)
    }

    /// Probability that a cap covering `fraction` of the shell holds no satellite.
    fn void_probability(&self, fraction: f64) -> Result<f64> {
        match &self.shell.kind {
            ProcessKind::Bpp { count } => Ok((1.0 - fraction).powi(*count as i32)),
            ProcessKind::Ppp(_) => Ok((-self.shell.mean_count(self.r_earth) * fraction).exp()),
            ProcessKind::Nppp { .. } => Err(Error::Unsupported(
                "closed-form laws depend on the user latitude for non-homogeneous shells".into(),
            )),
        }
    }
}

/// P(contact distance > d0).
pub fn contact_distance_ccdf(law: &DistanceLaw, d0: f64) -> Result<f64> {
    let theta = polar_angle_from_slant(law.r_earth, law.shell_radius(), d0)?;
    law.void_probability((1.0 - theta.cos()) / 2.0)
}

/// P(contact zenith angle > zenith), for zenith in [0, π/2].
pub fn contact_angle_ccdf(law: &DistanceLaw, zenith: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&zenith) {
        return Err(Error::domain(format!("zenith {zenith} outside [0, pi/2]")));
    }
    let d = slant_from_zenith(law.r_earth, law.shell_radius(), zenith)?;
    let d_max = max_slant_range(law.r_earth, law.shell_radius())?;
    let d = d.clamp(law.shell_radius() - law.r_earth, d_max);
    contact_distance_ccdf(law, d)
}

/// P(distance from a satellite to its nearest neighbour > d) for a binomial shell.
///
/// The reference satellite belongs to the process, hence the N − 1 exponent.
pub fn nearest_neighbor_ccdf(shell: &ShellSpec, r_earth: f64, d: f64) -> Result<f64> {
    let ProcessKind::Bpp { count } = shell.kind else {
        return Err(Error::Unsupported("nearest-neighbour law is for binomial shells".into()));
    };
    if count < 2 {
        return Err(Error::domain("nearest neighbour needs at least two satellites"));
    }
    let r = shell.radius(r_earth);
    if !(0.0..=2.0 * r).contains(&d) {
        return Err(Error::domain(format!("distance {d} outside [0, {}]", 2.0 * r)));
    }
    let theta = 2.0 * (d / (2.0 * r)).clamp(0.0, 1.0).asin();
    Ok((1.0 - (1.0 - theta.cos()) / 2.0).powi(count as i32 - 1))
}

/// Probability that at least one satellite is above the horizon.
pub fn availability_probability(shell: &ShellSpec, r_earth: f64) -> Result<f64> {
    let law = DistanceLaw::new(shell.clone(), r_earth)?;
    let horizon = max_slant_range(r_earth, law.shell_radius())?;
    Ok(1.0 - contact_distance_ccdf(&law, horizon)?)
}

/// Restricts which satellites may serve a ground receiver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CandidateRegion {
    /// Only satellites above the horizon.
    pub visible_only: bool,
    /// Receive-beam limit: only satellites within this zenith angle.
    pub max_zenith: Option<f64>,
}

impl CandidateRegion {
    pub const HORIZON: CandidateRegion = CandidateRegion { visible_only: true, max_zenith: None };

    pub fn admits(&self, ground: &SurfacePoint, sat: &SurfacePoint, r_block: f64) -> bool {
        if self.visible_only && !is_visible(ground, sat, r_block) {
            return false;
        }
        match self.max_zenith {
            Some(z) => ground.zenith_to(sat) <= z,
            None => true,
        }
    }
}

/// One tier of a multi-tier constellation.
#[derive(Debug, Clone)]
pub struct Tier {
    pub shell: ShellSpec,
    pub channel: ChannelSpec,
}

/// Mean received power (no random terms) from a satellite at `distance_km`.
pub fn deterministic_rx_power(shell: &ShellSpec, channel: &ChannelSpec, distance_km: f64) -> Result<f64> {
    mean_rx_power(
        shell.tx_power_dbw,
        antenna_gain(&channel.antenna, 0.0),
        channel.large_scale.deterministic_gain_db(),
        distance_km,
        channel.path_loss_exponent,
    )
}

/// Monte Carlo probability that each tier's nearest satellite offers the
/// strongest mean received power.
///
/// Draws with no admissible satellite in any tier are left out, so the
/// returned frequencies are conditional on some tier being able to serve.
/// Ties go to the lowest `tier_id`.
pub fn association_probability(
    tiers: &[Tier],
    r_earth: f64,
    region: CandidateRegion,
    trials: u64,
    stream: RngStream,
) -> Result<Vec<f64>> {
    if tiers.is_empty() {
        return Err(Error::config("association needs at least one tier"));
    }
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    for t in tiers {
        t.shell.validate()?;
        t.channel.validate()?;
    }
    let user = SurfacePoint::north_pole(r_earth);
    let winners = map_indexed(trials, |trial| {
        let trial_stream = stream.child(trial);
        let mut best: Option<(f64, u32, usize)> = None;
        for (idx, tier) in tiers.iter().enumerate() {
            let mut rng = trial_stream.child(tier.shell.tier_id as u64).rng();
            let n = tier.shell.sample_count(r_earth, &mut rng);
            let mut nearest = f64::INFINITY;
            for _ in 0..n {
                let sat = tier.shell.sample_point(r_earth, &mut rng)?;
                if region.admits(&user, &sat, r_earth) {
                    nearest = nearest.min(user.distance(&sat));
                }
            }
            if !nearest.is_finite() {
                continue;
            }
            let p = deterministic_rx_power(&tier.shell, &tier.channel, nearest)?;
            let better = match best {
                None => true,
                Some((bp, bid, _)) => p > bp || (p == bp && tier.shell.tier_id < bid),
            };
            if better {
                best = Some((p, tier.shell.tier_id, idx));
            }
        }
        Ok::<_, Error>(best.map(|(_, _, idx)| idx))
    });
    let mut counts = vec![0u64; tiers.len()];
    let mut served = 0u64;
    for w in winners {
        if let Some(idx) = w? {
            counts[idx] += 1;
            served += 1;
        }
    }
    if served == 0 {
        return Err(Error::Domain("no trial had a serving satellite in any tier".into()));
    }
    Ok(counts.into_iter().map(|c| c as f64 / served as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::PppIntensity;

    const RE: f64 = 6371.0;

    fn bpp_law(n: usize) -> DistanceLaw {
        DistanceLaw::new(ShellSpec::bpp(n, 1000.0, 15.0), RE).unwrap()
    }

    #[test]
    fn contact_ccdf_examples() {
        let law = bpp_law(30);
        assert_eq!(contact_distance_ccdf(&law, 1000.0).unwrap(), 1.0);
        let horizon = max_slant_range(RE, 7371.0).unwrap();
        let v = contact_distance_ccdf(&law, horizon).unwrap();
        assert!((v - 0.121_564_318_640_022_93).abs() < 1e-12);
        assert!(contact_distance_ccdf(&law, 500.0).is_err());
        assert!(contact_distance_ccdf(&law, 20_000.0).is_err());
    }

    #[test]
    fn single_satellite_hemisphere_cap_is_half() {
        let law = bpp_law(1);
        // Cap is a hemisphere when cos θ = 0: d² = r_E² + r_S².
        let d = (RE * RE + 7371.0f64.powi(2)).sqrt();
        assert!((contact_distance_ccdf(&law, d).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ppp_uses_exponential_void() {
        let law = DistanceLaw::new(ShellSpec::ppp(PppIntensity::MeanCount(30.0), 1000.0, 15.0), RE)
            .unwrap();
        let horizon = max_slant_range(RE, 7371.0).unwrap();
        let a = (1.0 - RE / 7371.0) / 2.0;
        let v = contact_distance_ccdf(&law, horizon).unwrap();
        assert!((v - (-30.0 * a).exp()).abs() < 1e-12);
    }

    #[test]
    fn contact_angle_matches_distance() {
        let law = bpp_law(30);
        assert_eq!(contact_angle_ccdf(&law, 0.0).unwrap(), 1.0);
        for k in 0..100 {
            let d = 1000.0 + 2707.0 * k as f64 / 99.0;
            let z = crate::geometry::zenith_angle(RE, 7371.0, d).unwrap();
            let a = contact_angle_ccdf(&law, z).unwrap();
            let b = contact_distance_ccdf(&law, d).unwrap();
            assert!((a - b).abs() < 1e-9, "d={d}");
        }
        let mut prev = 1.0;
        for k in 0..100 {
            let v = contact_angle_ccdf(&law, (FRAC_PI_2 * k as f64 / 99.0).min(FRAC_PI_2)).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!(contact_angle_ccdf(&law, 1.7).is_err());
    }

    #[test]
    fn nearest_neighbor_examples() {
        let s = ShellSpec::bpp(100, 1000.0, 15.0);
        assert_eq!(nearest_neighbor_ccdf(&s, RE, 0.0).unwrap(), 1.0);
        assert!(nearest_neighbor_ccdf(&s, RE, 2.0 * 7371.0).unwrap().abs() < 1e-15);
        assert!(nearest_neighbor_ccdf(&ShellSpec::bpp(1, 1000.0, 0.0), RE, 10.0).is_err());
        assert!(nearest_neighbor_ccdf(&s, RE, -1.0).is_err());
    }

    #[test]
    fn availability_examples() {
        assert_eq!(availability_probability(&ShellSpec::bpp(0, 1000.0, 0.0), RE).unwrap(), 0.0);
        let a = availability_probability(&ShellSpec::bpp(30, 1000.0, 0.0), RE).unwrap();
        assert!((a - 0.878_435_681_359_977_1).abs() < 1e-12);
        let big = availability_probability(&ShellSpec::bpp(10_000, 1000.0, 0.0), RE).unwrap();
        assert!(big >= 0.999_999);
    }

    #[test]
    fn association_single_tier_and_errors() {
        let tier = Tier { shell: ShellSpec::bpp(20, 1000.0, 15.0), channel: ChannelSpec::default() };
        let p = association_probability(&[tier], RE, CandidateRegion::default(), 200, RngStream::from_seed(1))
            .unwrap();
        assert_eq!(p, vec![1.0]);
        assert!(association_probability(&[], RE, CandidateRegion::default(), 10, RngStream::from_seed(1)).is_err());
    }
}
