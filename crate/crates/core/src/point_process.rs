//! Samplers for satellite point processes on spheres and for the planar
//! gateway field.
//!
//! All samplers draw from an explicit generator; pass `RngStream::rng()` to get
//! a reproducible one. Satellites of a shell lie at radius `r_earth + altitude`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{SurfacePoint, Vec3};
use crate::numeric::adaptive_simpson;

/// How the mean count of a Poisson shell is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PppIntensity {
    /// Satellites per km² of shell surface.
    Density(f64),
    MeanCount(f64),
}

/// Latitude weighting of a non-homogeneous shell.
///
/// The sampled latitude marginal is proportional to `weight(φ)·cos φ`.
#[derive(Clone)]
pub enum LatitudeDensity {
    /// Constant weight; identical in law to a binomial shell.
    Uniform,
    /// Occupancy of circular orbits at `inclination` (radians): the latitude
    /// marginal is cos φ / (π√(sin²i − sin²φ)) on |φ| < i.
    InclinedOrbit { inclination: f64 },
    /// Indicator of |φ| ≤ `max_latitude`.
    Band { max_latitude: f64 },
    /// Arbitrary weight; `upper_bound` must dominate `f` on [−π/2, π/2].
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        upper_bound: f64,
    },
}

impl fmt::Debug for LatitudeDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform => write!(f, "Uniform"),
            Self::InclinedOrbit { inclination } => {
                write!(f, "InclinedOrbit {{ inclination: {inclination} }}")
            }
            Self::Band { max_latitude } => write!(f, "Band {{ max_latitude: {max_latitude} }}"),
            Self::Custom { upper_bound, .. } => {
                write!(f, "Custom {{ upper_bound: {upper_bound}, .. }}")
            }
        }
    }
}

impl LatitudeDensity {
    /// The (unnormalised) weight at latitude `phi`.
    pub fn weight(&self, phi: f64) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::InclinedOrbit { inclination } => {
                let gap = inclination.sin().powi(2) - phi.sin().powi(2);
                if phi.abs() < *inclination && gap > 0.0 {
                    1.0 / gap.sqrt()
                } else {
                    0.0
                }
            }
            Self::Band { max_latitude } => {
                if phi.abs() <= *max_latitude {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Custom { f, .. } => f(phi),
        }
    }

    /// ∫ weight(φ)·cos φ dφ over [−π/2, π/2].
    pub fn mass(&self) -> f64 {
        match self {
            Self::Uniform => 2.0,
            Self::InclinedOrbit { inclination } => {
                if *inclination > 0.0 {
                    PI
                } else {
                    0.0
                }
            }
            Self::Band { max_latitude } => 2.0 * max_latitude.clamp(0.0, FRAC_PI_2).sin(),
            Self::Custom { f, .. } => {
                adaptive_simpson(&|p: f64| f(p) * p.cos(), -FRAC_PI_2, FRAC_PI_2, 1e-10)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::InclinedOrbit { inclination } if !(*inclination > 0.0 && *inclination <= FRAC_PI_2) => {
                return Err(Error::config(format!("inclination {inclination} outside (0, pi/2]")));
            }
            Self::Custom { upper_bound, f } => {
                if !(upper_bound.is_finite() && *upper_bound > 0.0) {
                    return Err(Error::config("custom latitude density needs a finite positive bound"));
                }
                let n = 2048;
                for k in 0..=n {
                    let phi = -FRAC_PI_2 + PI * k as f64 / n as f64;
                    let w = f(phi);
                    if !(w >= 0.0) || w > *upper_bound {
                        return Err(Error::config(format!(
                            "latitude density {w} at {phi} rad is negative or exceeds its bound"
                        )));
                    }
                }
            }
            _ => {}
        }
        if !(self.mass() > 0.0) {
            return Err(Error::config("latitude density has zero integral"));
        }
        Ok(())
    }
}

/// Whether binomial points are placed area-uniformly or with uniform polar angle.
///
/// `AngleUniform` concentrates points near the poles; it exists only for
/// comparison with the area-uniform placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    #[default]
    AreaUniform,
    AngleUniform,
}

#[derive(Debug, Clone)]
pub enum ProcessKind {
    Bpp { count: usize },
    Ppp(PppIntensity),
    Nppp { count: usize, latitude_density: LatitudeDensity },
}

/// One satellite tier.
#[derive(Debug, Clone)]
pub struct ShellSpec {
    pub kind: ProcessKind,
    pub altitude_km: f64,
    pub tx_power_dbw: f64,
    pub tier_id: u32,
    pub placement: Placement,
}

impl ShellSpec {
    pub fn bpp(count: usize, altitude_km: f64, tx_power_dbw: f64) -> Self {
        Self {
            kind: ProcessKind::Bpp { count },
            altitude_km,
            tx_power_dbw,
            tier_id: 0,
            placement: Placement::AreaUniform,
        }
    }

    pub fn ppp(intensity: PppIntensity, altitude_km: f64, tx_power_dbw: f64) -> Self {
        Self { kind: ProcessKind::Ppp(intensity), ..Self::bpp(0, altitude_km, tx_power_dbw) }
    }

    pub fn nppp(
        count: usize,
        latitude_density: LatitudeDensity,
        altitude_km: f64,
        tx_power_dbw: f64,
    ) -> Self {
        Self {
            kind: ProcessKind::Nppp { count, latitude_density },
            ..Self::bpp(0, altitude_km, tx_power_dbw)
        }
    }

    pub fn with_tier(mut self, tier_id: u32) -> Self {
        self.tier_id = tier_id;
        self
    }

    pub fn radius(&self, r_earth: f64) -> f64 {
        r_earth + self.altitude_km
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_km > 0.0 && self.altitude_km.is_finite()) {
            return Err(Error::config(format!("altitude {} km must be positive", self.altitude_km)));
        }
        match &self.kind {
            ProcessKind::Ppp(PppIntensity::Density(x) | PppIntensity::MeanCount(x))
                if !(*x >= 0.0 && x.is_finite()) =>
            {
                Err(Error::config(format!("PPP intensity {x} must be nonnegative")))
            }
            ProcessKind::Nppp { latitude_density, .. } => latitude_density.validate(),
            _ => Ok(()),
        }
    }

    /// Expected number of satellites on the shell.
    pub fn mean_count(&self, r_earth: f64) -> f64 {
        match &self.kind {
            ProcessKind::Bpp { count } | ProcessKind::Nppp { count, .. } => *count as f64,
            ProcessKind::Ppp(PppIntensity::MeanCount(m)) => *m,
            ProcessKind::Ppp(PppIntensity::Density(d)) => {
                let r = self.radius(r_earth);
                d * 4.0 * PI * r * r
            }
        }
    }

    /// Draws the number of satellites for one realisation.
    pub fn sample_count<R: Rng + ?Sized>(&self, r_earth: f64, rng: &mut R) -> usize {
        match &self.kind {
            ProcessKind::Bpp { count } | ProcessKind::Nppp { count, .. } => *count,
            ProcessKind::Ppp(_) => sample_poisson(self.mean_count(r_earth), rng),
        }
    }

    /// Draws one satellite location (the points of a shell are i.i.d. given the count).
    pub fn sample_point<R: Rng + ?Sized>(&self, r_earth: f64, rng: &mut R) -> Result<SurfacePoint> {
        let radius = self.radius(r_earth);
        match &self.kind {
            ProcessKind::Bpp { .. } => Ok(match self.placement {
                Placement::AreaUniform => sample_uniform_sphere(rng, radius),
                Placement::AngleUniform => sample_angle_uniform_sphere(rng, radius),
            }),
            ProcessKind::Ppp(_) => Ok(sample_uniform_sphere(rng, radius)),
            ProcessKind::Nppp { latitude_density, .. } => {
                sample_weighted_latitude(latitude_density, rng, radius)
            }
        }
    }
}

/// Poisson draw; zero mean yields zero.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as usize
}

/// Area-uniform point: azimuth ~ U[0, 2π), cos(polar) ~ U[−1, 1].
pub fn sample_uniform_sphere<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> SurfacePoint {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi: f64 = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    SurfacePoint::from_unit(unit(Vec3::new(s * cp, s * sp, z)), radius)
}

/// Polar angle ~ U[0, π], azimuth ~ U[0, 2π).
pub fn sample_angle_uniform_sphere<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> SurfacePoint {
    let theta: f64 = PI * rng.random::<f64>();
    let phi: f64 = 2.0 * PI * rng.random::<f64>();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    SurfacePoint::from_unit(unit(Vec3::new(st * cp, st * sp, ct)), radius)
}

// Re-normalise to absorb round-off so the unit-norm invariant holds to 1e-15.
fn unit(v: Vec3) -> Vec3 {
    v * (1.0 / v.norm())
}

fn sample_weighted_latitude<R: Rng + ?Sized>(
    density: &LatitudeDensity,
    rng: &mut R,
    radius: f64,
) -> Result<SurfacePoint> {
    match density {
        LatitudeDensity::Uniform => Ok(sample_uniform_sphere(rng, radius)),
        LatitudeDensity::InclinedOrbit { inclination } => {
            // Uniform argument of latitude on a circular orbit; the weight is
            // unbounded at ±i so rejection would not work here.
            let u: f64 = 2.0 * PI * rng.random::<f64>();
            let lon: f64 = 2.0 * PI * rng.random::<f64>() - PI;
            let lat = (inclination.sin() * u.sin()).clamp(-1.0, 1.0).asin();
            SurfacePoint::from_lat_lon(lat, lon, radius)
        }
        LatitudeDensity::Band { .. } | LatitudeDensity::Custom { .. } => {
            let bound = match density {
                LatitudeDensity::Custom { upper_bound, .. } => *upper_bound,
                _ => 1.0,
            };
            const MAX_ATTEMPTS: usize = 100_000_000;
            for _ in 0..MAX_ATTEMPTS {
                let p = sample_uniform_sphere(rng, radius);
                let w = density.weight(p.latitude());
                if w > bound {
                    return Err(Error::config(format!(
                        "latitude density {w} exceeds declared bound {bound}"
                    )));
                }
                if rng.random::<f64>() * bound < w {
                    return Ok(p);
                }
            }
            Err(Error::config("latitude density rejection sampler did not accept a point"))
        }
    }
}

/// `count` i.i.d. area-uniform satellites.
pub fn sample_bpp<R: Rng + ?Sized>(spec: &ShellSpec, r_earth: f64, rng: &mut R) -> Result<Vec<SurfacePoint>> {
    let ProcessKind::Bpp { count } = spec.kind else {
        return Err(Error::config("sample_bpp needs a BPP shell"));
    };
    spec.validate()?;
    (0..count).map(|_| spec.sample_point(r_earth, rng)).collect()
}

/// Poisson count, then area-uniform locations.
pub fn sample_ppp<R: Rng + ?Sized>(spec: &ShellSpec, r_earth: f64, rng: &mut R) -> Result<Vec<SurfacePoint>> {
    if !matches!(spec.kind, ProcessKind::Ppp(_)) {
        return Err(Error::config("sample_ppp needs a PPP shell"));
    }
    spec.validate()?;
    let n = spec.sample_count(r_earth, rng);
    (0..n).map(|_| spec.sample_point(r_earth, rng)).collect()
}

/// `count` i.i.d. points with latitude weighted by the shell's density.
pub fn sample_nppp<R: Rng + ?Sized>(spec: &ShellSpec, r_earth: f64, rng: &mut R) -> Result<Vec<SurfacePoint>> {
    let ProcessKind::Nppp { count, .. } = spec.kind else {
        return Err(Error::config("sample_nppp needs an NPPP shell"));
    };
    spec.validate()?;
    (0..count).map(|_| spec.sample_point(r_earth, rng)).collect()
}

/// Samples whichever process the shell describes.
pub fn sample_shell<R: Rng + ?Sized>(spec: &ShellSpec, r_earth: f64, rng: &mut R) -> Result<Vec<SurfacePoint>> {
    spec.validate()?;
    let n = spec.sample_count(r_earth, rng);
    (0..n).map(|_| spec.sample_point(r_earth, rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundNodeKind {
    Gateway,
    BaseStation,
    User,
}

/// Planar Poisson field of ground nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundField {
    pub density_per_km2: f64,
    pub node_kind: GroundNodeKind,
}

impl GroundField {
    pub fn gateways(density_per_km2: f64) -> Self {
        Self { density_per_km2, node_kind: GroundNodeKind::Gateway }
    }
}

/// Distance from the origin to the nearest node of a planar PPP:
/// √(−ln U / (π λ)) with U ~ U(0, 1].
pub fn sample_nearest_ground_distance<R: Rng + ?Sized>(field: &GroundField, rng: &mut R) -> Result<f64> {
    let lambda = field.density_per_km2;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::config(format!("ground density {lambda} must be positive")));
    }
    let u = 1.0 - rng.random::<f64>();
    Ok((-u.ln() / (PI * lambda)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    const RE: f64 = 6371.0;

    #[test]
    fn bpp_count_and_radius() {
        let mut rng = RngStream::from_seed(1).rng();
        assert!(sample_bpp(&ShellSpec::bpp(0, 1000.0, 15.0), RE, &mut rng).unwrap().is_empty());
        let pts = sample_bpp(&ShellSpec::bpp(30, 1000.0, 15.0), RE, &mut rng).unwrap();
        assert_eq!(pts.len(), 30);
        assert!(pts.iter().all(|p| p.radius() == 7371.0));
        assert!(pts.iter().all(|p| (p.direction().norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let mut rng = RngStream::from_seed(1).rng();
        let ppp = ShellSpec::ppp(PppIntensity::MeanCount(3.0), 1000.0, 15.0);
        assert!(sample_bpp(&ppp, RE, &mut rng).is_err());
        assert!(sample_ppp(&ShellSpec::bpp(3, 1000.0, 0.0), RE, &mut rng).is_err());
        assert!(sample_nppp(&ppp, RE, &mut rng).is_err());
    }

    #[test]
    fn ppp_zero_density_is_empty() {
        let mut rng = RngStream::from_seed(2).rng();
        let s = ShellSpec::ppp(PppIntensity::Density(0.0), 1000.0, 15.0);
        assert!(sample_ppp(&s, RE, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn nppp_band_respects_support() {
        let mut rng = RngStream::from_seed(3).rng();
        let i = 0.4;
        let s = ShellSpec::nppp(2000, LatitudeDensity::Band { max_latitude: i }, 550.0, 0.0);
        let pts = sample_nppp(&s, RE, &mut rng).unwrap();
        assert!(pts.iter().all(|p| p.latitude().abs() <= i + 1e-12));
    }

    #[test]
    fn nppp_zero_integral_is_config_error() {
        let mut rng = RngStream::from_seed(3).rng();
        let s = ShellSpec::nppp(10, LatitudeDensity::Band { max_latitude: 0.0 }, 550.0, 0.0);
        assert!(matches!(sample_nppp(&s, RE, &mut rng), Err(Error::Config(_))));
        let zero = LatitudeDensity::Custom { f: Arc::new(|_| 0.0), upper_bound: 1.0 };
        let s = ShellSpec::nppp(10, zero, 550.0, 0.0);
        assert!(matches!(sample_nppp(&s, RE, &mut rng), Err(Error::Config(_))));
    }

    #[test]
    fn custom_density_bound_checked() {
        let bad = LatitudeDensity::Custom { f: Arc::new(|p: f64| 2.0 + p), upper_bound: 1.0 };
        assert!(ShellSpec::nppp(1, bad, 550.0, 0.0).validate().is_err());
    }

    #[test]
    fn inclined_orbit_mass_matches_quadrature() {
        let d = LatitudeDensity::InclinedOrbit { inclination: 53f64.to_radians() };
        let i = 53f64.to_radians();
        // Substitute sin φ = sin i · sin u to remove the endpoint singularity.
        let q = adaptive_simpson(
            &|u: f64| {
                let phi = (i.sin() * u.sin()).asin();
                d.weight(phi) * phi.cos() * i.sin() * u.cos() / phi.cos()
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            1e-7,
        );
        assert!((q - d.mass()).abs() < 1e-6, "{q}");
    }

    #[test]
    fn nearest_ground_distance_errors_and_values() {
        let mut rng = RngStream::from_seed(4).rng();
        assert!(sample_nearest_ground_distance(&GroundField::gateways(0.0), &mut rng).is_err());
        for _ in 0..100 {
            let d = sample_nearest_ground_distance(&GroundField::gateways(3.0), &mut rng).unwrap();
            assert!(d.is_finite() && d >= 0.0);
        }
    }

    #[test]
    fn determinism_bitwise() {
        let s = ShellSpec::ppp(PppIntensity::MeanCount(50.0), 800.0, 0.0);
        let a = sample_shell(&s, RE, &mut RngStream::new(9, 4).rng()).unwrap();
        let b = sample_shell(&s, RE, &mut RngStream::new(9, 4).rng()).unwrap();
        assert_eq!(a, b);
    }
}
