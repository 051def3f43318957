//! Exact geometry on concentric spheres: caps, slant ranges, zenith angles and
//! line-of-sight visibility.
//!
//! Lengths are in km and angles in radians throughout.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Slack allowed on cosine arguments before they are treated as out of domain.
const ACOS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A location on a sphere centred at the earth's centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    direction: Vec3,
    radius: f64,
}

impl SurfacePoint {
    /// Builds a point from any nonzero direction; the direction is normalised.
    pub fn new(direction: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius must be positive, got {radius}")));
        }
        let direction = direction
            .normalized()
            .ok_or_else(|| Error::domain("direction must be finite and nonzero"))?;
        Ok(Self { direction, radius })
    }

    /// Caller guarantees `direction` is unit-norm and `radius` positive.
    pub(crate) fn from_unit(direction: Vec3, radius: f64) -> Self {
        debug_assert!((direction.norm() - 1.0).abs() < 1e-12);
        Self { direction, radius }
    }

    pub fn from_lat_lon(latitude: f64, longitude: f64, radius: f64) -> Result<Self> {
        let (sl, cl) = latitude.sin_cos();
        let (so, co) = longitude.sin_cos();
        Self::new(Vec3::new(cl * co, cl * so, sl), radius)
    }

    /// The point at polar angle 0 (the +z axis).
    pub fn north_pole(radius: f64) -> Self {
        Self::from_unit(Vec3::new(0.0, 0.0, 1.0), radius)
    }

    pub fn south_pole(radius: f64) -> Self {
        Self::from_unit(Vec3::new(0.0, 0.0, -1.0), radius)
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn position(&self) -> Vec3 {
        self.direction * self.radius
    }

    /// Same direction, different sphere.
    pub fn at_radius(&self, radius: f64) -> Self {
        Self { direction: self.direction, radius }
    }

    pub fn latitude(&self) -> f64 {
        self.direction.z.clamp(-1.0, 1.0).asin()
    }

    pub fn longitude(&self) -> f64 {
        self.direction.y.atan2(self.direction.x)
    }

    /// Straight-line distance in km.
    pub fn distance(&self, other: &SurfacePoint) -> f64 {
        (self.position() - other.position()).norm()
    }

    /// Angle between the local vertical at `self` and the direction to `other`.
    pub fn zenith_to(&self, other: &SurfacePoint) -> f64 {
        let los = other.position() - self.position();
        let n = los.norm();
        if n == 0.0 {
            return 0.0;
        }
        (self.direction.dot(los) / n).clamp(-1.0, 1.0).acos()
    }
}

/// The set of sphere points within `polar_angle` of `apex`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCap {
    apex: Vec3,
    polar_angle: f64,
    sphere_radius: f64,
}

impl SphericalCap {
    pub fn new(apex: Vec3, polar_angle: f64, sphere_radius: f64) -> Result<Self> {
        check_polar(polar_angle)?;
        let apex = apex.normalized().ok_or_else(|| Error::domain("cap apex must be nonzero"))?;
        if !(sphere_radius > 0.0) {
            return Err(Error::domain("cap sphere radius must be positive"));
        }
        Ok(Self { apex, polar_angle, sphere_radius })
    }

    pub fn apex(&self) -> Vec3 {
        self.apex
    }

    pub fn polar_angle(&self) -> f64 {
        self.polar_angle
    }

    pub fn area(&self) -> f64 {
        2.0 * PI * self.sphere_radius * self.sphere_radius * (1.0 - self.polar_angle.cos())
    }

    /// Whether the direction of `p` falls inside the cap (radius ignored).
    pub fn contains(&self, p: &SurfacePoint) -> bool {
        p.direction().dot(self.apex) >= self.polar_angle.cos()
    }
}

fn check_polar(polar_angle: f64) -> Result<()> {
    if (0.0..=PI).contains(&polar_angle) {
        Ok(())
    } else {
        Err(Error::domain(format!("polar angle {polar_angle} outside [0, pi]")))
    }
}

fn check_shell(r_earth: f64, r_shell: f64) -> Result<()> {
    if r_earth > 0.0 && r_shell > r_earth && r_shell.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "need r_shell > r_earth > 0, got r_earth={r_earth}, r_shell={r_shell}"
        )))
    }
}

/// `acos` that tolerates round-off just outside [-1, 1].
fn guarded_acos(c: f64, what: &str) -> Result<f64> {
    if c.is_nan() || c.abs() > 1.0 + ACOS_SLACK {
        return Err(Error::domain(format!("{what}: cosine {c} outside [-1, 1]")));
    }
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// Area of a spherical cap: 2πr²(1 − cos θ).
pub fn cap_area(sphere_radius: f64, polar_angle: f64) -> Result<f64> {
    if !(sphere_radius > 0.0 && sphere_radius.is_finite()) {
        return Err(Error::domain("sphere radius must be positive"));
    }
    check_polar(polar_angle)?;
    Ok(2.0 * PI * sphere_radius * sphere_radius * (1.0 - polar_angle.cos()))
}

/// Earth-centred angle between a ground point and a satellite at slant range `slant`.
pub fn polar_angle_from_slant(r_earth: f64, r_shell: f64, slant: f64) -> Result<f64> {
    check_shell(r_earth, r_shell)?;
    // 1 − cos θ from the law of cosines, kept in this form for accuracy near nadir.
    let one_minus_cos =
        (slant * slant - (r_shell - r_earth).powi(2)) / (2.0 * r_earth * r_shell);
    let c = 1.0 - one_minus_cos;
    if c.is_nan() || c.abs() > 1.0 + ACOS_SLACK {
        return Err(Error::domain(format!(
            "slant {slant} km outside [{}, {}]",
            r_shell - r_earth,
            r_shell + r_earth
        )));
    }
    let half = (one_minus_cos / 2.0).clamp(0.0, 1.0).sqrt();
    Ok(2.0 * half.asin())
}

/// Inverse of [`polar_angle_from_slant`].
pub fn slant_from_polar(r_earth: f64, r_shell: f64, polar_angle: f64) -> Result<f64> {
    check_shell(r_earth, r_shell)?;
    check_polar(polar_angle)?;
    let s = (polar_angle / 2.0).sin();
    Ok(((r_shell - r_earth).powi(2) + 4.0 * r_earth * r_shell * s * s).sqrt())
}

/// Zenith angle at the ground point of a satellite seen at slant range `slant`.
pub fn zenith_angle(r_earth: f64, r_shell: f64, slant: f64) -> Result<f64> {
    check_shell(r_earth, r_shell)?;
    if !(slant > 0.0)
        || slant < (r_shell - r_earth) * (1.0 - ACOS_SLACK)
        || slant > (r_shell + r_earth) * (1.0 + ACOS_SLACK)
    {
        return Err(Error::domain(format!("slant {slant} km not achievable")));
    }
    let c = (r_shell * r_shell - r_earth * r_earth - slant * slant) / (2.0 * r_earth * slant);
    guarded_acos(c, "zenith angle")
}

/// Slant range to a satellite on the shell seen at zenith angle `zenith`.
pub fn slant_from_zenith(r_earth: f64, r_shell: f64, zenith: f64) -> Result<f64> {
    check_shell(r_earth, r_shell)?;
    check_polar(zenith)?;
    let (s, c) = zenith.sin_cos();
    Ok(-r_earth * c + (r_shell * r_shell - r_earth * r_earth * s * s).sqrt())
}

/// Slant range to the horizon: √(r_S² − r_E²).
pub fn max_slant_range(r_earth: f64, r_shell: f64) -> Result<f64> {
    check_shell(r_earth, r_shell)?;
    Ok(((r_shell - r_earth) * (r_shell + r_earth)).sqrt())
}

/// Earth-centred angle of the horizon circle seen from the ground: arccos(r_E / r_S).
pub fn horizon_polar_angle(r_earth: f64, r_shell: f64) -> Result<f64> {
    check_shell(r_earth, r_shell)?;
    Ok((r_earth / r_shell).acos())
}

/// Line of sight between `a` and `b` past a blocking sphere of radius `blocking_radius`.
///
/// Grazing segments (tangent to the blocking sphere) count as visible.
pub fn is_visible(a: &SurfacePoint, b: &SurfacePoint, blocking_radius: f64) -> bool {
    // Canonical ordering makes the result exactly symmetric in floating point.
    let (p, q) = if a.position() <= b.position() {
        (a.position(), b.position())
    } else {
        (b.position(), a.position())
    };
    let d = q - p;
    let len_sq = d.norm_sq();
    let t = if len_sq > 0.0 { (-p.dot(d) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
    let closest = p + d * t;
    closest.norm_sq() >= blocking_radius * blocking_radius * (1.0 - ACOS_SLACK)
}

/// Great-circle distance between unit directions on a sphere of `radius`.
pub fn great_circle_distance(a: Vec3, b: Vec3, radius: f64) -> f64 {
    radius * a.cross(b).norm().atan2(a.dot(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const RE: f64 = 6371.0;
    const RS: f64 = 7371.0;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cap_area_examples() {
        assert!(close(cap_area(1.0, PI).unwrap(), 4.0 * PI, 1e-12));
        assert!(close(cap_area(1.0, FRAC_PI_2).unwrap(), 2.0 * PI, 1e-12));
        let a = cap_area(RS, (RE / RS).acos()).unwrap();
        assert!(close(a, 4.631_335_889_9e7, 1.0));
        assert!(cap_area(1.0, -0.1).is_err());
        assert!(cap_area(0.0, 1.0).is_err());
        assert!(cap_area(1.0, PI + 1e-9).is_err());
    }

    #[test]
    fn polar_and_slant_examples() {
        assert_eq!(polar_angle_from_slant(RE, RS, RS - RE).unwrap(), 0.0);
        let h = max_slant_range(RE, RS).unwrap();
        assert!(close(polar_angle_from_slant(RE, RS, h).unwrap(), (RE / RS).acos(), 1e-12));
        let th = polar_angle_from_slant(RE, RS, 2000.0).unwrap();
        assert!(close(th, 0.253_429_084_994_755_75, 1e-12));
        assert!(close(slant_from_polar(RE, RS, th).unwrap(), 2000.0, 1e-9));
        assert!(polar_angle_from_slant(RE, RS, 999.0).is_err());
        assert!(polar_angle_from_slant(RE, RS, RS + RE + 1.0).is_err());
        assert!(polar_angle_from_slant(RS, RE, 2000.0).is_err());

        assert!(close(slant_from_polar(RE, RS, 0.0).unwrap(), RS - RE, 1e-9));
        assert!(close(slant_from_polar(RE, RS, PI).unwrap(), RS + RE, 1e-9));
    }

    #[test]
    fn zenith_examples() {
        assert!(close(zenith_angle(RE, RS, RS - RE).unwrap(), 0.0, 1e-6));
        let h = max_slant_range(RE, RS).unwrap();
        assert!(close(zenith_angle(RE, RS, h).unwrap(), FRAC_PI_2, 1e-12));
        let z = zenith_angle(RE, RS, 2000.0).unwrap();
        // Cross-check: interior triangle angle at the ground point from the polar angle.
        let th = polar_angle_from_slant(RE, RS, 2000.0).unwrap();
        let interior_at_sat = (RE * th.sin() / 2000.0).asin();
        let interior_at_ground = PI - th - interior_at_sat;
        assert!(close(z, PI - interior_at_ground, 1e-12));
        assert!(close(z, 1.178_534_876_464_556, 1e-12));
        assert!(zenith_angle(RE, RS, 0.0).is_err());
        assert!(zenith_angle(RE, RS, 500.0).is_err());
    }

    #[test]
    fn slant_from_zenith_inverts_zenith() {
        for &d in &[1000.0, 1500.0, 2000.0, 3000.0, 3707.0, 9000.0] {
            let z = zenith_angle(RE, RS, d).unwrap();
            assert!(close(slant_from_zenith(RE, RS, z).unwrap(), d, 1e-7), "d={d}");
        }
    }

    #[test]
    fn max_slant_examples() {
        assert!(close(max_slant_range(RE, RS).unwrap(), 3_707.020_366_817_5, 1e-6));
        assert!(close(max_slant_range(1.0, 2.0).unwrap(), 3f64.sqrt(), 1e-15));
        assert!(max_slant_range(1.0, 1.0 + 1e-12).unwrap() < 1e-5);
        assert!(max_slant_range(2.0, 1.0).is_err());
    }

    #[test]
    fn visibility_examples() {
        let a = SurfacePoint::north_pole(RS);
        let b = SurfacePoint::south_pole(RS);
        assert!(!is_visible(&a, &b, RE));
        assert!(is_visible(&a, &a, RE));

        let ground = SurfacePoint::north_pole(RE);
        let horizon = (RE / RS).acos();
        let at_horizon = SurfacePoint::new(Vec3::new(horizon.sin(), 0.0, horizon.cos()), RS).unwrap();
        assert!(is_visible(&ground, &at_horizon, RE));
        let beyond = SurfacePoint::new(
            Vec3::new((horizon + 1e-3).sin(), 0.0, (horizon + 1e-3).cos()),
            RS,
        )
        .unwrap();
        assert!(!is_visible(&ground, &beyond, RE));
    }

    #[test]
    fn great_circle_examples() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(great_circle_distance(x, x, 10.0), 0.0);
        assert!(close(great_circle_distance(x, y, RE), RE * FRAC_PI_2, 1e-9));
        assert!(close(great_circle_distance(x, -x, 1.0), PI, 1e-15));
    }

    #[test]
    fn surface_point_invariants() {
        assert!(SurfacePoint::new(Vec3::default(), 1.0).is_err());
        assert!(SurfacePoint::new(Vec3::new(1.0, 0.0, 0.0), 0.0).is_err());
        let p = SurfacePoint::new(Vec3::new(3.0, 4.0, 0.0), 2.0).unwrap();
        assert!(close(p.direction().norm(), 1.0, 1e-15));
        let q = SurfacePoint::from_lat_lon(0.3, -1.2, 5.0).unwrap();
        assert!(close(q.latitude(), 0.3, 1e-14));
        assert!(close(q.longitude(), -1.2, 1e-14));
    }

    #[test]
    fn spherical_cap_contains_and_area() {
        let cap = SphericalCap::new(Vec3::new(0.0, 0.0, 1.0), FRAC_PI_2, 1.0).unwrap();
        assert!(close(cap.area(), 2.0 * PI, 1e-12));
        assert!(cap.contains(&SurfacePoint::north_pole(3.0)));
        assert!(!cap.contains(&SurfacePoint::south_pole(3.0)));
        assert!(SphericalCap::new(Vec3::new(0.0, 0.0, 1.0), 4.0, 1.0).is_err());
    }
}
