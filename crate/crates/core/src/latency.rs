//! Multi-hop propagation latency between two ground gateways.
//!
//! Routing is geographic: every hop must strictly reduce the remaining
//! distance to the destination, which rules out loops. Without
//! inter-satellite links a satellite can only hand traffic down to a relay
//! gateway, which then uplinks to the next satellite.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::geometry::{great_circle_distance, is_visible, SurfacePoint};
use crate::numeric::pairwise_sum;
use crate::point_process::{sample_poisson, sample_uniform_sphere, ShellSpec};
use crate::rng::RngStream;
use crate::SPEED_OF_LIGHT_KM_S;

const MAX_HOPS: usize = 10_000;

/// Where relay gateways come from in [`RoutingMode::GwRelay`].
#[derive(Debug, Clone, PartialEq)]
pub enum RelaySource {
    Positions(Vec<SurfacePoint>),
    /// A fixed number of area-uniform gateways per trial.
    Count(usize),
    /// Poisson field with this many gateways per km² of the earth's surface.
    Density(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RoutingMode {
    InterSatellite,
    GwRelay(RelaySource),
}

impl RoutingMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            RoutingMode::GwRelay(RelaySource::Positions(p)) if p.is_empty() => {
                Err(Error::config("relay gateway list is empty"))
            }
            RoutingMode::GwRelay(RelaySource::Count(0)) => Err(Error::config("relay gateway count is zero")),
            RoutingMode::GwRelay(RelaySource::Density(d)) if !(*d > 0.0 && d.is_finite()) => {
                Err(Error::config("relay gateway density must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RoutingMode::InterSatellite => "inter_satellite",
            RoutingMode::GwRelay(_) => "gw_relay",
        }
    }
}

/// How a ground node picks the satellite it uplinks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UplinkRule {
    /// Closest visible satellite that still makes progress.
    #[default]
    Associated,
    /// Same greedy rule as every other hop.
    Greedy,
}

/// Remaining-distance measure used for the progress test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProgressMetric {
    /// Great-circle distance between sub-points, on the destination's sphere.
    #[default]
    GreatCircle,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RoutingPolicy {
    pub uplink: UplinkRule,
    pub metric: ProgressMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    SourceGateway,
    Satellite,
    RelayGateway,
    DestinationGateway,
}

impl NodeKind {
    fn label(self) -> &'static str {
        match self {
            NodeKind::SourceGateway => "source_gw",
            NodeKind::Satellite => "satellite",
            NodeKind::RelayGateway => "relay_gw",
            NodeKind::DestinationGateway => "destination_gw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathNode {
    pub kind: NodeKind,
    pub point: SurfacePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteStatus {
    Delivered,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    pub nodes: Vec<PathNode>,
    pub hop_distances_km: Vec<f64>,
    pub latency_ms: f64,
    pub status: RouteStatus,
}

impl PathTrace {
    fn start(src: SurfacePoint) -> Self {
        Self {
            nodes: vec![PathNode { kind: NodeKind::SourceGateway, point: src }],
            hop_distances_km: Vec::new(),
            latency_ms: 0.0,
            status: RouteStatus::Unreachable,
        }
    }

    fn push(&mut self, kind: NodeKind, point: SurfacePoint) {
        let last = self.nodes.last().expect("trace starts with the source").point;
        self.hop_distances_km.push(last.distance(&point));
        self.nodes.push(PathNode { kind, point });
    }

    fn finish(mut self, status: RouteStatus) -> Self {
        self.latency_ms = pairwise_sum(&self.hop_distances_km) / SPEED_OF_LIGHT_KM_S * 1e3;
        self.status = status;
        self
    }

    pub fn hop_count(&self) -> usize {
        self.hop_distances_km.len()
    }

    /// One CSV line per node: kind, latitude and longitude in degrees, radius
    /// in km, and the length of the hop that reached it.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "kind,latitude_deg,longitude_deg,radius_km,hop_distance_km")?;
        for (i, n) in self.nodes.iter().enumerate() {
            let hop = if i == 0 { 0.0 } else { self.hop_distances_km[i - 1] };
            writeln!(
                w,
                "{},{},{},{},{}",
                n.kind.label(),
                n.point.latitude().to_degrees(),
                n.point.longitude().to_degrees(),
                n.point.radius(),
                hop
            )?;
        }
        Ok(())
    }
}

fn remaining(p: &SurfacePoint, dst: &SurfacePoint, metric: ProgressMetric) -> f64 {
    match metric {
        ProgressMetric::GreatCircle => great_circle_distance(p.direction(), dst.direction(), dst.radius()),
        ProgressMetric::Euclidean => p.distance(dst),
    }
}

fn admissible<'a>(
    current: &'a SurfacePoint,
    destination: &'a SurfacePoint,
    candidates: &'a [SurfacePoint],
    r_block: f64,
    metric: ProgressMetric,
) -> impl Iterator<Item = (usize, f64)> + 'a {
    let here = remaining(current, destination, metric);
    candidates.iter().enumerate().filter_map(move |(i, c)| {
        let r = remaining(c, destination, metric);
        (r < here && is_visible(current, c, r_block)).then_some((i, r))
    })
}

/// Greedy choice: the visible candidate with the least remaining distance,
/// among those strictly closer to `destination` than `current`.
pub fn next_hop(
    current: &SurfacePoint,
    destination: &SurfacePoint,
    candidates: &[SurfacePoint],
    r_block: f64,
) -> Option<usize> {
    next_hop_with(current, destination, candidates, r_block, ProgressMetric::GreatCircle)
}

pub fn next_hop_with(
    current: &SurfacePoint,
    destination: &SurfacePoint,
    candidates: &[SurfacePoint],
    r_block: f64,
    metric: ProgressMetric,
) -> Option<usize> {
    admissible(current, destination, candidates, r_block, metric)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

fn uplink(
    current: &SurfacePoint,
    destination: &SurfacePoint,
    satellites: &[SurfacePoint],
    r_block: f64,
    policy: RoutingPolicy,
) -> Option<usize> {
    match policy.uplink {
        UplinkRule::Greedy => next_hop_with(current, destination, satellites, r_block, policy.metric),
        UplinkRule::Associated => admissible(current, destination, satellites, r_block, policy.metric)
            .map(|(i, _)| (i, current.distance(&satellites[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i),
    }
}

/// Routes from `src` to `dst`. Relay gateways are only used in
/// [`RoutingMode::GwRelay`]; pass them explicitly through `relays`.
pub fn route(
    src: &SurfacePoint,
    dst: &SurfacePoint,
    satellites: &[SurfacePoint],
    relays: &[SurfacePoint],
    inter_satellite: bool,
    r_block: f64,
    policy: RoutingPolicy,
) -> PathTrace {
    let mut trace = PathTrace::start(*src);
    let Some(first) = uplink(src, dst, satellites, r_block, policy) else {
        return trace.finish(RouteStatus::Unreachable);
    };
    let mut current = satellites[first];
    trace.push(NodeKind::Satellite, current);
    for _ in 0..MAX_HOPS {
        if is_visible(&current, dst, r_block) {
            trace.push(NodeKind::DestinationGateway, *dst);
            return trace.finish(RouteStatus::Delivered);
        }
        if inter_satellite {
            let Some(i) = next_hop_with(&current, dst, satellites, r_block, policy.metric) else {
                break;
            };
            current = satellites[i];
        } else {
            let Some(g) = next_hop_with(&current, dst, relays, r_block, policy.metric) else {
                break;
            };
            trace.push(NodeKind::RelayGateway, relays[g]);
            let Some(i) = uplink(&relays[g], dst, satellites, r_block, policy) else {
                break;
            };
            current = satellites[i];
        }
        trace.push(NodeKind::Satellite, current);
    }
    trace.finish(RouteStatus::Unreachable)
}

/// Draws the relay gateways for one trial.
pub fn sample_relays<R: rand::Rng + ?Sized>(source: &RelaySource, r_earth: f64, rng: &mut R) -> Vec<SurfacePoint> {
    match source {
        RelaySource::Positions(p) => p.clone(),
        RelaySource::Count(n) => (0..*n).map(|_| sample_uniform_sphere(rng, r_earth)).collect(),
        RelaySource::Density(d) => {
            let mean = d * 4.0 * std::f64::consts::PI * r_earth * r_earth;
            let n = sample_poisson(mean, rng);
            (0..n).map(|_| sample_uniform_sphere(rng, r_earth)).collect()
        }
    }
}

/// Delivered-only latency statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyStats {
    /// NaN when nothing was delivered.
    pub mean_ms: f64,
    pub stderr_ms: f64,
    pub unreachable_fraction: f64,
    pub delivered: u64,
    pub trials: u64,
    /// Smallest delivered latency, for bound checks.
    pub min_ms: f64,
}

/// One trial's constellation and relay field. Satellites and relays use
/// separate substreams so both routing modes see the same constellation.
pub fn sample_trial(
    shell: &ShellSpec,
    mode: &RoutingMode,
    r_earth: f64,
    stream: RngStream,
) -> Result<(Vec<SurfacePoint>, Vec<SurfacePoint>)> {
    let mut rng = stream.child(0).rng();
    let n = shell.sample_count(r_earth, &mut rng);
    let sats = (0..n).map(|_| shell.sample_point(r_earth, &mut rng)).collect::<Result<Vec<_>>>()?;
    let relays = match mode {
        RoutingMode::InterSatellite => Vec::new(),
        RoutingMode::GwRelay(src) => sample_relays(src, r_earth, &mut stream.child(1).rng()),
    };
    Ok((sats, relays))
}

/// Mean gateway-to-gateway latency between antipodal endpoints, with a fresh
/// constellation per trial.
pub fn average_latency(
    shell: &ShellSpec,
    mode: &RoutingMode,
    policy: RoutingPolicy,
    r_earth: f64,
    trials: u64,
    stream: RngStream,
) -> Result<LatencyStats> {
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    shell.validate()?;
    mode.validate()?;
    let src = SurfacePoint::north_pole(r_earth);
    let dst = SurfacePoint::south_pole(r_earth);
    let inter_satellite = matches!(mode, RoutingMode::InterSatellite);
    let outcomes = map_indexed(trials, |t| -> Result<Option<f64>> {
        let (sats, relays) = sample_trial(shell, mode, r_earth, stream.child(t))?;
        let trace = route(&src, &dst, &sats, &relays, inter_satellite, r_earth, policy);
        Ok((trace.status == RouteStatus::Delivered).then_some(trace.latency_ms))
    });
    let mut delivered = Vec::with_capacity(trials as usize);
    for o in outcomes {
        if let Some(l) = o? {
            delivered.push(l);
        }
    }
    let n = delivered.len() as f64;
    let (mean_ms, stderr_ms, min_ms) = if delivered.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let mean = pairwise_sum(&delivered) / n;
        let dev: Vec<f64> = delivered.iter().map(|l| (l - mean).powi(2)).collect();
        let var = if delivered.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
        (mean, (var / n).sqrt(), delivered.iter().copied().fold(f64::INFINITY, f64::min))
    };
    Ok(LatencyStats {
        mean_ms,
        stderr_ms,
        unreachable_fraction: (trials - delivered.len() as u64) as f64 / trials as f64,
        delivered: delivered.len() as u64,
        trials,
        min_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    const RE: f64 = 6371.0;

    fn at(lat_deg: f64, lon_deg: f64, r: f64) -> SurfacePoint {
        SurfacePoint::from_lat_lon(lat_deg.to_radians(), lon_deg.to_radians(), r).unwrap()
    }

    #[test]
    fn next_hop_basics() {
        let cur = at(0.0, 0.0, RE + 1000.0);
        let dst = at(0.0, 20.0, RE);
        assert_eq!(next_hop(&cur, &dst, &[], RE), None);
        // 500 km and 700 km remaining on the destination sphere.
        let a = at(0.0, 20.0 - (500.0 / RE).to_degrees(), RE + 1000.0);
        let b = at(0.0, 20.0 - (700.0 / RE).to_degrees(), RE + 1000.0);
        assert_eq!(next_hop(&cur, &dst, &[b, a], RE), Some(1));
        let near_dst = at(0.0, 8.0, RE);
        assert_eq!(next_hop(&at(0.0, 2.0, RE + 1000.0), &near_dst, &[a, near_dst], RE), Some(1));
        // Backwards candidates are never admissible.
        let back = at(0.0, -5.0, RE + 1000.0);
        assert_eq!(next_hop(&cur, &dst, &[back], RE), None);
    }

    #[test]
    fn common_satellite_gives_two_hops() {
        let src = at(0.0, 0.0, RE);
        let dst = at(0.0, 10.0, RE);
        let sat = at(0.0, 5.0, RE + 1000.0);
        let t = route(&src, &dst, &[sat], &[], true, RE, RoutingPolicy::default());
        assert_eq!(t.status, RouteStatus::Delivered);
        assert_eq!(t.hop_count(), 2);
        let expect = (src.distance(&sat) + sat.distance(&dst)) / SPEED_OF_LIGHT_KM_S * 1e3;
        assert!((t.latency_ms - expect).abs() < 1e-12);
        let none = route(&src, &dst, &[], &[], true, RE, RoutingPolicy::default());
        assert_eq!(none.status, RouteStatus::Unreachable);
    }

    #[test]
    fn delivered_traces_respect_invariants() {
        let shell = ShellSpec::bpp(300, 1000.0, 15.0);
        let src = SurfacePoint::north_pole(RE);
        let dst = SurfacePoint::south_pole(RE);
        let bound = 2.0 * RE / SPEED_OF_LIGHT_KM_S * 1e3;
        for inter_satellite in [true, false] {
            let mode = if inter_satellite {
                RoutingMode::InterSatellite
            } else {
                RoutingMode::GwRelay(RelaySource::Count(200))
            };
            for t in 0..40 {
                let (sats, relays) = sample_trial(&shell, &mode, RE, RngStream::new(3, t)).unwrap();
                let trace = route(&src, &dst, &sats, &relays, inter_satellite, RE, RoutingPolicy::default());
                if trace.status != RouteStatus::Delivered {
                    continue;
                }
                assert!(trace.latency_ms >= bound);
                let rem: Vec<f64> = trace
                    .nodes
                    .iter()
                    .map(|n| remaining(&n.point, &dst, ProgressMetric::GreatCircle))
                    .collect();
                for w in trace.nodes.windows(2) {
                    assert!(is_visible(&w[0].point, &w[1].point, RE));
                }
                assert!(rem.windows(2).all(|w| w[1] < w[0]));
            }
        }
    }

    #[test]
    fn csv_dump_has_one_line_per_node() {
        let src = at(0.0, 0.0, RE);
        let dst = at(0.0, 10.0, RE);
        let t = route(&src, &dst, &[at(0.0, 5.0, RE + 1000.0)], &[], true, RE, RoutingPolicy::default());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("source_gw,0,0,6371,0"));
    }

    #[test]
    fn relay_sources() {
        let mut rng = RngStream::from_seed(1).rng();
        assert_eq!(sample_relays(&RelaySource::Count(7), RE, &mut rng).len(), 7);
        let fixed = vec![SurfacePoint::new(Vec3::new(1.0, 0.0, 0.0), RE).unwrap()];
        assert_eq!(sample_relays(&RelaySource::Positions(fixed.clone()), RE, &mut rng), fixed);
        assert!(RoutingMode::GwRelay(RelaySource::Count(0)).validate().is_err());
        assert!(RoutingMode::GwRelay(RelaySource::Positions(vec![])).validate().is_err());
    }

    #[test]
    fn dense_constellation_delivers() {
        let s = average_latency(
            &ShellSpec::bpp(1000, 1000.0, 15.0),
            &RoutingMode::InterSatellite,
            RoutingPolicy::default(),
            RE,
            200,
            RngStream::from_seed(2),
        )
        .unwrap();
        assert!(s.unreachable_fraction < 0.01);
        assert!(s.min_ms >= 2.0 * RE / SPEED_OF_LIGHT_KM_S * 1e3);
    }
}
