//! Browser bindings: contact-distance laws, coverage-vs-count curves and
//! single route traces, all computed client-side.

use leo_sg::analysis::{contact_distance_ccdf, DistanceLaw};
use leo_sg::coverage::{CoverageSweep, NlosInterference, SinrConfig};
use leo_sg::channel::ChannelSpec;
use leo_sg::geometry::{max_slant_range, SurfacePoint};
use leo_sg::latency::{route, sample_trial, NodeKind, RelaySource, RouteStatus, RoutingMode, RoutingPolicy};
use leo_sg::point_process::{PppIntensity, ShellSpec};
use leo_sg::rng::RngStream;
use leo_sg::EARTH_RADIUS_KM as RE;
use wasm_bindgen::prelude::*;

fn js_err(e: leo_sg::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Contact-distance CCDF sampled at `points` slant ranges from nadir to the
/// horizon, flattened as `[d0, p0, d1, p1, ...]`.
#[wasm_bindgen]
pub fn contact_distance_curve(count: u32, altitude_km: f64, poisson: bool, points: u32) -> Result<Vec<f64>, JsError> {
    let shell = if poisson {
        ShellSpec::ppp(PppIntensity::MeanCount(count as f64), altitude_km, 15.0)
    } else {
        ShellSpec::bpp(count as usize, altitude_km, 15.0)
    };
    let law = DistanceLaw::new(shell, RE).map_err(js_err)?;
    let rs = RE + altitude_km;
    let d_max = max_slant_range(RE, rs).map_err(js_err)?;
    let points = points.max(2);
    let mut out = Vec::with_capacity(2 * points as usize);
    for k in 0..points {
        let d = altitude_km + (d_max - altitude_km) * k as f64 / (points - 1) as f64;
        out.push(d);
        out.push(contact_distance_ccdf(&law, d.min(d_max)).map_err(js_err)?);
    }
    Ok(out)
}

/// Coverage for N = step, 2·step, ..., max_n, flattened as `[n, coverage, ...]`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn coverage_curve(
    altitude_km: f64,
    noise_dbw: f64,
    nlos_constant_dbw: f64,
    threshold_db: f64,
    step: u32,
    max_n: u32,
    trials: u32,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let step = step.max(1) as usize;
    let counts: Vec<usize> = (1..).map(|k| k * step).take_while(|&n| n <= max_n as usize).collect();
    let mut cfg = SinrConfig::new(vec![ShellSpec::bpp(1, altitude_km, 15.0)], ChannelSpec::default(), noise_dbw, threshold_db);
    cfg.nlos_interference = NlosInterference::Constant(nlos_constant_dbw);
    let sweep = CoverageSweep::sample(&cfg, &counts, trials.max(1) as u64, RngStream::from_seed(seed)).map_err(js_err)?;
    Ok(counts
        .iter()
        .zip(sweep.coverage(noise_dbw, threshold_db))
        .flat_map(|(&n, e)| [n as f64, e.value])
        .collect())
}

/// One antipodal gateway-to-gateway route over a fresh constellation.
#[wasm_bindgen]
pub struct RouteView {
    latency_ms: f64,
    path: Vec<f64>,
    satellites: Vec<f64>,
    relays: Vec<f64>,
}

#[wasm_bindgen]
impl RouteView {
    /// NaN when the destination was unreachable.
    #[wasm_bindgen(getter)]
    pub fn latency_ms(&self) -> f64 {
        self.latency_ms
    }

    /// `[kind, lat°, lon°, radius_km, ...]`; kind 0 source, 1 satellite,
    /// 2 relay gateway, 3 destination.
    #[wasm_bindgen(getter)]
    pub fn path(&self) -> Vec<f64> {
        self.path.clone()
    }

    /// `[lat°, lon°, ...]` of every satellite.
    #[wasm_bindgen(getter)]
    pub fn satellites(&self) -> Vec<f64> {
        self.satellites.clone()
    }

    /// `[lat°, lon°, ...]` of every relay gateway.
    #[wasm_bindgen(getter)]
    pub fn relays(&self) -> Vec<f64> {
        self.relays.clone()
    }
}

fn lat_lon(points: &[SurfacePoint]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.latitude().to_degrees(), p.longitude().to_degrees()]).collect()
}

#[wasm_bindgen]
pub fn route_trace(
    count: u32,
    altitude_km: f64,
    inter_satellite: bool,
    relay_count: u32,
    seed: u64,
) -> Result<RouteView, JsError> {
    let shell = ShellSpec::bpp(count as usize, altitude_km, 15.0);
    shell.validate().map_err(js_err)?;
    let mode = if inter_satellite {
        RoutingMode::InterSatellite
    } else {
        RoutingMode::GwRelay(RelaySource::Count(relay_count as usize))
    };
    mode.validate().map_err(js_err)?;
    let (sats, relays) = sample_trial(&shell, &mode, RE, RngStream::from_seed(seed)).map_err(js_err)?;
    let src = SurfacePoint::north_pole(RE);
    let dst = SurfacePoint::south_pole(RE);
    let trace = route(&src, &dst, &sats, &relays, inter_satellite, RE, RoutingPolicy::default());
    let path = trace
        .nodes
        .iter()
        .flat_map(|n| {
            let kind = match n.kind {
                NodeKind::SourceGateway => 0.0,
                NodeKind::Satellite => 1.0,
                NodeKind::RelayGateway => 2.0,
                NodeKind::DestinationGateway => 3.0,
            };
            [kind, n.point.latitude().to_degrees(), n.point.longitude().to_degrees(), n.point.radius()]
        })
        .collect();
    Ok(RouteView {
        latency_ms: if trace.status == RouteStatus::Delivered { trace.latency_ms } else { f64::NAN },
        path,
        satellites: lat_lon(&sats),
        relays: lat_lon(&relays),
    })
}
