use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::{ExperimentConfig, ExperimentKind, ProcessName, ScenarioName, SystemName};
use crate::coverage::{
    argmax, average_rate, coverage_probability, ground_link_coverage, CoverageSweep, Estimate, LinkScenario,
};
use crate::error::{Error, Result};
use crate::latency::{average_latency, LatencyStats, RoutingMode};
use crate::rng::RngStream;

const LATENCY_TAG: u64 = 3;
const COVERAGE_TAG: u64 = 4;
const GATEWAY_TAG: u64 = 5;
const CUSTOM_TAG: u64 = 6;

pub(super) const FIG3_HEADER: &str = "altitude_km,n_sats,mode,mean_latency_ms,stderr_ms,unreachable_frac,trials";
pub(super) const FIG4_HEADER: &str = "n_sats,gw_density_per_km2,coverage,stderr,trials";
pub(super) const FIG5_HEADER: &str = "n_sats,altitude_km,coverage,stderr,trials";
pub(super) const CUSTOM_HEADER: &str =
    "n_sats,altitude_km,gw_density_per_km2,scenario,coverage,coverage_stderr,rate_bps_hz,rate_stderr,trials";
pub(super) const VALIDATE_HEADER: &str = "check,statistic,tolerance,passed";

/// Result of a noise calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOutcome {
    pub noise_dbw: f64,
    /// Satellite count at the peak of the calibrated curve.
    pub peak_n: usize,
    pub target_peak_n: usize,
    pub iterations: u32,
    /// The peak landed exactly on the target (otherwise within one grid step).
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub csv: String,
    pub summary: String,
    /// Number of data rows in `csv`.
    pub rows: usize,
    pub calibration: Option<CalibrationOutcome>,
    /// False only when the validation suite has a failing check.
    pub passed: bool,
}

impl ExperimentResult {
    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.kind.name()))
    }

    pub fn summary_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}_summary.txt", self.kind.name()))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(self.csv_path(dir), &self.csv)?;
        std::fs::write(self.summary_path(dir), &self.summary)?;
        Ok(())
    }
}

/// Nine significant digits; `nan` and `inf` spelled out.
pub(super) fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

/// Runs one experiment; nothing is written to disk.
pub fn run(config: &ExperimentConfig, kind: ExperimentKind) -> Result<ExperimentResult> {
    if let Some(k) = config.experiment {
        if k != kind {
            return Err(Error::config(format!(
                "config is for experiment '{}' but '{}' was requested",
                k.name(),
                kind.name()
            )));
        }
    }
    config.validate(kind)?;
    let started = Instant::now();
    let mut body = Body::default();
    match kind {
        ExperimentKind::Fig3 => run_fig3(config, &mut body)?,
        ExperimentKind::Fig4 | ExperimentKind::Fig5 => run_figure_coverage(config, kind, &mut body)?,
        ExperimentKind::Custom => run_custom(config, &mut body)?,
        ExperimentKind::Validate => run_validate(config, &mut body),
    }
    let mut summary = String::new();
    writeln!(summary, "experiment = {}", kind.name()).unwrap();
    writeln!(summary, "version = {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(summary, "master_seed = {}", config.master_seed).unwrap();
    writeln!(summary, "trials = {}", config.trials).unwrap();
    writeln!(summary, "wall_time_s = {:.3}", started.elapsed().as_secs_f64()).unwrap();
    if let Some(c) = body.calibration {
        writeln!(summary, "calibrated_noise_dbw = {}", sig9(c.noise_dbw)).unwrap();
        writeln!(summary, "calibration_peak_n = {}", c.peak_n).unwrap();
        writeln!(summary, "calibration_target_peak_n = {}", c.target_peak_n).unwrap();
        writeln!(summary, "calibration_iterations = {}", c.iterations).unwrap();
        writeln!(summary, "calibration_exact = {}", c.exact).unwrap();
    }
    if kind == ExperimentKind::Validate {
        writeln!(summary, "passed = {}", body.passed).unwrap();
    }
    summary.push_str("\n[results]\n");
    summary.push_str(&body.notes);
    summary.push_str("\n[config]\n");
    summary.push_str(&config.to_toml());
    Ok(ExperimentResult {
        kind,
        csv: body.csv,
        summary,
        rows: body.rows,
        calibration: body.calibration,
        passed: body.passed,
    })
}

struct Body {
    csv: String,
    rows: usize,
    notes: String,
    calibration: Option<CalibrationOutcome>,
    passed: bool,
}

impl Default for Body {
    fn default() -> Self {
        Self { csv: String::new(), rows: 0, notes: String::new(), calibration: None, passed: true }
    }
}

impl Body {
    fn header(&mut self, h: &str) {
        self.csv.push_str(h);
        self.csv.push('\n');
    }

    fn row(&mut self, fields: &[String]) {
        self.csv.push_str(&fields.join(","));
        self.csv.push('\n');
        self.rows += 1;
    }
}

fn master(config: &ExperimentConfig) -> RngStream {
    RngStream::from_seed(config.master_seed)
}

fn run_fig3(config: &ExperimentConfig, body: &mut Body) -> Result<()> {
    body.header(FIG3_HEADER);
    let relay = config.routing_mode();
    let policy = config.routing_policy();
    for &alt in &config.shell.altitudes_km {
        for &n in &config.shell.counts {
            let shell = &config.shells_at(alt, n)[0];
            // Both modes share the stream, hence the constellation draws.
            let stream = master(config).path(&[LATENCY_TAG, alt.to_bits(), n as u64]);
            let mut stats: Vec<(&str, LatencyStats)> = Vec::new();
            for mode in [RoutingMode::InterSatellite, relay.clone()] {
                let s = average_latency(shell, &mode, policy, config.earth_radius_km, config.trials, stream)?;
                stats.push((mode.label(), s));
            }
            for (label, s) in &stats {
                body.row(&[
                    format!("{alt}"),
                    n.to_string(),
                    label.to_string(),
                    sig9(s.mean_ms),
                    sig9(s.stderr_ms),
                    sig9(s.unreachable_fraction),
                    s.trials.to_string(),
                ]);
                writeln!(
                    body.notes,
                    "altitude_km={alt} n_sats={n} mode={label} mean_latency_ms={} stderr_ms={} unreachable_frac={} min_latency_ms={}",
                    sig9(s.mean_ms),
                    sig9(s.stderr_ms),
                    sig9(s.unreachable_fraction),
                    sig9(s.min_ms)
                )
                .unwrap();
            }
            let gap = stats[1].1.mean_ms / stats[0].1.mean_ms - 1.0;
            writeln!(body.notes, "altitude_km={alt} n_sats={n} relay_over_isl_gap={}", sig9(gap)).unwrap();
        }
    }
    writeln!(body.notes, "relay_gw_count={}", config.routing.relay_gw_count).unwrap();
    Ok(())
}

/// Satellite-link sweep over the count grid at one altitude. The stream is
/// keyed by the altitude value, so every experiment sees the same draws there.
fn sweep_at(config: &ExperimentConfig, altitude_km: f64) -> Result<CoverageSweep> {
    let noise = config.sinr.noise_dbw.ok_or_else(|| Error::config("sinr.noise_dbw is required"))?;
    let cfg = config.sinr_config(altitude_km, 1, noise);
    CoverageSweep::sample(&cfg, &config.shell.counts, config.trials, master(config).path(&[COVERAGE_TAG, altitude_km.to_bits()]))
}

fn curve_values(sweep: &CoverageSweep, noise_dbw: f64, threshold_db: f64) -> Vec<f64> {
    sweep.coverage(noise_dbw, threshold_db).iter().map(|e| e.value).collect()
}

fn peak_n(sweep: &CoverageSweep, noise_dbw: f64, threshold_db: f64) -> usize {
    let v = curve_values(sweep, noise_dbw, threshold_db);
    // An all-zero curve has no peak; treat it as peaking at the largest count.
    if v.iter().all(|&c| c == 0.0) {
        return *sweep.counts.iter().max().expect("nonempty grid");
    }
    sweep.counts[argmax(&v).expect("nonempty grid")]
}

pub(super) fn calibrate_on_sweep(
    sweep: &CoverageSweep,
    threshold_db: f64,
    target: usize,
    center_dbw: f64,
    window_db: f64,
) -> Result<CalibrationOutcome> {
    let mut sorted = sweep.counts.clone();
    sorted.sort_unstable();
    let pos = sorted
        .iter()
        .position(|&n| n == target)
        .ok_or_else(|| Error::config("calibration target is not on the count grid"))?;
    let lower_ok = if pos > 0 { sorted[pos - 1] } else { target };
    let upper_ok = sorted.get(pos + 1).copied().unwrap_or(target);
    let within = |n: usize| (lower_ok..=upper_ok).contains(&n);

    let (mut lo, mut hi) = (center_dbw - window_db, center_dbw + window_db);
    let (p_lo, p_hi) = (peak_n(sweep, lo, threshold_db), peak_n(sweep, hi, threshold_db));
    if p_lo > upper_ok || p_hi < lower_ok {
        return Err(Error::Calibration(format!(
            "no noise level in [{lo}, {hi}] dBW puts the coverage peak near N = {target} (peaks {p_lo} and {p_hi})"
        )));
    }
    let mut best: Option<(f64, usize)> = None;
    let mut consider = |noise: f64, peak: usize| {
        if within(peak) && best.is_none_or(|(_, b)| peak.abs_diff(target) < b.abs_diff(target)) {
            best = Some((noise, peak));
        }
    };
    consider(lo, p_lo);
    consider(hi, p_hi);
    let mut iterations = 0;
    while hi - lo > 1e-6 && iterations < 64 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let p = peak_n(sweep, mid, threshold_db);
        if p == target {
            return Ok(CalibrationOutcome { noise_dbw: mid, peak_n: p, target_peak_n: target, iterations, exact: true });
        }
        consider(mid, p);
        if p < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    match best {
        Some((noise, peak)) => {
            Ok(CalibrationOutcome { noise_dbw: noise, peak_n: peak, target_peak_n: target, iterations, exact: false })
        }
        None => Err(Error::Calibration(format!("bisection could not place the peak near N = {target}"))),
    }
}

/// Bisects the receiver noise until the satellite-link coverage curve at
/// `calibration.altitude_km` peaks at `calibration.target_peak_n`.
pub fn calibrate_noise(config: &ExperimentConfig) -> Result<CalibrationOutcome> {
    let sweep = sweep_at(config, config.calibration.altitude_km)?;
    calibrate_on_sweep(
        &sweep,
        config.sinr.threshold_db,
        config.calibration.target_peak_n,
        config.sinr.noise_dbw.expect("validated"),
        config.calibration.window_db,
    )
}

fn resolve_noise(
    config: &ExperimentConfig,
    sweeps: &mut BTreeMap<u64, CoverageSweep>,
    body: &mut Body,
) -> Result<f64> {
    let noise = config.sinr.noise_dbw.expect("validated");
    if !config.calibration.enabled {
        return Ok(noise);
    }
    let alt = config.calibration.altitude_km;
    if let Entry::Vacant(e) = sweeps.entry(alt.to_bits()) {
        e.insert(sweep_at(config, alt)?);
    }
    let outcome = calibrate_on_sweep(
        &sweeps[&alt.to_bits()],
        config.sinr.threshold_db,
        config.calibration.target_peak_n,
        noise,
        config.calibration.window_db,
    )?;
    body.calibration = Some(outcome);
    Ok(outcome.noise_dbw)
}

fn ground_estimate(config: &ExperimentConfig, density: f64, noise_dbw: f64) -> Result<Option<Estimate>> {
    if config.sinr.scenario == ScenarioName::Direct {
        return Ok(None);
    }
    let link = config.ground_link(density, noise_dbw);
    Ok(Some(ground_link_coverage(&link, config.trials, master(config).path(&[GATEWAY_TAG, density.to_bits()]))?))
}

fn combine(sat: Estimate, ground: Option<Estimate>) -> Estimate {
    ground.map_or(sat, |g| Estimate::product(sat, g))
}

fn run_figure_coverage(config: &ExperimentConfig, kind: ExperimentKind, body: &mut Body) -> Result<()> {
    let mut sweeps = BTreeMap::new();
    let noise = resolve_noise(config, &mut sweeps, body)?;
    let threshold = config.sinr.threshold_db;
    let mut sweep_for = |alt: f64| -> Result<Vec<Estimate>> {
        if let Entry::Vacant(e) = sweeps.entry(alt.to_bits()) {
            e.insert(sweep_at(config, alt)?);
        }
        Ok(sweeps[&alt.to_bits()].coverage(noise, threshold))
    };
    let counts = &config.shell.counts;
    let mut curves: Vec<(String, Vec<Estimate>)> = Vec::new();
    if kind == ExperimentKind::Fig4 {
        body.header(FIG4_HEADER);
        let alt = config.shell.altitudes_km[0];
        let sat = sweep_for(alt)?;
        for &d in &config.gateway.densities_per_km2 {
            let ground = ground_estimate(config, d, noise)?;
            let curve: Vec<Estimate> = sat.iter().map(|&s| combine(s, ground)).collect();
            for (n, e) in counts.iter().zip(&curve) {
                body.row(&[n.to_string(), format!("{d}"), sig9(e.value), sig9(e.stderr), e.trials.to_string()]);
            }
            if let Some(g) = ground {
                writeln!(body.notes, "gw_density_per_km2={d} gw_link_coverage={} stderr={}", sig9(g.value), sig9(g.stderr))
                    .unwrap();
            }
            curves.push((format!("altitude_km={alt} gw_density_per_km2={d}"), curve));
        }
    } else {
        body.header(FIG5_HEADER);
        let d = config.gateway.densities_per_km2[0];
        let ground = ground_estimate(config, d, noise)?;
        for &alt in &config.shell.altitudes_km {
            let curve: Vec<Estimate> = sweep_for(alt)?.into_iter().map(|s| combine(s, ground)).collect();
            for (n, e) in counts.iter().zip(&curve) {
                body.row(&[n.to_string(), format!("{alt}"), sig9(e.value), sig9(e.stderr), e.trials.to_string()]);
            }
            curves.push((format!("altitude_km={alt} gw_density_per_km2={d}"), curve));
        }
    }
    writeln!(body.notes, "noise_dbw={}", sig9(noise)).unwrap();
    for (label, curve) in curves {
        let values: Vec<f64> = curve.iter().map(|e| e.value).collect();
        let k = argmax(&values).expect("nonempty grid");
        writeln!(
            body.notes,
            "{label} argmax_n={} peak_coverage={} stderr={}",
            counts[k],
            sig9(curve[k].value),
            sig9(curve[k].stderr)
        )
        .unwrap();
    }
    Ok(())
}

fn run_custom(config: &ExperimentConfig, body: &mut Body) -> Result<()> {
    body.header(CUSTOM_HEADER);
    let mut sweeps = BTreeMap::new();
    let noise = if config.calibration.enabled && config.shell.process == ProcessName::Bpp {
        resolve_noise(config, &mut sweeps, body)?
    } else {
        config.sinr.noise_dbw.expect("validated")
    };
    let relayed = config.sinr.scenario != ScenarioName::Direct;
    let densities: Vec<Option<f64>> = if relayed {
        config.gateway.densities_per_km2.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let scenario_label = match config.sinr.scenario {
        ScenarioName::Direct => "direct",
        ScenarioName::GwRelayed => "gw_relayed",
        ScenarioName::Hybrid => "hybrid",
    };
    for &alt in &config.shell.altitudes_km {
        for &n in &config.shell.counts {
            for &d in &densities {
                let cfg = config.sinr_config(alt, n, noise);
                let scenario = match (config.sinr.scenario, d) {
                    (ScenarioName::GwRelayed, Some(d)) => LinkScenario::GwRelayed(config.ground_link(d, noise)),
                    (ScenarioName::Hybrid, Some(d)) => LinkScenario::Hybrid(config.ground_link(d, noise)),
                    _ => LinkScenario::Direct,
                };
                let key = d.map_or(0, f64::to_bits);
                let stream = master(config).path(&[CUSTOM_TAG, alt.to_bits(), n as u64, key]);
                let cov = coverage_probability(&cfg, &scenario, config.trials, stream)?;
                let (rate, rate_se) = if config.sinr.system == SystemName::Ideal {
                    (f64::NAN, f64::NAN)
                } else {
                    let r = average_rate(&cfg, &scenario, config.trials, stream)?;
                    (r.value, r.stderr)
                };
                body.row(&[
                    n.to_string(),
                    format!("{alt}"),
                    d.map_or("-".into(), |d| format!("{d}")),
                    scenario_label.into(),
                    sig9(cov.value),
                    sig9(cov.stderr),
                    sig9(rate),
                    sig9(rate_se),
                    config.trials.to_string(),
                ]);
            }
        }
    }
    writeln!(body.notes, "noise_dbw={}", sig9(noise)).unwrap();
    Ok(())
}

fn run_validate(config: &ExperimentConfig, body: &mut Body) {
    body.header(VALIDATE_HEADER);
    let checks = super::run_validation_suite(config.master_seed);
    for c in &checks {
        body.row(&[c.name.clone(), sig9(c.statistic), sig9(c.tolerance), c.passed.to_string()]);
        writeln!(body.notes, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name).unwrap();
    }
    body.passed = checks.iter().all(|c| c.passed);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.5), "0.500000000");
        assert_eq!(sig9(123.456), "123.456000");
        assert_eq!(sig9(1.0e-7), "1.00000000e-7");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(f64::NAN), "nan");
        assert_eq!(sig9(79.61234567891), "79.6123457");
    }

    #[test]
    fn tiny_fig3_run_has_one_row_per_point_and_mode() {
        let mut c = ExperimentConfig::preset(ExperimentKind::Fig3);
        c.trials = 100;
        c.shell.counts = vec![300];
        c.shell.altitudes_km = vec![1000.0];
        let r = run(&c, ExperimentKind::Fig3).unwrap();
        assert_eq!(r.rows, 2);
        assert!(r.csv.starts_with(FIG3_HEADER));
        assert!(r.summary.contains("unreachable_frac="));
        assert!(run(&c, ExperimentKind::Fig4).is_err());
    }

    #[test]
    fn calibration_moves_noise_in_the_right_direction() {
        let mut c = ExperimentConfig::preset(ExperimentKind::Fig4);
        c.trials = 2000;
        let sweep = sweep_at(&c, 1000.0).unwrap();
        // Very high noise pushes the peak to the largest count, very low to small ones.
        assert_eq!(peak_n(&sweep, -40.0, -10.0), 200);
        assert!(peak_n(&sweep, -200.0, -10.0) < 30);
        let out = calibrate_on_sweep(&sweep, -10.0, 30, -106.0, 60.0).unwrap();
        assert!(out.peak_n.abs_diff(30) <= 5);
        assert_eq!(peak_n(&sweep, out.noise_dbw, -10.0), out.peak_n);
        // A target no noise level can reach fails cleanly.
        assert!(matches!(calibrate_on_sweep(&sweep, -10.0, 5, -106.0, 1.0), Err(Error::Calibration(_))));
    }
}
