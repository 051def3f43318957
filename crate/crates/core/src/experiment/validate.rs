//! Oracle suite behind `sim validate`: closed forms against Monte Carlo.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::analysis::{availability_probability, contact_distance_ccdf, DistanceLaw};
use crate::channel::{sample_small_scale, sr_pdf, ChannelSpec, SmallScaleModel};
use crate::coverage::{ground_link_coverage, interference_laplace, GroundLink, LinkDistance, SinrConfig};
use crate::exec::map_indexed;
use crate::geometry::{
    is_visible, max_slant_range, polar_angle_from_slant, slant_from_polar, SurfacePoint,
};
use crate::numeric::{adaptive_simpson, ks_one_sample, ks_one_sample_density};
use crate::point_process::{sample_uniform_sphere, ShellSpec};
use crate::rng::RngStream;
use crate::EARTH_RADIUS_KM as RE;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(name: impl Into<String>, statistic: f64, tolerance: f64) -> Self {
        Self { name: name.into(), statistic, tolerance, passed: statistic <= tolerance }
    }
}

const DRAWS: u64 = 100_000;

/// Runs every oracle check; each check owns a substream of `seed`.
pub fn run_validation_suite(seed: u64) -> Vec<CheckResult> {
    let root = RngStream::from_seed(seed);
    let mut out = Vec::new();
    out.push(contact_distance(root.child(1)));
    out.extend(availability(root.child(2)));
    out.extend(shadowed_rician(root.child(3)));
    out.extend(rayleigh_oracle(root.child(4)));
    out.extend(laplace(root.child(5)));
    out.extend(geometry(root.child(6)));
    out
}

fn nearest_distance(shell: &ShellSpec, stream: RngStream) -> f64 {
    let user = SurfacePoint::north_pole(RE);
    let mut rng = stream.rng();
    let n = shell.sample_count(RE, &mut rng);
    (0..n)
        .map(|_| user.distance(&shell.sample_point(RE, &mut rng).expect("homogeneous shell")))
        .fold(f64::INFINITY, f64::min)
}

fn contact_distance(stream: RngStream) -> CheckResult {
    let shell = ShellSpec::bpp(30, 1000.0, 15.0);
    let law = DistanceLaw::new(shell.clone(), RE).expect("valid shell");
    let samples = map_indexed(DRAWS, |t| nearest_distance(&shell, stream.child(t)));
    let ks = ks_one_sample(&samples, |d| 1.0 - contact_distance_ccdf(&law, d).unwrap_or(0.0));
    CheckResult::at_most("contact_distance_ks_bpp_n30_h1000", ks, 0.01)
}

fn availability(stream: RngStream) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for n in [10usize, 30, 100] {
        for h in [500.0, 1000.0, 1500.0] {
            let shell = ShellSpec::bpp(n, h, 15.0);
            let exact = availability_probability(&shell, RE).expect("valid shell");
            let s = stream.path(&[n as u64, h.to_bits()]);
            let user = SurfacePoint::north_pole(RE);
            let hits = map_indexed(DRAWS, |t| {
                let mut rng = s.child(t).rng();
                (0..n).any(|_| is_visible(&user, &shell.sample_point(RE, &mut rng).expect("bpp"), RE))
            })
            .into_iter()
            .filter(|&v| v)
            .count();
            let mc = hits as f64 / DRAWS as f64;
            out.push(CheckResult::at_most(format!("availability_n{n}_h{h}"), (mc - exact).abs(), 0.005));
        }
    }
    out
}

fn shadowed_rician(stream: RngStream) -> Vec<CheckResult> {
    let (b, m, omega) = (0.158, 19.4, 1.29);
    let model = SmallScaleModel::ShadowedRician { b, m, omega };
    let samples = map_indexed(DRAWS, |t| sample_small_scale(&model, &mut stream.child(t).rng()));
    let mean = crate::numeric::pairwise_sum(&samples) / DRAWS as f64;
    let target = 2.0 * b + omega;
    let pdf = |w: f64| sr_pdf(w, b, m, omega).unwrap_or(0.0);
    let integral = adaptive_simpson(&pdf, 0.0, 60.0, 1e-12);
    let ks = ks_one_sample_density(&samples, pdf, 0.0, 1e-12);
    vec![
        CheckResult::at_most("sr_sample_mean_rel_err", (mean / target - 1.0).abs(), 0.01),
        CheckResult::at_most("sr_pdf_integral_err", (integral - 1.0).abs(), 1e-6),
        CheckResult::at_most("sr_sampler_vs_pdf_ks", ks, 0.01),
    ]
}

fn rayleigh_oracle(stream: RngStream) -> Vec<CheckResult> {
    let combos = [(-10.0, 0.0), (0.0, 3.0), (5.0, 10.0)];
    combos
        .iter()
        .enumerate()
        .map(|(i, &(t_db, snr_db))| {
            // 1 km link: path loss is exactly 60 dB at alpha = 2.
            let noise = -100.0;
            let link = GroundLink {
                distance: LinkDistance::Fixed(1.0),
                channel: ChannelSpec { small_scale: SmallScaleModel::Rayleigh, ..ChannelSpec::default() },
                tx_power_dbw: snr_db + noise + 60.0,
                noise_dbw: noise,
                threshold_db: t_db,
            };
            let mean_snr = link.mean_snr(1.0).expect("positive distance");
            let exact = (-10f64.powf(t_db / 10.0) / mean_snr).exp();
            let est = ground_link_coverage(&link, DRAWS, stream.child(i as u64)).expect("valid link");
            CheckResult::at_most(
                format!("rayleigh_coverage_t{t_db}db_snr{snr_db}db"),
                (est.value - exact).abs(),
                0.01,
            )
        })
        .collect()
}

fn laplace(stream: RngStream) -> Vec<CheckResult> {
    let grid = [0.0, 1e9, 1e10, 1e11, 1e12, 1e13, 1e14];
    let cfg = SinrConfig::new(vec![ShellSpec::bpp(100, 1000.0, 15.0)], ChannelSpec::default(), -106.0, -10.0);
    let l = interference_laplace(&cfg, &grid, 2000, stream.child(0)).expect("valid config");
    let rises = l.windows(2).filter(|w| w[1] > w[0]).count();
    let empty_cfg = SinrConfig { shells: vec![ShellSpec::bpp(0, 1000.0, 15.0)], ..cfg };
    let e = interference_laplace(&empty_cfg, &grid, 200, stream.child(1)).expect("valid config");
    let off = e.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    vec![
        CheckResult::at_most("laplace_at_zero_err", (l[0] - 1.0).abs(), 0.0),
        CheckResult::at_most("laplace_monotone_violations", rises as f64, 0.0),
        CheckResult::at_most("laplace_empty_constellation_err", off, 0.0),
    ]
}

fn geometry(stream: RngStream) -> Vec<CheckResult> {
    let cases = 10_000u64;
    let mut rng = stream.rng();
    let mut worst = 0.0f64;
    let mut disagreements = 0u32;
    for _ in 0..cases {
        let h: f64 = rng.random_range(200.0..2000.0);
        let rs = RE + h;
        let theta: f64 = rng.random_range(1e-6..PI);
        let d = slant_from_polar(RE, rs, theta).expect("valid angle");
        let back = polar_angle_from_slant(RE, rs, d).expect("valid slant");
        let d2 = slant_from_polar(RE, rs, back).expect("valid angle");
        worst = worst.max(((back - theta) / theta).abs()).max(((d2 - d) / d).abs());

        let user = sample_uniform_sphere(&mut rng, RE);
        let sat = sample_uniform_sphere(&mut rng, rs);
        let vis = is_visible(&user, &sat, RE);
        let by_zenith = user.zenith_to(&sat) <= FRAC_PI_2;
        let by_slant = user.distance(&sat) <= max_slant_range(RE, rs).expect("valid shell");
        if vis != by_zenith || vis != by_slant {
            disagreements += 1;
        }
    }
    vec![
        CheckResult::at_most("slant_polar_round_trip_rel_err", worst, 1e-9),
        CheckResult::at_most("visibility_zenith_slant_disagreements", disagreements as f64, 0.0),
    ]
}
