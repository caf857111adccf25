//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

use std::time::{Duration, Instant};

use cryochain::dispatch::{dispatch, Experiment};
use cryochain::{parse_scenario, Scenario, Strictness};
use cryochain_core::analog::{first_stage, readout_jitter, BandPassStage, Chain, JitterSetup, PowerMode, ReadoutKind};
use cryochain_core::experiments::{
    heat_budget, latency_budget, project, run_pnr_experiment, run_threshold_sweep, HeatConfig, LatencyConfig, PnrConfig,
    SweepConfig,
};
use cryochain_core::modulator::EoModulator;
use cryochain_core::trigger::{
    trigger_response, window_discriminator, GateSet, SchmittTrigger, TriggerPair, DEFAULT_FEEDBACK_RESISTANCE,
};
use cryochain_core::Waveform;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn amplifier_envelope() -> Check {
    let s = first_stage(PowerMode::High);
    let mid = (s.f_low * s.f_high).sqrt();
    let g = s.s21_db(mid).map_err(|e| e.to_string())?;
    let lo = s.s21_db(6e6).map_err(|e| e.to_string())? - g;
    let hi = s.s21_db(600e6).map_err(|e| e.to_string())? - g;
    ensure(
        within(g, 20.0, 0.5) && within(lo, -3.0, 0.5) && within(hi, -3.0, 0.5),
        format!("midband {g:.2} dB, 6 MHz {lo:+.2} dB, 600 MHz {hi:+.2} dB"),
    )
}

fn rect(width: f64, height: f64) -> Waveform {
    Waveform::from_fn(10e9, 0.0, 3000, |t| if (10e-9..10e-9 + width).contains(&t) { height } else { 0.0 }).unwrap()
}

fn single_width(trig: &SchmittTrigger, w: &Waveform) -> Result<f64, String> {
    let p = trigger_response(trig, w).map_err(|e| e.to_string())?.pulses();
    match p.as_slice() {
        [(a, b)] => Ok(b - a),
        _ => Err(format!("expected one output pulse, got {}", p.len())),
    }
}

fn trigger_widths() -> Check {
    let upper = TriggerPair::default().upper;
    let w10 = single_width(&upper, &rect(10e-9, 0.1))?;
    let w40 = single_width(&upper, &rect(40e-9, 0.1))?;
    let spread = (w40 / w10 - 1.0).abs();
    let t30 = SchmittTrigger::with_capacitor(0.05, DEFAULT_FEEDBACK_RESISTANCE, 30e-12);
    let t82 = SchmittTrigger::with_capacitor(0.05, DEFAULT_FEEDBACK_RESISTANCE, 82e-12);
    let ratio = single_width(&t30, &rect(10e-9, 0.1))? / single_width(&t82, &rect(10e-9, 0.1))?;
    let ratio_err = (ratio / (30.0 / 82.0) - 1.0).abs();
    ensure(
        spread < 0.05 && ratio_err < 0.05,
        format!(
            "10 ns vs 40 ns input: {:.1} vs {:.1} ns ({:.2}%), 30:82 pF width ratio {ratio:.4} (target {:.4})",
            w10 * 1e9,
            w40 * 1e9,
            spread * 100.0,
            30.0 / 82.0
        ),
    )
}

fn window_oracle() -> Check {
    let cfg = SweepConfig::default();
    let ladder = cfg.ladder().map_err(|e| e.to_string())?;
    let step = ladder[0];
    // thresholds between the levels, plus one close to the baseline where
    // the lower trigger leads the upper one the most
    let levels: Vec<f64> = [0.35, 0.5, 1.5, 2.5, 3.5, 4.5].iter().map(|f| f * step).collect();
    let gates = GateSet::default();
    let pair = TriggerPair::default();
    let mut cases = 0;
    let mut failures = Vec::new();
    for pixels in 1..=cfg.array.n_pixels {
        for switch_over in [false, true] {
            let w = cfg.shape_trace::<cryochain_core::rng::SimRng>((pixels, switch_over), None).map_err(|e| e.to_string())?;
            let peak = w.max().1;
            for (a, &lo) in levels.iter().enumerate() {
                for &hi in &levels[a + 1..] {
                    let lower = SchmittTrigger { threshold: lo, ..pair.lower.clone() };
                    let upper = SchmittTrigger { threshold: hi, ..pair.upper.clone() };
                    let out = window_discriminator(&lower, &upper, &gates, &w).map_err(|e| e.to_string())?;
                    let expect = usize::from(lo <= peak && peak < hi);
                    cases += 1;
                    if out.count_rising() != expect {
                        failures.push(format!("{pixels}px so={switch_over} [{lo:.4},{hi:.4})"));
                    }
                }
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!("{cases} cases, {} mismatches {:?}", failures.len(), failures),
    )
}

fn sweep_structure() -> Check {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/paper_fig13.toml"))
        .map_err(|e| e.to_string())?;
    let s = parse_scenario(&text, Strictness::Strict).map_err(|e| e.to_string())?.scenario;
    let cfg = s.sweep_config();
    let (o, _) = run_threshold_sweep(&cfg, s.seed).map_err(|e| e.to_string())?;
    let n = o.thresholds.len();
    // flat count runs in the gaps between amplitude levels
    let step = o.ladder[0];
    let mut gap_levels = Vec::new();
    let mut flat = true;
    for k in 0..o.ladder.len() {
        let lo = if k == 0 { cfg.threshold_min } else { o.ladder[k - 1] + 0.2 * step };
        let hi = o.ladder[k] - 0.2 * step;
        for counts in [&o.lower_counts, &o.upper_counts] {
            let v: Vec<f64> = (0..n).filter(|&i| (lo..=hi).contains(&o.thresholds[i])).map(|i| counts[i] as f64).collect();
            let (mn, mx) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            flat &= v.len() >= 3 && mx > 0.0 && (mx - mn) <= 0.02 * mx;
            if std::ptr::eq(counts, &o.lower_counts) {
                gap_levels.push(mx);
            }
        }
    }
    let distinct = gap_levels.windows(2).all(|p| p[1] < 0.98 * p[0]);
    let mut ok = 0usize;
    for i in 0..n {
        for j in 0..n {
            let p = (o.lower_counts[i] as f64 - o.upper_counts[j] as f64).max(0.0);
            ok += usize::from((o.driver_counts[i][j] as f64 - p).abs() <= 3.0 * p.max(1.0).sqrt());
        }
    }
    let agreement = ok as f64 / (n * n) as f64;
    ensure(
        n == 50
            && cfg.n_pulses >= 10_000
            && o.lower_plateaus.len() == 4
            && o.upper_plateaus.len() == 4
            && flat
            && distinct
            && agreement >= 0.99,
        format!(
            "{n}x{n} grid, {} pulses: plateaus lower {} upper {}, gaps flat {flat}, distinct {distinct}, driver within 3 sigma on {:.2}% of cells",
            cfg.n_pulses,
            o.lower_plateaus.len(),
            o.upper_plateaus.len(),
            agreement * 100.0
        ),
    )
}

fn latency() -> Check {
    let b = latency_budget(&LatencyConfig::default()).map_err(|e| e.to_string())?;
    let (t, u, rt) = (b.total() * 1e9, b.uncertainty() * 1e9, b.room_temperature_delay * 1e9);
    ensure(
        within(t, 22.75, 0.05) && within(u, 2.75, 0.01) && b.display_ns() == "23 ± 3" && within(rt, 20.0, 0.5),
        format!("total {t:.3} ns ± {u:.3} ns, shown as \"{} ns\"; room-temperature path {rt:.2} ns", b.display_ns()),
    )
}

fn heat() -> Check {
    let high = heat_budget(&HeatConfig::default()).map_err(|e| e.to_string())?;
    let low = heat_budget(&HeatConfig { first_stage_mode: PowerMode::Low, ..HeatConfig::default() }).map_err(|e| e.to_string())?;
    let total = high.total() * 1e3;
    ensure(
        within(total, 23.0, 0.5)
            && within(high.first_stage_power * 1e3, 1.3, 1e-9)
            && within(low.first_stage_power * 1e3, 0.3, 1e-9)
            && low.first_stage_fits_1k
            && !high.first_stage_fits_1k,
        format!(
            "total {total:.3} mW; first stage {:.1} mW high (fits 1 K: {}), {:.1} mW low (fits 1 K: {})",
            high.first_stage_power * 1e3,
            high.first_stage_fits_1k,
            low.first_stage_power * 1e3,
            low.first_stage_fits_1k
        ),
    )
}

fn pnr() -> Check {
    let cfg = PnrConfig::default();
    let (o, _) = run_pnr_experiment(&cfg, 7).map_err(|e| e.to_string())?;
    let decreasing = o.centroids.len() >= 3 && o.centroids.windows(2).all(|c| c[1].0 < c[0].0);
    // noise-free delays of n = 1, 2, 3 must fall on alternate sides of the valleys
    let mut clean = Vec::new();
    for n in 1..=3 {
        let (r, f) = cfg.clean_delays(n).map_err(|e| e.to_string())?.ok_or("no clean crossing")?;
        clean.push(project(r, f, cfg.projection_angle_deg));
    }
    let mut valleys = o.valleys.clone();
    valleys.sort_by(f64::total_cmp);
    let separated = valleys.len() >= 2
        && (0..2).all(|k| {
            let (a, b) = (clean[k].min(clean[k + 1]), clean[k].max(clean[k + 1]));
            valleys.iter().any(|&v| a < v && v < b)
        });
    let mut right = 0u64;
    let mut total = 0u64;
    for (n, row) in o.confusion.iter().enumerate().take(3) {
        right += row.get(n).copied().unwrap_or(0);
        total += row.iter().sum::<u64>();
    }
    let acc = right as f64 / total.max(1) as f64;
    ensure(
        cfg.n_pulses >= 10_000 && cfg.source.mean_photon_number == 2.0 && decreasing && separated && acc >= 0.9,
        format!(
            "{} valleys, rising centroids decreasing {decreasing}, clean n=1..3 separated {separated}, accuracy {:.2}%",
            o.valleys.len(),
            acc * 100.0
        ),
    )
}

fn jitter() -> Check {
    let setup = JitterSetup::default();
    let targets = [(ReadoutKind::LaserLink, 1400.0), (ReadoutKind::Conventional, 500.0), (ReadoutKind::CryoAmplified, 70.0)];
    let mut got = Vec::new();
    for (kind, _) in targets {
        got.push(readout_jitter(&setup, kind, 2000, 11).map_err(|e| e.to_string())?.std * 1e12);
    }
    let near = targets.iter().zip(&got).all(|(&(_, t), &g)| (g / t - 1.0).abs() <= 0.3);
    let ordered = got[0] > got[1] && got[1] > got[2];
    ensure(
        near && ordered,
        format!("laser {:.0} ps, conventional {:.0} ps, cryo {:.0} ps (targets 1400 / 500 / 70)", got[0], got[1], got[2]),
    )
}

fn stage_strategy() -> impl Strategy<Value = BandPassStage> {
    (0.0..30.0f64, 1e6..50e6f64, 100e6..1.5e9f64, any::<bool>()).prop_map(|(g, lo, hi, inv)| BandPassStage {
        gain_db: g,
        f_low: lo,
        f_high: hi,
        inverting: inv,
        ..first_stage(PowerMode::High)
    })
}

fn run_property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn csv_outputs(exp: Experiment, s: &Scenario) -> Result<Vec<(String, Vec<u8>)>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (_, written) = dispatch(exp, s, dir.path(), false).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for f in written.files {
        files.push((f.clone(), std::fs::read(written.dir.join(&f)).map_err(|e| e.to_string())?));
    }
    Ok(files)
}

fn properties() -> Check {
    let mut s = Scenario::default();
    s.sweep.n_pulses = 800;
    s.sweep.grid_points = 16;
    run_property("bit-identical csv", 3, 0..=cryochain::scenario::MAX_SEED, |seed| {
        let s = Scenario { seed, ..s.clone() };
        for exp in [Experiment::Sweep, Experiment::Simulate] {
            let a = csv_outputs(exp, &s).map_err(TestCaseError::fail)?;
            let b = csv_outputs(exp, &s).map_err(TestCaseError::fail)?;
            prop_assert_eq!(a, b);
        }
        Ok(())
    })?;
    let signal = || prop::collection::vec(-1.0..1.0f64, 300);
    run_property(
        "linearity",
        32,
        (prop::collection::vec(stage_strategy(), 1..4), signal(), signal(), -3.0..3.0f64, -3.0..3.0f64),
        |(stages, x, y, a, b)| {
            let chain = Chain::new(stages).unwrap();
            let wx = Waveform::from_samples(10e9, 0.0, x).unwrap();
            let wy = Waveform::from_samples(10e9, 0.0, y).unwrap();
            let lhs = chain.apply(&wx.linear_combination(a, &wy, b).unwrap()).unwrap();
            let rhs = chain.apply(&wx).unwrap().linear_combination(a, &chain.apply(&wy).unwrap(), b).unwrap();
            let scale = lhs.samples().iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (p, q) in lhs.samples().iter().zip(rhs.samples()) {
                prop_assert!((p - q).abs() <= 1e-9 * scale);
            }
            Ok(())
        },
    )?;
    run_property("cascade order", 32, (stage_strategy(), stage_strategy(), signal()), |(s1, s2, x)| {
        let w = Waveform::from_samples(10e9, 0.0, x).unwrap();
        let p = Chain::new(vec![s1.clone(), s2.clone()]).unwrap().apply(&w).unwrap();
        let q = Chain::new(vec![s2, s1]).unwrap().apply(&w).unwrap();
        let scale = p.samples().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (u, v) in p.samples().iter().zip(q.samples()) {
            prop_assert!((u - v).abs() <= 1e-9 * scale);
        }
        Ok(())
    })?;
    run_property("transmission", 256, (0.5..10.0f64, -20.0..20.0f64, -3i32..4), |(v_pi, v, k)| {
        let m = EoModulator { v_pi, ..EoModulator::default() };
        prop_assert!((m.transmission(v + 2.0 * k as f64 * v_pi) - m.transmission(v)).abs() < 1e-9);
        prop_assert!((m.transmission(v_pi) - 1.0).abs() < 1e-12);
        Ok(())
    })?;
    let probe = SweepConfig::default();
    let floor = probe.ladder().unwrap()[0] / 3.0;
    run_property("partition identity", 4, any::<u64>(), |seed| {
        let cfg = SweepConfig { n_pulses: 1000, grid_points: 16, threshold_min: floor, ..probe.clone() };
        let (o, _) = run_threshold_sweep(&cfg, seed).unwrap();
        let n = o.thresholds.len();
        let d = &o.driver_counts;
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    prop_assert_eq!(d[i][j] + d[j][k], d[i][k]);
                }
            }
            prop_assert_eq!(d[i][n - 1], o.lower_counts[i]);
        }
        Ok(())
    })?;
    Ok("bit-identical CSVs, linearity at 1e-9, cascade order, transmission period and T(v_pi) = 1, window partition identity".into())
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "amplifier envelope", limit: Duration::from_secs(1), run: amplifier_envelope },
        Criterion { id: 2, name: "trigger width decoupling", limit: Duration::from_secs(1), run: trigger_widths },
        Criterion { id: 3, name: "window discriminator oracle", limit: Duration::from_secs(10), run: window_oracle },
        Criterion { id: 4, name: "threshold sweep structure", limit: Duration::from_secs(300), run: sweep_structure },
        Criterion { id: 5, name: "latency budget", limit: Duration::from_secs(1), run: latency },
        Criterion { id: 6, name: "heat budget", limit: Duration::from_secs(1), run: heat },
        Criterion { id: 7, name: "pnr separability", limit: Duration::from_secs(120), run: pnr },
        Criterion { id: 8, name: "jitter ordering", limit: Duration::from_secs(120), run: jitter },
        Criterion { id: 9, name: "determinism and linearity", limit: Duration::from_secs(60), run: properties },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if took <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} limit", c.limit)),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {} {}: {} ({:.2} s) {}",
            c.id,
            c.name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
