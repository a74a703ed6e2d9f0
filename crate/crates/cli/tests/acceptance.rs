//! Acceptance criteria, one pass/fail line each.
//!
//! Runs without the libtest harness so that every line is printed even when
//! output capture is on. Exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qmean::baseline::repeated_estimate;
use qmean::branch::BranchPairState;
use qmean::dataset::{Dataset, Generator};
use qmean::fit::fit_loglog;
use qmean::kick::{
    amplitude_oracle, estimate_mean_serial, ideal_mean_estimate, ideal_phase, kick_iteration, readout_phase,
    step_budget, theta_schedule, GammaMode, KickKernel, KickParams, Pipeline, Prepared, ReadoutMode,
    ScheduleConfig, STEP_BUDGET_C,
};
use qmean::qsim::{wrap_angle, StateVector};
use qmean::sweep::{theta_sweep, MeanPolicy, DEFAULT_THETAS};
use qmean::telecompute::dense::{distributed_dense, epr_dense};
use qmean::telecompute::{
    cnot_doubling_ladder, phase_qubit, xor_aggregate, BaseStationState, ClassicalMessage, DistributedConfig,
    DistributedProtocol, EprProtocol, EventKind, NetworkTrace, Outcomes, XorTree,
};
use qmean::RandomStream;

/// What a criterion measured and whether it met its threshold.
struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn patterns(k: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << k).map(move |p| (0..k).map(|j| ((p >> j) & 1) as u8).collect())
}

fn kron_wh(n: usize) -> Vec<Vec<f64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = [[h, h], [h, -h]];
    let mut out = vec![vec![1.0]];
    for _ in 0..n {
        let d = out.len();
        let mut next = vec![vec![0.0; 2 * d]; 2 * d];
        for i in 0..d {
            for j in 0..d {
                for a in 0..2 {
                    for b in 0..2 {
                        next[i * 2 + a][j * 2 + b] = out[i][j] * m[a][b];
                    }
                }
            }
        }
        out = next;
    }
    out
}

fn c1_gate_algebra() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in 1..=4usize {
        let dim = 1 << n;
        let mat = kron_wh(n);
        let sites: Vec<usize> = (0..n).collect();
        for x in 0..dim {
            let basis = StateVector::basis(n, x).unwrap();
            let mut s = basis.clone();
            s.apply_wh(&sites).unwrap();
            for y in 0..dim {
                let sign = if (x & y).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let rule = sign / (dim as f64).sqrt();
                worst = worst.max((s.amplitude(y).unwrap() - Complex64::new(mat[y][x], 0.0)).norm());
                worst = worst.max((mat[y][x] - rule).abs());
            }
            s.apply_wh(&sites).unwrap();
            worst = worst.max(s.max_abs_diff(&basis));
            for site in 0..n {
                let mut t = basis.clone();
                t.apply_m(site).unwrap();
                t.apply_m(site).unwrap();
                worst = worst.max(t.max_abs_diff(&basis));
            }
        }
    }
    verdict(worst <= 1e-12, format!("max deviation {worst:.2e} (≤ 1e-12), n ≤ 4 exhaustive"))
}

/// Closed-form `a_j = e^{iγ_j}/√N` and `w₀ = (1/N)Σ e^{iγ_j}`.
fn closed_form(values: &[f64], theta: f64) -> (Vec<Complex64>, Complex64) {
    let n = values.len() as f64;
    let e: Vec<Complex64> = values.iter().map(|v| Complex64::from_polar(1.0, (theta * v).asin())).collect();
    let a = e.iter().map(|z| z / n.sqrt()).collect();
    let w0 = e.iter().sum::<Complex64>() / n;
    (a, w0)
}

fn traced(d: &Dataset, theta: f64) -> qmean::kick::IterationTrace {
    let kernel = KickKernel::new(d, theta, GammaMode::ExactArcsin).unwrap();
    let n = d.num_sites();
    let mut s = StateVector::zero(n + 1).unwrap();
    s.apply_m(0).unwrap();
    let data: Vec<usize> = (1..=n).collect();
    kick_iteration(&mut s, 0, &data, &kernel, true).unwrap().unwrap()
}

fn c2_amplitude_oracle() -> Verdict {
    let mut rng = RandomStream::new(2);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let n = [4usize, 16, 64][k % 3];
        let values: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let theta = rng.uniform(0.01, 1.0);
        let d = Dataset::new(values.clone()).unwrap();
        let (a, w0) = closed_form(&values, theta);
        let trace = traced(&d, theta);
        let oracle = amplitude_oracle(&d, theta, GammaMode::ExactArcsin).unwrap();
        for j in 0..n {
            worst = worst.max((trace.a()[j] - a[j]).norm()).max((oracle.a[j] - a[j]).norm());
        }
        worst = worst.max((trace.w()[0] - w0).norm()).max((oracle.w0 - w0).norm());
    }
    verdict(worst <= 1e-12, format!("50 datasets, max |a_j|, |w0| deviation {worst:.2e} (≤ 1e-12)"))
}

fn c3_uniform_refocusing() -> Verdict {
    let mut phase_dev: f64 = 0.0;
    let mut fail: f64 = 0.0;
    for n in [4usize, 16, 64] {
        for c in [-1.0, -0.6, 0.0, 0.25, 0.9] {
            for theta in [0.05, 0.3, 1.0] {
                let d = Dataset::new(vec![c; n]).unwrap();
                let trace = traced(&d, theta);
                let expect = PI + 2.0 * (theta * c).asin();
                phase_dev = phase_dev.max(wrap_angle(trace.final_zero().arg() - expect).abs());
                fail = fail.max(1.0 - trace.success_probability);
                let k = KickKernel::new(&d, theta, GammaMode::ExactArcsin).unwrap();
                phase_dev = phase_dev.max(wrap_angle(k.branch_phase() - expect).abs());
                fail = fail.max(k.failure_probability());
            }
        }
    }
    verdict(
        phase_dev <= 1e-12 && fail <= 1e-12,
        format!("phase deviation {phase_dev:.2e}, failure {fail:.2e} (both ≤ 1e-12)"),
    )
}

fn c4_scaling_laws() -> Verdict {
    let d = Generator::Skewed { mu: 0.01, n: 256 }.generate(&mut RandomStream::new(4)).unwrap();
    let sweep = theta_sweep(&d, &DEFAULT_THETAS, MeanPolicy::ThetaSquared, &KickParams::default()).unwrap();
    let phase = sweep.phase_fit.map(|f| f.slope).unwrap_or(f64::NAN);
    let failure = sweep.failure_fit.map(|f| f.slope).unwrap_or(f64::NAN);
    verdict(
        phase >= 2.5 && failure >= 3.5,
        format!("N = 256, slope(phase error) {phase:.3} (≥ 2.5), slope(failure) {failure:.3} (≥ 3.5)"),
    )
}

fn c5_serial_estimate() -> Verdict {
    let (n, theta) = (256usize, 0.1f64);
    let mu = 0.5 * theta * theta;
    let d = Generator::Uniform { mu, n }.generate(&mut RandomStream::new(5)).unwrap();
    assert!((d.mean() - mu).abs() <= 1e-12);
    let r = ((FRAC_PI_4 / theta.powi(3)).floor() as u64).min(200);
    let alpha = 400;
    let params = KickParams { r: Some(r), alpha, ..KickParams::default() };
    let mut hits = 0;
    let mut per_system_max = 0u64;
    let log2n = n.trailing_zeros() as u64;
    let budget = STEP_BUDGET_C * n as u64 * log2n * r;
    for seed in 0..20 {
        let rep = estimate_mean_serial(&d, theta, &params, &RandomStream::new(seed), ReadoutMode::Sampled).unwrap();
        if (rep.mu_e - mu).abs() <= 5.0 * theta * theta {
            hits += 1;
        }
        assert_eq!(rep.step_budget, step_budget(n, r, alpha));
        per_system_max = per_system_max.max(rep.elementary_step_count.div_ceil(alpha));
    }
    verdict(
        hits >= 18 && per_system_max <= budget,
        format!(
            "r = {r}, {hits}/20 within 5θ² (≥ 18); steps per prepared system {per_system_max} ≤ C·N·log₂N·r = {budget} (C = {STEP_BUDGET_C})"
        ),
    )
}

fn c6_schedule() -> Verdict {
    let d = Dataset::new(vec![2e-8; 4]).unwrap();
    let params = KickParams::default();
    let config = ScheduleConfig { theta0: 0.5, factor: 1.5, threshold_coeff: 0.1, ..ScheduleConfig::default() };
    let out = theta_schedule(&config, |theta| ideal_mean_estimate(&d, theta, &params)).unwrap();
    let rel = (out.theta - 3.35e-4).abs() / 3.35e-4;
    verdict(
        out.reductions == 18 && rel <= 0.01,
        format!("{} reductions (= 18), final θ {:.4e} ({:.2}% from 3.35e-4, ≤ 1%)", out.reductions, out.theta, 100.0 * rel),
    )
}

fn c7_epr_protocol() -> Verdict {
    let mut rng = RandomStream::new(7);
    let (mut amp_dev, mut phase_dev): (f64, f64) = (0.0, 0.0);
    let mut messages_ok = true;
    for n in [2usize, 4, 8] {
        for _ in 0..4 {
            let d = Dataset::new((0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
            let theta = rng.uniform(0.05, 1.0);
            let p = EprProtocol::new(&d, theta).unwrap();
            for bits in patterns(n - 1) {
                let mut trace = NetworkTrace::default();
                let bp = p.prepare(Outcomes::Forced(&bits), None, &mut RandomStream::new(0), 0, &mut trace).unwrap();
                let dense = epr_dense(&p, Outcomes::Forced(&bits), None, &mut RandomStream::new(0)).unwrap();
                amp_dev = amp_dev.max(bp.qubit.max_abs_diff(&dense));
                phase_dev = phase_dev.max((-ideal_phase(&bp.qubit) - theta * theta * d.mean()).abs());
                messages_ok &= trace.count(EventKind::Bit) == n - 1 && trace.events.len() == n - 1;
            }
        }
    }
    verdict(
        amp_dev <= 1e-10 && phase_dev <= 1e-12 && messages_ok,
        format!(
            "N ≤ 8 every branch: dense deviation {amp_dev:.2e} (≤ 1e-10), phase − θ²μ {phase_dev:.2e}, N−1 bits each: {messages_ok}"
        ),
    )
}

fn c8_parity() -> Verdict {
    let mut cases = 0;
    let mut ok = true;
    for eta in 2..=5usize {
        for bits in patterns(eta - 1) {
            let mut s = BranchPairState::new_cat(eta).unwrap();
            let mut base = BaseStationState::default();
            for (k, b) in bits.iter().enumerate() {
                let (rec, _) = s.project_cat_bit(k + 1, *b).unwrap();
                base.receive(ClassicalMessage { from: k + 1, bit: rec.bit, round: 0 });
            }
            let ones = bits.iter().filter(|b| **b == 1).count();
            let expect = if ones % 2 == 0 { 1.0 } else { -1.0 };
            let w = s.weights();
            let sign = w[1] / w[0];
            ok &= (sign - Complex64::new(expect, 0.0)).norm() <= 1e-12 && base.sign() == expect;
            cases += 1;
        }
    }
    verdict(ok, format!("{cases} outcome patterns for η ≤ 5, sign = (−1)^#ones on all: {ok}"))
}

fn c9_phase_multiplication() -> Verdict {
    let (c, theta, r) = (0.3f64, 0.25f64, 5u64);
    let d = Dataset::new(vec![c; 8]).unwrap();
    let params = KickParams { r: Some(r), ..KickParams::default() };
    let serial = ideal_phase(&Pipeline::new(&d, theta, &params).unwrap().run(&mut RandomStream::new(0)).unwrap().qubit);
    let mut mult_dev: f64 = 0.0;
    for eta in [2usize, 4] {
        let mut cfg = DistributedConfig::new(eta);
        cfg.force = true;
        let p = DistributedProtocol::new(&d, theta, &params, &cfg).unwrap();
        for bits in patterns(eta - 1) {
            let prep = p.prepare(Outcomes::Forced(&bits), None, &mut RandomStream::new(1), 0, &mut NetworkTrace::default()).unwrap();
            assert_eq!(prep.restarts, 0);
            mult_dev = mult_dev.max(wrap_angle(ideal_phase(&prep.qubit) - eta as f64 * serial).abs());
        }
    }
    let mut dense_dev: f64 = 0.0;
    let mut gen = RandomStream::new(9);
    for eta in 1..=3usize {
        for n in [2usize, 4, 8] {
            let d = Generator::Skewed { mu: 0.05, n }.generate(&mut gen).unwrap();
            let params = KickParams { r: Some(3), ..KickParams::default() };
            let mut cfg = DistributedConfig::new(eta);
            cfg.force = true;
            let p = DistributedProtocol::new(&d, 0.8, &params, &cfg).unwrap();
            for seed in 0..3 {
                for bits in patterns(eta - 1) {
                    let bp = p.prepare(Outcomes::Forced(&bits), None, &mut RandomStream::new(seed), 0, &mut NetworkTrace::default()).unwrap();
                    let (dense, _) = distributed_dense(&p, Outcomes::Forced(&bits), None, &mut RandomStream::new(seed)).unwrap();
                    dense_dev = dense_dev.max(bp.qubit.max_abs_diff(&dense));
                }
            }
        }
    }
    verdict(
        mult_dev <= 1e-9 && dense_dev <= 1e-10,
        format!("η ∈ {{2, 4}}: |phase − η·serial| {mult_dev:.2e} (≤ 1e-9); branch-pair vs dense η ≤ 3, N ≤ 8: {dense_dev:.2e}"),
    )
}

fn c10_ladder() -> Verdict {
    let phi = 0.37;
    let mut rng = RandomStream::new(10);
    let (mut pairs, mut successes) = (0usize, 0usize);
    let mut dev: f64 = 0.0;
    for _ in 0..10_000 {
        let rep = cnot_doubling_ladder(&[phi, phi], Some(1), &mut rng).unwrap();
        pairs += rep.pairs;
        successes += rep.successes;
        for p in &rep.final_phases {
            dev = dev.max((p - 2.0 * phi).abs());
        }
    }
    let rate = successes as f64 / pairs as f64;
    verdict(
        dev <= 1e-12 && (rate - 0.5).abs() <= 0.015,
        format!("{pairs} pairings: success rate {rate:.4} (0.5 ± 0.015), doubled-phase deviation {dev:.2e} (≤ 1e-12)"),
    )
}

fn c11_readout() -> Verdict {
    let alpha = 10_000u64;
    let tol = 5.0 / (alpha as f64).sqrt();
    let mut worst_hits = usize::MAX;
    let mut summary = Vec::new();
    for target in [0.0, FRAC_PI_4, -FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] {
        let qubit = phase_qubit(target).unwrap();
        let hits = (0..100u64)
            .filter(|seed| {
                let rd = readout_phase(
                    |_, _| Ok(Prepared { qubit: qubit.clone(), elementary_steps: 0, restarts: 0 }),
                    alpha,
                    &RandomStream::new(*seed),
                )
                .unwrap();
                (rd.theta_hat - target).abs() <= tol
            })
            .count();
        worst_hits = worst_hits.min(hits);
        summary.push(format!("{target:.3}: {hits}"));
    }
    verdict(
        worst_hits >= 95,
        format!("α = 1e4, within 5/√α of 100 seeds: [{}] (each ≥ 95)", summary.join(", ")),
    )
}

fn c12_xor_grouping() -> Verdict {
    let mut rng = RandomStream::new(12);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = 1 + rng.below(64);
        let bits: Vec<u8> = (0..n).map(|_| rng.coin() as u8).collect();
        let tree = XorTree::random(n, &mut rng).unwrap();
        let flat = bits.iter().fold(0, |a, b| a ^ b);
        if xor_aggregate(&bits, &tree).unwrap() != flat {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("1000 random vectors and groupings, {mismatches} mismatches with flat XOR"))
}

fn c13_baseline_clt() -> Verdict {
    let d = Generator::Uniform { mu: 0.1, n: 1024 }.generate(&mut RandomStream::new(13)).unwrap();
    let ns = [100u64, 400, 1600];
    let stds: Vec<f64> = ns.iter().map(|n| repeated_estimate(&d, *n, 200, &RandomStream::new(*n)).unwrap().0.std).collect();
    let xs: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    let slope = fit_loglog(&xs, &stds).unwrap().slope;
    verdict((-0.6..=-0.4).contains(&slope), format!("std slope over n ∈ {{100, 400, 1600}}: {slope:.3} (in [−0.6, −0.4])"))
}

fn c14_determinism() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let gen = ["--gen", "uniform:mu=0.01,n=16"];
    let commands: Vec<Vec<&str>> = vec![
        vec!["estimate-serial", "--theta", "0.3", "--alpha", "50", "--seed", "14"],
        vec!["estimate-serial", "--schedule", "--ideal", "--seed", "14"],
        vec!["estimate-epr", "--theta", "0.5", "--alpha", "50", "--seed", "14", "--trace", "TRACE"],
        vec!["estimate-distributed", "--theta", "0.3", "--eta", "3", "--alpha", "50", "--seed", "14", "--trace", "TRACE"],
        vec!["sweep", "--thetas", "0.2,0.1,0.05", "--fixed-mean", "--seed", "14"],
        vec!["sweep", "--etas", "1,2,4", "--theta", "0.2", "--seed", "14"],
        vec!["oracle-check", "--theta", "0.3", "--seed", "14"],
        vec!["baseline", "--samples", "100", "--repeats", "20", "--seed", "14"],
    ];
    let run = |args: &[&str], tag: &str| -> (Vec<u8>, Vec<u8>) {
        let out = dir.path().join(format!("out-{tag}"));
        let trace = dir.path().join(format!("trace-{tag}"));
        let trace_s = trace.to_str().unwrap();
        let mut full: Vec<&str> = args.iter().map(|a| if *a == "TRACE" { trace_s } else { a }).collect();
        full.extend(gen);
        full.extend(["--out", out.to_str().unwrap()]);
        let status = Command::new(env!("CARGO_BIN_EXE_qmean")).args(&full).status().unwrap();
        assert!(status.success(), "{full:?}");
        (std::fs::read(&out).unwrap(), read_or_empty(&trace))
    };
    let ladder = |tag: &str| -> Vec<u8> {
        let out = dir.path().join(format!("ladder-{tag}"));
        let ok = Command::new(env!("CARGO_BIN_EXE_qmean"))
            .args(["ladder", "--copies", "64", "--phase", "0.1", "--seed", "14", "--out", out.to_str().unwrap()])
            .status()
            .unwrap()
            .success();
        assert!(ok);
        std::fs::read(&out).unwrap()
    };
    let mut identical = 0;
    for (k, args) in commands.iter().enumerate() {
        if run(args, &format!("{k}a")) == run(args, &format!("{k}b")) {
            identical += 1;
        }
    }
    if ladder("a") == ladder("b") {
        identical += 1;
    }
    let total = commands.len() + 1;
    verdict(identical == total, format!("{identical}/{total} commands byte-identical on rerun (reports and traces)"))
}

fn read_or_empty(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_default()
}

fn main() {
    type Criterion = (u32, &'static str, u64, fn() -> Verdict);
    let criteria: [Criterion; 14] = [
        (1, "gate algebra", 1, c1_gate_algebra),
        (2, "amplitude oracle", 10, c2_amplitude_oracle),
        (3, "uniform refocusing", 5, c3_uniform_refocusing),
        (4, "θ³/θ⁴ scaling", 120, c4_scaling_laws),
        (5, "serial estimate", 120, c5_serial_estimate),
        (6, "θ schedule", 1, c6_schedule),
        (7, "EPR protocol", 30, c7_epr_protocol),
        (8, "parity rule", 5, c8_parity),
        (9, "phase multiplication", 60, c9_phase_multiplication),
        (10, "CNOT ladder", 30, c10_ladder),
        (11, "readout precision", 60, c11_readout),
        (12, "XOR grouping", 1, c12_xor_grouping),
        (13, "baseline CLT", 30, c13_baseline_clt),
        (14, "determinism", 10, c14_determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(v) => (v.pass && elapsed < Duration::from_secs(limit), v.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        println!(
            "criterion {id:>2} {} {name}: {detail} [{:.2} s, limit {limit} s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 14 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
