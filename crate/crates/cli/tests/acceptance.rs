//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//!     cargo test --release -p unireg-cli --test acceptance
//!
//! Kept out of the default `cargo test` run because one criterion fails by
//! construction; see the README.

use std::collections::HashSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unireg::{
    ase_evaluate, golden_section_1d, oracle, run_adaptive_session, run_episode, AseBranch, AseBuffers, AseConfig,
    Method, PlantParams, RegulatorGains, SearchInterval, SessionConfig, SessionReport, TrajectorySpec, PHI,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn session(cfg: &SessionConfig) -> SessionReport {
    run_adaptive_session(cfg).unwrap_or_else(|f| panic!("{} session failed: {f}", cfg.method.name()))
}

fn offset_setup(n_scale: f64) -> (PlantParams, RegulatorGains, TrajectorySpec) {
    let p = PlantParams::tcp_muscle();
    let kdc = (1.0 - p.a()) / p.b();
    let g = RegulatorGains::new(50.0, 50.0 + n_scale * kdc).unwrap();
    (p, g, TrajectorySpec::arbitrary(vec![1.0], 0.1).unwrap())
}

fn recursion_oracle() -> Outcome {
    let (p, g, traj) = offset_setup(1.0);
    let c = p.a() - p.b() * g.k();
    let log = run_episode(&p, &g, &traj, 500).unwrap();
    let worst = log
        .records
        .iter()
        .map(|s| (s.e - c.powi(s.k as i32)).abs())
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-9,
        format!("max |e(k) - (a-bK)^k| over 500 steps = {worst:.3e}"),
    )
}

fn zero_steady_state() -> Outcome {
    let (p, g, traj) = offset_setup(1.0);
    let c = p.a() - p.b() * g.k();
    let horizon = (1e-6f64.ln() / c.abs().ln()).ceil() as usize;
    let log = run_episode(&p, &g, &traj, 5000).unwrap();
    let settled = log.records[horizon..].iter().all(|s| s.e.abs() < 1e-6);
    let mut detail = format!("nominal: |e| < 1e-6 from horizon {horizon} to 5000: {settled}");

    // The linear recursion predicts e_ss = r (1 - a - b(N-K)) / (1 - c).
    // The tail mean stands in for the steady-state error.
    let mut signs_ok = true;
    for (scale, label) in [(0.9, "-10%"), (1.1, "+10%")] {
        let (p, g, traj) = offset_setup(scale);
        let predicted = (1.0 - p.a() - p.b() * g.offset()) / (1.0 - c);
        let log = run_episode(&p, &g, &traj, 5000).unwrap();
        let tail = &log.records[4000..];
        let mean = tail.iter().map(|s| s.e).sum::<f64>() / tail.len() as f64;
        let lo = tail.iter().map(|s| s.e).fold(f64::MAX, f64::min);
        let hi = tail.iter().map(|s| s.e).fold(f64::MIN, f64::max);
        let ok = mean.abs() > 1e-6 && mean.signum() == predicted.signum();
        signs_ok &= ok;
        detail += &format!(
            "; {label}: predicted {predicted:+.5}, tail mean {mean:+.5} in [{lo:+.5}, {hi:+.5}] {}",
            if ok { "ok" } else { "WRONG SIGN" }
        );
    }
    outcome(settled && signs_ok, detail)
}

fn rectangular_cfg(seed: u64) -> SessionConfig {
    SessionConfig {
        method: Method::ShcAse,
        episodes: 10,
        seed,
        ..SessionConfig::default()
    }
}

fn ase_convergence() -> Outcome {
    let mut good = 0;
    let mut at = Vec::new();
    for seed in 0..10 {
        let r = session(&rectangular_cfg(seed));
        let conv = r.summary.episodes_to_convergence;
        let cost_down = conv.is_some_and(|e| r.episode_costs[e - 1] < r.episode_costs[0]);
        if conv.is_some_and(|e| e <= 10) && cost_down {
            good += 1;
        }
        at.push(conv.map_or("-".to_string(), |e| e.to_string()));
    }
    outcome(
        good >= 8,
        format!(
            "{good}/10 seeds converged with falling cost; episodes [{}]",
            at.join(" ")
        ),
    )
}

fn large_init_recovery() -> Outcome {
    let mut good = 0;
    let mut notes = Vec::new();
    let mut moved = Vec::new();
    for seed in 0..10 {
        let cfg = SessionConfig {
            initial_gains: RegulatorGains::new(450.0, 600.0).unwrap(),
            ..rectangular_cfg(seed)
        };
        let r = session(&cfg);
        let n_end: Vec<f64> = r.logs.iter().map(|l| l.final_gains().unwrap().1).collect();
        let trend = n_end.windows(3).all(|w| w[2] <= w[0]);
        let conv = r.summary.episodes_to_convergence;
        if trend && conv.is_some_and(|e| e <= 10) {
            good += 1;
        }
        let (k, n) = r.logs.last().unwrap().final_gains().unwrap();
        notes.push(format!(
            "{}{}",
            conv.map_or("-".to_string(), |e| e.to_string()),
            if trend { "" } else { "!" }
        ));
        moved.push(format!("{k:.0}/{n:.0}"));
    }
    outcome(
        good == 10,
        format!(
            "{good}/10 seeds with non-increasing N trend and convergence; episodes [{}]; final K/N from 450/600 [{}]",
            notes.join(" "),
            moved.join(" ")
        ),
    )
}

fn gss_speed_vs_overshoot() -> Outcome {
    let gss = session(&SessionConfig {
        method: Method::Gss2d,
        ..rectangular_cfg(0)
    });
    let ase = session(&rectangular_cfg(0));
    let conv = gss.summary.episodes_to_convergence;
    let (pg, pa) = (gss.logs[0].peak_input(), ase.logs[0].peak_input());
    outcome(
        conv.is_some_and(|e| e <= 2) && pg >= 2.0 * pa,
        format!(
            "gss2d converged at episode {}; episode-1 peak u {pg:.1} vs shc-ase {pa:.1} ({:.2}x)",
            conv.map_or("-".to_string(), |e| e.to_string()),
            pg / pa
        ),
    )
}

fn shc_inferiority() -> Outcome {
    let mut good = 0;
    let mut ratios = Vec::new();
    for seed in 0..10 {
        let cfg = |method| SessionConfig {
            method,
            trajectory: TrajectorySpec::versine(200.0, 1.0, 0.1).unwrap(),
            episodes: 6,
            seed,
            ..SessionConfig::default()
        };
        let shc = session(&cfg(Method::Shc));
        let ase = session(&cfg(Method::ShcAse));
        let ratio = shc.episode_costs[5] / ase.episode_costs[5];
        if ratio >= 1.25 {
            good += 1;
        }
        ratios.push(format!("{ratio:.1}"));
    }
    outcome(
        good >= 8,
        format!(
            "{good}/10 seeds with J_shc >= 1.25 J_ase; ratios [{}]",
            ratios.join(" ")
        ),
    )
}

fn golden_section_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_err = 0.0f64;
    let mut worst_width = 0.0f64;
    let iv = SearchInterval::new(0.0, 10.0, 1e-6).unwrap();
    for _ in 0..50 {
        let (c, curv, shift) = (
            rng.gen_range(0.0..10.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(-5.0..5.0),
        );
        let f = move |x: f64| curv * (x - c) * (x - c) + shift;
        let mut o = oracle(|p: &[f64]| f(p[0]));
        let out = golden_section_1d(&mut o, iv).unwrap();

        // Brute force: a coarse pass over [0, 10], then a 1e-8 grid around
        // its best cell.
        let coarse = (0..=10_000)
            .map(|i| i as f64 * 1e-3)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        let lo = (coarse - 1e-3).max(0.0);
        let fine = (0..=200_000)
            .map(|i| lo + i as f64 * 1e-8)
            .filter(|x| *x <= 10.0)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        worst_err = worst_err.max((out.point - fine).abs());
        let expected = 10.0 * PHI.powi(-(out.iterations as i32));
        worst_width = worst_width.max((out.width - expected).abs());
    }
    outcome(
        worst_err <= 1e-6 && worst_width <= 1e-12,
        format!("max |x* - grid min| = {worst_err:.2e}, max width error = {worst_width:.2e}"),
    )
}

fn ase_totality() -> Outcome {
    let cfg = AseConfig {
        capacity: 8,
        ..AseConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut seen = HashSet::new();
    let mut double = 0;
    let cases = 100_000;
    for _ in 0..cases {
        let mut r: Vec<f64> = if rng.gen_bool(0.3) {
            let level = rng.gen_range(0.1..2.0);
            (0..8).map(|_| level * rng.gen_range(1.0..1.05)).collect()
        } else {
            (0..8).map(|_| rng.gen_range(0.0..2.0)).collect()
        };
        if rng.gen_bool(0.7) {
            r.sort_by(f64::total_cmp);
        }
        if rng.gen_bool(0.1) {
            r[..4].fill(0.0);
        }
        if rng.gen_bool(0.05) {
            r[rng.gen_range(0..8)] = -0.1;
        }
        let e: Vec<f64> = match rng.gen_range(0..5) {
            0 => (0..8).map(|_| rng.gen_range(-1.0..-0.001)).collect(),
            1 => (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            2 => (0..8).map(|_| rng.gen_range(0.0..0.03)).collect(),
            3 => (0..8).map(|_| rng.gen_range(0.02..1.0)).collect(),
            _ => {
                let level = rng.gen_range(0.05..1.0);
                (0..8).map(|_| level * rng.gen_range(1.0..1.05)).collect()
            }
        };
        let k = rng.gen_range(0.0..200.0);
        let g = RegulatorGains::new(k, k + rng.gen_range(0.0..200.0)).unwrap();
        let mut b = AseBuffers::from_samples(8, &r, &e).unwrap();
        let d = ase_evaluate(&mut b, &g, &cfg, &mut rng).unwrap();
        if d.k.eligible && d.n.eligible {
            double += 1;
        }
        seen.insert(d.branch);
    }
    let rejects = AseBranch::REJECTS.iter().filter(|b| seen.contains(b)).count();
    let decisions = AseBranch::DECISIONS.iter().filter(|b| seen.contains(b)).count();
    outcome(
        rejects == 6 && decisions == 4 && double == 0,
        format!("{cases} windows: {rejects}/6 rejects, {decisions}/4 decisions, {double} double-eligible"),
    )
}

fn boundedness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut good = 0;
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let (a, f, b) = (
            rng.gen_range(0.5..=0.999),
            rng.gen_range(0.5..=0.999),
            rng.gen_range(1e-4..=1.0),
        );
        let cfg = SessionConfig {
            plant: PlantParams::new(a, b, 1.0, f, 0.1).unwrap(),
            episodes: 50,
            seed,
            abort_on_instability: true,
            ..SessionConfig::default()
        };
        match run_adaptive_session(&cfg) {
            Ok(r) => {
                let ceiling = (1.0 + a) / b;
                worst = worst.max(r.final_gains.k() / ceiling);
                if r.final_gains.k() < ceiling {
                    good += 1;
                }
            }
            Err(e) => eprintln!("  plant a={a:.4} b={b:.4e} f={f:.4}: {e}"),
        }
    }
    outcome(
        good == 20,
        format!("{good}/20 plants bounded; max K / ((1+a)/b) = {worst:.3}"),
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("unireg-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_unireg"))
            .args(["tune", "--method", "shc-ase", "--seed", "42", "--out"])
            .arg(&path)
            .status()
            .expect("spawn unireg");
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        a == b && !a.is_empty(),
        format!("two runs, {} bytes each, identical: {}", a.len(), a == b),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("analytic recursion oracle", recursion_oracle),
        ("zero steady-state error", zero_steady_state),
        ("ASE convergence from zero gains", ase_convergence),
        ("large-init recovery", large_init_recovery),
        ("GSS speed vs overshoot", gss_speed_vs_overshoot),
        ("plain SHC inferiority", shc_inferiority),
        ("golden-section correctness", golden_section_correctness),
        ("ASE branch totality", ase_totality),
        ("boundedness on random plants", boundedness),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2}: {} - {name}: {} ({:.1}s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "{}/{} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
