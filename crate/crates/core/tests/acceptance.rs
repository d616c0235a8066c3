//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any fails.

use std::f64::consts::LN_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use wiretap_fbl::approx::approx_cdf;
use wiretap_fbl::feasible::{feasible_blocklengths, quartic_coefficients_for};
use wiretap_fbl::highsnr::{self, HighSnrParams};
use wiretap_fbl::model::{capacity, dispersion};
use wiretap_fbl::moments::{fit_at_blocklength, MomentSet, MuCoefficients, DEFAULT_TOL};
use wiretap_fbl::montecarlo::{sample_gains, RateSamples, SimulationSpec};
use wiretap_fbl::optimizer::optimize_with_moments;
use wiretap_fbl::{Probability, SystemConfig};

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

fn prob(p: f64) -> Probability {
    Probability::new(p).unwrap()
}

fn streams() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn fig2_cfg(db: f64) -> SystemConfig {
    SystemConfig {
        antennas: 4,
        ..SystemConfig::default()
    }
    .with_mean_snr_db(db)
}

fn mu_of(cfg: &SystemConfig) -> MuCoefficients {
    MomentSet::compute(cfg, DEFAULT_TOL)
        .unwrap()
        .mu(cfg.eps_bar, cfg.delta_bar)
        .unwrap()
}

fn rate_samples(cfg: SystemConfig, samples: usize, seed: u64) -> RateSamples {
    let spec = SimulationSpec {
        streams: streams(),
        ..SimulationSpec::new(cfg, samples, seed)
    };
    RateSamples::draw(&spec).unwrap()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, db) in [0.0, 5.0, 10.0, 15.0].into_iter().enumerate() {
        let cfg = fig2_cfg(db);
        let fit = fit_at_blocklength(&mu_of(&cfg), 200.0).unwrap();
        let emp = rate_samples(cfg, 100_000, 100 + i as u64).rate_cdf(200.0);
        let d = emp.ks_distance(|r| approx_cdf(r, &fit).value());
        parts.push(format!("{db} dB: {d:.4}"));
        worst = worst.max(d);
    }
    outcome(worst <= 0.05, format!("KS {} (limit 0.05)", parts.join(", ")))
}

fn criterion_2() -> Outcome {
    let mut worst_n: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut missing = Vec::new();
    for db in 5..=20 {
        let cfg = SystemConfig::default().with_mean_snr_db(db as f64);
        let appro = optimize_with_moments(&cfg, &mu_of(&cfg)).unwrap();
        let simu = rate_samples(cfg, 100_000, 200 + db as u64).brute_force_optimum(&cfg);
        match (appro.n_opt, simu.n_opt) {
            (Some(na), Some(ns)) => {
                worst_n = worst_n.max((ns as f64 - na as f64).abs() / ns as f64);
                worst_t = worst_t.max((simu.throughput_opt - appro.throughput_opt).abs() / simu.throughput_opt);
            }
            _ => missing.push(db),
        }
    }
    outcome(
        worst_n <= 0.05 && worst_t <= 0.05 && missing.is_empty(),
        format!(
            "max rel. deviation N# {:.2}%, T# {:.2}% (limit 5%){}",
            100.0 * worst_n,
            100.0 * worst_t,
            if missing.is_empty() { String::new() } else { format!(", no optimum at {missing:?} dB") }
        ),
    )
}

fn criterion_3() -> Outcome {
    let cfg = fig2_cfg(20.0);
    let hp = HighSnrParams::from_config(&cfg).unwrap();
    let emp = rate_samples(cfg, 100_000, 300).rate_cdf(200.0);
    let closed = |r: f64| highsnr::highsnr_cdf(r, 200.0, &hp).value();
    let ks = emp.ks_distance(closed);
    let (lo, hi) = (emp.quantile(0.001), emp.quantile(0.999));
    let n = emp.len() as f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..400 {
        let r = lo + (hi - lo) * i as f64 / 399.0;
        let f = emp.query(r).value();
        let p = closed(r);
        let se = (p * (1.0 - p) / n).sqrt().max(1.0 / n);
        worst_excess = worst_excess.max((p - f) / se);
    }
    outcome(
        ks <= 0.03 && worst_excess <= 2.0,
        format!("KS {ks:.4} (limit 0.03), max excess {worst_excess:.2} SE (limit 2)"),
    )
}

fn grid_params() -> Vec<(u32, u32, f64)> {
    let bs = [100, 275, 450, 625, 800];
    let ks = [2, 4, 8, 12, 16];
    let eps = [1e-1, 10f64.powf(-7.0 / 3.0), 10f64.powf(-11.0 / 3.0), 1e-5];
    let mut out = Vec::new();
    for &b in &bs {
        for &k in &ks {
            for &e in &eps {
                out.push((b, k, e));
            }
        }
    }
    out
}

fn grid_hp(b: u32, k: u32, e: f64, d: f64) -> HighSnrParams {
    let cfg = SystemConfig {
        antennas: k,
        payload_bits: b,
        eps_bar: prob(e),
        delta_bar: prob(d),
        zeta: None,
        ..SystemConfig::default()
    };
    HighSnrParams::from_config(&cfg).unwrap()
}

fn sign_changes(hp: &HighSnrParams) -> usize {
    // Log-spaced scan of [1, 1e9].
    let pts = 4000;
    let mut changes = 0;
    let mut prev = highsnr::xi(1.0, hp).signum();
    for i in 1..=pts {
        let n = 10f64.powf(9.0 * i as f64 / pts as f64);
        let s = highsnr::xi(n, hp).signum();
        if s != 0.0 && s != prev {
            changes += 1;
            prev = s;
        }
    }
    changes
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    for (b, k, e) in grid_params() {
        let hp = grid_hp(b, k, e, e);
        let changes = sign_changes(&hp);
        let opt = highsnr::unconstrained_optimum(&hp).unwrap();
        let t_opt = highsnr::highsnr_throughput(opt.n_int as f64, &hp);
        let beaten = (1..=10 * opt.n_int).any(|n| highsnr::highsnr_throughput(n as f64, &hp) > t_opt);
        if changes != 1 || beaten {
            bad.push(format!("B={b} K={k} eps={e:.0e}: changes={changes} beaten={beaten}"));
        }
    }
    outcome(bad.is_empty(), format!("{} grid points, {} failing {:?}", grid_params().len(), bad.len(), bad))
}

fn criterion_5() -> Outcome {
    let bs = [100, 275, 450, 625, 800];
    let ks = [2, 4, 8, 12, 16];
    let eps = [1e-5, 10f64.powf(-11.0 / 3.0), 10f64.powf(-7.0 / 3.0), 1e-1];
    let opt = |b: u32, k: u32, e: f64, d: f64| {
        let hp = grid_hp(b, k, e, d);
        let n = highsnr::unconstrained_optimum(&hp).unwrap().n_star;
        (n, highsnr::highsnr_throughput(n, &hp))
    };
    let mut violations = Vec::new();
    for &k in &ks {
        for &e in &eps {
            for w in bs.windows(2) {
                let (n0, t0) = opt(w[0], k, e, e);
                let (n1, t1) = opt(w[1], k, e, e);
                if n1 < n0 || t1 < t0 {
                    violations.push(format!("B {}->{} at K={k} eps={e:.0e}", w[0], w[1]));
                }
            }
        }
    }
    for &b in &bs {
        for &e in &eps {
            for w in ks.windows(2) {
                let (n0, t0) = opt(b, w[0], e, e);
                let (n1, t1) = opt(b, w[1], e, e);
                if n1 > n0 || t1 < t0 {
                    violations.push(format!("K {}->{} at B={b} eps={e:.0e}", w[0], w[1]));
                }
            }
        }
    }
    for &b in &bs {
        for &k in &ks {
            for &fixed in &eps {
                for w in eps.windows(2) {
                    let base = opt(b, k, w[0], fixed).1;
                    let eps_up = opt(b, k, w[1], fixed).1;
                    let delta_up = opt(b, k, fixed, w[1]).1;
                    let (jb, ju) = (opt(b, k, w[0], w[0]).1, opt(b, k, w[1], w[1]).1);
                    if eps_up < base || delta_up < opt(b, k, fixed, w[0]).1 || ju < jb {
                        violations.push(format!("eps/delta {:.0e}->{:.0e} at B={b} K={k}", w[0], w[1]));
                    }
                }
            }
        }
    }
    outcome(violations.is_empty(), format!("{} violations {:?}", violations.len(), violations))
}

/// Independent transcription of the high-SNR outage and throughput.
fn naive_highsnr(n: u32, b: u32, k: u32, t: f64) -> (f64, f64) {
    let n = n as f64;
    let h = b as f64 / n + t / n.sqrt();
    let p = 2f64.powf(h);
    let outage = (p / (p + 1.0)).powi(k as i32);
    (outage, b as f64 / n * (1.0 - outage))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
    let mut mismatches = Vec::new();
    let mut absent = 0;
    for _ in 0..200 {
        let b = rng.random_range(50..=800u32);
        let k = rng.random_range(1..=16u32);
        // ζ = (2^-K)^u: u < 1 clears the infinite-blocklength floor, u > 1 does not.
        let zeta = 0.5f64.powf(k as f64 * rng.random_range(0.05..1.1));
        let e = log_uniform(&mut rng, 1e-5, 0.5);
        let d = log_uniform(&mut rng, 1e-5, 0.5);
        let n_g = rng.random_range(20..=2000u32);
        let cfg = SystemConfig {
            antennas: k,
            payload_bits: b,
            eps_bar: prob(e),
            delta_bar: prob(d),
            zeta: None,
            max_blocklength: n_g,
            ..SystemConfig::default()
        };
        let hp = HighSnrParams {
            zeta: Some(prob(zeta)),
            ..HighSnrParams::from_config(&cfg).unwrap()
        };
        let got = highsnr::constrained_optimum(&hp).unwrap().n_opt;
        let mut want: Option<(u32, f64)> = None;
        for n in 1..=n_g {
            let (p, t) = naive_highsnr(n, b, k, hp.t);
            if p <= zeta && want.is_none_or(|(_, best)| t > best) {
                want = Some((n, t));
            }
        }
        if want.is_none() {
            absent += 1;
        }
        if got != want.map(|w| w.0) {
            mismatches.push(format!("B={b} K={k} zeta={zeta:.3e} N_G={n_g}: {got:?} vs {:?}", want.map(|w| w.0)));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("200 draws ({absent} infeasible), {} mismatches {:?}", mismatches.len(), mismatches),
    )
}

/// `{N ∈ [1, N_G] : Φ((B/N − m)/σ) ≤ ζ}` evaluated pointwise.
fn brute_feasible(mu: &MuCoefficients, b: u32, zeta: f64, n_g: u32) -> Vec<u32> {
    let std = Normal::new(0.0, 1.0).unwrap();
    (1..=n_g)
        .filter(|&n| {
            let n = n as f64;
            let m = mu.mu0 - mu.mu1 / n.sqrt();
            let v = mu.mu4 / n + mu.mu3 / n.sqrt() + mu.mu2;
            let r = b as f64 / n;
            let p = if v > 0.0 {
                std.cdf((r - m) / v.sqrt())
            } else if r >= m {
                1.0
            } else {
                0.0
            };
            p <= zeta
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = Vec::new();
    let mut nonempty = 0;
    let mut check = |mu: MuCoefficients, cfg: SystemConfig, label: String, mismatches: &mut Vec<String>| {
        let got: Vec<u32> = feasible_blocklengths(&cfg, &mu).unwrap().integers().collect();
        let want = brute_feasible(&mu, cfg.payload_bits, cfg.zeta.unwrap().value(), cfg.max_blocklength);
        if !want.is_empty() {
            nonempty += 1;
        }
        if got != want {
            let diff: Vec<u32> = want
                .iter()
                .filter(|n| !got.contains(n))
                .chain(got.iter().filter(|n| !want.contains(n)))
                .copied()
                .take(5)
                .collect();
            mismatches.push(format!("{label}: differ at {diff:?}"));
        }
    };
    for i in 0..1000 {
        let mu2 = rng.random_range(0.0..3.0);
        let mu4 = rng.random_range(0.0..30.0);
        let rho: f64 = rng.random_range(-1.0..1.0);
        let mu = MuCoefficients {
            mu0: rng.random_range(-0.5..6.0),
            mu1: rng.random_range(0.0..15.0),
            mu2,
            mu3: 2.0 * rho * (mu2 * mu4).sqrt(),
            mu4,
        };
        let cfg = SystemConfig {
            payload_bits: rng.random_range(20..=800),
            zeta: Some(prob((rng.random_range(1e-3f64.ln()..0.5f64.ln())).exp())),
            max_blocklength: rng.random_range(50..=2000),
            ..SystemConfig::default()
        };
        check(mu, cfg, format!("draw {i}"), &mut mismatches);
    }
    for i in 0..50 {
        let cfg = SystemConfig {
            antennas: rng.random_range(1..=16),
            payload_bits: rng.random_range(50..=800),
            eps_bar: prob((rng.random_range(1e-5f64.ln()..0.3f64.ln())).exp()),
            delta_bar: prob((rng.random_range(1e-5f64.ln()..0.3f64.ln())).exp()),
            zeta: Some(prob(rng.random_range(0.01..0.5))),
            max_blocklength: rng.random_range(100..=2000),
            ..SystemConfig::default()
        }
        .with_mean_snr_db(rng.random_range(-5.0..25.0));
        check(mu_of(&cfg), cfg, format!("config {i}"), &mut mismatches);
    }

    // Perfect square at ζ = 0.5.
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mu = MuCoefficients {
            mu0: rng.random_range(0.01..6.0),
            mu1: rng.random_range(0.0..15.0),
            mu2: rng.random_range(0.0..3.0),
            mu3: rng.random_range(-1.0..1.0),
            mu4: rng.random_range(0.0..30.0),
        };
        let b = rng.random_range(20..=800) as f64;
        let q = quartic_coefficients_for(b, Probability::HALF, &mu).unwrap();
        let want = [
            b * b,
            2.0 * b * mu.mu1,
            mu.mu1 * mu.mu1 - 2.0 * b * mu.mu0,
            -2.0 * mu.mu0 * mu.mu1,
            mu.mu0 * mu.mu0,
        ];
        for (g, w) in q.as_array().iter().zip(want) {
            if w != 0.0 {
                worst = worst.max(((g - w) / w).abs());
            }
        }
    }
    outcome(
        mismatches.is_empty() && worst <= 1e-12,
        format!(
            "1050 sets ({nonempty} nonempty), {} mismatches {:?}; perfect-square max rel. error {worst:.1e}",
            mismatches.len(),
            mismatches.iter().take(5).collect::<Vec<_>>()
        ),
    )
}

/// `E₁(x)` by its convergent series, for `0 < x ≤ 2`.
fn exp_integral_e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    -EULER - x.ln() - sum
}

fn criterion_8() -> Outcome {
    let mut worst_z: f64 = 0.0;
    let mut worst_q0: f64 = 0.0;
    for (i, db) in [0.0, 5.0, 10.0, 15.0].into_iter().enumerate() {
        let cfg = fig2_cfg(db);
        let m = MomentSet::compute(&cfg, DEFAULT_TOL).unwrap();
        let spec = SimulationSpec {
            streams: streams(),
            ..SimulationSpec::new(cfg, 1_000_000, 800 + i as u64)
        };
        let gains = sample_gains(&spec, spec.samples).unwrap();
        let n = gains.len() as f64;
        let terms = |g: f64| {
            let (c, v) = (capacity(g), dispersion(g));
            [c, v.sqrt(), c * c, 2.0 * c * v.sqrt(), v]
        };
        for (side, analytic) in [(0, m.legitimate.0), (1, m.eavesdropper.0)] {
            let mut s = [0.0; 5];
            let mut s2 = [0.0; 5];
            for g in &gains {
                let x = if side == 0 { g.gamma_b } else { g.gamma_e };
                for (j, f) in terms(x).into_iter().enumerate() {
                    s[j] += f;
                    s2[j] += f * f;
                }
            }
            for j in 0..5 {
                let mean = s[j] / n;
                let se = ((s2[j] / n - mean * mean) / n).sqrt();
                worst_z = worst_z.max((analytic[j] - mean).abs() / se);
            }
        }
        let x = 1.0 / cfg.mean_snr;
        let closed = x.exp() * exp_integral_e1(x) / LN_2;
        worst_q0 = worst_q0.max(((m.eavesdropper[0] - closed) / closed).abs());
    }
    outcome(
        worst_z <= 4.0 && worst_q0 <= 1e-8,
        format!("max |z| {worst_z:.2} (limit 4), q0 rel. error {worst_q0:.1e} (limit 1e-8)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("approximate CDF fidelity (K=4, N=200, 0-15 dB)", criterion_1),
        ("general optimizer vs simulation (5-20 dB)", criterion_2),
        ("high-SNR CDF fidelity (20 dB)", criterion_3),
        ("stationary point uniqueness and integer optimality", criterion_4),
        ("monotone trends of N* and T(N*)", criterion_5),
        ("constrained high-SNR optimum vs brute force", criterion_6),
        ("feasible set vs pointwise outage", criterion_7),
        ("moment integrals vs sampling and closed form", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} [{:.1}s] {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
