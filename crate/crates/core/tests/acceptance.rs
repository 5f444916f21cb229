//! Acceptance run: prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Criteria can be selected by number:
//! `cargo test --test acceptance -- 2 3`.

mod common;

use std::f64::consts::{LN_2, TAU};
use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use fdwpcn::algorithms::{
    ao_fully_dynamic_perfect, closed_form_z, partial_beamforming_optimize, penalty_fully_dynamic, sca_dl_bound,
    sca_ul_bound, static_beamforming_optimize, z_surrogate, DcTerm, LiftedChannel, LiftedObjective,
    OptimizationResult, PhaseContext, PowerProblem, SchedulingOrder, TimeProblem,
};
use fdwpcn::baselines::{fixed_time, hd_harvest_then_transmit, no_irs, random_phase};
use fdwpcn::convex_core::{
    gradient_error, hermitian_eig, project_box, project_psd, project_psd_unit_diag, project_simplex,
    project_unit_disk, SolverParams,
};
use fdwpcn::harness::{run_experiment, ExperimentKeys, ExperimentSpec, ResultsTable, SweepAxis};
use fdwpcn::linalg::{pack, phasor, CMatrix, C64};
use fdwpcn::model::{PlanKind, SicModel};
use fdwpcn::scenario::{composite, realize, CompositeChannels, SystemConfig};
use fdwpcn::schemes::SchemeRegistry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORDER: SchedulingOrder = SchedulingOrder::IncreasingSnr;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Self { pass: true, detail: summary }
        } else {
            Self { pass: false, detail: format!("{summary}; {}", failures.join("; ")) }
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| rand_c(rng)).collect()
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, |_, _| rand_c(rng) * scale).hermitian_part()
}

fn random_unit_diag(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    project_psd_unit_diag(&random_hermitian(rng, n, 4.0), &SolverParams::default())
}

fn unit_channels(rng: &mut ChaCha8Rng, k: usize, m: usize) -> CompositeChannels {
    CompositeChannels {
        q: (0..k).map(|_| rand_vec(rng, m)).collect(),
        q_bar: (0..k).map(|_| rand_vec(rng, m)).collect(),
        h_d: rand_vec(rng, k),
        h_d_bar: rand_vec(rng, k),
    }
}

/// Small instances against exhaustive grids.
fn oracle_equivalence() -> Outcome {
    let cfg = config(2, true);
    let c = snr_constants(&cfg, 0.0);
    let mut failures = Vec::new();
    let mut worst = [f64::INFINITY; 3];
    let mut slowest = Duration::ZERO;
    for seed in 0..3 {
        let ch = toy_channels(seed, 2, 2, TOY_SCALE);
        let cases: [(usize, f64, fn(&CompositeChannels, &SystemConfig) -> f64, fn(&CompositeChannels, &[f64]) -> f64); 3] = [
            (0, 0.99, |ch, cfg| ao_fully_dynamic_perfect(ch, cfg, ORDER).unwrap().objective, |ch, c| {
                brute_force_fully(ch, c, 16, 100)
            }),
            (1, 0.98, |ch, cfg| static_beamforming_optimize(ch, cfg, ORDER).unwrap().objective, |ch, c| {
                brute_force_static(ch, c, 16, 100)
            }),
            (2, 0.98, |ch, cfg| partial_beamforming_optimize(ch, cfg, ORDER).unwrap().objective, |ch, c| {
                brute_force_partial(ch, c, 16, 100)
            }),
        ];
        for (idx, floor, solve, grid) in cases {
            let start = Instant::now();
            let oracle = grid(&ch, &c);
            let got = solve(&ch, &cfg);
            let elapsed = start.elapsed();
            slowest = slowest.max(elapsed);
            worst[idx] = worst[idx].min(got / oracle);
            if got < floor * oracle {
                failures.push(format!("{} seed {seed}: {got:.6} < {floor} x {oracle:.6}", ["fully", "static", "partial"][idx]));
            }
            if elapsed > Duration::from_secs(300) {
                failures.push(format!("seed {seed}: instance took {elapsed:?}"));
            }
        }
    }
    Outcome::new(
        failures,
        format!(
            "worst ratio to grid: fully {:.4}, static {:.4}, partial {:.4}; slowest instance {:.1} s",
            worst[0],
            worst[1],
            worst[2],
            slowest.as_secs_f64()
        ),
    )
}

/// Tangent lower bounds: equality at the reference, below elsewhere.
fn bound_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut worst_tangent = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut record = |name: &str, tangent_gap: f64, excess: f64, failures: &mut Vec<String>| {
        worst_tangent = worst_tangent.max(tangent_gap);
        worst_excess = worst_excess.max(excess);
        if tangent_gap > 1e-9 || excess > 1e-9 {
            failures.push(format!("{name}: tangency {tangent_gap:e}, excess {excess:e}"));
        }
    };

    let m = 6;
    for _ in 0..100 {
        let ch = unit_channels(&mut rng, 2, m);
        let v_ref: Vec<C64> = (0..m).map(|_| phasor(rng.random::<f64>() * TAU)).collect();
        let v = project_unit_disk(&rand_vec(&mut rng, m).iter().map(|z| z * 3.0).collect::<Vec<_>>());
        let k = rng.random_range(0..2);
        record(
            "downlink gain",
            (sca_dl_bound(&ch, k, &v_ref, &v_ref) - dl(&ch, k, &v_ref)).abs(),
            sca_dl_bound(&ch, k, &v, &v_ref) - dl(&ch, k, &v),
            &mut failures,
        );
        record(
            "uplink gain",
            (sca_ul_bound(&ch, k, &v_ref, &v_ref) - ul(&ch, k, &v_ref)).abs(),
            sca_ul_bound(&ch, k, &v, &v_ref) - ul(&ch, k, &v),
            &mut failures,
        );
    }

    for _ in 0..100 {
        let a = rng.random_range(0.05..5.0);
        let z_ref = rng.random_range(0.1..10.0);
        let z = rng.random_range(0.1..10.0);
        // With the target equal to the argument the quadratic term vanishes
        // and what remains is the tangent of log2(1 + a/z) at z_ref.
        let tangent = |x: f64| z_surrogate(x, z_ref, a, 1.0, x, 1.0);
        let exact = |x: f64| (1.0 + a / x).ln() / LN_2;
        record("noise variable", (tangent(z_ref) - exact(z_ref)).abs(), tangent(z) - exact(z), &mut failures);
    }

    for _ in 0..100 {
        let ch = unit_channels(&mut rng, 1, 4);
        let l = LiftedChannel::new(&ch, 0);
        let v_ref = random_unit_diag(&mut rng, 5);
        let v = if rng.random::<bool>() {
            random_unit_diag(&mut rng, 5)
        } else {
            let mut u = vec![C64::new(1.0, 0.0)];
            u.extend((0..4).map(|_| phasor(rng.random::<f64>() * TAU)));
            CMatrix::outer(&u)
        };
        let scale = l.cross(&v_ref).max(1.0);
        record(
            "lifted product",
            (l.cross_bound(&v_ref, &v_ref) - l.cross(&v_ref)).abs() / scale,
            (l.cross_bound(&v, &v_ref) - l.cross(&v)) / l.cross(&v).max(1.0),
            &mut failures,
        );
    }
    Outcome::new(
        failures,
        format!("400 points, worst tangency gap {worst_tangent:.1e}, worst bound excess {worst_excess:.1e}"),
    )
}

/// Closed-form noise variable against a grid argmax of its surrogate.
fn closed_form_noise_variable() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for draw in 0..50 {
        let z_ref = rng.random_range(0.2..5.0);
        let a = rng.random_range(0.1..5.0);
        let tau = rng.random_range(0.05..1.0);
        let rho = rng.random_range(0.01..2.0);
        let target = rng.random_range(1.0..8.0);
        let sic = SicModel::perfect(target, 1e-6);
        let z = closed_form_z(z_ref, a, tau, 0.0, rho, &sic, 1.0).unwrap();
        let (mut best_z, mut best) = (0.0, f64::NEG_INFINITY);
        for i in 1..=100_000 {
            let zi = i as f64 * 1e-4;
            let f = z_surrogate(zi, z_ref, a, tau, target, rho);
            if f > best {
                best = f;
                best_z = zi;
            }
        }
        let err = (z.clamp(1e-4, 10.0) - best_z).abs();
        worst = worst.max(err);
        if err > 1e-4 {
            failures.push(format!("draw {draw}: closed form {z} vs grid {best_z}"));
        }
    }
    Outcome::new(failures, format!("50 draws, worst distance to grid argmax {worst:.1e}"))
}

/// Penalty method on the default scenario with 20 elements at 30 dBm.
fn penalty_convergence() -> Outcome {
    let cfg = SystemConfig::default()
        .modified(|f| {
            f.irs_mz = 4;
            f.pmax_dbm = 30.0;
        })
        .unwrap();
    let mut failures = Vec::new();
    let mut sweeps = Vec::new();
    let mut worst_xi = 0.0f64;
    for seed in 1..=5 {
        let ch = composite(&realize(&cfg, seed).unwrap().1);
        let r = penalty_fully_dynamic(&ch, &cfg, ORDER).unwrap();
        let xi = r.xi_final.unwrap_or(f64::INFINITY);
        worst_xi = worst_xi.max(xi);
        sweeps.push(r.iterations);
        if xi > 1e-5 || r.iterations > 150 {
            failures.push(format!("seed {seed}: xi {xi:.2e} after {} sweeps", r.iterations));
        }
    }
    Outcome::new(failures, format!("M = 20, sweeps {sweeps:?}, worst final xi {worst_xi:.2e}"))
}

/// Every optimizer's recorded objective is nondecreasing within a segment.
fn monotone_traces() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut runs = 0;
    for perfect in [true, false] {
        let cfg = SystemConfig::default()
            .modified(|f| {
                f.devices = 4;
                f.irs_mx = 4;
                f.irs_mz = 2;
                f.perfect_sic = perfect;
            })
            .unwrap();
        for seed in 0..10 {
            let ch = composite(&realize(&cfg, 100 + seed).unwrap().1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fully = if perfect {
                ao_fully_dynamic_perfect(&ch, &cfg, ORDER)
            } else {
                penalty_fully_dynamic(&ch, &cfg, ORDER)
            };
            let results: Vec<OptimizationResult> = [
                fully,
                partial_beamforming_optimize(&ch, &cfg, ORDER),
                static_beamforming_optimize(&ch, &cfg, ORDER),
                fixed_time(&ch, &cfg, ORDER, PlanKind::Fully),
                hd_harvest_then_transmit(&ch, &cfg, ORDER, PlanKind::Fully),
                hd_harvest_then_transmit(&ch, &cfg, ORDER, PlanKind::Partial),
                hd_harvest_then_transmit(&ch, &cfg, ORDER, PlanKind::Static),
                random_phase(&ch, &cfg, ORDER, &mut rng),
                no_irs(&ch, &cfg, ORDER),
            ]
            .into_iter()
            .map(Result::unwrap)
            .collect();
            for r in results {
                runs += 1;
                let drop = r.worst_trace_drop();
                worst = worst.max(drop);
                if drop > 1e-6 {
                    failures.push(format!("{} seed {seed} perfect={perfect}: drop {drop:.2e}", r.scheme));
                }
            }
        }
    }
    Outcome::new(failures, format!("{runs} runs, worst relative drop {worst:.1e}"))
}

fn sweep(base: &SystemConfig, axis: SweepAxis, values: &[f64], schemes: &[&str], seeds: usize) -> ResultsTable {
    let spec = ExperimentSpec {
        base: base.clone(),
        experiment: ExperimentKeys {
            sweep_axis: axis,
            sweep_values: values.to_vec(),
            schemes: schemes.iter().map(|s| s.to_string()).collect(),
            n_seeds: seeds,
            seed0: 2024,
            output: None,
            record_timing: false,
            common_seeds: true,
        },
    };
    let table = run_experiment(&spec, &SchemeRegistry::with_builtin()).unwrap();
    assert!(!table.has_errors(), "sweep cells failed");
    table
}

fn means(table: &ResultsTable, scheme: &str, values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| table.mean(scheme, *v).unwrap()).collect()
}

fn fmt_means(m: &[f64]) -> String {
    m.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/")
}

/// Qualitative orderings of the mean curves at K = 10, M = 40.
fn curve_ordering() -> Outcome {
    const SEEDS: usize = 20;
    let base = SystemConfig::default();
    assert_eq!((base.devices(), base.elements()), (10, 40));
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let pmax = [10.0, 20.0, 30.0];

    let fd65 = sweep(&base, SweepAxis::PmaxDbm, &pmax, &["fully", "partial", "static", "no-irs", "random-phase", "hd-fully"], SEEDS);
    let perfect_base = base.modified(|f| f.perfect_sic = true).unwrap();
    let fdp = sweep(&perfect_base, SweepAxis::PmaxDbm, &pmax, &["fully", "hd-fully"], SEEDS);

    for (label, table) in [("gamma -65 dB", &fd65), ("perfect", &fdp)] {
        for scheme in table.aggregates.iter().map(|a| a.scheme.clone()).collect::<std::collections::BTreeSet<_>>() {
            let m = means(table, &scheme, &pmax);
            if !m.windows(2).all(|w| w[1] > w[0]) {
                failures.push(format!("(a) {scheme} [{label}] not increasing: {}", fmt_means(&m)));
            }
        }
    }

    let fully_p = means(&fdp, "fully", &pmax);
    let hd = means(&fdp, "hd-fully", &pmax);
    notes.push(format!("perfect fully {} vs hd {}", fmt_means(&fully_p), fmt_means(&hd)));
    if fully_p.iter().zip(&hd).any(|(f, h)| f <= h) {
        failures.push("(b) perfect-cancellation FD not above HD".into());
    }

    let fully65 = means(&fd65, "fully", &pmax);
    let hd65 = means(&fd65, "hd-fully", &pmax);
    notes.push(format!("-65 dB fully {} vs hd {}", fmt_means(&fully65), fmt_means(&hd65)));
    if fully65.iter().zip(&hd65).any(|(f, h)| f <= h) {
        failures.push("(c) FD at -65 dB not above HD".into());
    }

    let wide = [10.0, 20.0, 25.0, 30.0, 35.0, 40.0];
    let g55 = sweep(&base.modified(|f| f.si_gamma_db = -55.0).unwrap(), SweepAxis::PmaxDbm, &wide, &["fully", "hd-fully"], SEEDS);
    let diff: Vec<f64> =
        means(&g55, "fully", &wide).iter().zip(means(&g55, "hd-fully", &wide)).map(|(f, h)| f - h).collect();
    let crossing = diff.windows(2).zip(wide.windows(2)).find(|(d, _)| d[0] > 0.0 && d[1] <= 0.0).map(|(d, p)| {
        p[0] + (p[1] - p[0]) * d[0] / (d[0] - d[1])
    });
    match crossing {
        Some(x) if (20.0..=35.0).contains(&x) && *diff.last().unwrap() < 0.0 => {
            notes.push(format!("-55 dB crossover at {x:.1} dBm"))
        }
        other => failures.push(format!("(d) -55 dB crossover {other:?}, FD - HD = {}", fmt_means(&diff))),
    }

    let rp = means(&fd65, "random-phase", &pmax);
    let ni = means(&fd65, "no-irs", &pmax);
    let ratios: Vec<f64> = rp.iter().zip(&ni).map(|(a, b)| a / b).collect();
    notes.push(format!("random/no-irs {}", fmt_means(&ratios)));
    if ratios.iter().any(|r| (r - 1.0).abs() > 0.10) {
        failures.push(format!("(e) random-phase vs no-IRS ratios {}", fmt_means(&ratios)));
    }

    let partial = means(&fd65, "partial", &pmax);
    let stat = means(&fd65, "static", &pmax);
    notes.push(format!("fully/partial/static at 30 dBm {:.3}/{:.3}/{:.3}", fully65[2], partial[2], stat[2]));
    for i in 0..pmax.len() {
        if fully65[i] < partial[i] * (1.0 - 1e-6) || partial[i] < stat[i] * (1.0 - 1e-6) {
            failures.push(format!("(f) at {} dBm: {:.6}/{:.6}/{:.6}", pmax[i], fully65[i], partial[i], stat[i]));
        }
    }

    let ms = [10.0, 20.0, 40.0];
    let by_m = means(&sweep(&base, SweepAxis::M, &ms, &["fully"], SEEDS), "fully", &ms);
    let ks = [2.0, 6.0, 10.0];
    let by_k = means(&sweep(&base, SweepAxis::K, &ks, &["fully"], SEEDS), "fully", &ks);
    notes.push(format!("fully by M {} by K {}", fmt_means(&by_m), fmt_means(&by_k)));
    if !by_m.windows(2).all(|w| w[1] >= w[0]) || !by_k.windows(2).all(|w| w[1] >= w[0]) {
        failures.push("(g) mean not nondecreasing in M or K".into());
    }
    Outcome::new(failures, notes.join("; "))
}

/// Gradient oracles, projections, eigendecomposition and the lifted
/// trace identity.
fn numerical_hygiene() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let mut worst_grad = 0.0f64;
    let mut grad = |name: &str, err: f64, failures: &mut Vec<String>| {
        worst_grad = worst_grad.max(err);
        if err > 1e-4 {
            failures.push(format!("{name} gradient error {err:.2e}"));
        }
    };

    let time = TimeProblem {
        weights: (0..3).map(|_| (0..4).map(|_| rng.random_range(0.1..20.0)).collect()).collect(),
        frame: 1.0,
    };
    for _ in 0..20 {
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let x: Vec<f64> = raw.iter().map(|r| r / s).collect();
        grad("time", gradient_error(&time, &x), &mut failures);
    }

    let power = PowerProblem {
        tau_own: vec![0.3, 0.25, 0.2],
        coef: (0..3).map(|_| (0..4).map(|_| rng.random_range(0.0..30.0)).collect()).collect(),
        z: vec![9.0, 11.0, 10.5],
        rho: 0.4,
        gap: 9.5,
        slope: 3.0,
    };
    for _ in 0..20 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        grad("power", gradient_error(&power, &x), &mut failures);
    }

    let ch = unit_channels(&mut rng, 3, 4);
    let slots: Vec<Vec<C64>> = (0..4).map(|_| (0..4).map(|_| phasor(rng.random::<f64>() * TAU)).collect()).collect();
    let tau = vec![0.3, 0.25, 0.25, 0.2];
    let power_w = vec![1.0, 0.8, 0.6, 0.9];
    let ulg: Vec<f64> = (0..3).map(|k| ul(&ch, k, &slots[k + 1])).collect();
    let pair: Vec<Vec<f64>> = (0..3).map(|k| (0..4).map(|i| dl(&ch, k, &slots[i]) * ulg[k]).collect()).collect();
    let energy: Vec<f64> = (0..3)
        .map(|k| (0..4).filter(|&i| i != k + 1).map(|i| power_w[i] * tau[i] * dl(&ch, k, &slots[i])).sum())
        .collect();
    let ctx = PhaseContext { tau, power: power_w, scale: vec![2.0, 1.5, 3.0], pair, ul: ulg, energy };
    for slot in 0..4 {
        let obj = ctx.slot_objective(&ch, slot, &slots[slot]);
        for _ in 0..5 {
            let v = project_unit_disk(&rand_vec(&mut rng, 4).iter().map(|z| z * 2.0).collect::<Vec<_>>());
            grad("phase surrogate", gradient_error(&obj, &pack(&v)), &mut failures);
        }
    }

    let chans: Vec<LiftedChannel> = (0..3).map(|k| LiftedChannel::new(&ch, k)).collect();
    let terms: Vec<DcTerm> = (0..3)
        .map(|k| DcTerm { device: k, weight: 0.3, scale: 1.5, lin: rng.random_range(0.0..2.0), cross: 1.0 })
        .collect();
    let v_ref = random_unit_diag(&mut rng, 5);
    let lifted = LiftedObjective::new(&chans, &terms, &v_ref, 0.5, &SolverParams::default());
    for _ in 0..20 {
        let v = random_unit_diag(&mut rng, 5);
        grad("lifted surrogate", gradient_error(&lifted, &pack(v.as_slice())), &mut failures);
    }

    let mut worst_proj = 0.0f64;
    let mut proj = |name: &str, idem: f64, expansion: f64, tol: f64, failures: &mut Vec<String>| {
        worst_proj = worst_proj.max(idem).max(expansion);
        if idem > tol || expansion > tol {
            failures.push(format!("{name}: idempotence {idem:.1e}, expansion {expansion:.1e}"));
        }
    };
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    for _ in 0..100 {
        let a: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (pa, pb) = (project_simplex(&a, 1.0), project_simplex(&b, 1.0));
        proj("simplex", dist(&project_simplex(&pa, 1.0), &pa), dist(&pa, &pb) - dist(&a, &b), 1e-12, &mut failures);
        let (pa, pb) = (project_box(&a, 0.0, 1.0), project_box(&b, 0.0, 1.0));
        proj("box", dist(&project_box(&pa, 0.0, 1.0), &pa), dist(&pa, &pb) - dist(&a, &b), 1e-12, &mut failures);

        let (ca, cb) = (rand_vec(&mut rng, 4), rand_vec(&mut rng, 4));
        let (ca, cb): (Vec<C64>, Vec<C64>) = (ca.iter().map(|z| z * 4.0).collect(), cb.iter().map(|z| z * 4.0).collect());
        let (pa, pb) = (project_unit_disk(&ca), project_unit_disk(&cb));
        proj(
            "unit disk",
            dist(&pack(&project_unit_disk(&pa)), &pack(&pa)),
            dist(&pack(&pa), &pack(&pb)) - dist(&pack(&ca), &pack(&cb)),
            1e-12,
            &mut failures,
        );

        let (ha, hb) = (random_hermitian(&mut rng, 4, 2.0), random_hermitian(&mut rng, 4, 2.0));
        let (pa, pb) = (project_psd(&ha), project_psd(&hb));
        proj(
            "psd cone",
            project_psd(&pa).sub(&pa).frobenius_norm(),
            pa.sub(&pb).frobenius_norm() - ha.sub(&hb).frobenius_norm(),
            1e-12 * ha.frobenius_norm().max(1.0),
            &mut failures,
        );
        let p = SolverParams::default();
        let (pa, pb) = (project_psd_unit_diag(&ha, &p), project_psd_unit_diag(&hb, &p));
        proj(
            "psd unit diagonal",
            project_psd_unit_diag(&pa, &p).sub(&pa).frobenius_norm(),
            pa.sub(&pb).frobenius_norm() - ha.sub(&hb).frobenius_norm(),
            1e-8 * ha.frobenius_norm().max(1.0),
            &mut failures,
        );
    }

    let mut worst_eig = 0.0f64;
    for n in 1..=12 {
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, n, 10.0);
            let err = hermitian_eig(&h).reconstruct().sub(&h).frobenius_norm() / h.frobenius_norm();
            worst_eig = worst_eig.max(err);
        }
    }
    if worst_eig > 1e-8 {
        failures.push(format!("eigendecomposition error {worst_eig:.1e}"));
    }

    let mut worst_trace = 0.0f64;
    for _ in 0..100 {
        let ch = unit_channels(&mut rng, 1, 5);
        let l = LiftedChannel::new(&ch, 0);
        let mut u = vec![C64::new(1.0, 0.0)];
        u.extend((0..5).map(|_| phasor(rng.random::<f64>() * TAU)));
        let big = CMatrix::outer(&u);
        let explicit = big.matmul(&CMatrix::outer(&l.h_bar)).matmul(&big).matmul(&CMatrix::outer(&l.h)).trace().re;
        let v = &u[1..];
        let direct = dl(&ch, 0, v) * ul(&ch, 0, v);
        worst_trace = worst_trace.max(rel(explicit, direct));
    }
    if worst_trace > 1e-9 {
        failures.push(format!("trace identity error {worst_trace:.1e}"));
    }
    Outcome::new(
        failures,
        format!(
            "gradient {worst_grad:.1e}, projections {worst_proj:.1e}, eig {worst_eig:.1e}, trace identity {worst_trace:.1e}"
        ),
    )
}

/// Identical spec, byte-identical CSV.
fn determinism() -> Outcome {
    let text = r#"
devices = 4
irs_mx = 2
irs_mz = 2

[experiment]
sweep_axis = "gamma_db"
sweep_values = [-65, -55]
schemes = ["fully", "partial", "static", "no-irs", "random-phase", "fixed-time", "hd-fully", "hd-partial", "hd-static"]
n_seeds = 2
seed0 = 5
"#;
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.toml");
    std::fs::write(&spec_path, text).unwrap();
    let reg = SchemeRegistry::with_builtin();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let spec = ExperimentSpec::load(&spec_path).unwrap();
        let table = run_experiment(&spec, &reg).unwrap();
        let path = dir.path().join(format!("run{run}.csv"));
        table.write_outputs(&spec, &path).unwrap();
        outputs.push(std::fs::read(&path).unwrap());
    }
    let same = outputs[0] == outputs[1];
    let failures = if same { Vec::new() } else { vec!["CSV bytes differ between runs".into()] };
    Outcome::new(failures, format!("{} bytes, identical: {same}", outputs[0].len()))
}

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("tangent bound suite", bound_suite),
        ("closed-form noise variable", closed_form_noise_variable),
        ("penalty convergence", penalty_convergence),
        ("monotone traces", monotone_traces),
        ("qualitative curve ordering", curve_ordering),
        ("numerical hygiene", numerical_hygiene),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {number} {status} {name} ({:.1} s): {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        std::io::stdout().flush().ok();
        if !outcome.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
