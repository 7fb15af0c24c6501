//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::time::{Duration, Instant};

use hto_core::analysis::heat_matrix::{reconstruct, szilard_trace};
use hto_core::analysis::lep::ssa_slack;
use hto_core::analysis::{
    decide_extremal_hto, decide_via_certificate, et_family_study, resynthesize_extremal, widen_heat_matrix,
    HeatCertificate, RowStatus, Verdict,
};
use hto_core::channel::unit_matrix;
use hto_core::linalg::{self, c, max_abs, Mat};
use hto_core::operator::{
    j_function, minimizer_sigma, von_neumann_entropy, HermitianOperator, Units,
};
use hto_core::random;
use hto_core::realization::{deviation_identity_lhs, deviation_identity_rhs};
use hto_core::synthesis::{
    dense_oracle_check, swap_equality_case, swap_equality_hto, synthesize_complete_erasure, synthesize_landauer,
    SynthesisOptions,
};
use hto_core::{compute_hto, KrausChannel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.detail = format!("{} [{:.2} s]", o.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            o.pass = false;
            o.detail = format!("{} exceeds the {:.0} s budget", o.detail, limit.as_secs_f64());
        }
    }
    o
}

/// Random `Q` with `J(βQ) = j`.
fn q_with_j(rng: &mut ChaCha8Rng, d: usize, beta: f64, j: f64) -> HermitianOperator {
    let raw = HermitianOperator::energy(random::random_hermitian(rng, d, 1.0)).unwrap();
    let j0 = j_function(&raw.scaled(beta, Units::Dimensionless));
    raw.shifted((j - j0) / beta)
}

fn random_hamiltonian(rng: &mut ChaCha8Rng, d: usize) -> HermitianOperator {
    HermitianOperator::energy(random::random_hermitian(rng, d, 1.0)).unwrap()
}

/// Random Kraus set whose products `M_i†M_j` are independent.
fn random_extremal(rng: &mut ChaCha8Rng, d: usize, n: usize) -> KrausChannel {
    loop {
        let ch = KrausChannel::new(random::random_kraus(rng, d, d, n)).unwrap();
        if ch.is_minimal() && ch.n() == n && ch.is_extremal().unwrap().extremal {
            return ch;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = rng.random_range(1..=8);
        let h = random_hamiltonian(&mut rng, d);
        let beta = rng.random_range(0.2..5.0);
        let rank = rng.random_range(1..=d);
        let rho = random::random_state(&mut rng, d, rank);
        let lhs = deviation_identity_lhs(&h, beta, &rho).unwrap();
        let rhs = deviation_identity_rhs(&h, beta, &rho).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    outcome(worst <= 1e-8, format!("max |ΔE_B − rhs| = {worst:.3e} over 1000 instances"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut attain: f64 = 0.0;
    let mut slack = f64::INFINITY;
    for k in 0..1000 {
        let d = 1 + k % 6;
        let g = HermitianOperator::dimensionless(random::random_hermitian(&mut rng, d, 2.0)).unwrap();
        let j = j_function(&g);
        let sigma = minimizer_sigma(&g);
        let at_sigma = linalg::trace_product(sigma.matrix(), g.matrix()).re - von_neumann_entropy(&sigma);
        attain = attain.max((at_sigma - j).abs());
        let rho = random::random_state(&mut rng, d, 1 + k % d);
        let value = linalg::trace_product(rho.matrix(), g.matrix()).re - von_neumann_entropy(&rho);
        slack = slack.min(value - j);
    }
    outcome(
        attain <= 1e-10 && slack >= -1e-10,
        format!("max |J − (tr σG − S(σ))| = {attain:.3e}, min slack = {slack:.3e} over 1000 states"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let (mut failures, mut worst_delta, mut worst_hto, mut worst_tail): (Vec<String>, f64, f64, f64) =
        (Vec::new(), 0.0, 0.0, 0.0);
    let mut min_margin = f64::INFINITY;
    for k in 0..50 {
        let d = 2 + k % 3;
        let beta = rng.random_range(0.5..2.0);
        let j = 0.01 + rng.random::<f64>() * 4.99;
        let q = q_with_j(&mut rng, d, beta, j);
        let psi = random::pure_vector(&mut rng, d);
        match synthesize_landauer(&q, beta, &psi, 30, 1e-8, SynthesisOptions::default()) {
            Ok(chain) => {
                let dd = (chain.delta() - j / beta).abs();
                let dh = max_abs(&(chain.achieved_hto().matrix() - q.matrix()));
                let tail = chain.epsilon_tail();
                let err = chain.channel_error();
                worst_delta = worst_delta.max(dd);
                worst_hto = worst_hto.max(dh);
                worst_tail = worst_tail.max(tail);
                min_margin = min_margin.min(chain.szilard_margin());
                if dd > 1e-10 || dh > 1e-6 || tail > 1e-8 || err > d as f64 * tail + 1e-12 || chain.szilard_margin() <= 0.0 {
                    failures.push(format!(
                        "#{k} (d = {d}, J = {j:.4}): Δ dev {dd:.2e}, HTO dev {dh:.2e}, ε_tail {tail:.2e}, channel error {err:.2e}"
                    ));
                }
            }
            Err(e) => failures.push(format!("#{k} (d = {d}, J = {j:.4}): {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "50 instances, |Δ − J/β| ≤ {worst_delta:.2e}, HTO dev ≤ {worst_hto:.2e}, ε_tail ≤ {worst_tail:.2e}, \
             min Szilard margin {min_margin:.3e}; failures: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join("; ") }
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let mut worst: f64 = 0.0;
    let mut joint = 0;
    let mut errors = Vec::new();
    for k in 0..20 {
        let beta = rng.random_range(0.5..2.0);
        let j = rng.random_range(1.0..5.0);
        let q = q_with_j(&mut rng, 2, beta, j);
        let psi = random::pure_vector(&mut rng, 2);
        let chain = match synthesize_landauer(&q, beta, &psi, 3, 0.5, SynthesisOptions::default()) {
            Ok(ch) => ch,
            Err(e) => {
                errors.push(format!("#{k}: {e}"));
                continue;
            }
        };
        match dense_oracle_check(&chain, 10, &mut rng) {
            Ok(rep) => {
                joint = rep.joint_dim;
                worst = worst.max(rep.heat_deviation);
            }
            Err(e) => errors.push(format!("#{k}: {e}")),
        }
    }
    outcome(
        worst <= 1e-10 && errors.is_empty(),
        format!(
            "joint dim {joint}, max heat deviation {worst:.3e} over 20 instances; errors: {}",
            if errors.is_empty() { "none".to_string() } else { errors.join("; ") }
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let (mut worst_delta, mut worst_hto): (f64, f64) = (0.0, 0.0);
    let mut failures = Vec::new();
    for k in 0..20 {
        let d = 2 + k % 2;
        let beta = rng.random_range(0.5..2.0);
        let rho0 = random::random_full_rank_state(&mut rng, d);
        let s = von_neumann_entropy(&rho0);
        let gap = rng.random_range(0.5..5.0);
        let q = q_with_j(&mut rng, d, beta, gap - s);
        match synthesize_complete_erasure(&q, beta, &rho0, 20, 20, 1e-8, SynthesisOptions::default()) {
            Ok(chain) => {
                let dd = (chain.delta() - gap / beta).abs();
                let dh = max_abs(&(chain.achieved_hto().matrix() - q.matrix()));
                let tail = chain.epsilon_tail();
                worst_delta = worst_delta.max(dd);
                worst_hto = worst_hto.max(dh);
                let err = chain.channel_error();
                if dd > 1e-10 || dh > 1e-6 || tail > 1e-8 || err > d as f64 * tail + 1e-12 {
                    failures.push(format!("#{k}: Δ dev {dd:.2e}, HTO dev {dh:.2e}, ε_tail {tail:.2e}, channel error {err:.2e}"));
                }
            }
            Err(e) => failures.push(format!("#{k} (d = {d}, J + S = {gap:.3}): {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "M = N = 20, 20 instances, |Δ − (J + S)/β| ≤ {worst_delta:.2e}, HTO dev ≤ {worst_hto:.2e}; failures: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join("; ") }
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let (mut worst_q, mut worst_j): (f64, f64) = (0.0, 0.0);
    for k in 0..20 {
        let d = 1 + k % 4;
        let beta = rng.random_range(0.5..2.0);
        let rho0 = random::random_full_rank_state(&mut rng, d);
        let w = random::haar_unitary(&mut rng, d);
        let real = swap_equality_case(&rho0, &w, beta).unwrap();
        let report = compute_hto(&real).unwrap();
        let closed = swap_equality_hto(&rho0, &w, beta).unwrap();
        worst_q = worst_q.max(max_abs(&(report.hto.matrix() - closed.matrix())));
        let j = j_function(&report.hto.scaled(beta, Units::Dimensionless));
        worst_j = worst_j.max((j + von_neumann_entropy(&rho0)).abs());
    }
    outcome(
        worst_q <= 1e-12 && worst_j <= 1e-10,
        format!("max HTO dev {worst_q:.3e}, max |J + S| = {worst_j:.3e} over 20 instances"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let (mut worst, mut min_alpha): (f64, f64) = (0.0, f64::INFINITY);
    for k in 0..50 {
        let da = 1 + k % 4;
        let db = 1 + (k / 4) % 4;
        let u = random::haar_unitary(&mut rng, da);
        let ub = random::haar_unitary(&mut rng, db);
        let h_b = random_hamiltonian(&mut rng, db);
        let beta = rng.random_range(0.3..3.0);
        let v = hto_core::Isometry::new(linalg::kron(&u, &ub).unwrap()).unwrap();
        let real = hto_core::DenseRealization::new(da, h_b, beta, v).unwrap();
        let q = compute_hto(&real).unwrap().hto;
        let alpha = linalg::trace_re(q.matrix()) / da as f64;
        worst = worst.max(max_abs(&(q.matrix() - linalg::identity(da) * c(alpha))));
        min_alpha = min_alpha.min(alpha);
    }
    outcome(
        worst <= 1e-8 && min_alpha >= -1e-10,
        format!("max ‖Q − α1‖ = {worst:.3e}, min α = {min_alpha:.3e} over 50 realizations"),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for k in 0..20 {
        let beta = rng.random_range(0.5..2.0);
        let ch = random_extremal(&mut rng, 2, 2);
        let j = rng.random_range(0.05..3.0);
        let q = q_with_j(&mut rng, 2, beta, j);
        let q_op = HermitianOperator::energy(reconstruct(q.matrix(), &ch)).unwrap();
        match resynthesize_extremal(&q_op, &ch, beta) {
            Ok(r) => {
                worst = worst.max(r.deviation);
                if r.deviation > 1e-6 || r.channel_distance.is_some_and(|dist| dist > 1e-8) {
                    failures.push(format!("admissible #{k}: deviation {:.3e}", r.deviation));
                }
            }
            Err(e) => failures.push(format!("admissible #{k}: {e}")),
        }
    }
    let mut refused = 0;
    for k in 0..20 {
        let beta = rng.random_range(0.5..2.0);
        let ch = random_extremal(&mut rng, 2, 2);
        let j = -rng.random_range(0.0..2.0);
        let q = q_with_j(&mut rng, 2, beta, j);
        let q_op = HermitianOperator::energy(reconstruct(q.matrix(), &ch)).unwrap();
        let decided = decide_extremal_hto(&q_op, &ch, beta).unwrap().verdict == Verdict::Inadmissible;
        let no_lift = resynthesize_extremal(&q_op, &ch, beta).is_err();
        let psi = random::pure_vector(&mut rng, 2);
        let no_chain = synthesize_landauer(&q, beta, &psi, 30, 1e-8, SynthesisOptions::default()).is_err();
        if decided && no_lift && no_chain && szilard_trace(q.matrix(), beta) >= 1.0 {
            refused += 1;
        } else {
            failures.push(format!("inadmissible #{k} not refused"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "20 admissible re-synthesized, max HTO dev {worst:.3e}; {refused}/20 inadmissible refused; failures: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join("; ") }
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let mut worst = f64::INFINITY;
    for k in 0..1000 {
        let da = 1 + k % 3;
        let dx = 1 + (k / 3) % 3;
        let n = 1 + (k / 9) % 4;
        let ch = KrausChannel::new(random::random_kraus(&mut rng, da, da, n)).unwrap();
        let lifted = ch.tensor_identity(dx).unwrap();
        let joint = random::random_state(&mut rng, da * dx, 1 + k % (da * dx));
        worst = worst.min(ssa_slack(&ch, &lifted, joint.matrix(), dx).unwrap());
    }
    outcome(worst >= -1e-9, format!("min slack {worst:.3e} over 1000 instances"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let rows = et_family_study(&unit_matrix(2, 0, 1), &[0.5, 0.1, 0.01], 1.0, 256, &mut rng).unwrap();
    let ok = rows.iter().all(|r| r.status == RowStatus::Ok);
    let b: Vec<f64> = rows.iter().filter_map(|r| r.b_t).collect();
    let floors: Vec<f64> = rows.iter().filter_map(|r| r.extremal_floor).collect();
    let norms: Vec<f64> = rows.iter().filter_map(|r| r.admissible_q_norm).collect();
    let decreasing = b.len() == 3 && b[0] > b[1] && b[1] > b[2];
    let floor_ok = floors.len() == 3 && floors.iter().all(|f| (f - 2f64.ln()).abs() <= 1e-10);
    let norms_ok = norms.len() == 3 && norms[0] > norms[1] && norms[1] > norms[2];
    outcome(
        ok && decreasing && b.get(2).is_some_and(|&x| x < 0.01) && floor_ok && norms_ok,
        format!("B_t = {b:.6?}, extremal floor = {floors:.10?}, ‖βQ(t)‖ = {norms:.6?}"),
    )
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    let mut failures = Vec::new();
    for k in 0..50 {
        let n = 2 + k % 2;
        let beta = rng.random_range(0.5..2.0);
        let j = rng.random_range(0.01..2.0);
        let q = q_with_j(&mut rng, n, beta, j);
        let base = HeatCertificate::trace_test(q.matrix(), beta).unwrap();
        let g = random::ginibre(&mut rng, n, n);
        let s: Mat = &g * g.adjoint() + linalg::identity(n) * c(rng.random_range(0.01..1.0));
        let s = linalg::symmetrize(&s);
        let w = match widen_heat_matrix(&base, &s, beta) {
            Ok(w) => w,
            Err(e) => {
                failures.push(format!("#{k}: {e}"));
                continue;
            }
        };
        let HeatCertificate::Widened { shifted, base: b, .. } = &w else {
            failures.push(format!("#{k}: not a widening certificate"));
            continue;
        };
        let components = shifted.verify(beta) && b.verify(beta);
        let ch = random_extremal(&mut rng, n, n);
        let target = &q.matrix().clone() + &s;
        let q_op = HermitianOperator::energy(reconstruct(&target, &ch)).unwrap();
        let decided = decide_via_certificate(&q_op, &ch, beta, &w)
            .map(|v| v.verdict == Verdict::Admissible && v.is_consistent(beta))
            .unwrap_or(false);
        if !(components && decided) {
            failures.push(format!("#{k}: components {components}, decision {decided}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "50 widenings; failures: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join("; ") }
        ),
    )
}

type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("deviation identity", Some(10), criterion_1),
        ("Legendre duality", None, criterion_2),
        ("Landauer synthesis round trip", Some(60), criterion_3),
        ("dense oracle equivalence", None, criterion_4),
        ("complete-erasure synthesis", None, criterion_5),
        ("equality case", None, criterion_6),
        ("unitary-channel rigidity", None, criterion_7),
        ("extremal decision soundness", None, criterion_8),
        ("strong-subadditivity corollary", None, criterion_9),
        ("E_t gap study", Some(300), criterion_10),
        ("widening certificates", None, criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let o = timed(limit.map(Duration::from_secs), run);
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
