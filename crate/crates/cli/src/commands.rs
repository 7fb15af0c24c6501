//! Subcommand bodies. Each writes its artifact before reporting a failed post-check.

use std::path::Path;

use hto_core::analysis::heat_matrix::szilard_trace;
use hto_core::analysis::{
    check_lep, decide_complete_erasure_hto, decide_extremal_hto, et_family_study, extract_heat_matrix,
    lep_verdict, widen_heat_matrix, AdmissibilityVerdict, EtRow, HeatCertificate, RowStatus, Verdict,
};
use hto_core::io::{ChannelJson, MatrixJson, RealizationJson};
use hto_core::linalg::{self, max_abs, C64};
use hto_core::operator::{j_function, von_neumann_entropy};
use hto_core::synthesis::{
    dense_oracle_check, swap_equality_case, swap_equality_hto, synthesize_complete_erasure, synthesize_landauer,
    ChainDescriptor, ChainRealization, OracleReport, SynthesisOptions,
};
use hto_core::{compute_hto, DensityMatrix, HermitianOperator, HtoError, KrausChannel, Units};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{emit, fmt_f64, to_json};
use crate::{ChainArgs, Cli, Command, Decide, Target};

/// Reproducibility header carried by every JSON artifact.
#[derive(Debug, Serialize)]
struct Meta {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    beta: f64,
    tol_delta: f64,
    tol_lep: f64,
    tol_heat: f64,
}

#[derive(Debug, Serialize)]
struct Artifact<T: Serialize> {
    meta: Meta,
    #[serde(flatten)]
    body: T,
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match &cli.command {
        Command::HtoCompute { realization, samples } => hto_compute(cli, realization, *samples, &mut rng),
        Command::ErasureSynth { q, target, chain } => erasure_synth(cli, q, target, chain),
        Command::CompleteErasureSynth { q, rho0, m, chain } => complete_erasure_synth(cli, q, rho0, *m, chain),
        Command::SwapCase { rho0, w } => swap_case(cli, rho0, w.as_deref()),
        Command::Decide { kind } => decide(cli, kind, &mut rng),
        Command::ExtractQ { q, channel } => extract_q(cli, q, channel),
        Command::WidenQ { q, s } => widen_q(cli, q, s),
        Command::StudyEt { x, t_grid, samples } => study_et(cli, x, t_grid, *samples, &mut rng),
        Command::OracleCheck {
            q,
            target,
            m,
            n,
            tail_bound,
            samples,
        } => oracle_check(cli, q, target, *m, *n, *tail_bound, *samples, &mut rng),
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::HtoCompute { .. } => "hto-compute",
        Command::ErasureSynth { .. } => "erasure-synth",
        Command::CompleteErasureSynth { .. } => "complete-erasure-synth",
        Command::SwapCase { .. } => "swap-case",
        Command::Decide { kind: Decide::Lep { .. } } => "decide lep",
        Command::Decide { kind: Decide::Complete { .. } } => "decide complete",
        Command::Decide { kind: Decide::Extremal { .. } } => "decide extremal",
        Command::ExtractQ { .. } => "extract-q",
        Command::WidenQ { .. } => "widen-q",
        Command::StudyEt { .. } => "study-et",
        Command::OracleCheck { .. } => "oracle-check",
    }
}

fn write<T: Serialize>(cli: &Cli, beta: f64, body: T) -> Result<()> {
    let artifact = Artifact {
        meta: Meta {
            tool: "hto",
            version: env!("CARGO_PKG_VERSION"),
            command: command_name(&cli.command),
            seed: cli.seed,
            beta,
            tol_delta: cli.tol_delta,
            tol_lep: cli.tol_lep,
            tol_heat: cli.tol_heat,
        },
        body,
    };
    let bytes = to_json(&artifact).map_err(|e| CliError::Write(e.into()))?;
    emit(&bytes, cli.out.as_deref())?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn read_energy(path: &Path) -> Result<HermitianOperator> {
    Ok(read_json::<MatrixJson>(path)?.to_hermitian(Units::Energy)?)
}

fn read_state(path: &Path) -> Result<DensityMatrix> {
    Ok(read_json::<MatrixJson>(path)?.to_state()?)
}

fn read_channel(path: &Path) -> Result<KrausChannel> {
    Ok(read_json::<ChannelJson>(path)?.to_channel()?)
}

/// Accepts a bare realization or any artifact with a `realization` field.
#[derive(Deserialize)]
#[serde(untagged)]
enum RealizationInput {
    Bare(RealizationJson),
    Wrapped { realization: RealizationJson },
}

/// Accepts a heat matrix or a previously emitted certificate.
#[derive(Deserialize)]
#[serde(untagged)]
enum HeatInput {
    Certificate(HeatCertificate),
    Wrapped { certificate: HeatCertificate },
    Matrix(MatrixJson),
}

fn check_tol(what: &str, value: f64, tolerance: f64) -> Result<()> {
    if value.is_nan() || value > tolerance {
        return Err(CliError::Tolerance {
            what: what.into(),
            value,
            tolerance,
        });
    }
    Ok(())
}

fn j_of(q: &HermitianOperator, beta: f64) -> f64 {
    j_function(&q.scaled(beta, Units::Dimensionless))
}

#[derive(Serialize)]
struct HtoReport {
    hto: MatrixJson,
    hto_eigenvalues: Vec<f64>,
    j_of_beta_q: f64,
    #[serde(rename = "ln_Z_B")]
    ln_z_b: f64,
    kraus: ChannelJson,
    lep_min_slack: f64,
    lep_argmin: MatrixJson,
}

fn hto_compute(cli: &Cli, path: &Path, samples: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut json = match read_json::<RealizationInput>(path)? {
        RealizationInput::Bare(r) | RealizationInput::Wrapped { realization: r } => r,
    };
    if let Some(beta) = cli.beta {
        json.beta = beta;
    }
    let realization = json.to_realization()?;
    let beta = realization.beta();
    let report = compute_hto(&realization)?;
    let lep = check_lep(&report.channel, &report.hto, beta, samples, rng)?;
    write(
        cli,
        beta,
        HtoReport {
            hto: MatrixJson::from_matrix(report.hto.matrix()),
            hto_eigenvalues: report.hto.eigenvalues(),
            j_of_beta_q: report.j_of_beta_q,
            ln_z_b: report.bath_log_partition,
            kraus: ChannelJson::from_channel(&report.channel),
            lep_min_slack: lep.min_value,
            lep_argmin: MatrixJson::from_matrix(&lep.argmin),
        },
    )?;
    check_tol("negative entropic slack of a computed HTO", -lep.min_value, cli.tol_lep)
}

#[derive(Serialize)]
struct SynthReport {
    chain: ChainDescriptor,
    target_q: MatrixJson,
    achieved_hto: MatrixJson,
    hto_deviation: f64,
    j_of_beta_q: f64,
    delta_target: f64,
    delta_achieved: f64,
    #[serde(rename = "ln_Z_B")]
    ln_z_b: f64,
    epsilon_tail: f64,
    tail_bound: f64,
    channel_distance: f64,
    szilard_margin: f64,
}

fn options(chain: &ChainArgs) -> SynthesisOptions {
    SynthesisOptions {
        c: chain.c,
        family: chain.family,
    }
}

fn report_chain(cli: &Cli, chain: &ChainRealization, args_tail: f64) -> Result<()> {
    let achieved = chain.achieved_hto();
    let report = SynthReport {
        chain: chain.descriptor(),
        target_q: MatrixJson::from_matrix(chain.target_q().matrix()),
        achieved_hto: MatrixJson::from_matrix(achieved.matrix()),
        hto_deviation: max_abs(&(achieved.matrix() - chain.target_q().matrix())),
        j_of_beta_q: j_of(chain.target_q(), chain.beta()),
        delta_target: chain.target_delta(),
        delta_achieved: chain.delta(),
        ln_z_b: chain.ln_z_b(),
        epsilon_tail: chain.epsilon_tail(),
        tail_bound: args_tail,
        channel_distance: chain.channel_error(),
        szilard_margin: chain.szilard_margin(),
    };
    let delta_gap = (report.delta_achieved - report.delta_target).abs();
    let tail = report.epsilon_tail;
    write(cli, chain.beta(), report)?;
    check_tol("|Δ_achieved − Δ_target|", delta_gap, cli.tol_delta)?;
    if tail > args_tail {
        return Err(HtoError::Truncation(format!("ε_tail = {tail:.3e} exceeds the bound {args_tail:.3e}")).into());
    }
    Ok(())
}

fn basis_vector(d: usize, k: usize) -> Result<DVector<C64>> {
    if k >= d {
        return Err(HtoError::Shape(format!("basis index {k} is out of range for dimension {d}")).into());
    }
    let mut psi = DVector::from_element(d, linalg::c(0.0));
    psi[k] = linalg::c(1.0);
    Ok(psi)
}

fn erasure_synth(cli: &Cli, q_path: &Path, target: &Target, args: &ChainArgs) -> Result<()> {
    let q = read_energy(q_path)?;
    let beta = cli.beta();
    let chain = match (&target.rho0, target.pure) {
        (_, Some(k)) => synthesize_landauer(&q, beta, &basis_vector(q.dim(), k)?, args.n, args.tail_bound, options(args))?,
        (Some(path), None) => {
            let rho0 = read_state(path)?;
            synthesize_complete_erasure(&q, beta, &rho0, 0, args.n, args.tail_bound, options(args))?
        }
        (None, None) => unreachable!("clap requires one target"),
    };
    report_chain(cli, &chain, args.tail_bound)
}

fn complete_erasure_synth(cli: &Cli, q_path: &Path, rho0: &Path, m: usize, args: &ChainArgs) -> Result<()> {
    let q = read_energy(q_path)?;
    let rho0 = read_state(rho0)?;
    let chain = synthesize_complete_erasure(&q, cli.beta(), &rho0, m, args.n, args.tail_bound, options(args))?;
    report_chain(cli, &chain, args.tail_bound)
}

#[derive(Serialize)]
struct SwapReport {
    realization: RealizationJson,
    hto: MatrixJson,
    hto_eigenvalues: Vec<f64>,
    closed_form_deviation: f64,
    j_of_beta_q: f64,
    entropy_rho0: f64,
}

fn swap_case(cli: &Cli, rho0: &Path, w: Option<&Path>) -> Result<()> {
    let beta = cli.beta();
    let rho0 = read_state(rho0)?;
    let w = match w {
        Some(path) => read_json::<MatrixJson>(path)?.to_matrix()?,
        None => linalg::identity(rho0.dim()),
    };
    let realization = swap_equality_case(&rho0, &w, beta)?;
    let closed = swap_equality_hto(&rho0, &w, beta)?;
    let computed = compute_hto(&realization)?;
    let deviation = max_abs(&(computed.hto.matrix() - closed.matrix()));
    write(
        cli,
        beta,
        SwapReport {
            realization: RealizationJson::from_realization(&realization),
            hto: MatrixJson::from_matrix(computed.hto.matrix()),
            hto_eigenvalues: computed.hto.eigenvalues(),
            closed_form_deviation: deviation,
            j_of_beta_q: computed.j_of_beta_q,
            entropy_rho0: von_neumann_entropy(&rho0),
        },
    )?;
    check_tol("swap HTO against its closed form", deviation, 1e-8)
}

fn decide(cli: &Cli, kind: &Decide, rng: &mut ChaCha8Rng) -> Result<()> {
    let beta = cli.beta();
    let verdict = match kind {
        Decide::Lep { q, channel, samples } => {
            let q = read_energy(q)?;
            let channel = read_channel(channel)?;
            let report = check_lep(&channel, &q, beta, *samples, rng)?;
            let mut v = lep_verdict(&report);
            if report.min_value < -cli.tol_lep {
                v.verdict = Verdict::Inadmissible;
            }
            v
        }
        Decide::Complete { q, rho0 } => decide_complete_erasure_hto(&read_energy(q)?, beta, &read_state(rho0)?)?,
        Decide::Extremal { q, channel } => decide_extremal_hto(&read_energy(q)?, &read_channel(channel)?, beta)?,
    };
    finish_verdict(cli, beta, verdict)
}

fn finish_verdict(cli: &Cli, beta: f64, verdict: AdmissibilityVerdict) -> Result<()> {
    let consistent = verdict.is_consistent(beta);
    let inadmissible = verdict.verdict == Verdict::Inadmissible;
    let certificate = serde_json::to_string(&verdict.certificate).unwrap_or_default();
    write(cli, beta, verdict)?;
    if !consistent {
        return Err(HtoError::Consistency {
            what: format!("certificate does not support the verdict: {certificate}"),
            deviation: f64::NAN,
        }
        .into());
    }
    if inadmissible {
        return Err(CliError::Verdict(certificate));
    }
    Ok(())
}

#[derive(Serialize)]
struct ExtractReport {
    n: usize,
    q: MatrixJson,
    residual: f64,
    unique: bool,
    szilard_trace: f64,
}

fn extract_q(cli: &Cli, q: &Path, channel: &Path) -> Result<()> {
    let beta = cli.beta();
    let h = extract_heat_matrix(&read_energy(q)?, &read_channel(channel)?)?;
    write(
        cli,
        beta,
        ExtractReport {
            n: h.n,
            szilard_trace: szilard_trace(&h.q, beta),
            q: MatrixJson::from_matrix(&h.q),
            residual: h.residual,
            unique: h.unique,
        },
    )
}

#[derive(Serialize)]
struct WidenReport {
    q: MatrixJson,
    szilard_trace: f64,
    certificate: HeatCertificate,
}

fn widen_q(cli: &Cli, q: &Path, s: &Path) -> Result<()> {
    let beta = cli.beta();
    let base = match read_json::<HeatInput>(q)? {
        HeatInput::Certificate(c) | HeatInput::Wrapped { certificate: c } => c,
        HeatInput::Matrix(m) => HeatCertificate::trace_test(&m.to_matrix()?, beta)?,
    };
    if !base.verify(beta) {
        return Err(HtoError::Consistency {
            what: "the input certificate does not re-verify".into(),
            deviation: f64::NAN,
        }
        .into());
    }
    let s = read_json::<MatrixJson>(s)?.to_matrix()?;
    let widened = widen_heat_matrix(&base, &s, beta)?;
    let q = widened.matrix()?;
    let ok = widened.verify(beta);
    write(
        cli,
        beta,
        WidenReport {
            szilard_trace: szilard_trace(&q, beta),
            q: MatrixJson::from_matrix(&q),
            certificate: widened,
        },
    )?;
    if !ok {
        return Err(HtoError::Consistency {
            what: "the widened certificate does not re-verify".into(),
            deviation: f64::NAN,
        }
        .into());
    }
    Ok(())
}

const STUDY_HEADER: [&str; 8] = [
    "t",
    "status",
    "B_t",
    "entropic_floor",
    "extremal_floor",
    "admissible_q_norm",
    "admissible_trace",
    "literal_diag_margin",
];

fn status_name(status: RowStatus) -> &'static str {
    match status {
        RowStatus::Ok => "ok",
        RowStatus::Infeasible => "infeasible",
        RowStatus::Dependent => "dependent",
    }
}

fn study_csv(rows: &[EtRow]) -> Result<Vec<u8>> {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Write(e.into());
    w.write_record(STUDY_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.t),
            status_name(r.status).to_string(),
            opt(r.b_t),
            opt(r.entropic_floor),
            opt(r.extremal_floor),
            opt(r.admissible_q_norm),
            opt(r.admissible_trace),
            fmt_f64(r.literal_diag_margin),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Write(e.into_error()))
}

fn study_et(cli: &Cli, x: &Path, grid: &[f64], samples: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let x = read_json::<MatrixJson>(x)?.to_matrix()?;
    if x.nrows() != x.ncols() {
        return Err(HtoError::Shape("X must be square".into()).into());
    }
    let rows = et_family_study(&x, grid, cli.beta(), samples, rng)?;
    emit(&study_csv(&rows)?, cli.out.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct OracleOutput {
    chain: ChainDescriptor,
    #[serde(flatten)]
    report: OracleReport,
    passes: bool,
}

#[allow(clippy::too_many_arguments)]
fn oracle_check(
    cli: &Cli,
    q_path: &Path,
    target: &Target,
    m: usize,
    n: usize,
    tail_bound: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let q = read_energy(q_path)?;
    let beta = cli.beta();
    let opts = SynthesisOptions::default();
    let chain = match (&target.rho0, target.pure) {
        (_, Some(k)) => synthesize_landauer(&q, beta, &basis_vector(q.dim(), k)?, n, tail_bound, opts)?,
        (Some(path), None) => synthesize_complete_erasure(&q, beta, &read_state(path)?, m, n, tail_bound, opts)?,
        (None, None) => unreachable!("clap requires one target"),
    };
    let report = dense_oracle_check(&chain, samples, rng)?;
    let passes = report.passes(cli.tol_heat);
    let (heat, distance, bound) = (report.heat_deviation, report.channel_distance, report.channel_bound);
    write(
        cli,
        beta,
        OracleOutput {
            chain: chain.descriptor(),
            report,
            passes,
        },
    )?;
    check_tol("dense versus structured heat", heat, cli.tol_heat)?;
    check_tol("dense channel distance beyond d·ε_tail", distance - bound, 1e-12)
}
