//! The `sts` command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sts_core::doubling::{double, double_with_bijection, verify_doubling, FillPolicy, SixCycle};
use sts_core::embedding::{
    amalgamate, find_good_witness, find_six_cycle, plan_embedding, run_embedding, AmalgamationProblem, EmbeddingRun,
    PlanOptions, RunOptions, RunStatus, VerifyMode,
};
use sts_core::generators::{affine, bose, partial_with_hexagon_leave, projective, random_partial, random_sts, skolem};
use sts_core::subsystems::{
    are_isomorphic, enumerate_subsystems_with, is_class_free, is_subsystem_free, EnumerationLimits, DEFAULT_NODE_BUDGET,
};
use sts_core::{PartialSts, Point};

use crate::io::{self, Document, Format, IoError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_TRUNCATED: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sts", version, about = "Build and check Steiner triple systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Pg,
    Ag,
    Bose,
    Skolem,
    Hexleave,
    Random,
    RandomPartial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyArg {
    Full,
    Steps,
    Off,
}

impl From<VerifyArg> for VerifyMode {
    fn from(v: VerifyArg) -> VerifyMode {
        match v {
            VerifyArg::Full => VerifyMode::Full,
            VerifyArg::Steps => VerifyMode::Steps,
            VerifyArg::Off => VerifyMode::Off,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a system: pg N, ag N, bose V, skolem V, hexleave V, random V, random-partial V.
    Gen {
        kind: GenKind,
        param: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Validate a system file, and its certificates when --against names the input.
    Verify {
        file: PathBuf,
        #[arg(long)]
        against: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List every subsystem up to an order.
    Subsystems {
        file: PathBuf,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// One doubling step along a 6-cycle of the leave.
    Double {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Six comma-separated points; defaults to the first 6-cycle of the leave.
        #[arg(long, value_delimiter = ',', num_args = 6)]
        cycle: Option<Vec<Point>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Embed a partial system in a complete one with no new subsystems.
    Embed {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = VerifyArg::Full)]
        verify: VerifyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        max_order: usize,
        #[arg(long, default_value_t = 500)]
        verify_cap: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Amalgamate two systems over a shared subsystem inside an F-free class.
    Amalgamate {
        left: PathBuf,
        right: PathBuf,
        /// File of `left right` point pairs naming the shared subsystem.
        #[arg(long)]
        glue: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        forbid: Vec<PathBuf>,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = VerifyArg::Full)]
        verify: VerifyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        max_order: usize,
        #[arg(long, default_value_t = 500)]
        verify_cap: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value = "amalgam")]
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Isomorphism test; exit 0 if isomorphic, 1 if not.
    Iso { a: PathBuf, b: PathBuf },
    /// Subsystem-freeness, or F-freeness with --forbid; exit 0 if free, 1 if not.
    Free {
        file: PathBuf,
        #[arg(long, num_args = 1..)]
        forbid: Vec<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] sts_core::Error),
    #[error("{0}")]
    Usage(String),
}

/// Runs one command, writing reports to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| {
        IoError::File {
            path: "<stdout>".into(),
            source,
        }
        .into()
    })
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => Ok(io::write_file(p, text)?),
        None => emit(out, text),
    }
}

fn read_system(path: &Path) -> Result<PartialSts, CliError> {
    Ok(io::read_file(path)?.system)
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Gen {
            kind,
            param,
            seed,
            output,
            format,
        } => {
            let v = param as usize;
            let ps = match kind {
                GenKind::Pg => projective(param)?,
                GenKind::Ag => affine(param)?,
                GenKind::Bose => bose(v)?,
                GenKind::Skolem => skolem(v)?,
                GenKind::Hexleave => partial_with_hexagon_leave(v, seed)?,
                GenKind::Random => random_sts(v, seed)?,
                GenKind::RandomPartial => random_partial(v, seed),
            };
            write_or_print(output.as_deref(), &io::render(&Document::new(ps), format), out)?;
            Ok(EXIT_OK)
        }
        Command::Verify { file, against, format } => verify(&file, against.as_deref(), format, out),
        Command::Subsystems {
            file,
            max_order,
            budget,
            format,
        } => {
            let ps = read_system(&file)?;
            let limits = EnumerationLimits {
                max_order: max_order.unwrap_or(ps.order()),
                node_budget: budget,
            };
            let lattice = enumerate_subsystems_with(&ps, limits);
            let nontrivial = lattice.nontrivial_proper().count();
            let text = match format {
                Format::Text => {
                    let mut s = String::new();
                    for r in lattice.records() {
                        let pts: Vec<String> = r.points().iter().map(u32::to_string).collect();
                        writeln!(s, "subsys order={} points={}", r.order(), pts.join(",")).unwrap();
                    }
                    writeln!(
                        s,
                        "total={} nontrivial_proper={} truncated={}",
                        lattice.len(),
                        nontrivial,
                        u8::from(lattice.is_truncated())
                    )
                    .unwrap();
                    s
                }
                Format::Structured => {
                    let records: Vec<_> = lattice.records().iter().map(|r| r.points().to_vec()).collect();
                    json_line(&json!({
                        "subsystems": records,
                        "total": lattice.len(),
                        "nontrivial_proper": nontrivial,
                        "truncated": lattice.is_truncated(),
                    }))
                }
            };
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Double {
            file,
            seed,
            cycle,
            output,
            format,
        } => {
            let ps = read_system(&file)?;
            let cycle = match cycle {
                Some(pts) => SixCycle::new(
                    pts.try_into()
                        .map_err(|_| CliError::Usage("--cycle needs 6 points".into()))?,
                )?,
                None => find_six_cycle(&ps.leave_graph())
                    .ok_or_else(|| CliError::Usage("the leave contains no 6-cycle".into()))?,
            };
            let result = double(&ps, &cycle, FillPolicy::from_seed(seed))?;
            let report = verify_doubling(&ps, &result, &cycle);
            let doc = Document {
                system: result.output.clone(),
                certificates: vec![result.certificate()],
            };
            write_or_print(output.as_deref(), &io::render(&doc, format), out)?;
            if report.passed() {
                Ok(EXIT_OK)
            } else {
                writeln!(err, "verification failed: {:?}", report.problems).ok();
                Ok(EXIT_VERIFY)
            }
        }
        Command::Embed {
            file,
            steps,
            verify,
            seed,
            max_order,
            verify_cap,
            out_dir,
            format,
        } => {
            let ps = read_system(&file)?;
            let plan = plan_embedding(
                &ps,
                PlanOptions {
                    seed,
                    ..PlanOptions::default()
                },
            )?;
            let name = stem(&file);
            let dir = out_dir.unwrap_or_else(|| file.parent().map(Path::to_path_buf).unwrap_or_default());
            let opts = RunOptions {
                step_limit: steps,
                verify: verify.into(),
                seed,
                max_order,
                verify_cap,
            };
            writeln!(out, "plan padded={} t={}", plan.padded_order(), plan.t()).ok();
            let run = run_steps(&plan, opts, &dir, &name, format, out)?;
            finish_run(&run, opts, &dir, &name, out)
        }
        Command::Amalgamate {
            left,
            right,
            glue,
            forbid,
            witness,
            steps,
            verify,
            seed,
            max_order,
            verify_cap,
            out_dir,
            name,
            format,
        } => {
            let identification = match glue {
                Some(g) => io::parse_glue(&std::fs::read_to_string(&g).map_err(|source| IoError::File {
                    path: g.display().to_string(),
                    source,
                })?)?,
                None => Vec::new(),
            };
            let forbidden = forbid.iter().map(|f| read_system(f)).collect::<Result<Vec<_>, _>>()?;
            let witness = match witness {
                Some(w) => read_system(&w)?,
                None => find_good_witness(&forbidden)?,
            };
            let problem = AmalgamationProblem {
                left: read_system(&left)?,
                right: read_system(&right)?,
                identification,
                forbidden,
                witness,
            };
            let opts = RunOptions {
                step_limit: steps,
                verify: verify.into(),
                seed,
                max_order,
                verify_cap,
            };
            let dir = out_dir.unwrap_or_else(|| left.parent().map(Path::to_path_buf).unwrap_or_default());
            let result = amalgamate(
                &problem,
                PlanOptions {
                    seed,
                    ..PlanOptions::default()
                },
                opts,
            )?;
            writeln!(
                out,
                "amalgam order={} blocks={} witness_order={}",
                result.amalgam.union.order(),
                result.amalgam.union.num_blocks(),
                problem.witness.order()
            )
            .ok();
            writeln!(
                out,
                "plan padded={} t={}",
                result.run.plan.padded_order(),
                result.run.plan.t()
            )
            .ok();
            for c in &result.checks {
                writeln!(
                    out,
                    "check step={} left={} right={} witness={} class_free={}",
                    c.step,
                    u8::from(c.left_embedded),
                    u8::from(c.right_embedded),
                    u8::from(c.witness_embedded),
                    u8::from(c.class_free)
                )
                .ok();
            }
            write_step_files(&result.run, &dir, &name, format)?;
            let code = finish_run(&result.run, opts, &dir, &name, out)?;
            if code != EXIT_VERIFY && !result.checks.iter().all(|c| c.passed()) {
                writeln!(err, "amalgamation checks failed").ok();
                return Ok(EXIT_VERIFY);
            }
            Ok(code)
        }
        Command::Iso { a, b } => {
            let same = are_isomorphic(&read_system(&a)?, &read_system(&b)?)?;
            emit(out, if same { "isomorphic\n" } else { "not isomorphic\n" })?;
            Ok(if same { EXIT_OK } else { EXIT_NO })
        }
        Command::Free { file, forbid } => {
            let ps = read_system(&file)?;
            let free = if forbid.is_empty() {
                let free = is_subsystem_free(&ps)?;
                emit(
                    out,
                    if free {
                        "subsystem-free\n"
                    } else {
                        "has a nontrivial proper subsystem\n"
                    },
                )?;
                free
            } else {
                let forbidden = forbid.iter().map(|f| read_system(f)).collect::<Result<Vec<_>, _>>()?;
                let free = is_class_free(&ps, &forbidden)?;
                emit(
                    out,
                    if free {
                        "F-free\n"
                    } else {
                        "contains a forbidden subsystem\n"
                    },
                )?;
                free
            };
            Ok(if free { EXIT_OK } else { EXIT_NO })
        }
    }
}

fn json_line(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialise");
    s.push('\n');
    s
}

fn summary(ps: &PartialSts) -> String {
    if ps.is_complete() {
        format!("complete order={} blocks={}", ps.order(), ps.num_blocks())
    } else {
        format!(
            "partial order={} blocks={} leave={}",
            ps.order(),
            ps.num_blocks(),
            ps.leave_graph().num_edges()
        )
    }
}

fn verify(file: &Path, against: Option<&Path>, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    let doc = io::read_file(file)?;
    let mut lines = vec![summary(&doc.system)];
    let mut ok = true;
    match (against, doc.certificates.as_slice()) {
        (_, []) => {}
        (None, certs) => lines.push(format!("certificates={} unchecked (pass --against)", certs.len())),
        (Some(input), [cert]) => {
            let input = read_system(input)?;
            if input.order() != cert.u {
                return Err(CliError::Usage(format!(
                    "certificate is for order {}, input has {}",
                    cert.u,
                    input.order()
                )));
            }
            let cycle = SixCycle::new(cert.cycle)?;
            let rebuilt = double_with_bijection(&input, &cycle, cert.phi.clone(), cert.seed)?;
            let same = rebuilt.output == doc.system;
            let report = verify_doubling(&input, &rebuilt, &cycle);
            ok = same && report.passed();
            lines.push(format!(
                "certificate u={} rebuilt={} violations={} unsafe_cosets={} {}",
                cert.u,
                u8::from(same),
                report.violations.len(),
                report.unsafe_cosets.len(),
                if ok { "pass" } else { "fail" }
            ));
        }
        (Some(_), certs) => {
            return Err(CliError::Usage(format!(
                "--against checks a single certificate, file has {}",
                certs.len()
            )))
        }
    }
    let text = match format {
        Format::Text => lines.iter().map(|l| format!("{l}\n")).collect(),
        Format::Structured => json_line(&json!({
            "complete": doc.system.is_complete(),
            "order": doc.system.order(),
            "blocks": doc.system.num_blocks(),
            "leave": doc.system.leave_graph().num_edges(),
            "certificates": doc.certificates.len(),
            "certificate_ok": ok,
        })),
    };
    emit(out, &text)?;
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "system".into())
}

fn step_path(dir: &Path, name: &str, k: usize, format: Format) -> PathBuf {
    let ext = match format {
        Format::Text => "sts",
        Format::Structured => "json",
    };
    dir.join(format!("{name}.step{k}.{ext}"))
}

fn run_steps(
    plan: &sts_core::embedding::EmbeddingPlan,
    opts: RunOptions,
    dir: &Path,
    name: &str,
    format: Format,
    out: &mut dyn Write,
) -> Result<EmbeddingRun, CliError> {
    let mut write_error = None;
    let run = run_embedding(plan, opts, |report, result| {
        let doc = Document {
            system: result.output.clone(),
            certificates: vec![report.certificate.clone()],
        };
        if let Err(e) = io::write_file(&step_path(dir, name, report.step, format), &io::render(&doc, format)) {
            write_error.get_or_insert(e);
        }
        let verified = match &report.verification {
            None => "skipped",
            Some(r) if r.passed() => "pass",
            Some(_) => "fail",
        };
        writeln!(
            out,
            "step {} order={} leave_invariant={} verified={}",
            report.step,
            report.order,
            u8::from(report.leave_invariant),
            verified
        )
        .ok();
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    Ok(run)
}

fn write_step_files(run: &EmbeddingRun, dir: &Path, name: &str, format: Format) -> Result<(), CliError> {
    if let Some(last) = run.steps.last() {
        let doc = Document {
            system: run.current.clone(),
            certificates: vec![last.certificate.clone()],
        };
        io::write_file(&step_path(dir, name, last.step, format), &io::render(&doc, format))?;
    }
    Ok(())
}

fn finish_run(
    run: &EmbeddingRun,
    opts: RunOptions,
    dir: &Path,
    name: &str,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut cert = String::new();
    for s in &run.steps {
        writeln!(cert, "{}", s.certificate).unwrap();
    }
    io::write_file(&dir.join(format!("{name}.cert")), &cert)?;
    let status = match &run.status {
        RunStatus::Complete => "complete".to_string(),
        RunStatus::Truncated => "truncated".to_string(),
        RunStatus::Failed { step, reason } => format!("failed step={step} reason={reason}"),
    };
    writeln!(
        out,
        "status {status} order={} steps={}",
        run.current.order(),
        run.steps_completed()
    )
    .ok();
    if matches!(run.status, RunStatus::Failed { .. }) {
        return Ok(EXIT_VERIFY);
    }
    let certified = opts.verify == VerifyMode::Off || run.certified();
    Ok(match (&run.status, certified) {
        (RunStatus::Complete, true) => EXIT_OK,
        _ => EXIT_TRUNCATED,
    })
}
