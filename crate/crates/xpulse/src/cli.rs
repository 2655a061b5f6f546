//! `xpulse` command-line front end.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use xpulse_core::encoded_analysis::{self as ea, EncodedBasis, Makhlin};
use xpulse_core::gate_library::{
    controlled_rotation_package, cphase_package, crot_t_max, verify_pulses, GateKind, NamedGateSpec, CONTRACT_TOL,
};
use xpulse_core::pulse_sequence::{pulse_count, CountMode, PulseSequence};
use xpulse_core::rewrite_engine::normalize;
use xpulse_core::spin_system::{apply_pulses, max_abs_diff, total_spin_squared, total_sz, MAX_SPINS};

use crate::acceptance;
use crate::formats::{fmt10, parse_layout, sig10, FormatError, ReportFile, SequenceFile, TraceFile};

#[derive(Debug, Parser)]
#[command(name = "xpulse", version, about = "Exchange-pulse compiler, simulator and verifier for three-spin encoded qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Lhs,
    Rhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepGate {
    Crot,
    Cphase,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a sequence file: unitary summary and encoded-gate reports.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Restrict the report to one sector (0 or 1).
        #[arg(long)]
        sector: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Write the report JSON of the first reported sector here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a named gate, or a sequence file, against its matrix contract.
    Verify {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        gate: GateArgs,
        /// Pass threshold on the worst block deviation.
        #[arg(long, default_value_t = CONTRACT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
    /// Emit the sequence of a named gate as JSON.
    Synthesize {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalize a sequence under a layout, optionally writing the rewrite trace.
    Rewrite {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "complete")]
        layout: String,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV over a uniform parameter grid.
    Sweep {
        #[arg(long, value_enum, default_value = "crot")]
        gate: SweepGate,
        #[arg(long, default_value_t = 51)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance table.
    Reproduce,
}

#[derive(Debug, Clone, clap::Args)]
pub struct GateArgs {
    /// u3, u3bar, u4, t, s, u5, u5bar, fw, crot, cphase.
    #[arg(long)]
    pub gate: Option<String>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// First spin of three- and four-spin gates.
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
}

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "validation",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind, "message": self.message }).to_string()
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        let kind = match e {
            FormatError::Io(_) => "io",
            FormatError::Json(_) => "parse",
            FormatError::Invalid { .. } => "validation",
        };
        CliError {
            code: 2,
            kind,
            message: e.to_string(),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: 2,
        kind: "io",
        message: format!("{}: {e}", path.display()),
    }
}

fn other(e: impl std::fmt::Display) -> CliError {
    CliError::validation(e.to_string())
}

/// Stdout text and exit code of a successful run (1 = contract failure).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

pub fn gate_spec(args: &GateArgs) -> Result<NamedGateSpec, CliError> {
    let name = args.gate.as_deref().ok_or_else(|| CliError::validation("--gate is required"))?;
    let kind = match (name, args.variant) {
        ("fw", Some(Variant::Rhs)) => GateKind::FwRhs,
        ("fw", _) => GateKind::FwLhs,
        (n, _) => GateKind::from_name(n).ok_or_else(|| CliError::validation(format!("unknown gate '{n}'")))?,
    };
    let parameter = match kind {
        GateKind::T => {
            let t = args.t.ok_or_else(|| CliError::validation("--t is required for this gate"))?;
            if !(0.0..2.0).contains(&t) {
                return Err(CliError::validation(format!("--t {t} outside [0, 2)")));
            }
            t
        }
        GateKind::Crot => {
            let t = args.t.ok_or_else(|| CliError::validation("--t is required for this gate"))?;
            if !(0.0..=crot_t_max()).contains(&t) {
                return Err(CliError::validation(format!("--t {t} outside [0, {}]", fmt10(crot_t_max()))));
            }
            t
        }
        GateKind::S | GateKind::FwLhs | GateKind::FwRhs => 0.0,
        _ => {
            let phi = args.phi.ok_or_else(|| CliError::validation("--phi is required for this gate"))?;
            if !(0.0..=2.0 * PI).contains(&phi) {
                return Err(CliError::validation(format!("--phi {phi} outside [0, 2pi]")));
            }
            phi
        }
    };
    let spec = NamedGateSpec {
        kind,
        parameter,
        offset: args.offset,
    };
    if kind.width() == 6 && args.offset != 0 {
        return Err(CliError::validation("six-spin gates take no offset"));
    }
    if spec.n_spins() > MAX_SPINS {
        return Err(CliError::validation("offset places the gate beyond the register limit"));
    }
    Ok(spec)
}

/// Sequence file for a named gate, corrections split out for the packages.
pub fn synthesize(spec: &NamedGateSpec) -> Result<SequenceFile, CliError> {
    let file = match spec.kind {
        GateKind::Crot => SequenceFile::from_package(&controlled_rotation_package(spec.parameter).map_err(other)?),
        GateKind::Cphase => SequenceFile::from_package(&cphase_package(spec.parameter).map_err(other)?),
        _ => {
            let pulses = spec.pulses().map_err(other)?;
            let seq = PulseSequence::new(spec.n_spins(), xpulse_core::pulse_sequence::Layout::Linear, pulses).map_err(other)?;
            SequenceFile::from_sequence(&seq)
        }
    };
    Ok(file.with_gate(spec))
}

fn makhlin_json(m: &Option<Makhlin>) -> Value {
    match m {
        Some(m) => json!({ "g1": [sig10(m.g1.re), sig10(m.g1.im)], "g2": sig10(m.g2) }),
        None => Value::Null,
    }
}

fn simulate(input: &Path, sector: Option<u32>, format: OutputFormat, out: Option<&Path>) -> Result<Outcome, CliError> {
    let file = SequenceFile::load(input)?;
    let n = file.n_spins;
    let pulses = file.full_pulses()?;
    let u = apply_pulses(n, &pulses).map_err(other)?;
    let comm = |op: &xpulse_core::CMatrix| max_abs_diff(&(u.matrix() * op), &(op * u.matrix()));
    let sz = comm(&total_sz(n).map_err(other)?);
    let s2 = comm(&total_spin_squared(n).map_err(other)?);
    let sectors: Vec<u32> = match sector {
        Some(g) if g > 1 => return Err(CliError::validation("--sector must be 0 or 1")),
        Some(g) => vec![g],
        None => vec![0, 1],
    };
    let mut reports = Vec::new();
    if n == 6 {
        for &g in &sectors {
            let basis = EncodedBasis::new(g).map_err(other)?;
            reports.push((g, ReportFile::from_report(&ea::extract_gate_unitary(&u, &basis))));
        }
    }
    if let (Some(path), Some((_, r))) = (out, reports.first()) {
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(r).expect("report")))?;
    }
    let stdout = match format {
        OutputFormat::Json => {
            let mut rep = serde_json::Map::new();
            for (g, r) in &reports {
                rep.insert(format!("g{g}"), serde_json::to_value(r).expect("report"));
            }
            pretty(&json!({
                "n_spins": n,
                "pulses": pulses.len(),
                "dim": u.dim(),
                "unitarity_error": sig10(u.unitarity_error()),
                "sz_commutator": sig10(sz),
                "s2_commutator": sig10(s2),
                "reports": if n == 6 { Value::Object(rep) } else { Value::Null },
            }))
        }
        OutputFormat::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "n_spins          {n}");
            let _ = writeln!(s, "pulses           {}", pulses.len());
            let _ = writeln!(s, "unitarity_error  {}", fmt10(u.unitarity_error()));
            let _ = writeln!(s, "[U, Sz]          {}", fmt10(sz));
            let _ = writeln!(s, "[U, S^2]         {}", fmt10(s2));
            for (g, r) in &reports {
                let _ = writeln!(s, "g={g} leakage      {}", fmt10(r.leakage));
                let _ = writeln!(s, "g={g} class        {}", r.classification);
                if let Some(m) = &r.makhlin {
                    let _ = writeln!(s, "g={g} makhlin      G1 = {} + {}i, G2 = {}", fmt10(m.g1[0]), fmt10(m.g1[1]), fmt10(m.g2));
                }
                if let Some(p) = r.phase_invariant {
                    let _ = writeln!(s, "g={g} phase inv    {}", fmt10(p));
                }
            }
            s
        }
    };
    Ok(Outcome::ok(stdout))
}

fn verify(input: Option<&Path>, gate: &GateArgs, tol: f64, format: OutputFormat) -> Result<Outcome, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::validation("--tol must be positive"));
    }
    let (spec, pulses) = match input {
        Some(path) => {
            let file = SequenceFile::load(path)?;
            let spec = if gate.gate.is_some() {
                gate_spec(gate)?
            } else {
                file.gate
                    .as_ref()
                    .ok_or_else(|| CliError::validation("sequence file names no gate; pass --gate"))?
                    .to_spec()?
            };
            if file.n_spins != spec.n_spins() {
                return Err(CliError::validation(format!(
                    "sequence has {} spins, gate '{}' needs {}",
                    file.n_spins,
                    spec.kind.name(),
                    spec.n_spins()
                )));
            }
            (spec, file.full_pulses()?)
        }
        None => {
            let spec = gate_spec(gate)?;
            let pulses = synthesize(&spec)?.full_pulses()?;
            (spec, pulses)
        }
    };
    let report = verify_pulses(&spec, &pulses).map_err(other)?;
    let passed = report.max_deviation < tol;
    let failing = report.blocks.iter().find(|b| !(b.deviation < tol)).map(|b| b.name.clone());
    let makhlin = if spec.n_spins() == 6 {
        let u = apply_pulses(6, &pulses).map_err(other)?;
        let r = ea::extract_gate_unitary(&u, &EncodedBasis::new(0).map_err(other)?);
        r.makhlin
    } else {
        None
    };
    let cnot = makhlin.map(|m| m.distance(&Makhlin::cnot()) < 1e-10);
    let stdout = match format {
        OutputFormat::Json => pretty(&json!({
            "gate": spec.kind.name(),
            "parameter": sig10(spec.parameter),
            "passed": passed,
            "tolerance": tol,
            "max_deviation": sig10(report.max_deviation),
            "failing_block": failing,
            "blocks": report.blocks.iter().map(|b| json!({"name": b.name, "deviation": sig10(b.deviation)})).collect::<Vec<_>>(),
            "makhlin": makhlin_json(&makhlin),
            "matches_cnot": cnot,
        })),
        OutputFormat::Table => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} {} {}: max deviation {} (tol {})",
                if passed { "PASS" } else { "FAIL" },
                spec.kind.name(),
                fmt10(spec.parameter),
                fmt10(report.max_deviation),
                fmt10(tol)
            );
            for b in &report.blocks {
                let _ = writeln!(s, "  {:<24} {}", b.name, fmt10(b.deviation));
            }
            if let Some(m) = makhlin {
                let _ = writeln!(
                    s,
                    "  makhlin G1 = {} + {}i, G2 = {}{}",
                    fmt10(m.g1.re),
                    fmt10(m.g1.im),
                    fmt10(m.g2),
                    if cnot == Some(true) { " (CNOT class)" } else { "" }
                );
            }
            s
        }
    };
    Ok(Outcome {
        stdout,
        code: if passed { 0 } else { 1 },
    })
}

fn rewrite(input: &Path, layout: &str, trace: Option<&Path>, out: Option<&Path>) -> Result<Outcome, CliError> {
    let layout = parse_layout(layout)?;
    let file = SequenceFile::load(input)?;
    let seq = file.to_sequence()?;
    let n = normalize(&seq, &layout).map_err(other)?;
    if let Some(path) = trace {
        write_file(path, &format!("{}\n", TraceFile::from_trace(&n.trace).to_json()))?;
    }
    if let Some(path) = out {
        let mut f = SequenceFile::from_sequence(&n.core);
        f.corrections = file.corrections.clone();
        write_file(path, &format!("{}\n", f.to_json()))?;
    }
    Ok(Outcome::ok(pretty(&json!({
        "before": seq.len(),
        "after": n.core.len(),
        "non_swap_before": pulse_count(&seq, CountMode::NonSwap),
        "non_swap_after": pulse_count(&n.core, CountMode::NonSwap),
        "residual_swaps": n.residual_swaps.iter().map(|p| [p.i(), p.j()]).collect::<Vec<_>>(),
        "residual_permutation": n.residual,
        "residual_absorbable": n.residual_absorbable(),
        "sign": n.sign,
        "steps": n.trace.steps.len(),
    }))))
}

/// CSV rows over `points` uniform parameter values.
pub fn sweep_csv(gate: SweepGate, points: usize) -> Result<String, CliError> {
    if points < 2 {
        return Err(CliError::validation("--points must be at least 2"));
    }
    let (lo, hi) = match gate {
        SweepGate::Crot => (0.0, crot_t_max()),
        SweepGate::Cphase => (0.0, 2.0 * PI),
    };
    let mut s = String::from(match gate {
        SweepGate::Crot => "t,phi_of_t,rotation_angle,leakage,g1_re,g1_im,g2\n",
        SweepGate::Cphase => "phi,phase_invariant,leakage,g1_re,g1_im,g2\n",
    });
    for k in 0..points {
        let x = if k + 1 == points { hi } else { lo + (hi - lo) * k as f64 / (points - 1) as f64 };
        let pkg = match gate {
            SweepGate::Crot => controlled_rotation_package(x),
            SweepGate::Cphase => cphase_package(x),
        }
        .map_err(other)?;
        let u = apply_pulses(6, pkg.full_sequence().pulses()).map_err(other)?;
        let mut leakage = 0.0f64;
        let mut first = None;
        for g in [0, 1] {
            let r = ea::extract_gate_unitary(&u, &EncodedBasis::new(g).map_err(other)?);
            leakage = leakage.max(r.leakage);
            first.get_or_insert(r);
        }
        let r = first.expect("two sectors");
        let (g1, g2) = r.makhlin.map(|m| (m.g1, m.g2)).unwrap_or((xpulse_core::Complex64::new(f64::NAN, f64::NAN), f64::NAN));
        let tail = format!("{},{},{},{}", fmt10(leakage), fmt10(g1.re), fmt10(g1.im), fmt10(g2));
        match gate {
            SweepGate::Crot => {
                let phi = ea::phi_of_t(x).map_err(other)?;
                let g00 = r.gate[(0, 0)];
                let m = r.gate.map(|z| z * (g00.conj() / g00.norm())).view((2, 2), (2, 2)).into_owned();
                let angle = ea::rotation_angle_with_phase(&m, -PI * x / 2.0).map_err(other)?;
                let _ = writeln!(s, "{},{},{},{tail}", fmt10(x), fmt10(phi), fmt10(angle));
            }
            SweepGate::Cphase => {
                let inv = r.diagonal_phase_invariant.map(fmt10).unwrap_or_default();
                let _ = writeln!(s, "{},{inv},{tail}", fmt10(x));
            }
        }
    }
    Ok(s)
}

/// Acceptance table text; exit code 1 when any row fails.
pub fn reproduce() -> Outcome {
    let rows = acceptance::run_all();
    let mut s = String::new();
    for r in &rows {
        s.push_str(&r.line());
        s.push('\n');
    }
    Outcome {
        stdout: s,
        code: if rows.iter().all(|r| r.passed) { 0 } else { 1 },
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Simulate {
            input,
            sector,
            format,
            out,
        } => simulate(input, *sector, *format, out.as_deref()),
        Command::Verify { input, gate, tol, format } => verify(input.as_deref(), gate, *tol, *format),
        Command::Synthesize { gate, out } => {
            let file = synthesize(&gate_spec(gate)?)?;
            let text = format!("{}\n", file.to_json());
            match out {
                Some(path) => {
                    write_file(path, &text)?;
                    Ok(Outcome::ok(String::new()))
                }
                None => Ok(Outcome::ok(text)),
            }
        }
        Command::Rewrite {
            input,
            layout,
            trace,
            out,
        } => rewrite(input, layout, trace.as_deref(), out.as_deref()),
        Command::Sweep { gate, points, out } => {
            let csv = sweep_csv(*gate, *points)?;
            match out {
                Some(path) => {
                    write_file(path, &csv)?;
                    Ok(Outcome::ok(String::new()))
                }
                None => Ok(Outcome::ok(csv)),
            }
        }
        Command::Reproduce => Ok(reproduce()),
    }
}

/// Parses `args` and runs; usage errors map to exit code 2.
pub fn run_args<I, T>(args: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError {
            code: 0,
            kind: "help",
            message: e.to_string(),
        },
        _ => CliError::validation(e.to_string()),
    })?;
    run(&cli)
}
