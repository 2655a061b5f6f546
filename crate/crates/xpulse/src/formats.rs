//! JSON documents: sequences, encoded-gate reports and rewrite traces.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use xpulse_core::encoded_analysis::EncodedGateReport;
use xpulse_core::gate_library::{GateKind, NamedGateSpec};
use xpulse_core::pulse_sequence::{GateSequencePackage, Layout, PulseSequence};
use xpulse_core::rewrite_engine::{Mover, RewriteStep, RewriteTrace, Rule};
use xpulse_core::spin_system::ExchangePulse;
use xpulse_core::Complex64;

#[derive(Debug)]
pub enum FormatError {
    Io(std::io::Error),
    /// Parse error with serde's line/column diagnostics.
    Json(serde_json::Error),
    Invalid { field: String, message: String },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Io(e) => write!(f, "io: {e}"),
            FormatError::Json(e) => write!(f, "malformed document: {e}"),
            FormatError::Invalid { field, message } => write!(f, "{field}: {message}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Io(e)
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json(e)
    }
}

fn invalid(field: impl Into<String>, message: impl fmt::Display) -> FormatError {
    FormatError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

/// Rounds to 10 significant digits for human-facing output.
pub fn sig10(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

/// Formats with 10 significant digits, scientific outside `[1e-4, 1e10)`.
pub fn fmt10(x: f64) -> String {
    let r = sig10(x);
    if r == 0.0 {
        return "0".into();
    }
    if !r.is_finite() || (1e-4..1e10).contains(&r.abs()) {
        return format!("{r}");
    }
    let s = format!("{r:.9e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exp}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub i: usize,
    pub j: usize,
    pub t: f64,
}

impl From<&ExchangePulse> for PulseRecord {
    fn from(p: &ExchangePulse) -> Self {
        PulseRecord {
            i: p.i(),
            j: p.j(),
            t: p.t(),
        }
    }
}

fn records(pulses: &[ExchangePulse]) -> Vec<PulseRecord> {
    pulses.iter().map(PulseRecord::from).collect()
}

fn to_pulses(field: &str, recs: &[PulseRecord], n_spins: usize) -> Result<Vec<ExchangePulse>, FormatError> {
    recs.iter()
        .enumerate()
        .map(|(k, r)| {
            let p = ExchangePulse::new(r.i, r.j, r.t).map_err(|e| invalid(format!("{field}[{k}]"), e))?;
            p.check(n_spins).map_err(|e| invalid(format!("{field}[{k}]"), e))?;
            Ok(p)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayoutRecord {
    Named(String),
    Edges { edges: Vec<[usize; 2]> },
}

impl LayoutRecord {
    pub fn from_layout(layout: &Layout) -> Self {
        match layout {
            Layout::Linear => LayoutRecord::Named("linear".into()),
            Layout::Complete => LayoutRecord::Named("complete".into()),
            Layout::Edges(e) => LayoutRecord::Edges {
                edges: e.iter().map(|&(a, b)| [a, b]).collect(),
            },
        }
    }

    pub fn to_layout(&self) -> Result<Layout, FormatError> {
        match self {
            LayoutRecord::Named(s) => parse_layout(s),
            LayoutRecord::Edges { edges } => Ok(Layout::Edges(edges.iter().map(|e| (e[0], e[1])).collect())),
        }
    }
}

pub fn parse_layout(s: &str) -> Result<Layout, FormatError> {
    match s {
        "linear" => Ok(Layout::Linear),
        "complete" => Ok(Layout::Complete),
        other => Err(invalid("layout", format!("unknown layout '{other}' (expected linear or complete)"))),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corrections {
    #[serde(default)]
    pub pre: Vec<PulseRecord>,
    #[serde(default)]
    pub post: Vec<PulseRecord>,
}

/// Named gate a sequence file claims to implement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: String,
    pub parameter: f64,
    #[serde(default)]
    pub offset: usize,
}

impl GateRecord {
    pub fn from_spec(spec: &NamedGateSpec) -> Self {
        GateRecord {
            kind: spec.kind.name().into(),
            parameter: spec.parameter,
            offset: spec.offset,
        }
    }

    pub fn to_spec(&self) -> Result<NamedGateSpec, FormatError> {
        let kind = GateKind::from_name(&self.kind).ok_or_else(|| invalid("gate.kind", format!("unknown gate '{}'", self.kind)))?;
        if !self.parameter.is_finite() {
            return Err(invalid("gate.parameter", "not finite"));
        }
        Ok(NamedGateSpec {
            kind,
            parameter: self.parameter,
            offset: self.offset,
        })
    }
}

/// `{"n_spins", "layout", "pulses", "corrections"?, "gate"?, "rewritten"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFile {
    pub n_spins: usize,
    pub layout: LayoutRecord,
    pub pulses: Vec<PulseRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrections: Option<Corrections>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateRecord>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rewritten: bool,
}

impl SequenceFile {
    pub fn from_sequence(seq: &PulseSequence) -> Self {
        SequenceFile {
            n_spins: seq.n_spins(),
            layout: LayoutRecord::from_layout(seq.layout()),
            pulses: records(seq.pulses()),
            corrections: None,
            gate: None,
            rewritten: seq.is_rewritten(),
        }
    }

    pub fn from_package(pkg: &GateSequencePackage) -> Self {
        let mut f = Self::from_sequence(pkg.core());
        f.corrections = Some(Corrections {
            pre: records(pkg.pre_corrections().pulses()),
            post: records(pkg.post_corrections().pulses()),
        });
        f
    }

    pub fn with_gate(mut self, spec: &NamedGateSpec) -> Self {
        self.gate = Some(GateRecord::from_spec(spec));
        self
    }

    /// The core sequence; layout is enforced unless the file is marked rewritten.
    pub fn to_sequence(&self) -> Result<PulseSequence, FormatError> {
        let layout = self.layout.to_layout()?;
        let pulses = to_pulses("pulses", &self.pulses, self.n_spins)?;
        PulseSequence::with_flag(self.n_spins, layout, pulses, self.rewritten).map_err(|e| invalid("pulses", e))
    }

    /// Pre-corrections, core and post-corrections in time order.
    pub fn full_pulses(&self) -> Result<Vec<ExchangePulse>, FormatError> {
        let mut out = Vec::new();
        let empty = Corrections::default();
        let c = self.corrections.as_ref().unwrap_or(&empty);
        out.extend(to_pulses("corrections.pre", &c.pre, self.n_spins)?);
        out.extend(self.to_sequence()?.pulses().iter().copied());
        out.extend(to_pulses("corrections.post", &c.post, self.n_spins)?);
        Ok(out)
    }

    pub fn full_sequence(&self) -> Result<PulseSequence, FormatError> {
        let layout = self.layout.to_layout()?;
        PulseSequence::with_flag(self.n_spins, layout, self.full_pulses()?, true).map_err(|e| invalid("pulses", e))
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let f: SequenceFile = serde_json::from_str(text)?;
        if f.n_spins == 0 || f.n_spins > xpulse_core::spin_system::MAX_SPINS {
            return Err(invalid(
                "n_spins",
                format!("{} outside 1..={}", f.n_spins, xpulse_core::spin_system::MAX_SPINS),
            ));
        }
        f.full_pulses()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakhlinRecord {
    pub g1: [f64; 2],
    pub g2: f64,
}

/// `{"leakage", "gate", "makhlin", "phase_invariant", "classification"}`,
/// numbers rounded to 10 significant digits; `gate` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub leakage: f64,
    pub gate: Vec<[f64; 2]>,
    pub makhlin: Option<MakhlinRecord>,
    pub phase_invariant: Option<f64>,
    pub classification: String,
}

fn c2(z: Complex64) -> [f64; 2] {
    [sig10(z.re), sig10(z.im)]
}

impl ReportFile {
    pub fn from_report(r: &EncodedGateReport) -> Self {
        let mut gate = Vec::with_capacity(16);
        for row in 0..r.gate.nrows() {
            for col in 0..r.gate.ncols() {
                gate.push(c2(r.gate[(row, col)]));
            }
        }
        ReportFile {
            leakage: sig10(r.leakage),
            gate,
            makhlin: r.makhlin.map(|m| MakhlinRecord {
                g1: c2(m.g1),
                g2: sig10(m.g2),
            }),
            phase_invariant: r.diagonal_phase_invariant.map(sig10),
            classification: r.block_structure.name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub rule: String,
    pub position: usize,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl StepRecord {
    pub fn from_step(step: &RewriteStep) -> Self {
        use serde_json::json;
        let params = match *step {
            RewriteStep::SwapCommute { mover, .. } => json!({
                "mover": match mover { Mover::Left => "left", Mover::Right => "right" }
            }),
            RewriteStep::MergeSplit { split, .. } => json!({ "split": split }),
            RewriteStep::SwapPairInsert { i, j, .. } => json!({ "i": i, "j": j }),
            RewriteStep::SwapPairRemove { .. } | RewriteStep::DropZeroPulse { .. } => json!({}),
            RewriteStep::ThreeSwapReduce { expand, .. } => json!({ "expand": expand.map(|(a, b)| [a, b]) }),
        };
        StepRecord {
            rule: step.rule().name().into(),
            position: step.position(),
            params,
        }
    }

    pub fn to_step(&self, k: usize) -> Result<RewriteStep, FormatError> {
        let field = |name: &str| format!("steps[{k}].params.{name}");
        let rule = Rule::from_name(&self.rule).ok_or_else(|| invalid(format!("steps[{k}].rule"), format!("unknown rule '{}'", self.rule)))?;
        let p = &self.params;
        let uint = |name: &str| -> Result<usize, FormatError> {
            p.get(name)
                .and_then(|v| v.as_u64())
                .map(|v| v as usize)
                .ok_or_else(|| invalid(field(name), "expected a non-negative integer"))
        };
        let position = self.position;
        Ok(match rule {
            Rule::SwapCommute => {
                let mover = match p.get("mover").and_then(|v| v.as_str()) {
                    Some("left") => Mover::Left,
                    Some("right") => Mover::Right,
                    _ => return Err(invalid(field("mover"), "expected \"left\" or \"right\"")),
                };
                RewriteStep::SwapCommute { position, mover }
            }
            Rule::MergeSplit => {
                let split = match p.get("split") {
                    None | Some(serde_json::Value::Null) => None,
                    Some(v) => Some(v.as_f64().ok_or_else(|| invalid(field("split"), "expected a number or null"))?),
                };
                RewriteStep::MergeSplit { position, split }
            }
            Rule::SwapPairInsert => RewriteStep::SwapPairInsert {
                position,
                i: uint("i")?,
                j: uint("j")?,
            },
            Rule::SwapPairRemove => RewriteStep::SwapPairRemove { position },
            Rule::DropZeroPulse => RewriteStep::DropZeroPulse { position },
            Rule::ThreeSwapReduce => {
                let expand = match p.get("expand") {
                    None | Some(serde_json::Value::Null) => None,
                    Some(v) => {
                        let a: [usize; 2] = serde_json::from_value(v.clone()).map_err(|_| invalid(field("expand"), "expected [lead, via] or null"))?;
                        Some((a[0], a[1]))
                    }
                };
                RewriteStep::ThreeSwapReduce { position, expand }
            }
        })
    }
}

/// `{"n_spins", "start", "steps": [{rule, position, params}], "end", "residual"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub n_spins: usize,
    pub layout: LayoutRecord,
    pub start: Vec<PulseRecord>,
    pub steps: Vec<StepRecord>,
    pub end: Vec<PulseRecord>,
    #[serde(default)]
    pub residual: Vec<PulseRecord>,
}

impl TraceFile {
    pub fn from_trace(t: &RewriteTrace) -> Self {
        TraceFile {
            n_spins: t.start.n_spins(),
            layout: LayoutRecord::from_layout(t.start.layout()),
            start: records(t.start.pulses()),
            steps: t.steps.iter().map(StepRecord::from_step).collect(),
            end: records(t.end.pulses()),
            residual: records(&t.residual),
        }
    }

    pub fn to_trace(&self) -> Result<RewriteTrace, FormatError> {
        let n = self.n_spins;
        let layout = self.layout.to_layout()?;
        let start = PulseSequence::with_flag(n, layout.clone(), to_pulses("start", &self.start, n)?, true).map_err(|e| invalid("start", e))?;
        let end = PulseSequence::with_flag(n, layout, to_pulses("end", &self.end, n)?, true).map_err(|e| invalid("end", e))?;
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(k, s)| s.to_step(k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RewriteTrace {
            start,
            steps,
            end,
            residual: to_pulses("residual", &self.residual, n)?,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig10_rounds() {
        assert_eq!(sig10(2.0 / 3.0), 0.6666666667);
        assert_eq!(fmt10(0.0), "0");
        assert_eq!(fmt10(1.0e-20), "1e-20");
        assert_eq!(fmt10(7.0290883803150e-16), "7.02908838e-16");
        assert_eq!(fmt10(0.5), "0.5");
    }

    #[test]
    fn layout_records() {
        let e: LayoutRecord = serde_json::from_str(r#"{"edges":[[0,2]]}"#).unwrap();
        assert_eq!(e.to_layout().unwrap(), Layout::Edges(vec![(0, 2)]));
        let n: LayoutRecord = serde_json::from_str(r#""ring""#).unwrap();
        assert!(n.to_layout().is_err());
    }
}
