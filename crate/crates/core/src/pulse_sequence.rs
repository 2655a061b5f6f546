//! Sequence data model: connectivity, pulse counting, correction packaging.

use alloc::vec::Vec;
use core::fmt;

use crate::spin_system::{ExchangePulse, SpinError, DURATION_EPS};

/// Which spin pairs may be pulsed directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layout {
    /// Nearest neighbours on a line.
    Linear,
    /// Every pair.
    Complete,
    /// Explicit undirected edges.
    Edges(Vec<(usize, usize)>),
}

impl Layout {
    pub fn allows(&self, i: usize, j: usize) -> bool {
        match self {
            Layout::Linear => i.abs_diff(j) == 1,
            Layout::Complete => i != j,
            Layout::Edges(edges) => edges
                .iter()
                .any(|&(a, b)| (a == i && b == j) || (a == j && b == i)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceError {
    Pulse { index: usize, error: SpinError },
    LayoutViolation { index: usize, i: usize, j: usize },
    CorrectionCrossesQubits { index: usize, i: usize, j: usize },
    RegisterMismatch { expected: usize, found: usize },
}

impl fmt::Display for SequenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceError::Pulse { index, error } => write!(f, "pulse {index}: {error}"),
            SequenceError::LayoutViolation { index, i, j } => {
                write!(f, "pulse {index}: pair ({i},{j}) not allowed by the layout")
            }
            SequenceError::CorrectionCrossesQubits { index, i, j } => write!(
                f,
                "correction pulse {index}: pair ({i},{j}) spans two encoded qubits"
            ),
            SequenceError::RegisterMismatch { expected, found } => {
                write!(f, "register size mismatch: expected {expected}, found {found}")
            }
        }
    }
}

/// Ordered exchange pulses on an `n_spins` register.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    n_spins: usize,
    pulses: Vec<ExchangePulse>,
    layout: Layout,
    rewritten: bool,
}

impl PulseSequence {
    /// Validates indices and, unless `rewritten`, the layout.
    pub fn new(n_spins: usize, layout: Layout, pulses: Vec<ExchangePulse>) -> Result<Self, SequenceError> {
        Self::build(n_spins, layout, pulses, false)
    }

    /// Output of the rewrite engine: layout adjacency is not enforced.
    pub fn rewritten(n_spins: usize, layout: Layout, pulses: Vec<ExchangePulse>) -> Result<Self, SequenceError> {
        Self::build(n_spins, layout, pulses, true)
    }

    pub fn with_flag(n_spins: usize, layout: Layout, pulses: Vec<ExchangePulse>, rewritten: bool) -> Result<Self, SequenceError> {
        Self::build(n_spins, layout, pulses, rewritten)
    }

    fn build(n_spins: usize, layout: Layout, pulses: Vec<ExchangePulse>, rewritten: bool) -> Result<Self, SequenceError> {
        if n_spins > crate::spin_system::MAX_SPINS {
            return Err(SequenceError::Pulse {
                index: 0,
                error: SpinError::TooManySpins(n_spins),
            });
        }
        for (index, p) in pulses.iter().enumerate() {
            p.check(n_spins)
                .map_err(|error| SequenceError::Pulse { index, error })?;
            if !rewritten && !layout.allows(p.i(), p.j()) {
                return Err(SequenceError::LayoutViolation {
                    index,
                    i: p.i(),
                    j: p.j(),
                });
            }
        }
        Ok(Self {
            n_spins,
            pulses,
            layout,
            rewritten,
        })
    }

    pub fn empty(n_spins: usize, layout: Layout) -> Self {
        Self {
            n_spins,
            pulses: Vec::new(),
            layout,
            rewritten: false,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn pulses(&self) -> &[ExchangePulse] {
        &self.pulses
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn is_rewritten(&self) -> bool {
        self.rewritten
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Same register and layout, different pulses, marked as rewritten.
    pub fn with_rewritten_pulses(&self, pulses: Vec<ExchangePulse>) -> Result<Self, SequenceError> {
        Self::build(self.n_spins, self.layout.clone(), pulses, true)
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &PulseSequence) -> Result<Self, SequenceError> {
        if self.n_spins != other.n_spins {
            return Err(SequenceError::RegisterMismatch {
                expected: self.n_spins,
                found: other.n_spins,
            });
        }
        let mut pulses = self.pulses.clone();
        pulses.extend_from_slice(&other.pulses);
        Self::build(
            self.n_spins,
            self.layout.clone(),
            pulses,
            self.rewritten || other.rewritten,
        )
    }

    /// Pulse-by-pulse equality with durations compared within [`DURATION_EPS`].
    pub fn approx_eq(&self, other: &PulseSequence) -> bool {
        self.n_spins == other.n_spins
            && self.pulses.len() == other.pulses.len()
            && self
                .pulses
                .iter()
                .zip(&other.pulses)
                .all(|(a, b)| a.approx_eq(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    All,
    /// Pulses other than identities and SWAPs.
    NonSwap,
}

pub fn pulse_count(seq: &PulseSequence, mode: CountMode) -> usize {
    match mode {
        CountMode::All => seq.len(),
        CountMode::NonSwap => seq
            .pulses()
            .iter()
            .filter(|p| !p.is_swap() && !p.is_identity())
            .count(),
    }
}

/// Spin triples of the two encoded qubits on the six-spin register.
pub const QUBIT_TRIPLES: [[usize; 3]; 2] = [[0, 1, 2], [3, 4, 5]];

fn within_one_qubit(i: usize, j: usize) -> bool {
    QUBIT_TRIPLES
        .iter()
        .any(|t| t.contains(&i) && t.contains(&j))
}

/// Core sequence with single-qubit pulses split off on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequencePackage {
    core: PulseSequence,
    pre_corrections: PulseSequence,
    post_corrections: PulseSequence,
}

impl GateSequencePackage {
    pub fn new(
        core: PulseSequence,
        pre_corrections: PulseSequence,
        post_corrections: PulseSequence,
    ) -> Result<Self, SequenceError> {
        for part in [&pre_corrections, &post_corrections] {
            if part.n_spins() != core.n_spins() {
                return Err(SequenceError::RegisterMismatch {
                    expected: core.n_spins(),
                    found: part.n_spins(),
                });
            }
            for (index, p) in part.pulses().iter().enumerate() {
                if !within_one_qubit(p.i(), p.j()) {
                    return Err(SequenceError::CorrectionCrossesQubits {
                        index,
                        i: p.i(),
                        j: p.j(),
                    });
                }
            }
        }
        Ok(Self {
            core,
            pre_corrections,
            post_corrections,
        })
    }

    pub fn core(&self) -> &PulseSequence {
        &self.core
    }

    pub fn pre_corrections(&self) -> &PulseSequence {
        &self.pre_corrections
    }

    pub fn post_corrections(&self) -> &PulseSequence {
        &self.post_corrections
    }

    /// Pre-corrections, core, post-corrections in time order.
    pub fn full_sequence(&self) -> PulseSequence {
        let mut pulses = self.pre_corrections.pulses().to_vec();
        pulses.extend_from_slice(self.core.pulses());
        pulses.extend_from_slice(self.post_corrections.pulses());
        PulseSequence {
            n_spins: self.core.n_spins(),
            pulses,
            layout: self.core.layout().clone(),
            rewritten: self.core.is_rewritten()
                || self.pre_corrections.is_rewritten()
                || self.post_corrections.is_rewritten(),
        }
    }
}

/// Durations equal within [`DURATION_EPS`] on the circle of length 2.
pub fn same_duration(a: f64, b: f64) -> bool {
    crate::spin_system::duration_distance(a, b) < DURATION_EPS
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: usize, j: usize, t: f64) -> ExchangePulse {
        ExchangePulse::new(i, j, t).unwrap()
    }

    #[test]
    fn layout_rules() {
        assert!(Layout::Linear.allows(2, 3));
        assert!(!Layout::Linear.allows(1, 3));
        assert!(Layout::Complete.allows(0, 5));
        assert!(Layout::Edges(alloc::vec![(0, 2)]).allows(2, 0));
        let err = PulseSequence::new(4, Layout::Linear, alloc::vec![p(0, 1, 0.5), p(0, 2, 0.5)]);
        assert_eq!(err.unwrap_err(), SequenceError::LayoutViolation { index: 1, i: 0, j: 2 });
        assert!(PulseSequence::rewritten(4, Layout::Linear, alloc::vec![p(0, 2, 0.5)]).is_ok());
        assert!(matches!(
            PulseSequence::new(2, Layout::Complete, alloc::vec![p(0, 2, 0.5)]),
            Err(SequenceError::Pulse { index: 0, .. })
        ));
    }

    #[test]
    fn counts() {
        let s = PulseSequence::new(
            3,
            Layout::Linear,
            alloc::vec![p(0, 1, 1.0), p(1, 2, 0.3), p(0, 1, 0.0)],
        )
        .unwrap();
        assert_eq!(pulse_count(&s, CountMode::All), 3);
        assert_eq!(pulse_count(&s, CountMode::NonSwap), 1);
        assert_eq!(pulse_count(&PulseSequence::empty(3, Layout::Linear), CountMode::All), 0);
    }

    #[test]
    fn corrections_must_stay_inside_a_qubit() {
        let core = PulseSequence::empty(6, Layout::Linear);
        let bad = PulseSequence::new(6, Layout::Linear, alloc::vec![p(2, 3, 0.5)]).unwrap();
        let ok = PulseSequence::new(6, Layout::Linear, alloc::vec![p(4, 5, 0.5)]).unwrap();
        assert!(GateSequencePackage::new(core.clone(), ok.clone(), ok.clone()).is_ok());
        assert!(matches!(
            GateSequencePackage::new(core, bad, ok),
            Err(SequenceError::CorrectionCrossesQubits { .. })
        ));
    }
}
