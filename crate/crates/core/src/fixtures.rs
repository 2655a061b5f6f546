//! Reference sequences for the FW equivalence.

use alloc::vec::Vec;

use crate::gate_library::{fw_residual, fw_sequence, FwVariant};
use crate::pulse_sequence::{Layout, PulseSequence};
use crate::rewrite_engine::{equivalence_trace, merge_prefix, RewriteError, RewriteTrace};
use crate::spin_system::ExchangePulse;

/// The 18-pulse nearest-neighbour form, `(i, j, t)` in time order.
pub const FW_RHS: [(usize, usize, f64); 18] = [
    (2, 3, 1.5),
    (3, 4, 1.0),
    (2, 3, 0.5),
    (4, 5, 0.5),
    (3, 4, 0.5),
    (1, 2, 1.0),
    (2, 3, 0.5),
    (3, 4, 1.0),
    (4, 5, 1.5),
    (3, 4, 1.0),
    (1, 2, 0.5),
    (2, 3, 0.5),
    (3, 4, 0.5),
    (1, 2, 1.0),
    (2, 3, 0.5),
    (4, 5, 0.5),
    (3, 4, 1.0),
    (2, 3, 1.5),
];

/// The same operation before same-pair neighbours are merged.
pub const FW_RHS_UNMERGED: [(usize, usize, f64); 23] = [
    (2, 3, 1.0),
    (2, 3, 0.5),
    (3, 4, 1.0),
    (2, 3, 1.0),
    (2, 3, 1.5),
    (4, 5, 0.5),
    (3, 4, 1.0),
    (3, 4, 1.5),
    (1, 2, 1.0),
    (2, 3, 0.5),
    (3, 4, 1.0),
    (4, 5, 1.5),
    (3, 4, 1.0),
    (1, 2, 0.5),
    (2, 3, 1.0),
    (2, 3, 1.5),
    (3, 4, 0.5),
    (1, 2, 1.0),
    (2, 3, 1.0),
    (2, 3, 1.5),
    (4, 5, 0.5),
    (3, 4, 1.0),
    (2, 3, 1.5),
];

fn to_pulses(table: &[(usize, usize, f64)]) -> Vec<ExchangePulse> {
    table
        .iter()
        .map(|&(i, j, t)| ExchangePulse::raw(i, j, t))
        .collect()
}

pub fn fw_rhs() -> Vec<ExchangePulse> {
    to_pulses(&FW_RHS)
}

pub fn fw_rhs_unmerged() -> Vec<ExchangePulse> {
    to_pulses(&FW_RHS_UNMERGED)
}

/// Trace taking the 20-pulse form to the 18-pulse form followed by `SWAP(4,5)`.
///
/// Both sides are brought to a common SWAP normal form; the unmerged right
/// side is then merged pairwise.
pub fn fw_equivalence_trace() -> Result<RewriteTrace, RewriteError> {
    let lhs = fw_sequence(FwVariant::Lhs);
    let mut target = fw_rhs_unmerged();
    target.extend(fw_residual());
    let target = PulseSequence::new(6, Layout::Linear, target)?;
    let mut trace = equivalence_trace(&lhs, &target)?;
    let mut pulses = target.pulses().to_vec();
    let end = pulses.len() - 1;
    let (end, _) = merge_prefix(&mut pulses, 6, end, &mut trace.steps)?;
    trace.end = PulseSequence::new(6, Layout::Linear, pulses[..end].to_vec())?;
    trace.residual = pulses[end..].to_vec();
    Ok(trace)
}
