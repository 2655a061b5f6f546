//! Exact pulse-sequence rewriting.
//!
//! Every rule preserves the sequence unitary exactly, phases included:
//! moving a SWAP across a pulse conjugates that pulse by the transposition,
//! same-pair pulses add durations, `(−P)² = 1`, and
//! `(−P_ij)(−P_jk)(−P_ij) = −P_ik`.

use alloc::vec::Vec;
use core::fmt;

use crate::pulse_sequence::{Layout, PulseSequence, SequenceError};
use crate::spin_system::{apply_pulses, max_abs_diff, ExchangePulse, SpinError};

/// Agreement required between the unitaries of two sides of a rewrite.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    SwapCommute,
    MergeSplit,
    SwapPairInsert,
    SwapPairRemove,
    ThreeSwapReduce,
    DropZeroPulse,
}

impl Rule {
    pub const ALL: [Rule; 6] = [
        Rule::SwapCommute,
        Rule::MergeSplit,
        Rule::SwapPairInsert,
        Rule::SwapPairRemove,
        Rule::ThreeSwapReduce,
        Rule::DropZeroPulse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::SwapCommute => "SwapCommute",
            Rule::MergeSplit => "MergeSplit",
            Rule::SwapPairInsert => "SwapPairInsert",
            Rule::SwapPairRemove => "SwapPairRemove",
            Rule::ThreeSwapReduce => "ThreeSwapReduce",
            Rule::DropZeroPulse => "DropZeroPulse",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == name)
    }
}

/// Which element of the adjacent pair at `position, position + 1` is the SWAP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mover {
    /// The SWAP at `position` moves one place later.
    Left,
    /// The SWAP at `position + 1` moves one place earlier.
    Right,
}

/// One elementary manipulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewriteStep {
    SwapCommute {
        position: usize,
        mover: Mover,
    },
    /// `None` merges `position` and `position + 1`; `Some(t1)` splits the
    /// pulse at `position` into durations `t1` and `t − t1`.
    MergeSplit {
        position: usize,
        split: Option<f64>,
    },
    /// Inserts `SWAP(i,j) SWAP(i,j)` before `position`.
    SwapPairInsert {
        position: usize,
        i: usize,
        j: usize,
    },
    SwapPairRemove {
        position: usize,
    },
    /// `None` reduces `SWAP(a,b) SWAP(b,c) SWAP(a,b)` to `SWAP(a,c)`;
    /// `Some((lead, via))` expands `SWAP(lead, k)` into
    /// `SWAP(lead,via) SWAP(via,k) SWAP(lead,via)`.
    ThreeSwapReduce {
        position: usize,
        expand: Option<(usize, usize)>,
    },
    DropZeroPulse {
        position: usize,
    },
}

impl RewriteStep {
    pub fn rule(&self) -> Rule {
        match self {
            RewriteStep::SwapCommute { .. } => Rule::SwapCommute,
            RewriteStep::MergeSplit { .. } => Rule::MergeSplit,
            RewriteStep::SwapPairInsert { .. } => Rule::SwapPairInsert,
            RewriteStep::SwapPairRemove { .. } => Rule::SwapPairRemove,
            RewriteStep::ThreeSwapReduce { .. } => Rule::ThreeSwapReduce,
            RewriteStep::DropZeroPulse { .. } => Rule::DropZeroPulse,
        }
    }

    pub fn position(&self) -> usize {
        match *self {
            RewriteStep::SwapCommute { position, .. }
            | RewriteStep::MergeSplit { position, .. }
            | RewriteStep::SwapPairInsert { position, .. }
            | RewriteStep::SwapPairRemove { position }
            | RewriteStep::ThreeSwapReduce { position, .. }
            | RewriteStep::DropZeroPulse { position } => position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RewriteError {
    NotApplicable {
        rule: Rule,
        position: usize,
        reason: &'static str,
    },
    Sequence(SequenceError),
    Simulation(SpinError),
    NotInvertible {
        step: usize,
        rule: Rule,
    },
    NormalFormMismatch,
    ReplayMismatch {
        deviation: f64,
    },
}

impl fmt::Display for RewriteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteError::NotApplicable {
                rule,
                position,
                reason,
            } => write!(f, "{} not applicable at {position}: {reason}", rule.name()),
            RewriteError::Sequence(e) => write!(f, "{e}"),
            RewriteError::Simulation(e) => write!(f, "{e}"),
            RewriteError::NotInvertible { step, rule } => {
                write!(f, "step {step} ({}) has no recorded inverse", rule.name())
            }
            RewriteError::NormalFormMismatch => {
                write!(f, "the two sequences reduce to different normal forms")
            }
            RewriteError::ReplayMismatch { deviation } => {
                write!(f, "trace replay does not reproduce its end sequence (deviation {deviation:e})")
            }
        }
    }
}

impl From<SequenceError> for RewriteError {
    fn from(e: SequenceError) -> Self {
        RewriteError::Sequence(e)
    }
}

impl From<SpinError> for RewriteError {
    fn from(e: SpinError) -> Self {
        RewriteError::Simulation(e)
    }
}

fn fail(rule: Rule, position: usize, reason: &'static str) -> RewriteError {
    RewriteError::NotApplicable {
        rule,
        position,
        reason,
    }
}

fn get(pulses: &[ExchangePulse], rule: Rule, position: usize) -> Result<ExchangePulse, RewriteError> {
    pulses
        .get(position)
        .copied()
        .ok_or_else(|| fail(rule, position, "position out of bounds"))
}

fn shared_index(a: &ExchangePulse, b: &ExchangePulse) -> Option<usize> {
    if a.same_pair(b) {
        return None;
    }
    [a.i(), a.j()].into_iter().find(|&k| b.touches(k))
}

/// Applies `step` in place on a raw pulse list for an `n_spins` register.
pub fn apply_step_in_place(
    pulses: &mut Vec<ExchangePulse>,
    n_spins: usize,
    step: &RewriteStep,
) -> Result<(), RewriteError> {
    let rule = step.rule();
    match *step {
        RewriteStep::SwapCommute { position, mover } => {
            let a = get(pulses, rule, position)?;
            let b = get(pulses, rule, position + 1)?;
            match mover {
                Mover::Left => {
                    if !a.is_swap() {
                        return Err(fail(rule, position, "moving element is not a SWAP"));
                    }
                    pulses[position] = b.transposed(a.i(), a.j());
                    pulses[position + 1] = a;
                }
                Mover::Right => {
                    if !b.is_swap() {
                        return Err(fail(rule, position, "moving element is not a SWAP"));
                    }
                    pulses[position] = b;
                    pulses[position + 1] = a.transposed(b.i(), b.j());
                }
            }
        }
        RewriteStep::MergeSplit { position, split } => {
            let a = get(pulses, rule, position)?;
            match split {
                None => {
                    let b = get(pulses, rule, position + 1)?;
                    if !a.same_pair(&b) {
                        return Err(fail(rule, position, "adjacent pulses act on different pairs"));
                    }
                    pulses[position] = a.with_duration(a.t() + b.t());
                    pulses.remove(position + 1);
                }
                Some(t1) => {
                    if !t1.is_finite() {
                        return Err(fail(rule, position, "split duration is not finite"));
                    }
                    pulses[position] = a.with_duration(t1);
                    pulses.insert(position + 1, a.with_duration(a.t() - t1));
                }
            }
        }
        RewriteStep::SwapPairInsert { position, i, j } => {
            if position > pulses.len() {
                return Err(fail(rule, position, "position out of bounds"));
            }
            if i == j || i >= n_spins || j >= n_spins {
                return Err(fail(rule, position, "invalid SWAP indices"));
            }
            let s = ExchangePulse::raw(i, j, 1.0);
            pulses.insert(position, s);
            pulses.insert(position, s);
        }
        RewriteStep::SwapPairRemove { position } => {
            let a = get(pulses, rule, position)?;
            let b = get(pulses, rule, position + 1)?;
            if !(a.is_swap() && b.is_swap() && a.same_pair(&b)) {
                return Err(fail(rule, position, "not two identical adjacent SWAPs"));
            }
            pulses.drain(position..position + 2);
        }
        RewriteStep::ThreeSwapReduce { position, expand } => match expand {
            None => {
                let a = get(pulses, rule, position)?;
                let b = get(pulses, rule, position + 1)?;
                let c = get(pulses, rule, position + 2)?;
                if !(a.is_swap() && b.is_swap() && c.is_swap()) {
                    return Err(fail(rule, position, "pattern requires three SWAPs"));
                }
                if !a.same_pair(&c) || shared_index(&a, &b).is_none() {
                    return Err(fail(rule, position, "not a SWAP(i,j) SWAP(j,k) SWAP(i,j) pattern"));
                }
                pulses[position] = b.transposed(a.i(), a.j());
                pulses.drain(position + 1..position + 3);
            }
            Some((lead, via)) => {
                let a = get(pulses, rule, position)?;
                if !a.is_swap() {
                    return Err(fail(rule, position, "element is not a SWAP"));
                }
                if !a.touches(lead) || a.touches(via) || via >= n_spins {
                    return Err(fail(rule, position, "invalid expansion indices"));
                }
                let other = if a.i() == lead { a.j() } else { a.i() };
                let outer = ExchangePulse::raw(lead, via, 1.0);
                pulses[position] = outer;
                pulses.insert(position + 1, ExchangePulse::raw(via, other, 1.0));
                pulses.insert(position + 2, outer);
            }
        },
        RewriteStep::DropZeroPulse { position } => {
            let a = get(pulses, rule, position)?;
            if !a.is_identity() {
                return Err(fail(rule, position, "pulse duration is not zero"));
            }
            pulses.remove(position);
        }
    }
    Ok(())
}

/// Applies one step, returning a sequence marked as rewrite-engine output.
pub fn apply_step(seq: &PulseSequence, step: &RewriteStep) -> Result<PulseSequence, RewriteError> {
    let mut pulses = seq.pulses().to_vec();
    apply_step_in_place(&mut pulses, seq.n_spins(), step)?;
    Ok(seq.with_rewritten_pulses(pulses)?)
}

/// Whether two pulse lists have identical unitaries (phase-sensitive).
pub fn exactly_equivalent(n_spins: usize, a: &[ExchangePulse], b: &[ExchangePulse]) -> Result<bool, RewriteError> {
    Ok(unitary_gap(n_spins, a, b)? < EXACT_TOL)
}

/// Entrywise gap between the unitaries of two pulse lists.
pub fn unitary_gap(n_spins: usize, a: &[ExchangePulse], b: &[ExchangePulse]) -> Result<f64, RewriteError> {
    let ua = apply_pulses(n_spins, a)?;
    let ub = apply_pulses(n_spins, b)?;
    Ok(max_abs_diff(ua.matrix(), ub.matrix()))
}

/// Applies the step and checks the unitary is unchanged; false if inapplicable.
pub fn verify_step(seq: &PulseSequence, step: &RewriteStep) -> bool {
    match apply_step(seq, step) {
        Ok(out) => verify_claim(seq, &out),
        Err(_) => false,
    }
}

/// Whether `after` is exactly equivalent to `before`.
pub fn verify_claim(before: &PulseSequence, after: &PulseSequence) -> bool {
    before.n_spins() == after.n_spins()
        && exactly_equivalent(before.n_spins(), before.pulses(), after.pulses()).unwrap_or(false)
}

pub fn replay(start: &PulseSequence, steps: &[RewriteStep]) -> Result<PulseSequence, RewriteError> {
    let mut pulses = start.pulses().to_vec();
    for s in steps {
        apply_step_in_place(&mut pulses, start.n_spins(), s)?;
    }
    Ok(start.with_rewritten_pulses(pulses)?)
}

/// Replayable proof that `start` equals `end` followed by `residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewriteTrace {
    pub start: PulseSequence,
    pub steps: Vec<RewriteStep>,
    pub end: PulseSequence,
    /// Pulses acting after `end`, in time order.
    pub residual: Vec<ExchangePulse>,
}

impl RewriteTrace {
    /// `end` followed by `residual`.
    pub fn end_with_residual(&self) -> Vec<ExchangePulse> {
        let mut v = self.end.pulses().to_vec();
        v.extend_from_slice(&self.residual);
        v
    }

    /// Replays the steps and checks both the pulse list and the unitary.
    ///
    /// Returns the unitary gap between `start` and `end`+`residual`.
    pub fn check(&self) -> Result<f64, RewriteError> {
        let out = replay(&self.start, &self.steps)?;
        let target = self.end_with_residual();
        let same_list = out.pulses().len() == target.len()
            && out.pulses().iter().zip(&target).all(|(a, b)| a.approx_eq(b));
        let gap = unitary_gap(self.start.n_spins(), self.start.pulses(), &target)?;
        if !same_list || gap >= EXACT_TOL {
            return Err(RewriteError::ReplayMismatch { deviation: gap });
        }
        Ok(gap)
    }
}

/// The step undoing `step` when applied to the result of `step` on `before`.
pub fn invert_step(before: &[ExchangePulse], step: &RewriteStep, index: usize) -> Result<RewriteStep, RewriteError> {
    let rule = step.rule();
    Ok(match *step {
        RewriteStep::SwapCommute { position, mover } => RewriteStep::SwapCommute {
            position,
            mover: match mover {
                Mover::Left => Mover::Right,
                Mover::Right => Mover::Left,
            },
        },
        RewriteStep::MergeSplit { position, split: None } => RewriteStep::MergeSplit {
            position,
            split: Some(get(before, rule, position)?.t()),
        },
        RewriteStep::MergeSplit { position, split: Some(_) } => RewriteStep::MergeSplit { position, split: None },
        RewriteStep::SwapPairInsert { position, .. } => RewriteStep::SwapPairRemove { position },
        RewriteStep::SwapPairRemove { position } => {
            let a = get(before, rule, position)?;
            RewriteStep::SwapPairInsert {
                position,
                i: a.i(),
                j: a.j(),
            }
        }
        RewriteStep::ThreeSwapReduce { position, expand: None } => {
            let a = get(before, rule, position)?;
            let b = get(before, rule, position + 1)?;
            let via = shared_index(&a, &b).ok_or(fail(rule, position, "no shared index"))?;
            let lead = if a.i() == via { a.j() } else { a.i() };
            RewriteStep::ThreeSwapReduce {
                position,
                expand: Some((lead, via)),
            }
        }
        RewriteStep::ThreeSwapReduce { position, expand: Some(_) } => RewriteStep::ThreeSwapReduce {
            position,
            expand: None,
        },
        RewriteStep::DropZeroPulse { .. } => return Err(RewriteError::NotInvertible { step: index, rule }),
    })
}

/// Steps taking `start` back from the result of `steps` to `start`.
pub fn invert_steps(start: &[ExchangePulse], n_spins: usize, steps: &[RewriteStep]) -> Result<Vec<RewriteStep>, RewriteError> {
    let mut state = start.to_vec();
    let mut inverse = Vec::with_capacity(steps.len());
    for (k, s) in steps.iter().enumerate() {
        inverse.push(invert_step(&state, s, k)?);
        apply_step_in_place(&mut state, n_spins, s)?;
    }
    inverse.reverse();
    Ok(inverse)
}

fn record(
    pulses: &mut Vec<ExchangePulse>,
    n_spins: usize,
    steps: &mut Vec<RewriteStep>,
    step: RewriteStep,
) -> Result<(), RewriteError> {
    apply_step_in_place(pulses, n_spins, &step)?;
    steps.push(step);
    Ok(())
}

/// Moves every SWAP in `pulses[..end]` to just before `end`, rightmost first.
///
/// Returns the start of the trailing SWAP block.
pub fn extract_swaps(
    pulses: &mut Vec<ExchangePulse>,
    n_spins: usize,
    end: usize,
    steps: &mut Vec<RewriteStep>,
) -> Result<usize, RewriteError> {
    let mut end = end;
    while let Some(k) = pulses[..end].iter().rposition(ExchangePulse::is_swap) {
        for p in k..end - 1 {
            record(
                pulses,
                n_spins,
                steps,
                RewriteStep::SwapCommute {
                    position: p,
                    mover: Mover::Left,
                },
            )?;
        }
        end -= 1;
    }
    Ok(end)
}

/// Merges same-pair neighbours and drops zero pulses in `pulses[..end]`.
///
/// Returns the new `end` and whether anything changed.
pub fn merge_prefix(
    pulses: &mut Vec<ExchangePulse>,
    n_spins: usize,
    end: usize,
    steps: &mut Vec<RewriteStep>,
) -> Result<(usize, bool), RewriteError> {
    let mut end = end;
    let mut changed = false;
    let mut k = 0;
    while k < end {
        if pulses[k].is_identity() {
            record(pulses, n_spins, steps, RewriteStep::DropZeroPulse { position: k })?;
            end -= 1;
            changed = true;
            k = k.saturating_sub(1);
        } else if k + 1 < end && pulses[k].same_pair(&pulses[k + 1]) {
            record(
                pulses,
                n_spins,
                steps,
                RewriteStep::MergeSplit {
                    position: k,
                    split: None,
                },
            )?;
            end -= 1;
            changed = true;
        } else {
            k += 1;
        }
    }
    Ok((end, changed))
}

/// Rewrites the all-SWAP block `pulses[start..]` into the canonical word of
/// its permutation, using only SWAP commutation and pair removal.
///
/// The canonical word lists, for `n` from small to large, at most one letter
/// `(a n)` with `a < n`, so distinct words mean distinct permutations.
pub fn canonicalize_swap_block(
    pulses: &mut Vec<ExchangePulse>,
    n_spins: usize,
    start: usize,
    steps: &mut Vec<RewriteStep>,
) -> Result<(), RewriteError> {
    let mut end = pulses.len();
    for n in (1..n_spins).rev() {
        // letters not containing n go left of those that do
        loop {
            let pos = (start..end.saturating_sub(1))
                .find(|&p| pulses[p].touches(n) && !pulses[p + 1].touches(n));
            match pos {
                Some(p) => record(
                    pulses,
                    n_spins,
                    steps,
                    RewriteStep::SwapCommute {
                        position: p,
                        mover: Mover::Right,
                    },
                )?,
                None => break,
            }
        }
        // shrink the block of letters containing n to at most one
        while let Some(q) = (start..end).find(|&p| pulses[p].touches(n)) {
            if end - q < 2 {
                break;
            }
            if pulses[q].same_pair(&pulses[q + 1]) {
                record(pulses, n_spins, steps, RewriteStep::SwapPairRemove { position: q })?;
                end -= 2;
            } else {
                record(
                    pulses,
                    n_spins,
                    steps,
                    RewriteStep::SwapCommute {
                        position: q,
                        mover: Mover::Left,
                    },
                )?;
            }
        }
        if end > start && pulses[end - 1].touches(n) {
            end -= 1;
        }
    }
    Ok(())
}

/// Permutation realized by a SWAP word in time order (`perm[k]` = final
/// position of the state initially on spin `k`).
pub fn swap_word_permutation(n_spins: usize, word: &[ExchangePulse]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n_spins).collect();
    for s in word {
        for p in perm.iter_mut() {
            if *p == s.i() {
                *p = s.j();
            } else if *p == s.j() {
                *p = s.i();
            }
        }
    }
    perm
}

/// Whether `perm` maps each block of spins onto itself.
pub fn preserves_blocks(perm: &[usize], blocks: &[&[usize]]) -> bool {
    blocks
        .iter()
        .all(|b| b.iter().all(|&k| k < perm.len() && b.contains(&perm[k])))
}

/// Result of [`normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub core: PulseSequence,
    /// Trailing SWAP word in canonical form.
    pub residual_swaps: Vec<ExchangePulse>,
    /// Permutation of the residual word.
    pub residual: Vec<usize>,
    /// `U(original) = sign · P(residual) · U(core)`.
    pub sign: f64,
    pub trace: RewriteTrace,
}

impl Normalized {
    /// Residual maps each encoded qubit's triple onto itself.
    pub fn residual_absorbable(&self) -> bool {
        if self.core.n_spins() != 6 {
            return self.residual.iter().enumerate().all(|(k, &p)| k == p);
        }
        preserves_blocks(&self.residual, &[&[0, 1, 2], &[3, 4, 5]])
    }
}

/// Reduces a sequence under `layout`.
///
/// Complete layout: SWAPs are commuted to the end (relabeling what they
/// cross), same-pair neighbours merged and zero pulses dropped, repeated to a
/// fixpoint; the SWAP tail is then canonicalized. Other layouts only merge
/// and drop.
pub fn normalize(seq: &PulseSequence, layout: &Layout) -> Result<Normalized, RewriteError> {
    let n = seq.n_spins();
    let mut pulses = seq.pulses().to_vec();
    let mut steps = Vec::new();
    let mut end = pulses.len();
    if *layout == Layout::Complete {
        loop {
            end = extract_swaps(&mut pulses, n, end, &mut steps)?;
            let (new_end, changed) = merge_prefix(&mut pulses, n, end, &mut steps)?;
            end = new_end;
            if !changed {
                break;
            }
        }
        canonicalize_swap_block(&mut pulses, n, end, &mut steps)?;
    } else {
        end = merge_prefix(&mut pulses, n, end, &mut steps)?.0;
    }
    let residual_swaps = pulses[end..].to_vec();
    let residual = swap_word_permutation(n, &residual_swaps);
    let sign = if residual_swaps.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    let core = PulseSequence::with_flag(n, layout.clone(), pulses[..end].to_vec(), true)?;
    let trace = RewriteTrace {
        start: seq.clone(),
        steps,
        end: core.clone(),
        residual: residual_swaps.clone(),
    };
    Ok(Normalized {
        core,
        residual_swaps,
        residual,
        sign,
        trace,
    })
}

/// SWAP extraction followed by tail canonicalization, without merging.
fn swap_normal_form(pulses: &[ExchangePulse], n_spins: usize) -> Result<(Vec<ExchangePulse>, Vec<RewriteStep>), RewriteError> {
    let mut work = pulses.to_vec();
    let mut steps = Vec::new();
    let len = work.len();
    let end = extract_swaps(&mut work, n_spins, len, &mut steps)?;
    canonicalize_swap_block(&mut work, n_spins, end, &mut steps)?;
    Ok((work, steps))
}

/// Builds a trace from `a` to `b` through their common SWAP normal form.
///
/// Fails with [`RewriteError::NormalFormMismatch`] when the normal forms differ.
pub fn equivalence_trace(a: &PulseSequence, b: &PulseSequence) -> Result<RewriteTrace, RewriteError> {
    if a.n_spins() != b.n_spins() {
        return Err(SequenceError::RegisterMismatch {
            expected: a.n_spins(),
            found: b.n_spins(),
        }
        .into());
    }
    let n = a.n_spins();
    let (nf_a, mut steps) = swap_normal_form(a.pulses(), n)?;
    let (nf_b, steps_b) = swap_normal_form(b.pulses(), n)?;
    let same = nf_a.len() == nf_b.len() && nf_a.iter().zip(&nf_b).all(|(x, y)| x.approx_eq(y));
    if !same {
        return Err(RewriteError::NormalFormMismatch);
    }
    steps.extend(invert_steps(b.pulses(), n, &steps_b)?);
    Ok(RewriteTrace {
        start: a.clone(),
        steps,
        end: b.clone(),
        residual: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(i: usize, j: usize, t: f64) -> ExchangePulse {
        ExchangePulse::new(i, j, t).unwrap()
    }

    fn seq(n: usize, ps: Vec<ExchangePulse>) -> PulseSequence {
        PulseSequence::rewritten(n, Layout::Complete, ps).unwrap()
    }

    #[test]
    fn swap_commute_relabels() {
        let s = seq(3, vec![p(0, 1, 1.0), p(1, 2, 0.3)]);
        let step = RewriteStep::SwapCommute { position: 0, mover: Mover::Left };
        let out = apply_step(&s, &step).unwrap();
        assert!(out.pulses()[0].approx_eq(&p(0, 2, 0.3)));
        assert!(out.pulses()[1].approx_eq(&p(0, 1, 1.0)));
        assert!(verify_step(&s, &step));
        let wrong = seq(3, vec![p(1, 2, 0.3), p(0, 1, 1.0)]);
        assert!(!verify_claim(&s, &wrong));
    }

    #[test]
    fn split_three_halves() {
        let s = seq(2, vec![p(0, 1, 1.5)]);
        let step = RewriteStep::MergeSplit { position: 0, split: Some(1.0) };
        let out = apply_step(&s, &step).unwrap();
        assert!(out.pulses()[0].approx_eq(&p(0, 1, 1.0)));
        assert!(out.pulses()[1].approx_eq(&p(0, 1, 0.5)));
        assert!(verify_step(&s, &step));
    }

    #[test]
    fn three_swaps_reduce() {
        let s = seq(3, vec![p(0, 1, 1.0), p(1, 2, 1.0), p(0, 1, 1.0)]);
        let step = RewriteStep::ThreeSwapReduce { position: 0, expand: None };
        let out = apply_step(&s, &step).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.pulses()[0].approx_eq(&p(0, 2, 1.0)));
        assert!(verify_step(&s, &step));
        let back = apply_step(&out, &RewriteStep::ThreeSwapReduce { position: 0, expand: Some((0, 1)) }).unwrap();
        assert!(back.approx_eq(&s));
    }

    #[test]
    fn inapplicable_steps_are_rejected() {
        let s = seq(3, vec![p(0, 1, 0.5), p(1, 2, 0.3)]);
        assert!(matches!(
            apply_step(&s, &RewriteStep::SwapCommute { position: 0, mover: Mover::Left }),
            Err(RewriteError::NotApplicable { rule: Rule::SwapCommute, position: 0, .. })
        ));
        assert!(apply_step(&s, &RewriteStep::MergeSplit { position: 0, split: None }).is_err());
        assert!(apply_step(&s, &RewriteStep::DropZeroPulse { position: 1 }).is_err());
        assert!(apply_step(&s, &RewriteStep::SwapPairRemove { position: 5 }).is_err());
        assert!(!verify_step(&s, &RewriteStep::SwapPairRemove { position: 0 }));
    }

    #[test]
    fn swap_pair_insert_is_exact() {
        let s = seq(4, vec![p(0, 1, 0.4), p(2, 3, 1.2)]);
        for pos in 0..=2 {
            assert!(verify_step(&s, &RewriteStep::SwapPairInsert { position: pos, i: 1, j: 3 }));
        }
    }

    #[test]
    fn canonical_word_is_unique() {
        // two different words for the same permutation
        let w1 = vec![p(0, 1, 1.0), p(1, 2, 1.0), p(0, 1, 1.0), p(2, 3, 1.0)];
        let w2 = vec![p(0, 2, 1.0), p(2, 3, 1.0)];
        let canon = |w: &[ExchangePulse]| {
            let mut v = w.to_vec();
            let mut steps = Vec::new();
            canonicalize_swap_block(&mut v, 4, 0, &mut steps).unwrap();
            assert!(exactly_equivalent(4, w, &v).unwrap());
            v
        };
        let (c1, c2) = (canon(&w1), canon(&w2));
        assert_eq!(c1.len(), c2.len());
        assert!(c1.iter().zip(&c2).all(|(a, b)| a.approx_eq(b)));
    }

    #[test]
    fn normalize_merges_and_extracts() {
        let s = PulseSequence::new(
            3,
            Layout::Linear,
            vec![p(0, 1, 0.5), p(0, 1, 0.5), p(1, 2, 0.3), p(1, 2, 0.4)],
        )
        .unwrap();
        let lin = normalize(&s, &Layout::Linear).unwrap();
        assert_eq!(lin.core.len(), 2);
        let full = normalize(&s, &Layout::Complete).unwrap();
        assert_eq!(full.core.len(), 1);
        assert!(full.core.pulses()[0].approx_eq(&p(0, 2, 0.7)));
        assert_eq!(full.residual, vec![1, 0, 2]);
        full.trace.check().unwrap();
    }

    #[test]
    fn trace_between_equivalent_sequences() {
        let a = seq(3, vec![p(0, 1, 1.0), p(1, 2, 0.3)]);
        let b = seq(3, vec![p(0, 2, 0.3), p(0, 1, 1.0)]);
        let t = equivalence_trace(&a, &b).unwrap();
        t.check().unwrap();
        let c = seq(3, vec![p(0, 2, 0.4), p(0, 1, 1.0)]);
        assert_eq!(equivalence_trace(&a, &c).unwrap_err(), RewriteError::NormalFormMismatch);
    }
}
