//! Receiver: BTD fit, per-term demapping, outer-code validation, successive
//! cancellation, parallel group demodulation and PUPE scoring.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::codec::Bits;
use crate::error::{invalid, Error, Result};
use crate::link::LinkParams;
use crate::linalg::CMatrix;
use crate::rng::mix;
use crate::solver::{fit_channels, gndl_fit, SolverConfig};
use crate::tensor::ComplexTensor3;

/// Receiver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverConfig {
    /// Terms fitted: the user count when known, otherwise the uniqueness
    /// bound.
    pub assumed_terms: usize,
    /// Terms with energy below `power_threshold·‖Y‖²/assumed_terms` are
    /// discarded.
    pub power_threshold: f64,
    /// Extra passes of successive cancellation after the first fit.
    pub sc_iterations: usize,
    pub groups: usize,
    /// Bit errors the outer decoder may correct; `None` means the full
    /// designed capability.
    pub max_corrections: Option<usize>,
}

impl ReceiverConfig {
    pub fn known(k: usize) -> Self {
        Self { assumed_terms: k, power_threshold: 0.05, sc_iterations: 0, groups: 1, max_corrections: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.assumed_terms == 0 {
            return invalid("assumed_terms must be at least 1");
        }
        if !(0.0..1.0).contains(&self.power_threshold) {
            return invalid("power_threshold must lie in [0, 1)");
        }
        if self.groups == 0 {
            return invalid("groups must be at least 1");
        }
        Ok(())
    }
}

/// Deduplicated set of validated payloads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageSet(BTreeSet<Bits>);

impl MessageSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` when the payload was not yet present.
    pub fn insert(&mut self, payload: Bits) -> bool {
        self.0.insert(payload)
    }

    pub fn contains(&self, payload: &Bits) -> bool {
        self.0.contains(payload)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Bits> {
        self.0.iter()
    }

    pub fn extend(&mut self, other: &MessageSet) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn is_subset(&self, other: &MessageSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Entries of `self` missing from `other`.
    pub fn missing_from(&self, other: &MessageSet) -> usize {
        self.0.difference(&other.0).count()
    }
}

impl FromIterator<Bits> for MessageSet {
    fn from_iter<I: IntoIterator<Item = Bits>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// What happened during one demodulation pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub terms_fitted: usize,
    pub solver_iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    pub below_power: usize,
    pub demap_failures: usize,
    pub outer_rejections: usize,
    pub accepted: usize,
    pub solver_error: Option<String>,
}

/// Result of demodulation with successive cancellation: the cumulative
/// message set after every pass (pass 0 is the plain fit).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reception {
    pub passes: Vec<MessageSet>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Reception {
    /// Messages after at most `sc` cancellation passes.
    pub fn after(&self, sc: usize) -> MessageSet {
        match self.passes.len() {
            0 => MessageSet::new(),
            n => self.passes[sc.min(n - 1)].clone(),
        }
    }

    pub fn messages(&self) -> MessageSet {
        self.after(usize::MAX)
    }

    pub fn solver_iterations(&self) -> usize {
        self.diagnostics.iter().map(|d| d.solver_iterations).sum()
    }

    pub fn solver_failed(&self) -> bool {
        self.diagnostics.iter().any(|d| d.solver_error.is_some())
    }

    /// Union of independent receptions, pass by pass.
    pub fn merge(parts: &[Reception]) -> Reception {
        let depth = parts.iter().map(|r| r.passes.len()).max().unwrap_or(0);
        let passes = (0..depth)
            .map(|i| {
                let mut set = MessageSet::new();
                for r in parts {
                    set.extend(&r.after(i));
                }
                set
            })
            .collect();
        let diagnostics = parts.iter().flat_map(|r| r.diagnostics.iter().cloned()).collect();
        Reception { passes, diagnostics }
    }
}

/// Largest `K` satisfying the first and the second sufficient uniqueness
/// condition for rank-(L,L,1) terms (0 when none).
pub fn uniqueness_bounds(t1: usize, t2: usize, l: usize, n: usize) -> (usize, usize) {
    if l == 0 || t1 == 0 || t2 == 0 || n == 0 {
        return (0, 0);
    }
    let (r1, r2) = (t1 / l, t2 / l);
    let cap = (t1 * t2) / (l * l);
    let cond1 = |k: usize| n >= k && r1.min(k) + r2.min(k) >= k + 2;
    let cond2 = |k: usize| cap >= k && r1.min(k) + r2.min(k) + n.min(k) >= 2 * k + 2;
    let largest = |f: &dyn Fn(usize) -> bool, limit: usize| (1..=limit).rev().find(|&k| f(k)).unwrap_or(0);
    (largest(&cond1, n), largest(&cond2, cap))
}

/// Largest number of terms with an essentially unique decomposition
/// guaranteed by either condition.
pub fn uniqueness_bound(t1: usize, t2: usize, l: usize, n: usize) -> usize {
    let (a, b) = uniqueness_bounds(t1, t2, l, n);
    a.max(b)
}

/// Degrees of freedom of `k` terms: `K·(T1+T2−2L)·L`.
pub fn dof_total(k: usize, t1: usize, t2: usize, l: usize) -> usize {
    k * (t1 + t2).saturating_sub(2 * l) * l
}

fn max_corrections(link: &LinkParams, cfg: &ReceiverConfig) -> usize {
    cfg.max_corrections.unwrap_or(link.outer.t())
}

fn decode_fit(
    fit: &crate::solver::SolveResult,
    link: &LinkParams,
    floor: f64,
    limit: usize,
    diag: &mut Diagnostics,
) -> MessageSet {
    let mut set = MessageSet::new();
    for term in fit.model.terms() {
        if term.energy() < floor {
            diag.below_power += 1;
            continue;
        }
        match link.decode_term(&term.a, &term.b, limit) {
            Ok((payload, status)) if status.is_valid() => {
                diag.accepted += 1;
                set.insert(payload);
            }
            Ok(_) => diag.outer_rejections += 1,
            Err(_) => diag.demap_failures += 1,
        }
    }
    set
}

/// Fit, demap and validate. Solver restarts run one at a time and stop as
/// soon as every fitted term validates; the attempt with the most
/// validated messages is kept.
fn demodulate_terms(
    y: &ComplexTensor3,
    link: &LinkParams,
    terms: usize,
    cfg: &ReceiverConfig,
    solver: &SolverConfig,
) -> (MessageSet, Diagnostics) {
    let mut best = (MessageSet::new(), Diagnostics { terms_fitted: terms, ..Diagnostics::default() });
    let y_sq = y.norm_sqr();
    if terms == 0 || y_sq == 0.0 {
        return best;
    }
    let floor = cfg.power_threshold * y_sq / terms as f64;
    let limit = max_corrections(link, cfg);
    let mut iterations = 0;
    let mut last_error = None;
    let mut any_fit = false;
    for attempt in 0..solver.restarts.max(1) {
        let single = SolverConfig { restarts: 1, ..solver.with_seed(mix(solver.seed ^ attempt as u64)) };
        let fit = match gndl_fit(y, terms, link.l(), &single, None) {
            Ok(fit) => fit,
            Err(e) => {
                last_error = Some(e.to_string());
                continue;
            }
        };
        iterations += fit.iterations;
        let mut diag = Diagnostics {
            terms_fitted: terms,
            relative_residual: fit.relative_residual,
            converged: fit.converged,
            ..Diagnostics::default()
        };
        let set = decode_fit(&fit, link, floor, limit, &mut diag);
        let better = !any_fit
            || set.len() > best.0.len()
            || (set.len() == best.0.len() && diag.relative_residual < best.1.relative_residual);
        any_fit = true;
        if better {
            best = (set, diag);
        }
        if best.0.len() == terms {
            break;
        }
    }
    best.1.solver_iterations = iterations;
    if !any_fit {
        best.1.solver_error = last_error;
    }
    best
}

/// One fit of `assumed_terms` terms followed by demapping and outer decoding.
/// Solver failures yield an empty set and are reported in the diagnostics.
pub fn demodulate(
    y: &ComplexTensor3,
    link: &LinkParams,
    cfg: &ReceiverConfig,
    solver: &SolverConfig,
) -> Result<(MessageSet, Diagnostics)> {
    cfg.validate()?;
    check_dims(y, link)?;
    Ok(demodulate_terms(y, link, cfg.assumed_terms, cfg, solver))
}

fn check_dims(y: &ComplexTensor3, link: &LinkParams) -> Result<()> {
    let (t1, t2, _) = y.dims();
    if (t1, t2) != (link.t1(), link.t2()) {
        return invalid(format!("tensor is {t1}×{t2}, link expects {}×{}", link.t1(), link.t2()));
    }
    Ok(())
}

/// Subtract the block terms of `messages` from `y`, with their channel
/// vectors re-estimated jointly by least squares.
pub fn cancel(y: &ComplexTensor3, link: &LinkParams, messages: &MessageSet) -> Result<ComplexTensor3> {
    let signals = messages.iter().map(|m| link.payload_signal(m)).collect::<Result<Vec<CMatrix>>>()?;
    let channels = fit_channels(&signals, y)?;
    let mut out = y.clone();
    let (t1, t2, _) = y.dims();
    let plane = t1 * t2;
    let data = out.data_mut();
    for (s, h) in signals.iter().zip(&channels) {
        for (n, hn) in h.iter().enumerate() {
            for (o, v) in data[n * plane..(n + 1) * plane].iter_mut().zip(s.iter()) {
                *o -= v * hn;
            }
        }
    }
    Ok(out)
}

/// [`demodulate`] followed by up to `sc_iterations` cancellation passes.
///
/// Each pass removes every message validated so far from the original
/// tensor and fits the remaining `assumed_terms − |decoded|` terms to the
/// residual. Passes stop early when nothing new validates or no terms remain.
pub fn successive_cancellation(
    y: &ComplexTensor3,
    link: &LinkParams,
    cfg: &ReceiverConfig,
    solver: &SolverConfig,
) -> Result<Reception> {
    cfg.validate()?;
    check_dims(y, link)?;
    let (first, diag) = demodulate_terms(y, link, cfg.assumed_terms, cfg, solver);
    let mut reception = Reception { passes: vec![first], diagnostics: vec![diag] };
    for pass in 1..=cfg.sc_iterations {
        let known = reception.passes.last().expect("first pass recorded").clone();
        let remaining = cfg.assumed_terms.saturating_sub(known.len());
        if known.is_empty() || remaining == 0 {
            break;
        }
        let residual = match cancel(y, link, &known) {
            Ok(r) => r,
            Err(Error::SolverFailure(_)) => break,
            Err(e) => return Err(e),
        };
        let pass_solver = solver.with_seed(mix(solver.seed ^ pass as u64));
        let (found, diag) = demodulate_terms(&residual, link, remaining, cfg, &pass_solver);
        let mut next = known.clone();
        next.extend(&found);
        let grew = next.len() > known.len();
        reception.passes.push(next);
        reception.diagnostics.push(diag);
        if !grew {
            break;
        }
    }
    Ok(reception)
}

/// Received tensor of one user group and the number of terms to fit to it.
#[derive(Debug, Clone)]
pub struct GroupInput {
    pub y: ComplexTensor3,
    pub assumed_terms: usize,
}

/// Demodulate every group independently and in parallel. Groups with no
/// assumed terms contribute nothing; a failing group does not affect the
/// others.
pub fn demodulate_groups(
    groups: &[GroupInput],
    link: &LinkParams,
    cfg: &ReceiverConfig,
    solver: &SolverConfig,
) -> Vec<Result<Reception>> {
    groups
        .par_iter()
        .enumerate()
        .map(|(g, input)| {
            if input.assumed_terms == 0 {
                return Ok(Reception::default());
            }
            let group_cfg = ReceiverConfig { assumed_terms: input.assumed_terms, ..cfg.clone() };
            let group_solver = solver.with_seed(mix(solver.seed.wrapping_add(g as u64)));
            successive_cancellation(&input.y, link, &group_cfg, &group_solver)
        })
        .collect()
}

/// Fraction of sent messages missing from the decoded set.
pub fn pupe(sent: &MessageSet, decoded: &MessageSet) -> Result<f64> {
    if sent.is_empty() {
        return invalid("sent set is empty");
    }
    Ok(sent.missing_from(decoded) as f64 / sent.len() as f64)
}
