//! Experiment configuration and the seeded Monte-Carlo driver.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{transmit, ChannelConfig};
use crate::codec::{Bits, CodecParams};
use crate::error::{Error, Result};
use crate::link::LinkParams;
use crate::rng::{mix, substream, trial_seed, Stream};
use crate::receiver::{
    demodulate_groups, dof_total, pupe, uniqueness_bounds, GroupInput, MessageSet, Reception, ReceiverConfig,
};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    OneOrMany::deserialize(d).map(Vec::from)
}

fn default_f() -> f64 {
    crate::codec::DEFAULT_F
}
fn default_groups() -> usize {
    1
}
fn default_power_threshold() -> f64 {
    0.05
}
fn default_sc() -> Vec<usize> {
    vec![0]
}
fn default_max_iterations() -> usize {
    500
}
fn default_restarts() -> usize {
    5
}
fn default_true() -> bool {
    true
}

/// One experiment, read from a flat TOML file.
///
/// ```toml
/// t1 = 10
/// t2 = 8
/// l = 2
/// b0 = 51
/// b1 = 37
/// b2 = 28
/// bch_m = 7
/// bch_t = 2
/// n = 8
/// k = [4]
/// ebn0_db = [0, 4, 8, 12]
/// sc_iterations = [0, 1]
/// trials = 200
/// seed = 1
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub t1: usize,
    pub t2: usize,
    pub l: usize,
    /// Payload bits per user.
    pub b0: usize,
    /// Coded bits carried by the `A` and the `B` symbol.
    pub b1: usize,
    pub b2: usize,
    pub bch_m: u32,
    pub bch_t: usize,
    #[serde(default = "default_f")]
    pub f: f64,
    /// Receive antennas.
    pub n: usize,
    /// Active user counts to sweep.
    #[serde(deserialize_with = "one_or_many")]
    pub k: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub ebn0_db: Vec<f64>,
    /// Cancellation pass counts to report; all are evaluated on the same
    /// trials.
    #[serde(default = "default_sc", deserialize_with = "one_or_many")]
    pub sc_iterations: Vec<usize>,
    #[serde(default = "default_groups")]
    pub groups: usize,
    #[serde(default = "default_power_threshold")]
    pub power_threshold: f64,
    /// Fit the uniqueness bound instead of the true user count and accept
    /// only error-free outer codewords.
    #[serde(default)]
    pub unknown_k: bool,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    /// Transmit energy per user; defaults to `T1·T2`.
    #[serde(default)]
    pub es: Option<f64>,
    /// Worker threads; defaults to the available cores.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Treat an infeasible uniqueness bound and solver failures as errors.
    #[serde(default)]
    pub strict: bool,
    /// Record wall-clock runtimes; when off the runtime column is 0 and the
    /// CSV is byte-reproducible.
    #[serde(default = "default_true")]
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The small configuration used for quick checks: `(10, 8, 8)`, `L = 2`,
    /// a `(65, 51)` outer code.
    pub fn desk() -> Self {
        Self {
            t1: 10,
            t2: 8,
            l: 2,
            b0: 51,
            b1: 37,
            b2: 28,
            bch_m: 7,
            bch_t: 2,
            f: default_f(),
            n: 8,
            k: vec![4],
            ebn0_db: vec![30.0],
            sc_iterations: default_sc(),
            groups: 1,
            power_threshold: default_power_threshold(),
            unknown_k: false,
            max_iterations: default_max_iterations(),
            restarts: default_restarts(),
            trials: 20,
            seed: 0,
            out: None,
            es: None,
            threads: None,
            strict: false,
            record_timing: true,
        }
    }

    pub fn link(&self) -> Result<LinkParams> {
        if self.b1 + self.b2 == 0 {
            return Err(Error::Config("b1 + b2 must be positive".into()));
        }
        LinkParams::new(self.t1, self.t2, self.l, self.b0, self.b1, self.b2, self.bch_m, self.bch_t, self.f)
            .map_err(|e| match e {
                Error::Config(m) => Error::Config(m),
                other => Error::Config(other.to_string()),
            })
    }

    /// Uniqueness bound of one group.
    pub fn kbar(&self) -> usize {
        let (a, b) = uniqueness_bounds(self.t1, self.t2, self.l, self.n);
        a.max(b)
    }

    pub fn es(&self) -> f64 {
        self.es.unwrap_or((self.t1 * self.t2) as f64)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            restarts: self.restarts,
            ..SolverConfig::default()
        }
    }

    pub fn receiver(&self, assumed_terms: usize) -> ReceiverConfig {
        ReceiverConfig {
            assumed_terms,
            power_threshold: self.power_threshold,
            sc_iterations: self.sc_iterations.iter().copied().max().unwrap_or(0),
            groups: self.groups,
            max_corrections: if self.unknown_k { Some(0) } else { None },
        }
    }

    /// Reject configurations that cannot run, before any trial.
    pub fn validate(&self) -> Result<LinkParams> {
        let link = self.link()?;
        let cfg = |m: &str| Err(Error::Config(m.into()));
        if self.n == 0 || self.groups == 0 {
            return cfg("n and groups must be at least 1");
        }
        if self.k.is_empty() || self.k.contains(&0) {
            return cfg("k must list positive user counts");
        }
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return cfg("ebn0_db must list numbers");
        }
        if self.sc_iterations.is_empty() {
            return cfg("sc_iterations must not be empty");
        }
        if !(0.0..1.0).contains(&self.power_threshold) {
            return cfg("power_threshold must lie in [0, 1)");
        }
        if self.es() <= 0.0 || !self.es().is_finite() {
            return cfg("es must be positive");
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return cfg("restarts and max_iterations must be positive");
        }
        if self.threads == Some(0) {
            return cfg("threads must be positive");
        }
        let kbar = self.kbar();
        if self.strict && kbar == 0 {
            return cfg("no number of terms satisfies the uniqueness conditions");
        }
        if self.unknown_k && kbar == 0 {
            return cfg("unknown_k needs a positive uniqueness bound");
        }
        if self.groups > 1 {
            let capacity = self.groups * kbar;
            if let Some(k) = self.k.iter().find(|&&k| k > capacity) {
                return Err(Error::Config(format!("K = {k} exceeds the capacity {capacity} of {} groups", self.groups)));
            }
        }
        Ok(link)
    }
}

/// One aggregated cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub ebn0_db: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "G")]
    pub g: usize,
    pub sc_iters: usize,
    pub trials: usize,
    pub pupe_mean: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub pupe_ci95: f64,
    pub mean_solver_iters: f64,
    pub mean_runtime_ms: f64,
    pub seed: u64,
}

/// Record of one Monte-Carlo trial.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub sent: MessageSet,
    pub reception: Reception,
    /// Users assigned to each group.
    pub group_sizes: Vec<usize>,
    /// PUPE for every requested cancellation pass count, in config order.
    pub pupe: Vec<f64>,
    pub solver_iterations: usize,
    pub runtime_ms: f64,
    pub solver_failed: bool,
}

/// Mean and 95% half-width `1.96·s/√n`.
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * (var / n as f64).sqrt())
}

fn distinct_payloads<R: Rng>(k: usize, bits: usize, rng: &mut R) -> Vec<Bits> {
    let mut set = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let p = Bits::new((0..bits).map(|_| rng.random()).collect());
        if set.insert(p.clone()) {
            out.push(p);
        }
    }
    out
}

/// Uniform random group per user, redrawn while the chosen group is full.
fn assign_groups<R: Rng>(k: usize, groups: usize, cap: usize, rng: &mut R) -> Vec<usize> {
    let mut load = vec![0usize; groups];
    (0..k)
        .map(|_| {
            let open: Vec<usize> = (0..groups).filter(|&g| load[g] < cap).collect();
            let g = if open.is_empty() { rng.random_range(0..groups) } else { open[rng.random_range(0..open.len())] };
            load[g] += 1;
            g
        })
        .collect()
}

/// Seed of trial `index` for `k` users. Independent of the SNR point so
/// that a sweep reuses payloads and fading across Eb/N0 values.
pub fn trial_seed_for(seed: u64, k: usize, index: usize) -> u64 {
    trial_seed(mix(seed ^ (k as u64).rotate_left(40)), index as u64)
}

/// Run one trial: draw payloads, assign groups, transmit, receive, score.
pub fn run_trial(
    config: &ExperimentConfig,
    link: &LinkParams,
    k: usize,
    ebn0_db: f64,
    index: usize,
) -> Result<TrialReport> {
    let seed = trial_seed_for(config.seed, k, index);
    let payloads = distinct_payloads(k, link.payload_bits(), &mut substream(seed, Stream::Payloads));
    let kbar = config.kbar();
    let cap = if config.groups > 1 { kbar.max(1) } else { k };
    let assignment = assign_groups(k, config.groups, cap, &mut substream(seed, Stream::Grouping));
    let mut inputs = Vec::with_capacity(config.groups);
    let mut sizes = Vec::with_capacity(config.groups);
    for g in 0..config.groups {
        let members: Vec<Bits> = payloads
            .iter()
            .zip(&assignment)
            .filter(|(_, &a)| a == g)
            .map(|(p, _)| link.encode_payload(p))
            .collect::<Result<_>>()?;
        sizes.push(members.len());
        if members.is_empty() {
            inputs.push(GroupInput { y: crate::tensor::ComplexTensor3::zeros((config.t1, config.t2, config.n)), assumed_terms: 0 });
            continue;
        }
        let ch = ChannelConfig {
            n: config.n,
            k: members.len(),
            ebn0_db,
            es: config.es(),
            seed: trial_seed(seed, g as u64),
        };
        let y = transmit(&members, link, &ch)?.y;
        let assumed = if config.unknown_k { kbar } else { members.len() };
        inputs.push(GroupInput { y, assumed_terms: assumed });
    }
    let receiver = config.receiver(1);
    let solver = config.solver().with_seed(mix(seed ^ 0x5eed));
    let start = Instant::now();
    let outcomes = demodulate_groups(&inputs, link, &receiver, &solver);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut solver_failed = false;
    let mut parts = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match outcome {
            Ok(r) => {
                solver_failed |= r.solver_failed();
                parts.push(r);
            }
            Err(_) => solver_failed = true,
        }
    }
    let reception = Reception::merge(&parts);
    let sent: MessageSet = payloads.into_iter().collect();
    let pupe = config
        .sc_iterations
        .iter()
        .map(|&sc| pupe(&sent, &reception.after(sc)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialReport {
        solver_iterations: reception.solver_iterations(),
        sent,
        reception,
        group_sizes: sizes,
        pupe,
        runtime_ms: if config.record_timing { runtime_ms } else { 0.0 },
        solver_failed,
    })
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(job))
            .map_err(|e| Error::Config(e.to_string())),
    }
}

/// Every `(Eb/N0, K)` cell of the sweep, `trials` trials each, aggregated
/// per cancellation pass count and sorted by `(Eb/N0, K, G, sc)`.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let link = config.validate()?;
    if config.trials == 0 {
        return Ok(Vec::new());
    }
    let cells: Vec<(f64, usize)> =
        config.ebn0_db.iter().flat_map(|&e| config.k.iter().map(move |&k| (e, k))).collect();
    let reports = with_pool(config.threads, || {
        cells
            .iter()
            .map(|&(e, k)| {
                (0..config.trials)
                    .into_par_iter()
                    .map(|t| run_trial(config, &link, k, e, t))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut rows = Vec::new();
    for (&(ebn0_db, k), trials) in cells.iter().zip(&reports) {
        if config.strict && trials.iter().any(|t| t.solver_failed) {
            return Err(Error::SolverFailure(format!("solver failed at Eb/N0 = {ebn0_db} dB, K = {k}")));
        }
        let n = trials.len() as f64;
        let iters = trials.iter().map(|t| t.solver_iterations as f64).sum::<f64>() / n;
        let runtime = trials.iter().map(|t| t.runtime_ms).sum::<f64>() / n;
        for (i, &sc) in config.sc_iterations.iter().enumerate() {
            let values: Vec<f64> = trials.iter().map(|t| t.pupe[i]).collect();
            let (mean, ci) = mean_ci95(&values);
            rows.push(ResultRow {
                ebn0_db,
                k,
                g: config.groups,
                sc_iters: sc,
                trials: trials.len(),
                pupe_mean: mean,
                pupe_ci95: ci,
                mean_solver_iters: iters,
                mean_runtime_ms: runtime,
                seed: config.seed,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.ebn0_db
            .total_cmp(&b.ebn0_db)
            .then(a.k.cmp(&b.k))
            .then(a.g.cmp(&b.g))
            .then(a.sc_iters.cmp(&b.sc_iters))
    });
    rows.dedup();
    Ok(rows)
}

/// Write rows as CSV with the fixed header.
pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| Error::Config(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

pub const CSV_HEADER: [&str; 10] = [
    "ebn0_db",
    "K",
    "G",
    "sc_iters",
    "trials",
    "pupe_mean",
    "pupe_ci95",
    "mean_solver_iters",
    "mean_runtime_ms",
    "seed",
];

/// Feasibility summary of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamReport {
    pub dims: (usize, usize, usize),
    pub l: usize,
    pub kbar_condition1: usize,
    pub kbar_condition2: usize,
    pub kbar: usize,
    pub dof_kbar: usize,
    pub groups: usize,
    pub symbol_a: CodecParams,
    pub symbol_b: CodecParams,
    pub payload_bits: usize,
    pub coded_bits: usize,
    pub channel_uses: usize,
    /// `B0 / T_c` in bits per channel use, all groups included.
    pub spectral_efficiency: f64,
}

pub fn check_params(config: &ExperimentConfig) -> Result<ParamReport> {
    let link = config.link()?;
    let (c1, c2) = uniqueness_bounds(config.t1, config.t2, config.l, config.n);
    let kbar = c1.max(c2);
    let channel_uses = config.t1 * config.t2 * config.groups;
    Ok(ParamReport {
        dims: (config.t1, config.t2, config.n),
        l: config.l,
        kbar_condition1: c1,
        kbar_condition2: c2,
        kbar,
        dof_kbar: dof_total(kbar, config.t1, config.t2, config.l),
        groups: config.groups,
        symbol_a: link.a.clone(),
        symbol_b: link.b.clone(),
        payload_bits: link.payload_bits(),
        coded_bits: link.coded_bits(),
        channel_uses,
        spectral_efficiency: link.payload_bits() as f64 / channel_uses as f64,
    })
}

impl fmt::Display for ParamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (t1, t2, n) = self.dims;
        writeln!(f, "dims            T1={t1} T2={t2} N={n} L={}", self.l)?;
        writeln!(f, "kbar condition1 {}", self.kbar_condition1)?;
        writeln!(f, "kbar condition2 {}", self.kbar_condition2)?;
        writeln!(f, "kbar            {}", self.kbar)?;
        writeln!(f, "dof(kbar)       {}", self.dof_kbar)?;
        for (name, s) in [("A", &self.symbol_a), ("B", &self.symbol_b)] {
            writeln!(
                f,
                "symbol {name}        T={} ell={} ell1={} ell2={} parts={:?}",
                s.t, s.ell, s.ell1, s.ell2, s.part_lengths
            )?;
        }
        writeln!(f, "outer code      ({}, {})", self.coded_bits, self.payload_bits)?;
        writeln!(f, "channel uses    {} over {} group(s)", self.channel_uses, self.groups)?;
        write!(f, "B0/Tc           {:.4} bits/channel use", self.spectral_efficiency)
    }
}

/// Solver timing for one user count.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub k: usize,
    pub dims: (usize, usize, usize),
    pub fits: usize,
    pub mean_ms: f64,
    pub mean_iterations: f64,
}

/// Time the demodulator on `fits` noisy instances for each configured `K`
/// at the first configured Eb/N0.
pub fn bench(config: &ExperimentConfig, fits: usize) -> Result<Vec<BenchRow>> {
    let link = config.validate()?;
    let ebn0 = config.ebn0_db[0];
    let single = ExperimentConfig { groups: 1, sc_iterations: vec![0], ..config.clone() };
    config
        .k
        .iter()
        .map(|&k| {
            let mut ms = 0.0;
            let mut iters = 0.0;
            for t in 0..fits {
                let start = Instant::now();
                let r = run_trial(&single, &link, k, ebn0, t)?;
                ms += start.elapsed().as_secs_f64() * 1e3;
                iters += r.solver_iterations as f64;
            }
            let n = fits.max(1) as f64;
            Ok(BenchRow { k, dims: (config.t1, config.t2, config.n), fits, mean_ms: ms / n, mean_iterations: iters / n })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_toml() {
        let cfg = ExperimentConfig::from_toml(
            "t1 = 10\nt2 = 8\nl = 2\nb0 = 51\nb1 = 37\nb2 = 28\nbch_m = 7\nbch_t = 2\nn = 8\n\
             k = 4\nebn0_db = [0, 4.5]\nsc_iterations = 1\ntrials = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.k, vec![4]);
        assert_eq!(cfg.ebn0_db, vec![0.0, 4.5]);
        assert_eq!(cfg.sc_iterations, vec![1]);
        assert_eq!((cfg.groups, cfg.power_threshold, cfg.f), (1, 0.05, 2.0));
        assert!(cfg.record_timing && !cfg.strict);
        assert!(ExperimentConfig::from_toml("t1 = 10\nbogus = 1\n").is_err());
    }

    #[test]
    fn validation_errors_are_config_errors() {
        let bad = ExperimentConfig { b0: 50, ..ExperimentConfig::desk() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = ExperimentConfig { groups: 2, k: vec![15], ..ExperimentConfig::desk() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = ExperimentConfig { t1: 3, t2: 3, b1: 1, b2: 64, strict: true, ..ExperimentConfig::desk() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        assert!(ExperimentConfig::desk().validate().is_ok());
    }

    #[test]
    fn ci_of_known_sample() {
        let (m, ci) = mean_ci95(&[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(m, 0.5);
        // s² = 1/3, n = 4
        assert!((ci - 1.96 * (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_ci95(&[0.3]), (0.3, 0.0));
        assert_eq!(mean_ci95(&[]), (0.0, 0.0));
    }

    #[test]
    fn ci_shrinks_with_trials() {
        let draw = |n: usize| {
            let mut rng = substream(5, Stream::Payloads);
            let v: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.3 { 1.0 } else { 0.0 }).collect();
            mean_ci95(&v).1
        };
        let ratio = draw(400) / draw(100);
        assert!((0.4..=0.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn group_assignment_respects_cap() {
        let mut rng = substream(9, Stream::Grouping);
        for _ in 0..200 {
            let a = assign_groups(20, 4, 7, &mut rng);
            let mut load = [0; 4];
            a.iter().for_each(|&g| load[g] += 1);
            assert!(load.iter().all(|&l| l <= 7));
            assert_eq!(load.iter().sum::<usize>(), 20);
        }
    }

    #[test]
    fn payloads_are_distinct() {
        let mut rng = substream(1, Stream::Payloads);
        let p = distinct_payloads(50, 6, &mut rng);
        let set: std::collections::BTreeSet<_> = p.iter().collect();
        assert_eq!(set.len(), 50);
    }

    #[test]
    fn zero_trials_give_no_rows() {
        let cfg = ExperimentConfig { trials: 0, ..ExperimentConfig::desk() };
        assert!(run_monte_carlo(&cfg).unwrap().is_empty());
    }

    #[test]
    fn report_for_full_scale() {
        let cfg = ExperimentConfig {
            t1: 30,
            t2: 24,
            b0: 204,
            b1: 124,
            b2: 96,
            bch_m: 8,
            n: 25,
            ..ExperimentConfig::desk()
        };
        let r = check_params(&cfg).unwrap();
        assert_eq!((r.kbar, r.dof_kbar), (25, 2500));
        assert_eq!((r.symbol_a.ell1, r.symbol_b.ell1), (8, 8));
        assert!((r.spectral_efficiency - 204.0 / 720.0).abs() < 1e-15);
        let text = r.to_string();
        assert!(text.contains("0.2833"));
        let small = ExperimentConfig { t1: 4, t2: 4, n: 100, ..ExperimentConfig::desk() };
        assert_eq!(uniqueness_bounds(small.t1, small.t2, 2, small.n).0.max(small.kbar()), 2);
    }

    #[test]
    fn csv_header_is_fixed() {
        let row = ResultRow {
            ebn0_db: 4.0,
            k: 4,
            g: 1,
            sc_iters: 0,
            trials: 10,
            pupe_mean: 0.25,
            pupe_ci95: 0.1,
            mean_solver_iters: 12.5,
            mean_runtime_ms: 0.0,
            seed: 3,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "ebn0_db,K,G,sc_iters,trials,pupe_mean,pupe_ci95,mean_solver_iters,mean_runtime_ms,seed\n\
             4.0,4,1,0,10,0.25,0.1,12.5,0.0,3\n"
        );
    }
}
