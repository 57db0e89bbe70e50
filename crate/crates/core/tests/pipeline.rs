use btdm_core::channel::{noise_sigma, sample_noise, transmit, ChannelConfig};
use btdm_core::harness::{self, run_trial, ExperimentConfig};
use btdm_core::receiver::{demodulate, demodulate_groups, GroupInput, MessageSet, ReceiverConfig};
use btdm_core::solver::{cpd_fit, gndl_fit, SolverConfig};
use btdm_core::tensor::{synthesize_received, BlockTerm, BtdModel};
use btdm_core::{Bits, CMatrix, Complex64, LinkParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn payloads(link: &LinkParams, k: usize, rng: &mut ChaCha8Rng) -> Vec<Bits> {
    (0..k).map(|_| Bits::new((0..link.payload_bits()).map(|_| rng.random()).collect())).collect()
}

fn received(link: &LinkParams, p: &[Bits], ebn0: f64, seed: u64) -> btdm_core::ComplexTensor3 {
    let coded: Vec<Bits> = p.iter().map(|b| link.encode_payload(b).unwrap()).collect();
    transmit(&coded, link, &ChannelConfig::for_link(link, 8, p.len(), ebn0, seed)).unwrap().y
}

#[test]
fn noiseless_desk_recovers_every_user() {
    let link = LinkParams::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..3 {
        let p = payloads(&link, 4, &mut rng);
        let y = received(&link, &p, f64::INFINITY, trial);
        let (set, diag) = demodulate(&y, &link, &ReceiverConfig::known(4), &SolverConfig::default()).unwrap();
        assert_eq!(set, p.iter().cloned().collect::<MessageSet>(), "trial {trial}: {diag:?}");
        assert!(diag.relative_residual < 1e-6);
    }
}

#[test]
fn pure_noise_rarely_yields_messages() {
    let link = LinkParams::desk();
    let cfg = ExperimentConfig { unknown_k: true, ..ExperimentConfig::desk() };
    let receiver = cfg.receiver(cfg.kbar());
    let solver = SolverConfig { restarts: 1, max_iterations: 60, ..SolverConfig::default() };
    let sigma = noise_sigma(10.0, 80.0, link.payload_bits());
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut empty = 0;
    for trial in 0..100 {
        let y = sample_noise((10, 8, 8), sigma, &mut rng);
        let (set, _) = demodulate(&y, &link, &receiver, &solver.with_seed(trial)).unwrap();
        empty += set.is_empty() as usize;
    }
    assert!(empty >= 95, "{empty}/100 empty");
}

#[test]
fn cancellation_never_drops_messages() {
    let mut cfg = ExperimentConfig::desk();
    cfg.k = vec![9];
    cfg.sc_iterations = vec![0, 1, 2];
    cfg.restarts = 1;
    cfg.seed = 31;
    let link = cfg.validate().unwrap();
    let mut gained = 0;
    for index in 0..50 {
        let report = run_trial(&cfg, &link, 9, 30.0, index).unwrap();
        let r = &report.reception;
        assert!(r.after(0).is_subset(&r.after(1)) && r.after(1).is_subset(&r.after(2)));
        assert!(report.pupe[2] <= report.pupe[0]);
        gained += (r.after(2).len() > r.after(0).len()) as usize;
    }
    eprintln!("cancellation added messages in {gained}/50 trials");
}

#[test]
fn groups_decode_independently() {
    let link = LinkParams::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let sets: Vec<Vec<Bits>> = (0..2).map(|_| payloads(&link, 3, &mut rng)).collect();
    let inputs: Vec<GroupInput> = sets
        .iter()
        .enumerate()
        .map(|(g, p)| GroupInput { y: received(&link, p, f64::INFINITY, 50 + g as u64), assumed_terms: 3 })
        .collect();
    let out = demodulate_groups(&inputs, &link, &ReceiverConfig::known(3), &SolverConfig::default());
    for (r, p) in out.iter().zip(&sets) {
        assert_eq!(r.as_ref().unwrap().messages(), p.iter().cloned().collect::<MessageSet>());
    }
}

#[test]
fn harness_is_reproducible() {
    let mut cfg = ExperimentConfig::desk();
    cfg.k = vec![2, 3];
    cfg.ebn0_db = vec![6.0, 20.0];
    cfg.trials = 4;
    cfg.seed = 99;
    cfg.record_timing = false;
    let csv = |c: &ExperimentConfig| {
        let mut buf = Vec::new();
        harness::write_csv(&harness::run_monte_carlo(c).unwrap(), &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let first = csv(&cfg);
    assert_eq!(first, csv(&cfg));
    assert_eq!(first, csv(&ExperimentConfig { threads: Some(2), ..cfg.clone() }));
    assert_eq!(first.lines().count(), 1 + 4);
    assert_ne!(first, csv(&ExperimentConfig { seed: 100, ..cfg }));
}

#[test]
fn desk_high_snr_regression() {
    let mut cfg = ExperimentConfig::desk();
    cfg.trials = 20;
    cfg.seed = 5;
    let rows = harness::run_monte_carlo(&cfg).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].pupe_mean, 0.0);
    assert_eq!(rows[0].trials, 20);
}

#[test]
fn cpd_fit_recovers_rank_one_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut c = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    let terms: Vec<BlockTerm> = (0..3)
        .map(|_| {
            let a = CMatrix::from_fn(6, 1, |_, _| c());
            let b = CMatrix::from_fn(5, 1, |_, _| c());
            BlockTerm::new(a, b, (0..4).map(|_| c()).collect()).unwrap()
        })
        .collect();
    let y = synthesize_received(&BtdModel::new(terms).unwrap(), None).unwrap();
    let fit = cpd_fit(&y, 3, &SolverConfig::default()).unwrap();
    assert!(fit.relative_residual < 1e-8, "{}", fit.relative_residual);
    assert!(fit.model.terms().iter().all(|t| t.l() == 1));
}

#[test]
fn noise_only_fit_is_finite() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let y = sample_noise((10, 8, 8), 1.0, &mut rng);
    let fit = gndl_fit(&y, 3, 2, &SolverConfig { restarts: 2, ..SolverConfig::default() }, None).unwrap();
    assert!(fit.relative_residual.is_finite() && fit.relative_residual < 1.0);
    assert!(fit.model.terms().iter().all(|t| t.energy().is_finite()));
}
