use mulrnn::cells::{CellDims, CellKind, InitScheme};
use mulrnn::data::{synth, TokenBatch, Vocabulary};
use mulrnn::model::{sample, LanguageModel, LmConfig};
use mulrnn::tensor::Rng;
use mulrnn::train::{
    evaluate, train, Checkpoint, EvalOptions, MetricsRecord, TickClock, TrainConfig, TrainData,
};

fn tiny_setup(kind: CellKind, seed: u64) -> (Vocabulary, Vec<u32>, LanguageModel) {
    let vocab = Vocabulary::from_text("abc");
    let ids = vocab.encode(&synth::periodic("cab", 600)).unwrap();
    let cfg = LmConfig::new(kind, CellDims::new(3, 16, 3).unwrap(), 12).unwrap();
    let model = LanguageModel::new(cfg, &mut Rng::new(seed), InitScheme::default()).unwrap();
    (vocab, ids, model)
}

fn run(kind: CellKind, cfg: &TrainConfig) -> (mulrnn::train::TrainOutcome, Vec<MetricsRecord>, Vocabulary, Vec<u32>) {
    let (vocab, ids, model) = tiny_setup(kind, cfg.seed);
    let mut log = Vec::new();
    let out = train(
        model,
        &vocab,
        TrainData { train: &ids, valid: &ids[..120] },
        cfg,
        &mut log,
        &mut TickClock::new(1.0),
    )
    .unwrap();
    (out, log, vocab, ids)
}

fn quick() -> TrainConfig {
    TrainConfig {
        epochs: 6,
        batch_size: 4,
        adam: mulrnn::train::AdamConfig {
            lr: 0.02,
            ..Default::default()
        },
        seed: 5,
        log_every: 3,
        ..Default::default()
    }
}

#[test]
fn identical_seeds_give_identical_metrics() {
    let (_, a, ..) = run(CellKind::Mgru, &quick());
    let (_, b, ..) = run(CellKind::Mgru, &quick());
    assert!(!a.is_empty());
    let bits = |v: &[MetricsRecord]| {
        v.iter()
            .map(|r| (r.step, r.loss_nats.to_bits(), r.bpc.to_bits(), r.wall_ms.to_bits()))
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a, b);
}

#[test]
fn best_checkpoint_is_minimum_validation() {
    let (out, log, ..) = run(CellKind::Mlstm, &quick());
    let valid: Vec<f64> = log.iter().filter(|r| r.split == "valid").map(|r| r.bpc).collect();
    assert_eq!(valid.len(), out.history.len());
    let min = valid.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(out.best.valid_bpc, min);
    let e = out.history.iter().find(|e| e.valid_bpc == min).unwrap().epoch;
    assert_eq!(out.best.epoch, e);
    assert_eq!(out.last.epoch, out.history.len());
}

#[test]
fn overfit_then_sample_continues_pattern() {
    let cfg = TrainConfig {
        epochs: 60,
        stop_below_bpc: Some(0.05),
        ..quick()
    };
    let (out, _, vocab, ids) = run(CellKind::Mgru, &cfg);
    let model = &out.best.model;
    let bpc = evaluate(model, &ids, EvalOptions { batch_size: 2, seq_len: 12, carry: true }).unwrap();
    assert!(bpc < 0.5, "bpc {bpc}");
    let text = sample(model, &vocab, "cab", 9, 0.0, &mut Rng::new(0)).unwrap();
    assert_eq!(text, "cabcabcab");
}

#[test]
fn save_load_evaluate_is_bitwise_stable() {
    let (out, _, _, ids) = run(CellKind::Tmgru, &quick());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("best.ckpt");
    out.best.save(&path).unwrap();
    let back = Checkpoint::load(&path).unwrap();
    assert_eq!(back, out.best);
    let opts = EvalOptions { batch_size: 3, seq_len: 12, carry: true };
    let a = evaluate(&out.best.model, &ids, opts).unwrap();
    let b = evaluate(&back.model, &ids, opts).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn zero_weight_model_is_uniform() {
    let vocab = Vocabulary::text8();
    let cfg = LmConfig::new(CellKind::Mlstm, CellDims::new(27, 10, 27).unwrap(), 20).unwrap();
    let model = LanguageModel::new(cfg, &mut Rng::new(0), InitScheme::Zeros).unwrap();
    let ids = vocab.encode(&synth::text8_like(2_000, 3)).unwrap();
    for carry in [true, false] {
        let bpc = evaluate(&model, &ids, EvalOptions { batch_size: 4, seq_len: 20, carry }).unwrap();
        assert!((bpc - 27f64.log2()).abs() < 1e-9, "{bpc}");
    }
}

#[test]
fn empty_or_short_data_is_a_config_error() {
    let (vocab, ids, model) = tiny_setup(CellKind::Rnn, 0);
    let mut log = Vec::new();
    let err = train(
        model.clone(),
        &vocab,
        TrainData { train: &[], valid: &ids },
        &quick(),
        &mut log,
        &mut TickClock::new(1.0),
    )
    .unwrap_err();
    assert!(matches!(err, mulrnn::Error::Config(_)), "{err}");
    let err = train(
        model,
        &vocab,
        TrainData { train: &ids[..10], valid: &ids },
        &quick(),
        &mut log,
        &mut TickClock::new(1.0),
    )
    .unwrap_err();
    assert!(matches!(err, mulrnn::Error::Config(_)), "{err}");
}

#[test]
fn diverging_run_aborts_with_numeric_error() {
    let (vocab, ids, mut model) = tiny_setup(CellKind::Rnn, 0);
    for (_, p) in model.params.iter_mut() {
        p.fill(f64::NAN);
    }
    let err = train(
        model,
        &vocab,
        TrainData { train: &ids, valid: &ids },
        &quick(),
        &mut Vec::new(),
        &mut TickClock::new(1.0),
    )
    .unwrap_err();
    match err {
        mulrnn::Error::Numeric { step, lr, .. } => {
            assert_eq!(step, 1);
            assert_eq!(lr, 0.02);
        }
        other => panic!("{other}"),
    }
}

#[test]
fn clipping_is_logged_when_it_fires() {
    let cfg = TrainConfig {
        grad_clip_norm: Some(1e-6),
        epochs: 1,
        ..quick()
    };
    let (out, log, ..) = run(CellKind::Lstm, &cfg);
    let logged: u64 = log.iter().map(|r| r.clipped).sum();
    assert!(out.clip_events > 0);
    assert_eq!(logged, out.clip_events);
}

#[test]
fn loss_is_invariant_to_row_order_and_splitting() {
    let (_, ids, model) = tiny_setup(CellKind::Tmlstm, 9);
    let mut rng = Rng::new(1);
    let rows: Vec<Vec<u32>> = (0..6)
        .map(|_| (0..8).map(|_| ids[rng.below(ids.len())]).collect())
        .collect();
    let batch = TokenBatch::from_rows(&rows).unwrap();
    let (full, _) = model.sequence_loss(&batch, &model.zero_state(6)).unwrap();

    let perm = [3, 0, 5, 1, 4, 2];
    let shuffled = batch.select_rows(&perm).unwrap();
    let (p, _) = model.sequence_loss(&shuffled, &model.zero_state(6)).unwrap();
    assert!((p - full).abs() < 1e-12);

    let halves = [[0, 1, 2], [3, 4, 5]];
    let split: f64 = halves
        .iter()
        .map(|h| {
            let part = batch.select_rows(h).unwrap();
            model.sequence_loss(&part, &model.zero_state(3)).unwrap().0
        })
        .sum::<f64>()
        / 2.0;
    assert!((split - full).abs() < 1e-12);
}
