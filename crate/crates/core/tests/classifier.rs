mod common;

use polarity_core::reactor::{
    build_vocabulary, load_model, save_model, softmax, stratified_split, train, train_traced, vectorize, DocVector,
    TrainConfig,
};
use polarity_core::synth::{labeled_corpus, LabeledCorpusSpec};
use polarity_core::textprep::TokenSeq;
use polarity_core::Error;
use rand::Rng;

fn seq(tokens: &[&str]) -> TokenSeq {
    TokenSeq::new(tokens.iter().copied()).unwrap()
}

fn classes(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[test]
fn gradient_matches_central_differences() {
    for seed in 0..5 {
        let (model, x, y) = common::small_instance(seed);
        let err = common::max_fd_relative_error(&model, &x, &y, 1e-5);
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn zero_model_on_balanced_data_has_log3_loss() {
    let (mut model, x, _) = common::small_instance(1);
    for row in &mut model.weights {
        row.iter_mut().for_each(|w| *w = 0.0);
    }
    model.bias.iter_mut().for_each(|b| *b = 0.0);
    let loss = model.loss_and_grad(&x[..3], &[0, 1, 2]).unwrap().loss;
    assert!((loss - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn softmax_matches_direct_formula() {
    let mut rng = common::rng(3);
    for _ in 0..200 {
        let z: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let total: f64 = z.iter().map(|v| v.exp()).sum();
        for (p, v) in softmax(&z).iter().zip(&z) {
            assert!((p - v.exp() / total).abs() < 1e-12);
        }
    }
}

fn disjoint_corpus() -> (Vec<TokenSeq>, Vec<&'static str>) {
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for i in 0..10 {
        docs.push(seq(&vec!["alpha"; 1 + i % 3]));
        labels.push("A");
        docs.push(seq(&vec!["beta"; 1 + i % 2]));
        labels.push("B");
    }
    (docs, labels)
}

#[test]
fn separable_corpus_is_fit_exactly() {
    let (docs, labels) = disjoint_corpus();
    let vocab = build_vocabulary(&docs, 1).unwrap();
    let x: Vec<DocVector> = docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let cfg = TrainConfig::<f64> {
        epochs: 200,
        ..TrainConfig::default()
    };
    let model = train(&x, &labels, &classes(&["A", "B"]), &vocab, &cfg).unwrap();
    for (d, l) in docs.iter().zip(&labels) {
        assert_eq!(model.predict(d).label, *l);
    }
}

#[test]
fn unregularized_gradient_shrinks_on_separable_data() {
    let (docs, labels) = disjoint_corpus();
    let vocab = build_vocabulary(&docs, 1).unwrap();
    let x: Vec<DocVector> = docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let y: Vec<usize> = labels.iter().map(|l| usize::from(*l == "B")).collect();
    let norm = |epochs| {
        let cfg = TrainConfig::<f64> {
            epochs,
            l2: 0.0,
            tol: 0.0,
            ..TrainConfig::default()
        };
        let m = train(&x, &labels, &classes(&["A", "B"]), &vocab, &cfg).unwrap();
        let g = m.loss_and_grad(&x, &y).unwrap();
        g.grad_weights
            .iter()
            .flatten()
            .chain(&g.grad_bias)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    };
    let (early, late) = (norm(20), norm(2000));
    assert!(late < early / 10.0, "{early} -> {late}");
}

#[test]
fn small_steps_never_increase_loss() {
    let spec = LabeledCorpusSpec {
        n_docs: 60,
        specific_share: 0.5,
        ..Default::default()
    };
    let (docs, labels) = labeled_corpus(&spec, 9).unwrap();
    let vocab = build_vocabulary(&docs, 1).unwrap();
    let x: Vec<DocVector> = docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let cfg = TrainConfig::<f64> {
        learning_rate: 0.01,
        epochs: 300,
        tol: 0.0,
        ..TrainConfig::default()
    };
    let mut losses = Vec::new();
    train_traced(
        &x,
        &labels,
        &classes(&["class0", "class1", "class2"]),
        &vocab,
        &cfg,
        |_, l| losses.push(l),
    )
    .unwrap();
    assert_eq!(losses.len(), 300);
    for w in losses.windows(2) {
        assert!(w[1] <= w[0] + 1e-15, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn ridge_solution_does_not_depend_on_seed() {
    let spec = LabeledCorpusSpec {
        n_docs: 30,
        ..Default::default()
    };
    let (docs, labels) = labeled_corpus(&spec, 4).unwrap();
    let vocab = build_vocabulary(&docs, 1).unwrap();
    let x: Vec<DocVector> = docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let c = classes(&["class0", "class1", "class2"]);
    let fit = |seed| {
        let cfg = TrainConfig::<f64> {
            l2: 0.1,
            learning_rate: 0.5,
            epochs: 20_000,
            tol: 1e-14,
            seed,
            ..TrainConfig::default()
        };
        train(&x, &labels, &c, &vocab, &cfg).unwrap().stats.unwrap().final_loss
    };
    let (a, b) = (fit(1), fit(2));
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn training_is_bit_reproducible() {
    let (docs, labels) = labeled_corpus(
        &LabeledCorpusSpec {
            n_docs: 90,
            ..Default::default()
        },
        2,
    )
    .unwrap();
    let vocab = build_vocabulary(&docs, 2).unwrap();
    let x: Vec<DocVector> = docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let c = classes(&["class0", "class1", "class2"]);
    let a = train(&x, &labels, &c, &vocab, &TrainConfig::<f64>::default()).unwrap();
    let b = train(&x, &labels, &c, &vocab, &TrainConfig::<f64>::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn saved_model_predicts_identically() {
    let (docs, labels) = labeled_corpus(&LabeledCorpusSpec::default(), 8).unwrap();
    let vocab = build_vocabulary(&docs, 2).unwrap();
    let x: Vec<DocVector> = docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let c = classes(&["class0", "class1", "class2"]);
    let model = train(&x, &labels, &c, &vocab, &TrainConfig::<f64>::default()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let back = load_model::<f64>(&path).unwrap();
    let (probe, _) = labeled_corpus(
        &LabeledCorpusSpec {
            n_docs: 100,
            specific_share: 0.3,
            ..Default::default()
        },
        99,
    )
    .unwrap();
    for d in probe.iter().chain([&seq(&[]), &seq(&["unseen", "words"])]) {
        assert_eq!(back.predict(d), model.predict(d));
    }

    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() - 40]).unwrap();
    assert!(matches!(load_model::<f64>(&path), Err(Error::Corrupt(_))));
}

#[test]
fn oov_documents_do_not_disturb_other_predictions() {
    let (docs, labels) = disjoint_corpus();
    let vocab = build_vocabulary(&docs, 1).unwrap();
    let x: Vec<DocVector> = docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let model = train(
        &x,
        &labels,
        &classes(&["A", "B"]),
        &vocab,
        &TrainConfig::<f64>::default(),
    )
    .unwrap();
    let empty = model.predict(&seq(&["zzz"]));
    assert_eq!(empty.probabilities, softmax(&model.bias));
    let before: Vec<_> = docs.iter().map(|d| model.predict(d)).collect();
    let _ = model.predict(&seq(&["zzz", "qqq"]));
    let after: Vec<_> = docs.iter().map(|d| model.predict(d)).collect();
    assert_eq!(before, after);
}

#[test]
fn split_holds_out_a_fifth_of_each_class() {
    let (_, labels) = labeled_corpus(&LabeledCorpusSpec::default(), 1).unwrap();
    let (train_idx, test_idx) = stratified_split(&labels, 0.2, 42).unwrap();
    assert_eq!((train_idx.len(), test_idx.len()), (240, 60));
    for c in ["class0", "class1", "class2"] {
        assert_eq!(test_idx.iter().filter(|&&i| labels[i] == c).count(), 20);
    }
}

#[test]
fn single_class_training_is_rejected() {
    let (docs, _) = disjoint_corpus();
    let vocab = build_vocabulary(&docs, 1).unwrap();
    let x: Vec<DocVector> = docs.iter().map(|d| vectorize(d, &vocab)).collect();
    let labels = vec!["A"; x.len()];
    assert!(train(
        &x,
        &labels,
        &classes(&["A", "B"]),
        &vocab,
        &TrainConfig::<f64>::default()
    )
    .is_err());
}
