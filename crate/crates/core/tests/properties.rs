//! Structural properties of the SCNN trunk, checked on random parameters and inputs.

mod common;

use common::{naive_swarm, randomize};
use proptest::prelude::*;
use scnn::layers::swarm_features;
use scnn::tensor::{cosine, softmax_cross_entropy};
use scnn::train::{accumulate_example, Optimizer, OptimizerKind};
use scnn::data::Example;
use scnn::{checkpoint, Architecture, Model, ModelConfig, Prng, Variant};

const VOCAB: usize = 50;
const LEN: usize = 12;

fn scnn(seed: u64, relu: bool) -> Model {
    let mut cfg = ModelConfig::canonical(Variant::Scnn).with_vocab_size(VOCAB);
    cfg.seq_len = LEN;
    cfg.embed_dim = 6;
    cfg.arch = Architecture::Scnn {
        filter_dims: vec![8, 5],
        post_filter_relu: relu,
    };
    let mut m = Model::build(cfg, seed).unwrap();
    randomize(m.params_mut(), &mut Prng::new(seed ^ 0xa5), 1.0);
    m
}

fn ids_strategy() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..VOCAB as u32, LEN)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_filter_matches_outer_product(
        x in prop::collection::vec(-10.0f64..10.0, 1..60),
        s in prop::collection::vec(-10.0f64..10.0, 1..20),
    ) {
        let fast = swarm_features(&x, &s).unwrap();
        let slow = naive_swarm(&x, &s);
        let scale = x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64;
        for (j, (a, b)) in fast.iter().zip(&slow).enumerate() {
            prop_assert!((a - b).abs() <= 1e-12 * (scale * s[j].abs()).max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn last_filter_outputs_are_parallel(seed in 0u64..1000, a in ids_strategy(), b in ids_strategy()) {
        let m = scnn(seed, false);
        let fa = m.last_swarm_features(&a).unwrap();
        let fb = m.last_swarm_features(&b).unwrap();
        if let Some(c) = cosine(fa.data(), fb.data()) {
            prop_assert!((c.abs() - 1.0).abs() < 1e-9, "cosine {}", c);
        }
    }

    #[test]
    fn token_order_does_not_matter(seed in 0u64..1000, ids in ids_strategy(), perm_seed: u64) {
        let m = scnn(seed, false);
        let mut shuffled = ids.clone();
        Prng::new(perm_seed).shuffle(&mut shuffled);
        let a = m.predict(&ids).unwrap().logits;
        let b = m.predict(&shuffled).unwrap().logits;
        for (x, y) in a.data().iter().zip(b.data()) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-12));
        }
    }

    #[test]
    fn closed_form_equals_layers(seed in 0u64..1000, ids in ids_strategy(), relu: bool) {
        let m = scnn(seed, relu);
        let layered = m.predict(&ids).unwrap().logits;
        let closed = m.scnn_closed_form(&ids).unwrap();
        for (x, y) in layered.data().iter().zip(closed.data()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn small_step_lowers_the_loss(seed in 0u64..1000, ids in ids_strategy(), label in 0u8..2) {
        let mut m = scnn(seed, false);
        let ex = Example { ids: ids.clone(), label, len: LEN };
        let loss = |m: &Model| softmax_cross_entropy(m.predict(&ids).unwrap().logits.data(), usize::from(label)).unwrap().0;
        let before = loss(&m);
        m.zero_grad();
        accumulate_example(&mut m, &ex, 1.0).unwrap();
        let grad_norm: f64 = m.params_mut().iter().map(|p| p.grad().unwrap_or(&[]).iter().map(|g| g * g).sum::<f64>()).sum();
        prop_assume!(grad_norm > 1e-12);
        Optimizer::new(OptimizerKind::Sgd, 1e-4).step(&mut m.params_mut()).unwrap();
        prop_assert!(loss(&m) < before);
    }
}

#[test]
fn thousand_random_closed_form_cases() {
    let mut rng = Prng::new(77);
    for case in 0..1000 {
        let m = scnn(case, case % 2 == 1);
        let ids: Vec<u32> = (0..LEN).map(|_| rng.below(VOCAB) as u32).collect();
        let a = m.predict(&ids).unwrap().logits;
        let b = m.scnn_closed_form(&ids).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "case {case}: {x} vs {y}");
        }
    }
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Prng::new(3);
    for seed in 0..4 {
        let m = scnn(seed, seed % 2 == 0);
        let path = dir.path().join(format!("m{seed}.ckpt"));
        checkpoint::save(&m, &path).unwrap();
        let back = checkpoint::load(&path).unwrap();
        for _ in 0..20 {
            let ids: Vec<u32> = (0..LEN).map(|_| rng.below(VOCAB) as u32).collect();
            assert_eq!(m.predict(&ids).unwrap(), back.predict(&ids).unwrap());
        }
    }
}
