//! Independent oracles shared by the integration tests: central finite
//! differences and the literal outer-product swarm filter.
#![allow(dead_code)]

use scnn::layers::{Embedding, Layer};
use scnn::tensor::softmax_cross_entropy;
use scnn::{Model, Prng, Tensor};

pub const STEP: f64 = 1e-6;
pub const GRAD_TOL: f64 = 1e-4;

/// Relative error with a floor so that two tiny gradients compare as equal.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

fn central(mut f: impl FnMut(f64) -> f64, at: f64) -> f64 {
    (f(at + STEP) - f(at - STEP)) / (2.0 * STEP)
}

pub fn random_vec(rng: &mut Prng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(lo, hi)).collect()
}

fn project(y: &Tensor, r: &[f64]) -> f64 {
    y.data().iter().zip(r).map(|(a, b)| a * b).sum()
}

/// Worst relative error between backprop and central differences of
/// `f(x) = r . layer(x)` for a random projection `r`, over the input and every
/// parameter entry.
pub fn layer_gradcheck(layer: &mut Layer, x: &Tensor, rng: &mut Prng) -> f64 {
    let (y, cache) = layer.forward(x).unwrap();
    let r = random_vec(rng, y.len(), -1.0, 1.0);
    for p in layer.params_mut() {
        p.zero_grad();
    }
    let dx = layer
        .backward(&cache, &Tensor::new(y.shape(), r.clone()).unwrap())
        .unwrap();
    assert_eq!(dx.shape(), x.shape());

    let mut worst = 0.0f64;
    let mut xp = x.clone();
    for i in 0..x.len() {
        let orig = x.data()[i];
        let numeric = central(
            |v| {
                xp.data_mut()[i] = v;
                project(&layer.forward(&xp).unwrap().0, &r)
            },
            orig,
        );
        xp.data_mut()[i] = orig;
        worst = worst.max(rel_err(dx.data()[i], numeric));
    }

    let analytic: Vec<Vec<f64>> = layer
        .params_mut()
        .into_iter()
        .map(|p| p.grad().map_or_else(|| vec![0.0; p.len()], <[f64]>::to_vec))
        .collect();
    for (k, grads) in analytic.iter().enumerate() {
        for (j, &g) in grads.iter().enumerate() {
            let orig = layer.params_mut()[k].data()[j];
            let numeric = central(
                |v| {
                    layer.params_mut()[k].data_mut()[j] = v;
                    project(&layer.forward(x).unwrap().0, &r)
                },
                orig,
            );
            layer.params_mut()[k].data_mut()[j] = orig;
            worst = worst.max(rel_err(g, numeric));
        }
    }
    worst
}

/// Same check for the embedding lookup, which takes ids rather than a tensor.
pub fn embedding_gradcheck(emb: &mut Embedding, ids: &[u32], rng: &mut Prng) -> f64 {
    let y = emb.forward(ids).unwrap();
    let r = random_vec(rng, y.len(), -1.0, 1.0);
    let mut table = emb.table().clone();
    table.zero_grad();
    let mut probe = Embedding::from_table(table).unwrap();
    probe
        .backward(ids, &Tensor::new(y.shape(), r.clone()).unwrap())
        .unwrap();
    let analytic = probe.table().grad().unwrap().to_vec();

    let mut worst = 0.0f64;
    let base = emb.table().data().to_vec();
    for (j, &g) in analytic.iter().enumerate() {
        let numeric = central(
            |v| {
                let mut data = base.clone();
                data[j] = v;
                let t = Tensor::new(emb.table().shape(), data).unwrap();
                project(&Embedding::from_table(t).unwrap().forward(ids).unwrap(), &r)
            },
            base[j],
        );
        worst = worst.max(rel_err(g, numeric));
    }
    worst
}

/// Check of softmax cross-entropy against its own definition.
pub fn loss_gradcheck(logits: &[f64], label: usize) -> f64 {
    let naive = |z: &[f64]| {
        let total: f64 = z.iter().map(|v| v.exp()).sum();
        -(z[label].exp() / total).ln()
    };
    let (_, grad) = softmax_cross_entropy(logits, label).unwrap();
    let mut worst = 0.0f64;
    let mut z = logits.to_vec();
    for i in 0..z.len() {
        let numeric = central(
            |v| {
                z[i] = v;
                naive(&z)
            },
            logits[i],
        );
        z[i] = logits[i];
        worst = worst.max(rel_err(grad[i], numeric));
    }
    worst
}

/// End-to-end check: cross-entropy of the whole model against every parameter.
pub fn model_gradcheck(model: &mut Model, ids: &[u32], label: usize) -> f64 {
    let loss_of = |m: &Model| {
        let (logits, _) = m.forward(ids).unwrap();
        softmax_cross_entropy(logits.data(), label).unwrap().0
    };
    model.zero_grad();
    let (logits, trace) = model.forward(ids).unwrap();
    let (_, g) = softmax_cross_entropy(logits.data(), label).unwrap();
    model.backward(&trace, &Tensor::from_vec(g)).unwrap();
    let analytic: Vec<Vec<f64>> = model
        .params_mut()
        .into_iter()
        .map(|p| p.grad().map_or_else(|| vec![0.0; p.len()], <[f64]>::to_vec))
        .collect();

    let mut worst = 0.0f64;
    for (k, grads) in analytic.iter().enumerate() {
        for (j, &g) in grads.iter().enumerate() {
            let orig = model.params_mut()[k].data()[j];
            model.params_mut()[k].data_mut()[j] = orig + STEP;
            let up = loss_of(model);
            model.params_mut()[k].data_mut()[j] = orig - STEP;
            let down = loss_of(model);
            model.params_mut()[k].data_mut()[j] = orig;
            worst = worst.max(rel_err(g, (up - down) / (2.0 * STEP)));
        }
    }
    worst
}

/// Literal definition: build the full n x m outer product, then average its rows.
pub fn naive_swarm(x: &[f64], s: &[f64]) -> Vec<f64> {
    let n = x.len();
    let rows: Vec<Vec<f64>> = x
        .iter()
        .map(|&xi| s.iter().map(|&sj| xi * sj).collect())
        .collect();
    (0..s.len())
        .map(|j| rows.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect()
}

/// Overwrites every parameter with uniform values so biases are nonzero too.
pub fn randomize(params: Vec<&mut Tensor>, rng: &mut Prng, scale: f64) {
    for p in params {
        for v in p.data_mut() {
            *v = rng.uniform(-scale, scale);
        }
    }
}

/// Distinct values spaced far apart relative to the finite-difference step,
/// so neither max-pool winners nor ReLU signs flip under perturbation.
pub fn spaced_values(rng: &mut Prng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|i| (i as f64 - (n / 2) as f64) * 0.01 + 0.0037)
        .collect();
    rng.shuffle(&mut v);
    v
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    scnn::tensor::cosine(a, b).expect("nonzero vectors")
}

pub const GRADCHECK_KINDS: [&str; 8] = [
    "embedding", "swarm", "dense", "conv", "maxpool", "relu", "bilstm", "loss",
];

/// Worst relative error over `trials` random small instances of one layer kind.
pub fn gradcheck_kind(kind: &str, trials: usize, seed: u64) -> f64 {
    use scnn::layers::{BiLstm, Conv2d, Dense, MaxPool2d, Relu, SwarmFilter};

    let mut rng = Prng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let dim = |rng: &mut Prng, lo: usize, hi: usize| lo + rng.below(hi - lo + 1);
        let err = match kind {
            "embedding" => {
                let (v, d, l) = (dim(&mut rng, 2, 8), dim(&mut rng, 1, 4), dim(&mut rng, 1, 6));
                let table = Tensor::new(&[v, d], random_vec(&mut rng, v * d, -1.0, 1.0)).unwrap();
                let mut emb = Embedding::from_table(table).unwrap();
                // repeats are likely with a small vocabulary, exercising scatter-add
                let ids: Vec<u32> = (0..l).map(|_| rng.below(v) as u32).collect();
                embedding_gradcheck(&mut emb, &ids, &mut rng)
            }
            "swarm" => {
                let (n, m) = (dim(&mut rng, 1, 12), dim(&mut rng, 1, 8));
                let mut layer = Layer::Swarm(SwarmFilter::from_weights(random_vec(&mut rng, m, -1.0, 1.0)).unwrap());
                let x = Tensor::from_vec(random_vec(&mut rng, n, -1.0, 1.0));
                layer_gradcheck(&mut layer, &x, &mut rng)
            }
            "dense" => {
                let (i, o) = (dim(&mut rng, 1, 8), dim(&mut rng, 1, 5));
                let mut layer = Layer::Dense(Dense::new(i, o, &mut rng));
                randomize(layer.params_mut(), &mut rng, 1.0);
                let x = Tensor::from_vec(random_vec(&mut rng, i, -1.0, 1.0));
                layer_gradcheck(&mut layer, &x, &mut rng)
            }
            "conv" => {
                let (h, w) = (dim(&mut rng, 2, 6), dim(&mut rng, 2, 6));
                let (kh, kw, c) = (dim(&mut rng, 1, h), dim(&mut rng, 1, w), dim(&mut rng, 1, 3));
                let mut layer = Layer::Conv(Conv2d::new(c, kh, kw, &mut rng));
                randomize(layer.params_mut(), &mut rng, 1.0);
                let x = Tensor::new(&[h, w], random_vec(&mut rng, h * w, -1.0, 1.0)).unwrap();
                layer_gradcheck(&mut layer, &x, &mut rng)
            }
            "maxpool" => {
                let (c, h, w, k) = (dim(&mut rng, 1, 3), dim(&mut rng, 1, 7), dim(&mut rng, 1, 7), dim(&mut rng, 1, 4));
                let mut layer = Layer::Pool(MaxPool2d::new(k).unwrap());
                let x = Tensor::new(&[c, h, w], spaced_values(&mut rng, c * h * w)).unwrap();
                layer_gradcheck(&mut layer, &x, &mut rng)
            }
            "relu" => {
                let n = dim(&mut rng, 1, 12);
                let x = Tensor::from_vec(spaced_values(&mut rng, n));
                layer_gradcheck(&mut Layer::Relu(Relu), &x, &mut rng)
            }
            "bilstm" => {
                let (l, d, h, layers) = (dim(&mut rng, 1, 4), dim(&mut rng, 1, 3), dim(&mut rng, 1, 3), dim(&mut rng, 1, 2));
                let mut layer = Layer::BiLstm(BiLstm::new(d, h, layers, &mut rng));
                randomize(layer.params_mut(), &mut rng, 0.8);
                let x = Tensor::new(&[l, d], random_vec(&mut rng, l * d, -1.0, 1.0)).unwrap();
                layer_gradcheck(&mut layer, &x, &mut rng)
            }
            "loss" => {
                let k = dim(&mut rng, 2, 6);
                let logits = random_vec(&mut rng, k, -5.0, 5.0);
                loss_gradcheck(&logits, rng.below(k))
            }
            other => panic!("unknown layer kind {other}"),
        };
        worst = worst.max(err);
    }
    worst
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Writes a synthetic training CSV and a 177/182/139 test CSV into `dir`.
pub fn write_synthetic_corpus(dir: &std::path::Path, samples: usize, seed: u64) -> (std::path::PathBuf, std::path::PathBuf) {
    use scnn::data::synthetic::{synthetic_test_tweets, synthetic_tweets, write_sentiment140_csv, SyntheticConfig};
    let train = dir.join("train.csv");
    let test = dir.join("test.csv");
    let cfg = SyntheticConfig {
        samples,
        seed,
        ..SyntheticConfig::default()
    };
    write_sentiment140_csv(&train, &synthetic_tweets(&cfg)).unwrap();
    write_sentiment140_csv(&test, &synthetic_test_tweets(177, 182, 139, seed + 1)).unwrap();
    (train, test)
}

/// Every regular file in `dir`, sorted by name, with its bytes.
pub fn dir_contents(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}
