//! Compares backprop with central differences for one layer of each kind.
//!
//! cargo run --example gradient_check

use scnn::layers::{BiLstm, Conv2d, Dense, Layer, MaxPool2d, SwarmFilter};
use scnn::{Prng, Tensor};

const H: f64 = 1e-6;

fn objective(layer: &Layer, x: &Tensor, r: &[f64]) -> f64 {
    let (y, _) = layer.forward(x).unwrap();
    y.data().iter().zip(r).map(|(a, b)| a * b).sum()
}

fn worst_input_error(mut layer: Layer, x: Tensor, rng: &mut Prng) -> f64 {
    let (y, cache) = layer.forward(&x).unwrap();
    let r: Vec<f64> = (0..y.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let dx = layer.backward(&cache, &Tensor::new(y.shape(), r.clone()).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let mut up = x.clone();
        up.data_mut()[i] += H;
        let mut down = x.clone();
        down.data_mut()[i] -= H;
        let numeric = (objective(&layer, &up, &r) - objective(&layer, &down, &r)) / (2.0 * H);
        let a = dx.data()[i];
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-3));
    }
    worst
}

fn main() {
    let mut rng = Prng::new(0);
    let input = |shape: &[usize], rng: &mut Prng| {
        let n = shape.iter().product();
        Tensor::new(shape, (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap()
    };
    let cases = vec![
        ("swarm", Layer::Swarm(SwarmFilter::new(6, &mut rng)), input(&[5, 3], &mut rng)),
        ("dense", Layer::Dense(Dense::new(4, 3, &mut rng)), input(&[4], &mut rng)),
        ("conv", Layer::Conv(Conv2d::new(2, 2, 3, &mut rng)), input(&[4, 5], &mut rng)),
        ("maxpool", Layer::Pool(MaxPool2d::new(2).unwrap()), input(&[2, 5, 5], &mut rng)),
        ("bilstm", Layer::BiLstm(BiLstm::new(2, 3, 2, &mut rng)), input(&[4, 2], &mut rng)),
    ];
    for (name, layer, x) in cases {
        println!("{name:<8} worst relative input-gradient error {:.2e}", worst_input_error(layer, x, &mut rng));
    }
}
