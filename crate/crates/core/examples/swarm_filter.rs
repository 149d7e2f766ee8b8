//! What a swarm filter computes, and why every SCNN feature vector points the
//! same way.
//!
//! cargo run --example swarm_filter

use scnn::layers::swarm_features;
use scnn::tensor::{column_mean, cosine, outer};
use scnn::{Model, ModelConfig, Prng, Tensor, Variant};

fn main() -> scnn::Result<()> {
    let x = Tensor::from_vec(vec![1.0, 2.0, 3.0]);
    let s = Tensor::from_vec(vec![2.0, 4.0]);
    let literal = column_mean(&outer(&x, &s)?)?;
    println!("column mean of x (x) s : {:?}", literal.data());
    println!("mean(x) * s            : {:?}", swarm_features(x.data(), s.data())?);

    let model = Model::build(ModelConfig::canonical(Variant::Scnn).with_vocab_size(500), 1)?;
    let mut rng = Prng::new(2);
    let inputs: Vec<Vec<u32>> = (0..4)
        .map(|_| (0..140).map(|_| rng.below(500) as u32).collect())
        .collect();
    let feats: Vec<Tensor> = inputs
        .iter()
        .map(|ids| model.last_swarm_features(ids))
        .collect::<scnn::Result<_>>()?;
    for (i, f) in feats.iter().enumerate() {
        let c = cosine(feats[0].data(), f.data()).unwrap_or(f64::NAN);
        println!("input {i}: cosine with input 0 = {c:+.12}");
    }
    for ids in &inputs {
        let layered = model.predict(ids)?.logits;
        let closed = model.scnn_closed_form(ids)?;
        println!("logits {:?} closed form {:?}", layered.data(), closed.data());
    }
    Ok(())
}
