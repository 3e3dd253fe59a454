//! Compares back-propagated gradients of a small 3D network with central
//! finite differences of its loss.
//!
//! ```text
//! cargo run --example gradient_check
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqoe::pipeline::{build_model, Exec, ModelConfig};
use vqoe::Tensor;

fn main() -> vqoe::Result<()> {
    let cfg = ModelConfig::new(2, 2, 3).with_fc_sizes(vec![6]);
    let mut model = build_model(&cfg, 4, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let inputs: Vec<Tensor> = (0..4).map(|_| Tensor::from_fn([1, 4, 4, 4], |_| rng.gen_range(-1.0..1.0))).collect();
    let refs: Vec<&Tensor> = inputs.iter().collect();
    let labels = [0, 1, 2, 1];
    let exec = Exec::single();

    let analytic = model.loss_and_grads(&refs, &labels, &exec)?;
    println!("{} parameters, batch loss {:.6}", model.param_count(), analytic.mean_loss);

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (b, size) in model.param_buffer_sizes().into_iter().enumerate() {
        let mut buffer_worst: f64 = 0.0;
        for i in 0..size {
            let orig = model.param_buffers_mut()[b][i];
            model.param_buffers_mut()[b][i] = orig + h;
            let plus = model.loss_and_grads(&refs, &labels, &exec)?.mean_loss;
            model.param_buffers_mut()[b][i] = orig - h;
            let minus = model.loss_and_grads(&refs, &labels, &exec)?.mean_loss;
            model.param_buffers_mut()[b][i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic.grads[b][i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-7);
            buffer_worst = buffer_worst.max(rel);
        }
        println!("buffer {b:>2}: {size:>5} entries, worst relative error {buffer_worst:.2e}");
        worst = worst.max(buffer_worst);
    }
    println!("overall worst relative error {worst:.2e}");
    Ok(())
}
