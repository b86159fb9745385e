//! Saves a checkpoint after one Adam step and loads it back bit for bit.

use tigranet::graph::GridGraph;
use tigranet::network::{
    init_params, load_checkpoint, loss_and_grad, parse_architecture, save_checkpoint, Checkpoint,
};
use tigranet::optim::AdamState;

fn main() -> tigranet::Result<()> {
    let spec = parse_architecture("SC[3,3]-DP[12]-S[3]-FC[5]-FC[3]", (6, 6), 3)?;
    let mut params = init_params(&spec, 11)?;
    let mut adam = AdamState::new(&params, 1e-3, 0.9, 0.999, 1e-8);
    let l = GridGraph::new(6, 6)?.laplacian()?;
    let img: Vec<f64> = (0..36).map(|i| (i % 7) as f64 / 7.0).collect();
    let (loss, _, grads) = loss_and_grad(&spec, &params, &l, &img, 1)?;
    adam.step(&mut params, &grads)?;
    println!(
        "loss before the step {loss:.6}, {} parameters",
        params.num_values()
    );

    let ckpt = Checkpoint {
        spec,
        params,
        optimizer: adam,
        seed: 11,
        epoch: 1,
        metrics: vec![("train_loss".into(), loss)],
    };
    let path = std::env::temp_dir().join("tigranet-example.tig");
    save_checkpoint(&path, &ckpt)?;
    let back = load_checkpoint(&path)?;
    println!(
        "{} -> {} bytes, identical: {}",
        back.spec,
        ckpt.to_bytes().len(),
        back == ckpt
    );
    for (name, t) in back.params.tensor_names().iter().zip(back.params.tensors()) {
        println!("  {name:<10} {:>4} values", t.len());
    }
    Ok(())
}
