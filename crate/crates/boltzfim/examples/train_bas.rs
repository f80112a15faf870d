//! Training a Boltzmann machine on bars-and-stripes with plain gradient
//! descent under both encodings. The model family is identical, yet the spin
//! encoding converges markedly faster: its Fisher matrix starts at the
//! identity while the bit encoding's is ill-conditioned from the first step,
//! and SGD pays for that conditioning.
//!
//! Run with: cargo run --release --example train_bas

use boltzfim::data::{DatasetKind, DatasetSpec};
use boltzfim::encoding::Encoding;
use boltzfim::optim::{train, Optimizer, TrainConfig};

fn main() -> boltzfim::Result<()> {
    let dataset = DatasetSpec {
        kind: DatasetKind::Bas { n: 2 },
        count: 450,
        seed: 0,
    }
    .generate()?;
    println!(
        "bars-and-stripes 2×2: {} draws over {} patterns (digest {})",
        dataset.distribution().total(),
        dataset.distribution().support_size(),
        &dataset.digest()[..12]
    );
    println!("\nSGD, 500 iterations, eta = 0.01 / lambda_max recomputed each step\n");

    let mut finals = Vec::new();
    for encoding in [Encoding::Ising, Encoding::Qubo] {
        let cfg = TrainConfig::new(encoding, Optimizer::Sgd);
        let trace = train(&dataset, &cfg)?;
        println!("{encoding} encoding:");
        println!("{:>6} {:>10} {:>12} {:>12} {:>12}", "iter", "KL", "lambda_max", "lambda_min", "eta");
        for row in trace.rows.iter().filter(|r| [0, 10, 50, 100, 250, 500].contains(&r.iter)) {
            println!(
                "{:>6} {:>10.5} {:>12.4e} {:>12.4e} {:>12.4e}",
                row.iter,
                row.kl,
                row.lambda_max(),
                row.lambda_min(),
                row.eta
            );
        }
        finals.push((encoding, trace.final_kl()));
        println!();
    }

    let (spin, bit) = (finals[0].1, finals[1].1);
    println!("final KL: {} {:.5} vs {} {:.5}", finals[0].0, spin, finals[1].0, bit);
    println!(
        "the spin encoding ends {:.1}× lower after the same number of steps",
        bit / spin
    );
    Ok(())
}
