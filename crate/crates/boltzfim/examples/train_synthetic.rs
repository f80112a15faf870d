//! Damped natural gradient descent on synthetic data from a random-coupling
//! spin model. NGD preconditions the gradient with (F + λI)⁻¹, which makes
//! the update approximately invariant to the choice of encoding — both runs
//! track each other closely — while the Fisher spectra they traverse stay
//! very different: the bit encoding drags a cluster of tiny eigenvalues
//! (watch lambda_min shrink toward the damping scale) and keeps a lower
//! spectral entropy throughout.
//!
//! Run with: cargo run --release --example train_synthetic

use boltzfim::data::{DatasetKind, DatasetSpec};
use boltzfim::encoding::Encoding;
use boltzfim::optim::{train, Optimizer, TrainConfig};

fn main() -> boltzfim::Result<()> {
    let dataset = DatasetSpec {
        kind: DatasetKind::IsingSynth { d: 10, jc: 1.0 },
        count: 2_000,
        seed: 0,
    }
    .generate()?;
    println!(
        "synthetic dataset: d = 10, coupling scale 1.0, {} exact samples",
        dataset.distribution().total()
    );
    println!("\nNGD, 500 iterations, eta = 0.01, damping = 0.001\n");

    let mut traces = Vec::new();
    for encoding in [Encoding::Ising, Encoding::Qubo] {
        let cfg = TrainConfig::new(encoding, Optimizer::Ngd);
        traces.push((encoding, train(&dataset, &cfg)?));
    }

    println!(
        "{:>6} {:>11} {:>11} {:>12} {:>12} {:>9} {:>9}",
        "iter", "KL(spin)", "KL(bit)", "l_min(spin)", "l_min(bit)", "S(spin)", "S(bit)"
    );
    for iter in [0usize, 10, 50, 100, 200, 350, 500] {
        let a = traces[0].1.rows.iter().find(|r| r.iter == iter).unwrap();
        let b = traces[1].1.rows.iter().find(|r| r.iter == iter).unwrap();
        println!(
            "{:>6} {:>11.6} {:>11.6} {:>12.4e} {:>12.4e} {:>9.4} {:>9.4}",
            iter,
            a.kl,
            b.kl,
            a.lambda_min(),
            b.lambda_min(),
            a.spectral_entropy,
            b.spectral_entropy
        );
    }

    let (spin_kl, bit_kl) = (traces[0].1.final_kl(), traces[1].1.final_kl());
    println!(
        "\nfinal KL agrees to {:.2}% across encodings (spin {spin_kl:.6}, bit {bit_kl:.6})",
        100.0 * (spin_kl - bit_kl).abs() / spin_kl.max(bit_kl)
    );
    println!("the spectra never agree: the bit encoding's entropy stays lower the whole run");
    Ok(())
}
