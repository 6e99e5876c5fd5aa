//! Lower bounds on H(A|B) against the -log d ceiling.

use quasiorth::constructions::{bell_masa, quantum_fourier};
use quasiorth::entropy::{estimate, EstimateOptions};
use quasiorth::matrix::random_unitary;
use quasiorth::Subalgebra;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> quasiorth::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tilted = Subalgebra::diagonal_masa(2).conjugate(&random_unitary(2, &mut rng));
    let cases = [
        ("diag(2) | Fourier(2)", Subalgebra::diagonal_masa(2), Subalgebra::masa_of_basis(&quantum_fourier(2))?),
        ("diag(2) | random MASA", Subalgebra::diagonal_masa(2), tilted),
        ("Bell | left qubit", bell_masa(), Subalgebra::left_factor(2, 2)),
        ("diag(2) | M_2", Subalgebra::diagonal_masa(2), Subalgebra::full(2)),
    ];
    let opts = EstimateOptions::default();
    for (label, a, b) in cases {
        let e = estimate(&a, &b, &opts)?;
        println!(
            "{label:22} H >= {:.6} nats ({:.4} bits), bound {:.6}, {} terms",
            e.value,
            e.value_bits(),
            e.bound.unwrap_or(f64::NAN),
            e.decomposition.len()
        );
    }
    Ok(())
}
