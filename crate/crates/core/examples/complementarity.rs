//! The four equivalent complementarity conditions on a few pairs.

use quasiorth::constructions::{bell_masa, quantum_fourier};
use quasiorth::matrix::random_unitary;
use quasiorth::{complementarity_report, Subalgebra};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> quasiorth::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_unitary(4, &mut rng);
    let pairs = [
        ("diag(3) vs Fourier(3)", Subalgebra::diagonal_masa(3), Subalgebra::masa_of_basis(&quantum_fourier(3))?),
        ("diag(2) vs itself", Subalgebra::diagonal_masa(2), Subalgebra::diagonal_masa(2)),
        ("Bell vs left qubit", bell_masa(), Subalgebra::left_factor(2, 2)),
        ("qubits, conjugated", Subalgebra::left_factor(2, 2).conjugate(&u), Subalgebra::right_factor(2, 2).conjugate(&u)),
        ("random MASAs", Subalgebra::diagonal_masa(4), Subalgebra::diagonal_masa(4).conjugate(&u)),
    ];
    for (label, a, b) in pairs {
        let r = complementarity_report(&a, &b)?;
        let i = r.cond_i.map(|c| c.holds.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{label:24} verdict {:5}  (i) {i:5} (ii) {:5} (iii) {:5} (iv) {:5}  residual {:.1e}",
            r.verdict, r.cond_ii.holds, r.cond_iii.holds, r.cond_iv.holds, r.cond_ii.residual
        );
    }
    Ok(())
}
