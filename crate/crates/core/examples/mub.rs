//! Fourier bases are unbiased to the standard basis in every dimension.

use quasiorth::constructions::quantum_fourier;
use quasiorth::{complementarity_report, transition_is_hadamard, ComplexMatrix, Subalgebra};

fn main() -> quasiorth::Result<()> {
    for n in 2..=8 {
        let f = quantum_fourier(n);
        let h = transition_is_hadamard(&ComplexMatrix::identity(n), &f)?;
        let r = complementarity_report(&Subalgebra::diagonal_masa(n), &Subalgebra::masa_of_basis(&f)?)?;
        println!("n = {n}: hadamard {} (residual {:.1e}), MASAs complementary {}", h.holds, h.residual, r.verdict);
    }
    Ok(())
}
