//! A copy of M_p inside M_p ⊗ M_p that is complementary to both tensor factors.

use quasiorth::constructions::{block_criterion, quantum_fourier, symplectic, weyl_subalgebra, PhaseVector};
use quasiorth::{complementarity_report, Subalgebra};

fn main() -> quasiorth::Result<()> {
    for p in [3u64, 5] {
        let u = PhaseVector::new(1, 0, 1, 0, p);
        let v = PhaseVector::new(0, 1, 0, 1, p);
        let alg = weyl_subalgebra(&u, &v, p)?;
        let n = p as usize;
        let left = complementarity_report(&alg, &Subalgebra::left_factor(n, n))?;
        let right = complementarity_report(&alg, &Subalgebra::right_factor(n, n))?;
        println!(
            "p = {p}: u∘v = {}, dim {}, kind {:?}, complementary to left {} and right {}",
            symplectic(&u, &v, p),
            alg.dim(),
            alg.kind(),
            left.verdict,
            right.verdict
        );
    }

    let bc = block_criterion(&quantum_fourier(4), 2, 2)?;
    println!("Fourier blocks of V_4: criterion {} (residual {:.1e})", bc.holds, bc.residual);
    Ok(())
}
