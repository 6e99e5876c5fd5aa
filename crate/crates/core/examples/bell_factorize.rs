//! Splitting a Bell-type M-triplet into F-triplets of a qubit and its commutant.

use quasiorth::four_level::{bell_factorize, classify_triplet};
use quasiorth::matrix::random_unitary;
use quasiorth::{PauliWord, Subalgebra};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> quasiorth::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_unitary(2, &mut rng).tensor(&random_unitary(2, &mut rng));
    let s: Vec<_> = ["s11", "s22", "s33"]
        .iter()
        .map(|l| l.parse::<PauliWord>().map(|w| w.matrix().conjugate_by(&g)))
        .collect::<quasiorth::Result<_>>()?;
    let t = classify_triplet(&s[0], &s[1], &s[2])?;
    println!("input: {:?}-triplet, sign {}", t.kind, t.sign);

    let f = bell_factorize(&Subalgebra::left_factor(2, 2).conjugate(&g), &t)?;
    println!("A: {:?}-triplet, sign {}", f.a.kind, f.a.sign);
    println!("B: {:?}-triplet, sign {}", f.b.kind, f.b.sign);
    println!("max |T_i - A_i B_i| = {:.1e}", f.residual);
    Ok(())
}
