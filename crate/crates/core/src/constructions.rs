//! Constructions of complementary structures: the quantum Fourier transform,
//! Weyl shift/clock systems and the subalgebras they generate, the block
//! criterion for unitarily moved tensor factors, and the two-mode CAR model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{pauli, ComplexMatrix, PauliWord, C64, ONE, TOL, ZERO};
use crate::subalgebra::{complementarity_report, Subalgebra};

/// Unitary with entries `omega^{jk} / sqrt(n)`, `omega = exp(2 pi i / n)`.
pub fn quantum_fourier(n: usize) -> ComplexMatrix {
    assert!(n >= 1, "Fourier dimension must be positive");
    let scale = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, |j, k| {
        let phase = 2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
        C64::from_polar(scale, phase)
    })
}

/// Cyclic shift `X` and phase operator `Z` on `C^p` with `Z X = q X Z`.
#[derive(Clone, Debug)]
pub struct WeylSystem {
    pub p: u64,
    pub q: C64,
    pub x: ComplexMatrix,
    pub z: ComplexMatrix,
    /// Set when `p` is not an odd prime; the subalgebra constructions below
    /// require one.
    pub not_odd_prime: bool,
}

impl WeylSystem {
    /// `X^k Z^l`.
    pub fn word(&self, k: u64, l: u64) -> ComplexMatrix {
        &self.x.pow((k % self.p) as usize) * &self.z.pow((l % self.p) as usize)
    }
}

pub(crate) fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

pub fn weyl_system(p: u64) -> Result<WeylSystem> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("Weyl modulus must be at least 2, got {p}")));
    }
    let n = p as usize;
    let q = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / p as f64);
    let x = ComplexMatrix::from_fn(n, |r, c| if r == (c + 1) % n { ONE } else { ZERO });
    let phases: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / p as f64)).collect();
    let z = ComplexMatrix::diagonal(&phases);
    Ok(WeylSystem { p, q, x, z, not_odd_prime: p == 2 || !is_prime(p) })
}

/// `u = (k1, l1, k2, l2)` with components reduced mod `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PhaseVector {
    pub k1: u64,
    pub l1: u64,
    pub k2: u64,
    pub l2: u64,
}

impl PhaseVector {
    pub fn new(k1: u64, l1: u64, k2: u64, l2: u64, p: u64) -> Self {
        Self { k1: k1 % p, l1: l1 % p, k2: k2 % p, l2: l2 % p }
    }

    /// All `p^4` vectors.
    pub fn all(p: u64) -> impl Iterator<Item = Self> {
        (0..p.pow(4)).map(move |mut k| {
            let mut c = [0u64; 4];
            for slot in &mut c {
                *slot = k % p;
                k /= p;
            }
            Self::new(c[0], c[1], c[2], c[3], p)
        })
    }
}

/// `u ∘ v = k1 l1' - k1' l1 + k2 l2' - k2' l2 (mod p)`.
pub fn symplectic(u: &PhaseVector, v: &PhaseVector, p: u64) -> u64 {
    let p = p as i128;
    let t = |a: u64, b: u64| a as i128 * b as i128;
    let s = t(u.k1, v.l1) - t(v.k1, u.l1) + t(u.k2, v.l2) - t(v.k2, u.l2);
    s.rem_euclid(p) as u64
}

/// `pi(u) = X^{k1} Z^{l1} (x) X^{k2} Z^{l2}`.
pub fn pi_op(u: &PhaseVector, p: u64) -> Result<ComplexMatrix> {
    let w = weyl_system(p)?;
    Ok(w.word(u.k1, u.l1).tensor(&w.word(u.k2, u.l2)))
}

/// The subalgebra of `M_p (x) M_p` generated by `pi(u)` and `pi(v)`; it is
/// isomorphic to `M_p` whenever `u ∘ v != 0`.
pub fn weyl_subalgebra(u: &PhaseVector, v: &PhaseVector, p: u64) -> Result<Subalgebra> {
    if p <= 2 || !is_prime(p) {
        return Err(Error::InvalidParameter(format!(
            "Weyl subalgebra needs an odd prime modulus, got {p}"
        )));
    }
    if symplectic(u, v, p) == 0 {
        return Err(Error::DegenerateSymplectic { p });
    }
    let n = (p * p) as usize;
    Subalgebra::from_generators(n, &[pi_op(u, p)?, pi_op(v, p)?])
}

/// Outcome of the block-unitary criterion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockCriterion {
    /// `(m/n) sum_k |W_k><W_k|` equals the identity on `M_m`.
    pub holds: bool,
    pub residual: f64,
    /// The criterion cannot hold when `m < n`.
    pub m_less_than_n: bool,
    /// Independent verdict: `W (C I_n (x) M_m) W*` is complementary to
    /// `C I_n (x) M_m`.
    pub complementary: bool,
}

/// Decides whether `W (C I_n (x) M_m) W*` is complementary to `C I_n (x) M_m`
/// from the `m x m` blocks of `W` alone. Block `(r, c)` is summand `k = r n + c`.
pub fn block_criterion(w: &ComplexMatrix, n: usize, m: usize) -> Result<BlockCriterion> {
    if n == 0 || m == 0 || w.dim() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: w.dim() });
    }
    let residual = w.unitary_residual();
    if residual > TOL {
        return Err(Error::NotUnitary { residual });
    }
    let m2 = m * m;
    let mut t = nalgebra::DMatrix::<C64>::zeros(m2, m2);
    for r in 0..n {
        for c in 0..n {
            let block = ComplexMatrix::from_fn(m, |a, b| w.get(r * m + a, c * m + b));
            let v = nalgebra::DVector::from_column_slice(block.as_slice());
            t += &v * v.adjoint();
        }
    }
    t *= C64::new(m as f64 / n as f64, 0.0);
    let t = ComplexMatrix::new(t)?;
    let residual = t.max_abs_diff(&ComplexMatrix::identity(m2));
    let m_less_than_n = m < n;
    let fixed = Subalgebra::right_factor(n, m);
    let moved = fixed.conjugate(w);
    let complementary = complementarity_report(&moved, &fixed)?.verdict;
    Ok(BlockCriterion {
        holds: !m_less_than_n && residual <= TOL,
        residual,
        m_less_than_n,
        complementary,
    })
}

/// Two fermionic modes on `C^2 (x) C^2`.
#[derive(Clone, Debug)]
pub struct CarModel {
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub algebra1: Subalgebra,
    pub algebra2: Subalgebra,
    /// `sigma_3 (x) sigma_3`, implementing the parity automorphism.
    pub parity: ComplexMatrix,
    /// Pauli words spanning the parity fixed-point algebra, in two groups of four.
    pub even_bases: [[PauliWord; 4]; 2],
    /// Worst residual over all canonical anticommutation identities.
    pub car_residual: f64,
}

pub fn car_model() -> CarModel {
    let e12 = ComplexMatrix::unit(2, 0, 1);
    let a1 = e12.tensor(&ComplexMatrix::identity(2));
    let a2 = pauli(3).tensor(&e12);
    let id = ComplexMatrix::identity(4);
    let zero = ComplexMatrix::zeros(4);
    let checks = [
        (a1.anticommutator(&a1.adjoint()), &id),
        (a2.anticommutator(&a2.adjoint()), &id),
        (a1.anticommutator(&a1), &zero),
        (a1.anticommutator(&a2), &zero),
        (a1.anticommutator(&a2.adjoint()), &zero),
        (a2.anticommutator(&a2), &zero),
    ];
    let car_residual = checks.iter().map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max);
    let algebra1 = Subalgebra::from_generators(4, std::slice::from_ref(&a1)).expect("CAR mode 1");
    let algebra2 = Subalgebra::from_generators(4, std::slice::from_ref(&a2)).expect("CAR mode 2");
    let w = |i, j| PauliWord::new(i, j);
    CarModel {
        a1,
        a2,
        algebra1,
        algebra2,
        parity: pauli(3).tensor(&pauli(3)),
        even_bases: [
            [w(0, 0), w(1, 1), w(2, 2), w(3, 3)],
            [w(0, 3), w(1, 2), w(2, 1), w(3, 0)],
        ],
        car_residual,
    }
}

/// Verification suite for the CAR model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CarVerification {
    pub car_residual: f64,
    /// Anticommutation identities within `1e-12`.
    pub car_holds: bool,
    pub modes_complementary: bool,
    pub bell_complementary_to_mode1: bool,
    pub bell_complementary_to_mode2: bool,
    /// `max_k ||Θ(P_k) - P_k||` over the Bell projectors.
    pub parity_residual: f64,
    pub parity_fixes_bell: bool,
}

impl CarModel {
    pub fn verify(&self) -> Result<CarVerification> {
        let bell = bell_masa();
        let parity_residual = bell_projectors()
            .iter()
            .map(|p| p.conjugate_by(&self.parity).max_abs_diff(p))
            .fold(0.0, f64::max);
        Ok(CarVerification {
            car_residual: self.car_residual,
            car_holds: self.car_residual <= 1e-12,
            modes_complementary: complementarity_report(&self.algebra1, &self.algebra2)?.verdict,
            bell_complementary_to_mode1: complementarity_report(&bell, &self.algebra1)?.verdict,
            bell_complementary_to_mode2: complementarity_report(&bell, &self.algebra2)?.verdict,
            parity_residual,
            parity_fixes_bell: parity_residual <= 1e-12,
        })
    }
}

/// Unitary whose columns are the Bell vectors
/// `(|00>+|11>)/√2, (|01>+|10>)/√2, (|00>-|11>)/√2, (|01>-|10>)/√2`.
pub fn bell_basis() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[
        &[s, 0.0, s, 0.0],
        &[0.0, s, 0.0, s],
        &[0.0, s, 0.0, -s],
        &[s, 0.0, -s, 0.0],
    ])
    .expect("4x4")
}

/// Rank-one projections onto the Bell vectors.
pub fn bell_projectors() -> Vec<ComplexMatrix> {
    let b = bell_basis();
    (0..4).map(|k| ComplexMatrix::outer(&b.column(k))).collect()
}

/// The MASA spanned by `I, σ11, σ22, σ33` (operators diagonal in the Bell basis).
pub fn bell_masa() -> Subalgebra {
    let gens: Vec<_> = (1..4).map(|k| PauliWord::new(k, k).matrix()).collect();
    Subalgebra::from_generators(4, &gens).expect("Bell triplet generates a MASA")
}
