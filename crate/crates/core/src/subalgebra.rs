//! Unital *-subalgebras of `M_n(C)`.
//!
//! A [`Subalgebra`] is stored as an orthonormal family of traceless Hermitian
//! matrices (normalized so that `tau(b^2) = 1`) which together with the
//! identity spans the algebra. Generators are accepted at the boundary and
//! closed under products and adjoints immediately.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{hs_inner, ComplexMatrix, C64, TOL};

/// Relative threshold below which a vector is considered inside a span.
const RANK_TOL: f64 = 1e-8;

/// Seed for the generic elements used in spectral decompositions.
const GENERIC_SEED: u64 = 0x5eed_a15e;

/// Number of inner-unitary rotations applied to each minimal-projection
/// family when checking condition (i).
const ROTATIONS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Abelian,
    Factor,
    General,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SubalgebraJson", into = "SubalgebraJson")]
pub struct Subalgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    kind: AlgebraKind,
    /// Spectral projections of a generic element: a maximal orthogonal family
    /// of minimal projections whenever the algebra is Abelian or a factor.
    family: Vec<ComplexMatrix>,
    homogeneity: Option<f64>,
}

/// Wire format `{"ambient_dim": n, "basis": [matrix...], "kind": "..."}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubalgebraJson {
    pub ambient_dim: usize,
    pub basis: Vec<ComplexMatrix>,
    pub kind: AlgebraKind,
}

impl From<Subalgebra> for SubalgebraJson {
    fn from(a: Subalgebra) -> Self {
        Self { ambient_dim: a.ambient_dim, basis: a.basis, kind: a.kind }
    }
}

impl TryFrom<SubalgebraJson> for Subalgebra {
    type Error = Error;

    /// The stored basis is treated as a generating family and re-closed; the
    /// kind tag is recomputed rather than trusted.
    fn try_from(j: SubalgebraJson) -> Result<Self> {
        Subalgebra::from_generators(j.ambient_dim, &j.basis)
    }
}

/// Orthonormal family in `C^{n^2}` built by Gram-Schmidt.
struct Span {
    vecs: Vec<Vec<C64>>,
}

impl Span {
    fn new() -> Self {
        Self { vecs: Vec::new() }
    }

    fn len(&self) -> usize {
        self.vecs.len()
    }

    /// Inserts `v` if it is not already (numerically) in the span.
    fn insert(&mut self, v: &[C64]) -> bool {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return false;
        }
        let mut w: Vec<C64> = v.iter().map(|z| z / norm).collect();
        for pass in 0..2 {
            for q in &self.vecs {
                let c: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
            let r = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if r < RANK_TOL {
                return false;
            }
            if pass == 1 {
                w.iter_mut().for_each(|z| *z /= r);
            }
        }
        self.vecs.push(w);
        true
    }
}

/// Orthonormal traceless Hermitian basis (w.r.t. `tau(ab)`) of the real span of
/// the Hermitian and anti-Hermitian parts of `elements`.
fn hermitian_traceless_basis<'a>(
    n: usize,
    elements: impl IntoIterator<Item = &'a ComplexMatrix>,
) -> Vec<ComplexMatrix> {
    let id = ComplexMatrix::identity(n);
    let half_i = C64::new(0.0, -0.5);
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for x in elements {
        let re = x.hermitian_part();
        let im = (x - &x.adjoint()).scale(half_i);
        for h in [re, im] {
            let mut h = &h - &id.scale(h.normalized_trace());
            let norm = h.tau_norm();
            if norm < 1e-12 {
                continue;
            }
            h = h.scale_real(1.0 / norm);
            let mut residual = 0.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = tau_real(b, &h);
                    h = &h - &b.scale_real(c);
                }
                residual = h.tau_norm();
                if residual < RANK_TOL {
                    break;
                }
            }
            if residual >= RANK_TOL {
                // remove the numerical skew part left over from subtraction
                let h = h.hermitian_part();
                basis.push(h.scale_real(1.0 / h.tau_norm()));
            }
        }
    }
    basis
}

/// `Re tau(a b)`, the real inner product on Hermitian matrices.
fn tau_real(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let s: C64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x.conj() * y).sum();
    s.re / a.dim() as f64
}

fn tau_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    // tau(a b) = <a*, b> / n
    let s: C64 = a
        .transpose()
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .sum();
    s / a.dim() as f64
}

impl Subalgebra {
    /// Smallest unital *-subalgebra of `M_n` containing `gens`.
    pub fn from_generators(ambient_dim: usize, gens: &[ComplexMatrix]) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        for g in gens {
            if g.dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: g.dim() });
            }
        }
        let n = ambient_dim;
        let mut letters: Vec<ComplexMatrix> = Vec::with_capacity(2 * gens.len());
        for g in gens {
            letters.push(g.clone());
            if !g.is_hermitian(TOL) {
                letters.push(g.adjoint());
            }
        }
        let mut span = Span::new();
        let id = ComplexMatrix::identity(n);
        span.insert(id.as_slice());
        let mut elements = vec![id.clone()];
        let mut level = vec![id];
        let cap = 2 * n * n;
        let mut rounds = 0;
        while !level.is_empty() {
            rounds += 1;
            if rounds > cap {
                return Err(Error::ClosureDidNotStabilize { rounds: cap });
            }
            let mut next = Vec::new();
            for x in &level {
                for g in &letters {
                    let y = g * x;
                    if span.insert(y.as_slice()) {
                        next.push(y);
                    }
                }
            }
            elements.extend(next.iter().cloned());
            level = next;
        }
        let basis = hermitian_traceless_basis(n, &elements);
        debug_assert_eq!(basis.len() + 1, span.len());
        Self::from_orthonormal_basis(n, basis)
    }

    /// Builds the algebra from a basis that is already orthonormal, traceless,
    /// Hermitian and closed. Only the structural metadata is computed.
    fn from_orthonormal_basis(ambient_dim: usize, basis: Vec<ComplexMatrix>) -> Result<Self> {
        let mut a = Self {
            ambient_dim,
            basis,
            kind: AlgebraKind::General,
            family: Vec::new(),
            homogeneity: None,
        };
        a.family = a.generic_spectral_family()?;
        let dim = a.dim();
        let r = a.family.len();
        a.kind = if a.is_commutative() {
            AlgebraKind::Abelian
        } else if r * r == dim {
            AlgebraKind::Factor
        } else {
            AlgebraKind::General
        };
        if a.kind == AlgebraKind::Abelian && r != dim {
            return Err(Error::JointDiagonalization(format!(
                "found {r} spectral projections for an Abelian algebra of dimension {dim}"
            )));
        }
        if a.kind != AlgebraKind::General {
            let traces: Vec<f64> = a.family.iter().map(|p| p.normalized_trace().re).collect();
            if traces.iter().all(|t| (t - traces[0]).abs() < 1e-9) {
                a.homogeneity = Some(traces[0]);
            }
        }
        Ok(a)
    }

    /// Algebra of matrices diagonal in the standard basis of `C^n`.
    pub fn diagonal_masa(n: usize) -> Self {
        let gens: Vec<_> = (0..n).map(|k| ComplexMatrix::unit(n, k, k)).collect();
        Self::from_generators(n, &gens).expect("diagonal units generate a MASA")
    }

    /// Algebra of matrices diagonal in the orthonormal basis given by the
    /// columns of the unitary `u`.
    pub fn masa_of_basis(u: &ComplexMatrix) -> Result<Self> {
        let residual = u.unitary_residual();
        if residual > TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self::diagonal_masa(u.dim()).conjugate(u))
    }

    /// `C I_n`.
    pub fn scalars(n: usize) -> Self {
        Self::from_generators(n, &[]).expect("scalars")
    }

    /// All of `M_n`.
    pub fn full(n: usize) -> Self {
        let gens: Vec<_> = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| ComplexMatrix::unit(n, r, c))
            .collect();
        Self::from_generators(n, &gens).expect("matrix units generate M_n")
    }

    /// `M_n (x) C I_m` inside `M_{nm}`.
    pub fn left_factor(n: usize, m: usize) -> Self {
        let id = ComplexMatrix::identity(m);
        let gens: Vec<_> = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| ComplexMatrix::unit(n, r, c).tensor(&id))
            .collect();
        Self::from_generators(n * m, &gens).expect("left tensor factor")
    }

    /// `C I_n (x) M_m` inside `M_{nm}`.
    pub fn right_factor(n: usize, m: usize) -> Self {
        let id = ComplexMatrix::identity(n);
        let gens: Vec<_> = (0..m)
            .flat_map(|r| (0..m).map(move |c| (r, c)))
            .map(|(r, c)| id.tensor(&ComplexMatrix::unit(m, r, c)))
            .collect();
        Self::from_generators(n * m, &gens).expect("right tensor factor")
    }

    /// `u A u*` for a unitary `u`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Self {
        assert_eq!(u.dim(), self.ambient_dim, "dimension mismatch");
        let basis = self
            .basis
            .iter()
            .map(|b| b.conjugate_by(u).hermitian_part())
            .collect();
        let family = self.family.iter().map(|p| p.conjugate_by(u).hermitian_part()).collect();
        Self { basis, family, ..self.clone() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    /// Common trace of the minimal projections, when they share one.
    pub fn homogeneity(&self) -> Option<f64> {
        self.homogeneity
    }

    /// Complex dimension of the algebra.
    pub fn dim(&self) -> usize {
        self.basis.len() + 1
    }

    /// `dim A - 1`.
    pub fn traceless_dim(&self) -> usize {
        self.basis.len()
    }

    fn is_commutative(&self) -> bool {
        for (k, a) in self.basis.iter().enumerate() {
            for b in &self.basis[k + 1..] {
                if a.commutator(b).max_abs() > 1e3 * TOL {
                    return false;
                }
            }
        }
        true
    }

    fn random_element(&self, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let mut x = ComplexMatrix::zeros(self.ambient_dim);
        for b in &self.basis {
            let c: f64 = StandardNormal.sample(rng);
            x = &x + &b.scale_real(c);
        }
        x
    }

    /// Spectral projections of a generic Hermitian element. Two independent
    /// draws are made and the finer decomposition is kept, since an accidental
    /// eigenvalue collision can only merge projections.
    fn generic_spectral_family(&self) -> Result<Vec<ComplexMatrix>> {
        let mut best: Option<Vec<ComplexMatrix>> = None;
        let mut rng = ChaCha8Rng::seed_from_u64(GENERIC_SEED);
        for _ in 0..2 {
            let x = self.random_element(&mut rng);
            let family = self.spectral_projections(&x)?;
            if best.as_ref().is_none_or(|b| family.len() > b.len()) {
                best = Some(family);
            }
        }
        let mut family = best.expect("at least one draw");
        family.sort_by_key(|p| {
            (0..p.dim()).find(|&k| p.get(k, k).re > 1e-6).unwrap_or(usize::MAX)
        });
        Ok(family)
    }

    fn spectral_projections(&self, x: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
        let (values, vectors) = x.hermitian_eigen_unchecked();
        let n = values.len();
        let spread = values[n - 1] - values[0];
        let gap = 1e-7 * (1.0 + spread);
        let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
        for k in 1..n {
            if values[k] - values[k - 1] > gap {
                clusters.push(vec![k]);
            } else {
                clusters.last_mut().expect("non-empty").push(k);
            }
        }
        let mut out = Vec::with_capacity(clusters.len());
        for cluster in clusters {
            let mut p = ComplexMatrix::zeros(n);
            for k in cluster {
                p = &p + &ComplexMatrix::outer(&vectors.column(k));
            }
            let drift = self.conditional_expectation_unchecked(&p).max_abs_diff(&p);
            if drift > 1e-6 {
                return Err(Error::JointDiagonalization(format!(
                    "spectral projection leaves the algebra (drift {drift:e})"
                )));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Trace-preserving conditional expectation `E_A(x)`: the Hilbert-Schmidt
    /// orthogonal projection of `x` onto `A`.
    pub fn conditional_expectation(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: x.dim() });
        }
        Ok(self.conditional_expectation_unchecked(x))
    }

    fn conditional_expectation_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.ambient_dim;
        let nf = n as f64;
        let mut out = ComplexMatrix::identity(n).scale(x.normalized_trace());
        for b in &self.basis {
            let c = hs_inner(b, x).expect("same dims") / nf;
            out = &out + &b.scale(c);
        }
        out
    }

    /// Maximal orthogonal family of minimal projections summing to `I`.
    ///
    /// For an Abelian algebra the family is unique. For a factor it is one of
    /// a continuum of choices, fixed deterministically by the basis ordering.
    pub fn minimal_projections(&self) -> Result<Vec<ComplexMatrix>> {
        match self.kind {
            AlgebraKind::General => Err(Error::UnsupportedKind(AlgebraKind::General)),
            _ => Ok(self.family.clone()),
        }
    }

    /// Random unitary of the form `exp(i h)` with `h` Hermitian in `A`.
    fn inner_unitary(&self, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        self.random_element(rng)
            .unitary_exp()
            .expect("random element of a *-algebra basis is Hermitian")
    }

    /// Relative commutant `{x : x a = a x for all a in A}`.
    pub fn commutant(&self) -> Self {
        let n = self.ambient_dim;
        let n2 = n * n;
        // kernel of x -> sum_j [[x, b_j], b_j] = x S + S x - 2 sum_j b_j x b_j
        let id = ComplexMatrix::identity(n);
        let mut s = ComplexMatrix::zeros(n);
        let mut k = nalgebra::DMatrix::<C64>::zeros(n2, n2);
        for b in &self.basis {
            s = &s + &(b * b);
            k -= b.transpose().inner().kronecker(b.inner()) * C64::new(2.0, 0.0);
        }
        k += s.transpose().inner().kronecker(id.inner());
        k += id.inner().kronecker(s.inner());
        let k = ComplexMatrix::new(k).expect("square");
        let (values, vectors) = k.hermitian_eigen_unchecked();
        let scale = values.last().copied().unwrap_or(0.0).abs().max(1.0);
        let kernel: Vec<ComplexMatrix> = values
            .iter()
            .enumerate()
            .take_while(|(_, &v)| v < 1e-8 * scale)
            .map(|(c, _)| ComplexMatrix::from_column_major(n, &vectors.column(c)))
            .collect();
        let basis = hermitian_traceless_basis(n, &kernel);
        Self::from_orthonormal_basis(n, basis).expect("commutant of a *-algebra is a *-algebra")
    }

    /// `A ∩ B`, from the unit singular values of the overlap of the two
    /// orthonormal bases, re-closed as a *-algebra.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        let n = self.ambient_dim;
        if other.ambient_dim != n {
            return Err(Error::DimensionMismatch { expected: n, found: other.ambient_dim });
        }
        let (da, db) = (self.basis.len(), other.basis.len());
        if da == 0 || db == 0 {
            return Ok(Self::scalars(n));
        }
        let nf = n as f64;
        let overlap = nalgebra::DMatrix::from_fn(da, db, |r, c| {
            hs_inner(&self.basis[r], &other.basis[c]).expect("same dims") / nf
        });
        // left singular pairs of the overlap via the Hermitian eigenproblem of O O*
        let eig = (&overlap * overlap.adjoint()).symmetric_eigen();
        let mut common = Vec::new();
        for (k, &s2) in eig.eigenvalues.iter().enumerate() {
            if s2.max(0.0).sqrt() > 1.0 - 1e-7 {
                let mut x = ComplexMatrix::zeros(n);
                for r in 0..da {
                    x = &x + &self.basis[r].scale(eig.eigenvectors[(r, k)]);
                }
                common.push(x);
            }
        }
        let gens = hermitian_traceless_basis(n, &common);
        Self::from_generators(n, &gens)
    }

    /// Whether `other ⊆ self` as linear spans.
    pub fn contains(&self, other: &Self) -> bool {
        other.ambient_dim == self.ambient_dim
            && other
                .basis
                .iter()
                .all(|b| self.conditional_expectation_unchecked(b).max_abs_diff(b) < 1e-7)
    }

    /// Whether the two algebras have the same span.
    pub fn same_span(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.contains(other)
    }
}

/// `dim A - 1`.
pub fn traceless_dim(a: &Subalgebra) -> usize {
    a.traceless_dim()
}

/// One condition of the complementarity theorem: whether it holds and the
/// worst residual observed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub residual: f64,
}

impl ConditionCheck {
    fn new(residual: f64, tol: f64) -> Self {
        Self { holds: residual <= tol, residual }
    }
}

/// All four equivalent characterizations of complementarity evaluated
/// numerically. `cond_i` is absent when minimal projections of either algebra
/// are not computable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityReport {
    pub cond_i: Option<ConditionCheck>,
    pub cond_ii: ConditionCheck,
    pub cond_iii: ConditionCheck,
    pub cond_iv: ConditionCheck,
    pub verdict: bool,
    pub d_a: Option<f64>,
    pub d_b: Option<f64>,
}

impl ComplementarityReport {
    /// Whether every evaluated condition gives the same answer.
    pub fn conditions_agree(&self) -> bool {
        let v = self.cond_ii.holds;
        self.cond_iii.holds == v
            && self.cond_iv.holds == v
            && self.cond_i.is_none_or(|c| c.holds == v)
    }
}

/// Complementarity report at the default tolerance [`TOL`].
pub fn complementarity_report(a: &Subalgebra, b: &Subalgebra) -> Result<ComplementarityReport> {
    complementarity_report_with_tol(a, b, TOL)
}

pub fn complementarity_report_with_tol(
    a: &Subalgebra,
    b: &Subalgebra,
    tol: f64,
) -> Result<ComplementarityReport> {
    let n = a.ambient_dim;
    if b.ambient_dim != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.ambient_dim });
    }
    let id = ComplexMatrix::identity(n);

    // (i) tau(PQ) = tau(P) tau(Q) for minimal projections
    let cond_i = match (a.minimal_projections(), b.minimal_projections()) {
        (Ok(pa), Ok(pb)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(GENERIC_SEED ^ 0x1);
            let expand = |alg: &Subalgebra, fam: Vec<ComplexMatrix>, rng: &mut ChaCha8Rng| {
                let mut all = fam.clone();
                for _ in 0..ROTATIONS {
                    let u = alg.inner_unitary(rng);
                    all.extend(fam.iter().map(|p| p.conjugate_by(&u)));
                }
                all
            };
            let pa = expand(a, pa, &mut rng);
            let pb = expand(b, pb, &mut rng);
            let mut worst: f64 = 0.0;
            for p in &pa {
                let tp = p.normalized_trace();
                for q in &pb {
                    let r = (tau_product(p, q) - tp * q.normalized_trace()).norm();
                    worst = worst.max(r);
                }
            }
            Some(ConditionCheck::new(worst, tol))
        }
        _ => None,
    };

    // (ii) traceless parts are Hilbert-Schmidt orthogonal
    let mut worst_ii: f64 = 0.0;
    for x in &a.basis {
        for y in &b.basis {
            worst_ii = worst_ii.max(hs_inner(x, y)?.norm());
        }
    }

    // (iii) tau(xy) = tau(x) tau(y) over the bases augmented with I
    let mut worst_iii: f64 = 0.0;
    let aug_a: Vec<&ComplexMatrix> = std::iter::once(&id).chain(a.basis.iter()).collect();
    let aug_b: Vec<&ComplexMatrix> = std::iter::once(&id).chain(b.basis.iter()).collect();
    for x in &aug_a {
        let tx = x.normalized_trace();
        for y in &aug_b {
            let r = (tau_product(x, y) - tx * y.normalized_trace()).norm();
            worst_iii = worst_iii.max(r);
        }
    }

    // (iv) E_A maps B into C I
    let mut worst_iv: f64 = 0.0;
    for y in &b.basis {
        let e = a.conditional_expectation_unchecked(y);
        let scalar = id.scale(e.normalized_trace());
        worst_iv = worst_iv.max((&e - &scalar).tau_norm());
    }

    let cond_ii = ConditionCheck::new(worst_ii, tol);
    Ok(ComplementarityReport {
        cond_i,
        cond_ii,
        cond_iii: ConditionCheck::new(worst_iii, tol),
        cond_iv: ConditionCheck::new(worst_iv, tol),
        verdict: cond_ii.holds,
        d_a: a.homogeneity,
        d_b: b.homogeneity,
    })
}

/// Result of the unbiasedness test between two orthonormal bases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HadamardCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Whether the transition matrix `U* V` between the column bases of `u` and
/// `v` has all entries of modulus `1/sqrt(n)`.
pub fn transition_is_hadamard(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<HadamardCheck> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    for m in [u, v] {
        let residual = m.unitary_residual();
        if residual > TOL {
            return Err(Error::NotUnitary { residual });
        }
    }
    let t = &u.adjoint() * v;
    let target = 1.0 / (u.dim() as f64).sqrt();
    let residual = t
        .as_slice()
        .iter()
        .map(|z| (z.norm() - target).abs())
        .fold(0.0, f64::max);
    Ok(HadamardCheck { holds: residual <= TOL, residual })
}
