//! Structure of `M_4(C)`: P-unitaries, F- and M-triplets, the Bell
//! factorization and complementary decompositions built from Pauli words.
//!
//! A P-unitary is a self-adjoint traceless unitary. An F-triplet satisfies
//! `S3 = ±i S1 S2` and spans a copy of `M_2`; an M-triplet satisfies
//! `S3 = ±S1 S2` and spans a MASA. The sign is recorded on the [`Triplet`].

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pauli, ComplexMatrix, PauliWord, C64, TOL};
use crate::subalgebra::{complementarity_report, AlgebraKind, Subalgebra};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TripletKind {
    F,
    M,
}

/// Three P-unitaries with `S3 = sign * i S1 S2` (kind F) or
/// `S3 = sign * S1 S2` (kind M).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Triplet {
    pub s: [ComplexMatrix; 3],
    pub kind: TripletKind,
    pub sign: i8,
    /// Residual of the defining relation.
    pub residual: f64,
}

impl Triplet {
    pub fn subalgebra(&self) -> Result<Subalgebra> {
        Subalgebra::from_generators(4, &self.s)
    }
}

/// `max(||S - S*||, |tau(S)|, ||S^2 - I||)`.
pub fn p_unitary_residual(s: &ComplexMatrix) -> f64 {
    let sq = s * s;
    s.hermitian_residual()
        .max(s.normalized_trace().norm())
        .max(sq.max_abs_diff(&ComplexMatrix::identity(s.dim())))
}

pub fn classify_triplet(
    s1: &ComplexMatrix,
    s2: &ComplexMatrix,
    s3: &ComplexMatrix,
) -> Result<Triplet> {
    let s = [s1.clone(), s2.clone(), s3.clone()];
    for (index, m) in s.iter().enumerate() {
        if m.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: m.dim() });
        }
        let residual = p_unitary_residual(m);
        if residual > TOL {
            return Err(Error::NotPUnitary { index, residual });
        }
    }
    let prod = s1 * s2;
    let i = C64::new(0.0, 1.0);
    let candidates = [
        (TripletKind::F, 1, prod.scale(i)),
        (TripletKind::F, -1, prod.scale(-i)),
        (TripletKind::M, 1, prod.clone()),
        (TripletKind::M, -1, -&prod),
    ];
    let (kind, sign, residual) = candidates
        .iter()
        .map(|(k, sg, m)| (*k, *sg, s3.max_abs_diff(m)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("four candidates");
    if residual > TOL {
        return Err(Error::TripletRelation { residual });
    }
    Ok(Triplet { s, kind, sign, residual })
}

/// F-triplets `(A1, A2, A3)` in `A` and `(B1, B2, B3)` in `A'` with
/// `X = A1 B1`, `Y = A2 B2`, `Z = A3 B3`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellFactorization {
    pub a: Triplet,
    pub b: Triplet,
    /// `max_i ||T_i - A_i B_i||`.
    pub residual: f64,
}

/// Unitary `V` with `V* A V = M_2 (x) I`, built from matrix units of `A`.
fn aligning_unitary(a: &Subalgebra) -> Result<ComplexMatrix> {
    let projections = a.minimal_projections()?;
    if projections.len() != 2 {
        return Err(Error::UnsupportedKind(a.kind()));
    }
    let (p1, p2) = (&projections[0], &projections[1]);
    let e21 = a
        .basis()
        .iter()
        .map(|b| &(p2 * b) * p1)
        .max_by(|x, y| x.frobenius_norm().total_cmp(&y.frobenius_norm()))
        .expect("factor has a basis");
    let c = (&e21.adjoint() * &e21).normalized_trace().re / p1.normalized_trace().re;
    let e21 = e21.scale_real(1.0 / c.sqrt());
    let (values, vectors) = p1.hermitian_eigen()?;
    let range: Vec<Vec<C64>> = (0..4).filter(|&k| values[k] > 0.5).map(|k| vectors.column(k)).collect();
    if range.len() != 2 {
        return Err(Error::UnsupportedKind(a.kind()));
    }
    let mut cols = range.clone();
    for f in &range {
        cols.push((0..4).map(|r| (0..4).map(|k| e21.get(r, k) * f[k]).sum()).collect());
    }
    let v = ComplexMatrix::from_fn(4, |r, c| cols[c][r]);
    let residual = v.unitary_residual();
    if residual > 1e-8 {
        return Err(Error::NotUnitary { residual });
    }
    Ok(v)
}

fn sigma_dot(x: &[f64]) -> ComplexMatrix {
    (1..4).fold(ComplexMatrix::zeros(2), |acc, k| &acc + &pauli(k).scale_real(x[k - 1]))
}

/// Rank-one split `T = (u.sigma) (x) (v.sigma)` of a traceless operator that
/// is orthogonal to both tensor factors.
fn schmidt_split(t: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let coeff = DMatrix::from_fn(3, 3, |a, b| {
        (&pauli(a + 1).tensor(&pauli(b + 1)) * t).normalized_trace().re
    });
    // singular pairs from the symmetric eigenproblem of C C^T
    let eig = (&coeff * coeff.transpose()).symmetric_eigen();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let second = eig.eigenvalues[order[1]].max(0.0).sqrt();
    if second >= 1e-7 {
        return Err(Error::SchmidtRank { second });
    }
    let u: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let cv = coeff.transpose() * nalgebra::DVector::from_column_slice(&u);
    let v: Vec<f64> = (cv.clone() / cv.norm()).iter().copied().collect();
    let id = ComplexMatrix::identity(2);
    Ok((sigma_dot(&u).tensor(&id), id.tensor(&sigma_dot(&v))))
}

pub fn bell_factorize(a: &Subalgebra, t: &Triplet) -> Result<BellFactorization> {
    if a.ambient_dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: a.ambient_dim() });
    }
    if a.kind() != AlgebraKind::Factor || a.dim() != 4 {
        return Err(Error::UnsupportedKind(a.kind()));
    }
    if t.kind != TripletKind::M {
        return Err(Error::InvalidParameter("bell_factorize needs an M-triplet".into()));
    }
    let commutant = a.commutant();
    let mut residual: f64 = 0.0;
    for x in &t.s {
        residual = residual
            .max(a.conditional_expectation(x)?.tau_norm())
            .max(commutant.conditional_expectation(x)?.tau_norm());
    }
    if residual > 1e-8 {
        return Err(Error::NotOrthogonal { residual });
    }

    let v = aligning_unitary(a)?;
    let vt = v.adjoint();
    let aligned: Vec<ComplexMatrix> = t.s.iter().map(|x| x.conjugate_by(&vt)).collect();
    let (a1, b1) = schmidt_split(&aligned[0])?;
    let (a2, b2) = schmidt_split(&aligned[1])?;
    // Schmidt factors are fixed only up to a common sign; restore X = A1 B1
    let fix = |x: &ComplexMatrix, p: ComplexMatrix, q: ComplexMatrix| {
        if x.max_abs_diff(&(&p * &q)) <= x.max_abs_diff(&-&(&p * &q)) {
            (p, q)
        } else {
            (-&p, q)
        }
    };
    let (a1, b1) = fix(&aligned[0], a1, b1);
    let (a2, b2) = fix(&aligned[1], a2, b2);
    let a3 = (&a1 * &a2).scale(C64::new(0.0, 1.0));
    let b3 = &a3 * &aligned[2];

    let back = |m: &ComplexMatrix| m.conjugate_by(&v).hermitian_part();
    let (a1, a2, a3) = (back(&a1), back(&a2), back(&a3));
    let (b1, b2, b3) = (back(&b1), back(&b2), back(&b3));
    let residual = [(&a1, &b1), (&a2, &b2), (&a3, &b3)]
        .iter()
        .zip(&t.s)
        .map(|((p, q), x)| x.max_abs_diff(&(*p * *q)))
        .fold(0.0, f64::max);
    Ok(BellFactorization {
        a: classify_triplet(&a1, &a2, &a3)?,
        b: classify_triplet(&b1, &b2, &b3)?,
        residual,
    })
}

/// Three nonidentity Pauli words `{w1, w2, w3}` with `w3 = ±w1 w2` up to a
/// phase, ordered by index and signed so that the defining relation holds
/// with sign `+1`. Serializes as a list of three labels.
#[derive(Clone, Debug)]
pub struct PauliTriple {
    pub words: [PauliWord; 3],
    pub kind: TripletKind,
    subalgebra: Subalgebra,
}

impl PartialEq for PauliTriple {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && self.kind == other.kind
    }
}

impl Serialize for PauliTriple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.words.serialize(s)
    }
}

impl PauliTriple {
    /// Builds the triple `{a, b, ab}` for distinct nonidentity indices.
    pub fn from_indices(a: usize, b: usize) -> Result<Self> {
        let c = a ^ b;
        if a == 0 || b == 0 || c == 0 || a > 15 || b > 15 {
            return Err(Error::InvalidParameter(format!("indices {a}, {b} do not form a triple")));
        }
        let mut idx = [a, b, c];
        idx.sort_unstable();
        let [w1, w2, w3] = idx.map(PauliWord::from_index);
        let t = classify_triplet(&w1.matrix(), &w2.matrix(), &w3.matrix())?;
        let words = [w1, w2, w3.with_sign(t.sign)];
        let subalgebra = Subalgebra::from_generators(4, &[w1.matrix(), w2.matrix()])?;
        Ok(Self { words, kind: t.kind, subalgebra })
    }

    /// Parses labels such as `["s12", "s23", "s31"]`; signs are ignored.
    pub fn from_labels(labels: &[&str; 3]) -> Result<Self> {
        let w: Vec<PauliWord> = labels.iter().map(|l| l.parse()).collect::<Result<_>>()?;
        let triple = Self::from_indices(w[0].index(), w[1].index())?;
        if !triple.indices().contains(&w[2].index()) {
            return Err(Error::TripletRelation { residual: 2.0 });
        }
        Ok(triple)
    }

    pub fn indices(&self) -> [usize; 3] {
        self.words.map(|w| w.index())
    }

    /// Bit set over word indices `1..16`.
    pub fn mask(&self) -> u16 {
        self.indices().iter().fold(0, |m, &k| m | (1 << k))
    }

    pub fn triplet(&self) -> Triplet {
        let [a, b, c] = self.words.map(|w| w.matrix());
        classify_triplet(&a, &b, &c).expect("Pauli triples are valid")
    }

    pub fn subalgebra(&self) -> &Subalgebra {
        &self.subalgebra
    }
}

/// The 35 subalgebras spanned by Pauli triples, split by kind.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PauliCatalog {
    pub masas: Vec<PauliTriple>,
    pub factors: Vec<PauliTriple>,
}

impl PauliCatalog {
    pub fn all(&self) -> impl Iterator<Item = &PauliTriple> {
        self.masas.iter().chain(&self.factors)
    }

    pub fn len(&self) -> usize {
        self.masas.len() + self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn find(&self, indices: [usize; 3]) -> Option<&PauliTriple> {
        let mut idx = indices;
        idx.sort_unstable();
        self.all().find(|t| t.indices() == idx)
    }
}

fn pauli_triples() -> Vec<PauliTriple> {
    let mut out = Vec::new();
    for a in 1..16 {
        for b in a + 1..16 {
            if (a ^ b) > b {
                out.push(PauliTriple::from_indices(a, b).expect("valid triple"));
            }
        }
    }
    out.sort_by_key(|t| t.indices());
    out
}

pub fn enumerate_pauli_subalgebras() -> PauliCatalog {
    let (masas, factors): (Vec<_>, Vec<_>) =
        pauli_triples().into_iter().partition(|t| t.kind == TripletKind::M);
    PauliCatalog { masas, factors }
}

/// Pairwise complementary subalgebras built from Pauli triples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionFamily {
    pub members: Vec<PauliTriple>,
    pub kinds: Vec<TripletKind>,
    /// Number of F-subalgebras among the members.
    pub ell: usize,
    pub pairwise_ok: bool,
}

impl DecompositionFamily {
    /// Checks every pair with [`complementarity_report`].
    pub fn new(members: Vec<PauliTriple>) -> Result<Self> {
        let mut pairwise_ok = true;
        for (k, x) in members.iter().enumerate() {
            for y in &members[k + 1..] {
                pairwise_ok &= complementarity_report(x.subalgebra(), y.subalgebra())?.verdict;
            }
        }
        let kinds: Vec<TripletKind> = members.iter().map(|m| m.kind).collect();
        let ell = kinds.iter().filter(|&&k| k == TripletKind::F).count();
        Ok(Self { members, kinds, ell, pairwise_ok })
    }

    pub fn from_labels(labels: &[[&str; 3]]) -> Result<Self> {
        Self::new(labels.iter().map(PauliTriple::from_labels).collect::<Result<_>>()?)
    }

    pub fn traceless_dim_sum(&self) -> usize {
        self.members.iter().map(|m| m.subalgebra().traceless_dim()).sum()
    }

    pub fn index_sets(&self) -> Vec<[usize; 3]> {
        self.members.iter().map(|m| m.indices()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySearch {
    pub families: Vec<DecompositionFamily>,
    pub ell_values: BTreeSet<usize>,
}

fn extend_families(
    triples: &[PauliTriple],
    start: usize,
    used: u16,
    chosen: &mut Vec<usize>,
    size: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if chosen.len() == size {
        out.push(chosen.clone());
        return;
    }
    for k in start..triples.len() {
        let m = triples[k].mask();
        if m & used == 0 {
            chosen.push(k);
            extend_families(triples, k + 1, used | m, chosen, size, out);
            chosen.pop();
        }
    }
}

/// All families of `target_size` Pauli-spanned subalgebras whose traceless
/// word sets are disjoint, each verified pairwise with
/// [`complementarity_report`]. For `target_size = 5` these are exactly the
/// partitions of the 15 nonidentity words. Families are sorted
/// lexicographically on word indices.
pub fn complementary_family_search(target_size: usize) -> Result<FamilySearch> {
    if !(1..=5).contains(&target_size) {
        return Err(Error::InvalidParameter(format!(
            "family size {target_size} outside 1..=5"
        )));
    }
    let triples = pauli_triples();
    let mut index_sets: Vec<Vec<usize>> = (0..triples.len())
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            let mut chosen = vec![first];
            extend_families(&triples, first + 1, triples[first].mask(), &mut chosen, target_size, &mut out);
            out
        })
        .collect();
    index_sets.sort_by_key(|set| set.iter().map(|&k| triples[k].indices()).collect::<Vec<_>>());
    let families: Vec<DecompositionFamily> = index_sets
        .par_iter()
        .map(|set| DecompositionFamily::new(set.iter().map(|&k| triples[k].clone()).collect()))
        .collect::<Result<_>>()?;
    let ell_values = families.iter().filter(|f| f.pairwise_ok).map(|f| f.ell).collect();
    Ok(FamilySearch { families, ell_values })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem6Branch {
    /// `B` is a MASA complementary to `A0'`.
    MasaComplementaryToCommutant,
    /// `B` is a factor meeting `A0'` in a one-dimensional traceless part.
    FactorMeetsCommutant,
    /// `B = A0'`.
    FactorIsCommutant,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem6Report {
    /// Whether `B` is complementary to `A0`; nothing else is asserted otherwise.
    pub precondition: bool,
    pub branch: Option<Theorem6Branch>,
    pub holds: bool,
    pub residual: f64,
    pub intersection_traceless_dim: Option<usize>,
}

/// Relation between a subalgebra `B` complementary to an F-subalgebra `A0`
/// and the commutant `A0'`: a MASA `B` is complementary to `A0'`; a factor
/// `B` either equals `A0'` or meets it in exactly one traceless dimension.
pub fn theorem6_check(a0: &Subalgebra, b: &Subalgebra) -> Result<Theorem6Report> {
    for x in [a0, b] {
        if x.ambient_dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: x.ambient_dim() });
        }
    }
    if a0.kind() != AlgebraKind::Factor || a0.dim() != 4 {
        return Err(Error::UnsupportedKind(a0.kind()));
    }
    if b.kind() == AlgebraKind::General || b.dim() != 4 {
        return Err(Error::UnsupportedKind(b.kind()));
    }
    let pre = complementarity_report(a0, b)?;
    if !pre.verdict {
        return Ok(Theorem6Report {
            precondition: false,
            branch: None,
            holds: false,
            residual: pre.cond_ii.residual,
            intersection_traceless_dim: None,
        });
    }
    let commutant = a0.commutant();
    let report = match b.kind() {
        AlgebraKind::Abelian => {
            let r = complementarity_report(b, &commutant)?;
            Theorem6Report {
                precondition: true,
                branch: Some(Theorem6Branch::MasaComplementaryToCommutant),
                holds: r.verdict,
                residual: r.cond_ii.residual,
                intersection_traceless_dim: None,
            }
        }
        _ if commutant.same_span(b) => Theorem6Report {
            precondition: true,
            branch: Some(Theorem6Branch::FactorIsCommutant),
            holds: true,
            residual: 0.0,
            intersection_traceless_dim: Some(3),
        },
        _ => {
            let d = commutant.intersect(b)?.traceless_dim();
            Theorem6Report {
                precondition: true,
                branch: Some(Theorem6Branch::FactorMeetsCommutant),
                holds: d == 1,
                residual: 0.0,
                intersection_traceless_dim: Some(d),
            }
        }
    };
    Ok(report)
}

/// The three families displayed for `ell = 0, 2, 4`.
pub fn reference_families() -> [(usize, [[&'static str; 3]; 5]); 3] {
    [
        (
            0,
            [
                ["s12", "s23", "s31"],
                ["s13", "s21", "s32"],
                ["s01", "s10", "s11"],
                ["s02", "s20", "s22"],
                ["s03", "s30", "s33"],
            ],
        ),
        (
            2,
            [
                ["s01", "s02", "s03"],
                ["s10", "s20", "s30"],
                ["s11", "s22", "s33"],
                ["s12", "s23", "s31"],
                ["s13", "s21", "s32"],
            ],
        ),
        (
            4,
            [
                ["s01", "s02", "s03"],
                ["s10", "s21", "s31"],
                ["s20", "s12", "s32"],
                ["s30", "s13", "s23"],
                ["s11", "s22", "s33"],
            ],
        ),
    ]
}
