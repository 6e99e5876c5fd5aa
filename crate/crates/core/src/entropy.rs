//! Conditional entropy `H(A|B)` of two subalgebras with respect to the
//! normalized trace.
//!
//! For a convex decomposition `I = sum_i w_i rho_i` into densities (w.r.t.
//! `tau`) the decomposition value is
//!
//! ```text
//! sum_i w_i ( tau(eta(E_B rho_i)) - tau(eta(E_A rho_i)) )
//! ```
//!
//! and `H(A|B)` is its supremum over all decompositions. [`estimate`] returns a
//! certified lower bound: the value of an explicit decomposition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eta, pauli, spectral_eta_of_values, ComplexMatrix, C64, TOL};
use crate::subalgebra::{AlgebraKind, Subalgebra};

/// Weights `w_i > 0` and densities `rho_i` with `sum_i w_i rho_i = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexDecomposition {
    terms: Vec<(f64, ComplexMatrix)>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    weight: f64,
    rho: ComplexMatrix,
}

impl Serialize for ConvexDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(w, r)| TermJson { weight: *w, rho: r.clone() })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(d)?;
        Self::new(terms.into_iter().map(|t| (t.weight, t.rho)).collect())
            .map_err(serde::de::Error::custom)
    }
}

impl ConvexDecomposition {
    /// Validates and wraps the given terms.
    pub fn new(terms: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        let dec = Self { terms };
        dec.validate()?;
        Ok(dec)
    }

    /// `I = 1 * I`.
    pub fn trivial(n: usize) -> Self {
        Self { terms: vec![(1.0, ComplexMatrix::identity(n))] }
    }

    /// `I = sum_i tau(p_i) (p_i / tau(p_i))` for projections summing to `I`.
    pub fn from_projections(projections: &[ComplexMatrix]) -> Result<Self> {
        let terms = projections
            .iter()
            .map(|p| {
                let d = p.normalized_trace().re;
                (d, p.scale_real(1.0 / d))
            })
            .collect();
        Self::new(terms)
    }

    /// Random decomposition with `m` terms: Gaussian factors `G_i`, rescaled
    /// so that `sum G_i* G_i = I`, give the parts `N_i = G_i* G_i`. With
    /// `rank_one` each `G_i` has a single nonzero row, so every density is pure.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, m: usize, rank_one: bool, rng: &mut R) -> Result<Self> {
        if n == 0 || m == 0 || (rank_one && m < n) {
            return Err(Error::InvalidParameter(format!(
                "cannot draw {m} terms in dimension {n} (rank one: {rank_one})"
            )));
        }
        let mut factors: Vec<ComplexMatrix> = (0..m)
            .map(|_| {
                ComplexMatrix::from_fn(n, |r, _| {
                    if rank_one && r > 0 {
                        C64::new(0.0, 0.0)
                    } else {
                        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
                    }
                })
            })
            .collect();
        retract(&mut factors, n);
        let mut parts = parts_of(&factors);
        renormalize(&mut parts, n);
        Self::new(split_parts(&parts))
    }

    pub fn terms(&self) -> &[(f64, ComplexMatrix)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDecomposition(msg));
        if self.terms.is_empty() {
            return bad("no terms".into());
        }
        let n = self.terms[0].1.dim();
        let mut sum = ComplexMatrix::zeros(n);
        for (k, (w, rho)) in self.terms.iter().enumerate() {
            if rho.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: rho.dim() });
            }
            if !(w.is_finite() && *w > 0.0) {
                return bad(format!("term {k}: weight {w} is not positive"));
            }
            let herm = rho.hermitian_residual();
            if herm > TOL * (1.0 + rho.max_abs()) {
                return bad(format!("term {k}: density not Hermitian (residual {herm:e})"));
            }
            let tr = rho.normalized_trace();
            if (tr - C64::new(1.0, 0.0)).norm() > TOL {
                return bad(format!("term {k}: tau(rho) = {tr} differs from 1"));
            }
            let (values, _) = rho.hermitian_eigen_unchecked();
            if values[0] < -TOL * (1.0 + values[n - 1].abs()) {
                return bad(format!("term {k}: density has eigenvalue {:e}", values[0]));
            }
            sum = &sum + &rho.scale_real(*w);
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(n));
        if dev > TOL {
            return bad(format!("weighted densities sum to I only within {dev:e}"));
        }
        Ok(())
    }
}

fn check_dims(a: &Subalgebra, b: &Subalgebra, n: usize) -> Result<()> {
    for found in [a.ambient_dim(), b.ambient_dim()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    Ok(())
}

fn tau_eta_of(x: &ComplexMatrix) -> Result<f64> {
    let (values, _) = x.hermitian_eigen_unchecked();
    spectral_eta_of_values(&values)
}

/// `tau(eta(E_B rho)) - tau(eta(E_A rho))` for a single density.
fn term_value(a: &Subalgebra, b: &Subalgebra, rho: &ComplexMatrix) -> Result<f64> {
    let eb = b.conditional_expectation(rho)?;
    let ea = a.conditional_expectation(rho)?;
    Ok(tau_eta_of(&eb)? - tau_eta_of(&ea)?)
}

/// Value of a decomposition, in nats.
pub fn evaluate(a: &Subalgebra, b: &Subalgebra, dec: &ConvexDecomposition) -> Result<f64> {
    dec.validate()?;
    check_dims(a, b, dec.dim())?;
    dec.terms.iter().map(|(w, rho)| Ok(w * term_value(a, b, rho)?)).sum()
}

/// Real coordinates of a Hermitian matrix in an orthonormal frame of the
/// real space of Hermitian matrices.
fn hermitian_coordinates(x: &ComplexMatrix) -> Vec<f64> {
    let n = x.dim();
    let s2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        out.push(x.get(r, r).re);
        for c in r + 1..n {
            out.push(s2 * x.get(r, c).re);
            out.push(s2 * x.get(r, c).im);
        }
    }
    out
}

/// Removes linearly dependent densities without decreasing the value.
///
/// While the densities admit a real dependence `sum_i alpha_i rho_i = 0`, the
/// weights are moved along `w_i + alpha_i t` to whichever end of the feasible
/// interval does not decrease the (affine in `t`) value, and the vanished term
/// is dropped. The result has at most `n^2` linearly independent densities.
pub fn prune(
    dec: &ConvexDecomposition,
    a: &Subalgebra,
    b: &Subalgebra,
) -> Result<ConvexDecomposition> {
    dec.validate()?;
    check_dims(a, b, dec.dim())?;
    let mut terms: Vec<(f64, ComplexMatrix, f64)> = dec
        .terms
        .iter()
        .map(|(w, rho)| Ok((*w, rho.clone(), term_value(a, b, rho)?)))
        .collect::<Result<_>>()?;
    loop {
        let k = terms.len();
        if k <= 1 {
            break;
        }
        let coords: Vec<Vec<f64>> = terms.iter().map(|t| hermitian_coordinates(&t.1)).collect();
        let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| {
            coords[i].iter().zip(&coords[j]).map(|(x, y)| x * y).sum::<f64>()
        });
        let eig = gram.symmetric_eigen();
        let (mut imin, mut imax) = (0, 0);
        for i in 0..k {
            if eig.eigenvalues[i] < eig.eigenvalues[imin] {
                imin = i;
            }
            if eig.eigenvalues[i] > eig.eigenvalues[imax] {
                imax = i;
            }
        }
        // more than n^2 densities are always dependent; otherwise require a
        // singular value ratio below 1e-8
        let forced = k > coords[0].len();
        if !forced && eig.eigenvalues[imin].max(0.0) > 1e-16 * eig.eigenvalues[imax] {
            break;
        }
        let alpha: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
        let mut lo = (f64::NEG_INFINITY, usize::MAX);
        let mut hi = (f64::INFINITY, usize::MAX);
        for (i, (&al, t)) in alpha.iter().zip(&terms).enumerate() {
            if al > 0.0 {
                let s = -t.0 / al;
                if s > lo.0 {
                    lo = (s, i);
                }
            } else if al < 0.0 {
                let s = -t.0 / al;
                if s < hi.0 {
                    hi = (s, i);
                }
            }
        }
        let slope: f64 = alpha.iter().zip(&terms).map(|(al, t)| al * t.2).sum();
        let (step, vanished) = if slope >= 0.0 { hi } else { lo };
        if vanished == usize::MAX {
            // a dependence among normalized densities has coefficients of both signs
            return Err(Error::InvalidDecomposition(
                "degenerate linear dependence among densities".into(),
            ));
        }
        for (t, al) in terms.iter_mut().zip(&alpha) {
            t.0 += al * step;
        }
        terms[vanished].0 = 0.0;
        terms.retain(|t| t.0 > 1e-15);
    }
    // restore the exact sum constraint lost to rounding
    let n = dec.dim();
    let mut parts: Vec<ComplexMatrix> = terms.iter().map(|t| t.1.scale_real(t.0)).collect();
    renormalize(&mut parts, n);
    ConvexDecomposition::new(split_parts(&parts))
}

/// Maps unnormalized parts `N_i` to `S^{-1/2} N_i S^{-1/2}` with `S = sum N_i`.
fn renormalize(parts: &mut [ComplexMatrix], n: usize) {
    let s = parts.iter().fold(ComplexMatrix::zeros(n), |acc, p| &acc + p);
    let inv_sqrt = s
        .hermitian_function(|x| 1.0 / x.max(1e-300).sqrt())
        .expect("sum of Hermitian parts is Hermitian");
    for p in parts.iter_mut() {
        *p = p.conjugate_by(&inv_sqrt).hermitian_part();
    }
}

/// `N_i -> (tau(N_i), N_i / tau(N_i))`.
fn split_parts(parts: &[ComplexMatrix]) -> Vec<(f64, ComplexMatrix)> {
    parts
        .iter()
        .map(|p| {
            let w = p.normalized_trace().re;
            (w, p.scale_real(1.0 / w))
        })
        .collect()
}

/// `-log d` for a homogeneous subalgebra whose minimal projections have trace `d`.
pub fn upper_bound(a: &Subalgebra) -> Result<f64> {
    if a.kind() == AlgebraKind::General {
        return Err(Error::UnsupportedKind(AlgebraKind::General));
    }
    match a.homogeneity() {
        Some(d) => Ok(-d.ln()),
        None => Err(Error::NotHomogeneous {
            traces: a
                .minimal_projections()?
                .iter()
                .map(|p| p.normalized_trace().re)
                .collect(),
        }),
    }
}

/// Parameters for [`estimate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    /// Number of random restarts.
    pub restarts: usize,
    /// Ascent iterations per restart.
    pub max_iters: usize,
    pub seed: u64,
    /// Terms in each random decomposition; `None` means `n^2`.
    pub terms: Option<usize>,
    /// Include the decomposition built from minimal projections of `A` (and a
    /// refinement of it) among the candidates.
    pub projection_seed: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 500, seed: 0, terms: None, projection_seed: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    #[serde(rename = "value_nats")]
    pub value: f64,
    #[serde(rename = "bound_nats")]
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub seed: u64,
    pub decomposition: ConvexDecomposition,
    pub restarts_used: usize,
    pub iterations: usize,
    /// Set when the value is below `1e-6`, which happens exactly when `A ⊆ B`.
    pub possible_inclusion: bool,
}

impl EntropyEstimate {
    pub fn value_bits(&self) -> f64 {
        self.value / std::f64::consts::LN_2
    }
}

/// `sum_i tau(eta(E_B N_i)) - tau(eta(E_A N_i))` for parts `N_i = w_i rho_i`;
/// equal to the decomposition value because the `-w log w` terms cancel.
fn parts_value(a: &Subalgebra, b: &Subalgebra, parts: &[ComplexMatrix]) -> f64 {
    parts
        .iter()
        .map(|p| {
            let eb = b.conditional_expectation(p).expect("dims checked");
            let ea = a.conditional_expectation(p).expect("dims checked");
            let (vb, _) = eb.hermitian_eigen_unchecked();
            let (va, _) = ea.hermitian_eigen_unchecked();
            let s = |v: &[f64]| v.iter().map(|&x| eta(x.max(0.0))).sum::<f64>() / v.len() as f64;
            s(&vb) - s(&va)
        })
        .sum()
}

fn log_clamped(x: &ComplexMatrix) -> ComplexMatrix {
    let (values, vectors) = x.hermitian_eigen_unchecked();
    let logs: Vec<C64> = values.iter().map(|&v| C64::new(v.max(1e-14).ln(), 0.0)).collect();
    &(&vectors * &ComplexMatrix::diagonal(&logs)) * &vectors.adjoint()
}

/// Factors `G_i` with `N_i = G_i* G_i`; the retraction enforces `sum N_i = I`.
fn retract(factors: &mut [ComplexMatrix], n: usize) {
    let s = factors
        .iter()
        .fold(ComplexMatrix::zeros(n), |acc, g| &acc + &(&g.adjoint() * g));
    let inv_sqrt = s
        .hermitian_function(|x| 1.0 / x.max(1e-300).sqrt())
        .expect("Gram sum is Hermitian");
    for g in factors.iter_mut() {
        *g = &*g * &inv_sqrt;
    }
}

fn parts_of(factors: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    factors.iter().map(|g| (&g.adjoint() * g).hermitian_part()).collect()
}

/// Projected ascent on the factors with backtracking; returns the final parts
/// and the number of iterations performed.
fn ascend(
    a: &Subalgebra,
    b: &Subalgebra,
    mut factors: Vec<ComplexMatrix>,
    max_iters: usize,
) -> (Vec<ComplexMatrix>, usize) {
    let n = a.ambient_dim();
    retract(&mut factors, n);
    let mut value = parts_value(a, b, &parts_of(&factors));
    let mut step = 0.5;
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        let parts = parts_of(&factors);
        let directions: Vec<ComplexMatrix> = factors
            .iter()
            .zip(&parts)
            .map(|(g, p)| {
                let ea = a.conditional_expectation(p).expect("dims checked");
                let eb = b.conditional_expectation(p).expect("dims checked");
                let grad = &log_clamped(&ea) - &log_clamped(&eb);
                g * &grad
            })
            .collect();
        let mut accepted = None;
        while step > 1e-12 {
            let mut trial: Vec<ComplexMatrix> = factors
                .iter()
                .zip(&directions)
                .map(|(g, d)| g + &d.scale_real(step))
                .collect();
            retract(&mut trial, n);
            let v = parts_value(a, b, &parts_of(&trial));
            if v > value {
                accepted = Some((trial, v));
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        let Some((trial, v)) = accepted else { break };
        let gain = v - value;
        factors = trial;
        value = v;
        if gain < 1e-10 * value.abs().max(1.0) {
            break;
        }
    }
    (parts_of(&factors), iters)
}

/// Turns ascent output into a valid decomposition, dropping negligible parts.
fn decomposition_from_parts(mut parts: Vec<ComplexMatrix>, n: usize) -> Result<ConvexDecomposition> {
    parts.retain(|p| p.normalized_trace().re > 1e-12);
    renormalize(&mut parts, n);
    ConvexDecomposition::new(split_parts(&parts))
}

struct Candidate {
    value: f64,
    decomposition: ConvexDecomposition,
    iterations: usize,
}

fn candidate(
    a: &Subalgebra,
    b: &Subalgebra,
    dec: ConvexDecomposition,
    iterations: usize,
) -> Result<Candidate> {
    let dec = prune(&dec, a, b)?;
    Ok(Candidate { value: evaluate(a, b, &dec)?, decomposition: dec, iterations })
}

/// Multi-restart maximization of the decomposition value.
///
/// Candidates are the trivial decomposition, the decomposition given by the
/// minimal projections of `A` together with its refinement, and `restarts`
/// random decompositions refined by projected ascent. Every candidate is
/// pruned. The best value wins; ties within `TOL` go to the lowest candidate
/// index, so the result does not depend on execution order.
pub fn estimate(a: &Subalgebra, b: &Subalgebra, opts: &EstimateOptions) -> Result<EntropyEstimate> {
    let n = a.ambient_dim();
    check_dims(a, b, n)?;
    let m = opts.terms.unwrap_or(n * n);
    if m < 1 {
        return Err(Error::InvalidParameter("decomposition size must be at least 1".into()));
    }

    let mut candidates = vec![candidate(a, b, ConvexDecomposition::trivial(n), 0)?];
    if opts.projection_seed {
        if let Ok(projections) = a.minimal_projections() {
            candidates.push(candidate(a, b, ConvexDecomposition::from_projections(&projections)?, 0)?);
            let (parts, iters) = ascend(a, b, projections, opts.max_iters);
            candidates.push(candidate(a, b, decomposition_from_parts(parts, n)?, iters)?);
        }
    }

    let restarts: Vec<Candidate> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64 + 1);
            let factors: Vec<ComplexMatrix> = (0..m)
                .map(|_| {
                    ComplexMatrix::from_fn(n, |_, _| {
                        C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
                    })
                })
                .collect();
            let (parts, iters) = ascend(a, b, factors, opts.max_iters);
            candidate(a, b, decomposition_from_parts(parts, n)?, iters)
        })
        .collect::<Result<_>>()?;
    candidates.extend(restarts);

    let best_value = candidates.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
    let iterations = candidates.iter().map(|c| c.iterations).sum();
    let best = candidates
        .into_iter()
        .find(|c| c.value >= best_value - TOL)
        .expect("at least the trivial candidate");
    let bound = upper_bound(a).ok();
    Ok(EntropyEstimate {
        value: best.value,
        bound,
        gap: bound.map(|d| d - best.value),
        seed: opts.seed,
        decomposition: best.decomposition,
        restarts_used: opts.restarts,
        iterations,
        possible_inclusion: best.value < 1e-6,
    })
}

/// Settings for [`appendix_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Central finite-difference step for `f'(0)`.
    pub fd_step: f64,
    /// Grid points used to bracket the maximum before golden-section search.
    pub grid: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { fd_step: 1e-4, grid: 256 }
    }
}

/// Test of the conjectured closed form `(1/n) sum_ij eta(Tr p_i q_j)` for two
/// MASAs of `M_2` at angle `beta`, against the one-parameter family of
/// decompositions `I = (1/2)(2 r(t)) + (1/2)(2 I - 2 r(t))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppendixProbe {
    pub beta: f64,
    /// Value of the conjectured formula.
    pub c: f64,
    pub f_at_zero: f64,
    pub f_prime_0: f64,
    /// `(sin beta / 2) log((1 - cos beta) / (1 + cos beta))`.
    pub analytic_f_prime_0: f64,
    pub refuted: bool,
    pub witness_t: Option<f64>,
    pub margin: Option<f64>,
}

fn bloch_projection(angle: f64) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let v = &pauli(1).scale_real(angle.sin()) + &pauli(3).scale_real(angle.cos());
    (&id + &v).scale_real(0.5)
}

impl AppendixProbe {
    /// `f(t) = eta(b) + eta(1-b) - eta(a) - eta(1-a)` with `a = Tr(r(t) p)` and
    /// `b = Tr(r(t) q)`.
    pub fn f(&self, t: f64) -> f64 {
        appendix_f(self.beta, t)
    }
}

pub fn appendix_f(beta: f64, t: f64) -> f64 {
    let p = bloch_projection(0.0);
    let q = bloch_projection(beta);
    let r = bloch_projection(t);
    let a = (&r * &p).trace().re;
    let b = (&r * &q).trace().re;
    eta(b) + eta(1.0 - b) - eta(a) - eta(1.0 - a)
}

/// The two MASAs of `M_2` generated by `sigma_3` and by
/// `sin(beta) sigma_1 + cos(beta) sigma_3`.
pub fn appendix_algebras(beta: f64) -> (Subalgebra, Subalgebra) {
    let a = Subalgebra::from_generators(2, &[pauli(3)]).expect("MASA");
    let b = Subalgebra::from_generators(2, &[bloch_projection(beta)]).expect("MASA");
    (a, b)
}

/// `I = (1/2)(2 r(t)) + (1/2)(2 I - 2 r(t))`.
pub fn appendix_decomposition(t: f64) -> ConvexDecomposition {
    let r = bloch_projection(t);
    let id = ComplexMatrix::identity(2);
    ConvexDecomposition::new(vec![
        (0.5, r.scale_real(2.0)),
        (0.5, (&id - &r).scale_real(2.0)),
    ])
    .expect("valid by construction")
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

pub fn appendix_probe(beta: f64, opts: &ProbeOptions) -> AppendixProbe {
    let cb = beta.cos();
    let c = eta((1.0 + cb) / 2.0) + eta((1.0 - cb) / 2.0);
    let f = |t| appendix_f(beta, t);
    let h = opts.fd_step;
    let f_prime_0 = (f(h) - f(-h)) / (2.0 * h);
    let analytic_f_prime_0 = if (1.0 - cb).abs() < 1e-300 || (1.0 + cb).abs() < 1e-300 {
        0.0
    } else {
        0.5 * beta.sin() * ((1.0 - cb) / (1.0 + cb)).ln()
    };
    let mut probe = AppendixProbe {
        beta,
        c,
        f_at_zero: f(0.0),
        f_prime_0,
        analytic_f_prime_0,
        refuted: false,
        witness_t: None,
        margin: None,
    };
    if f_prime_0.abs() > 1e-6 {
        // search on the side where f rises away from t = 0
        let dir = f_prime_0.signum();
        let pi = std::f64::consts::PI;
        let grid = opts.grid.max(4);
        let spacing = pi / grid as f64;
        let best = (1..=grid)
            .map(|k| dir * k as f64 * spacing)
            .max_by(|x, y| f(*x).total_cmp(&f(*y)))
            .expect("non-empty grid");
        let t = golden_section_max(f, best - spacing, best + spacing);
        let margin = f(t) - c;
        probe.witness_t = Some(t);
        probe.margin = Some(margin);
        probe.refuted = margin > 0.0;
    }
    probe
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{bell_masa, quantum_fourier};
    use crate::matrix::{random_unitary, ComplexMatrix};
    use std::f64::consts::{LN_2, PI};

    fn complementary_masas() -> (Subalgebra, Subalgebra) {
        (
            Subalgebra::diagonal_masa(2),
            Subalgebra::masa_of_basis(&quantum_fourier(2)).unwrap(),
        )
    }

    fn lemma_dec() -> ConvexDecomposition {
        ConvexDecomposition::new(vec![
            (0.5, ComplexMatrix::unit(2, 0, 0).scale_real(2.0)),
            (0.5, ComplexMatrix::unit(2, 1, 1).scale_real(2.0)),
        ])
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let (a, b) = complementary_masas();
        assert!(evaluate(&a, &b, &ConvexDecomposition::trivial(2)).unwrap().abs() < 1e-15);
        assert!((evaluate(&a, &b, &lemma_dec()).unwrap() - LN_2).abs() < 1e-12);
        assert!(evaluate(&a, &a, &lemma_dec()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn decomposition_validation() {
        let id = ComplexMatrix::identity(2);
        assert!(ConvexDecomposition::new(vec![]).is_err());
        assert!(ConvexDecomposition::new(vec![(0.5, id.clone())]).is_err());
        assert!(ConvexDecomposition::new(vec![(-1.0, id.clone()), (2.0, id.clone())]).is_err());
        let not_psd = ComplexMatrix::diagonal(&[C64::new(2.5, 0.0), C64::new(-0.5, 0.0)]);
        let other = ComplexMatrix::diagonal(&[C64::new(-0.5, 0.0), C64::new(2.5, 0.0)]);
        let err = ConvexDecomposition::new(vec![(0.5, not_psd), (0.5, other)]).unwrap_err();
        assert!(err.to_string().contains("eigenvalue"));
    }

    #[test]
    fn prune_examples() {
        let (a, b) = complementary_masas();
        let rho = ComplexMatrix::identity(2);
        let dup = ConvexDecomposition::new(vec![(0.5, rho.clone()), (0.5, rho.clone())]).unwrap();
        let p = prune(&dup, &a, &b).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p.terms()[0].0 - 1.0).abs() < 1e-12);

        let indep = lemma_dec();
        let p = prune(&indep, &a, &b).unwrap();
        assert_eq!(p.len(), 2);
        for ((w0, r0), (w1, r1)) in indep.terms().iter().zip(p.terms()) {
            assert!((w0 - w1).abs() < 1e-12 && r0.max_abs_diff(r1) < 1e-12);
        }
    }

    #[test]
    fn prune_random_overcomplete() {
        let (a, b) = complementary_masas();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut factors: Vec<ComplexMatrix> = (0..20)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                random_unitary(2, &mut rng).scale_real(0.3 + 0.1 * x)
            })
            .collect();
        // make them rank one so the densities differ
        for g in &mut factors {
            *g = &ComplexMatrix::unit(2, 0, 0) * &*g;
        }
        retract(&mut factors, 2);
        let dec = decomposition_from_parts(parts_of(&factors), 2).unwrap();
        assert_eq!(dec.len(), 20);
        let before = evaluate(&a, &b, &dec).unwrap();
        let pruned = prune(&dec, &a, &b).unwrap();
        assert!(pruned.len() <= 4);
        assert!(evaluate(&a, &b, &pruned).unwrap() >= before - 1e-9);
    }

    #[test]
    fn upper_bound_examples() {
        assert!((upper_bound(&Subalgebra::diagonal_masa(3)).unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!((upper_bound(&Subalgebra::left_factor(2, 2)).unwrap() - LN_2).abs() < 1e-12);
        // C ⊕ M2 block diagonal in M3
        let block = Subalgebra::from_generators(
            3,
            &[ComplexMatrix::unit(3, 0, 0), ComplexMatrix::unit(3, 1, 2)],
        )
        .unwrap();
        assert!(matches!(upper_bound(&block), Err(Error::UnsupportedKind(_))));
        // diag(a, b, b): minimal projection traces 1/3 and 2/3
        let uneven = Subalgebra::from_generators(3, &[ComplexMatrix::unit(3, 0, 0)]).unwrap();
        match upper_bound(&uneven) {
            Err(Error::NotHomogeneous { traces }) => {
                let mut t = traces.clone();
                t.sort_by(f64::total_cmp);
                assert!((t[0] - 1.0 / 3.0).abs() < 1e-12 && (t[1] - 2.0 / 3.0).abs() < 1e-12);
            }
            other => panic!("expected NotHomogeneous, got {other:?}"),
        }
    }

    #[test]
    fn estimate_complementary_masas() {
        let (a, b) = complementary_masas();
        let est = estimate(&a, &b, &EstimateOptions::default()).unwrap();
        assert!((est.value - LN_2).abs() < 1e-3);
        assert!(est.gap.unwrap().abs() < 1e-3);
        assert!((evaluate(&a, &b, &est.decomposition).unwrap() - est.value).abs() < 10.0 * TOL);
    }

    #[test]
    fn estimate_random_restarts_alone_find_optimum() {
        let (a, b) = complementary_masas();
        let opts = EstimateOptions { projection_seed: false, ..Default::default() };
        let est = estimate(&a, &b, &opts).unwrap();
        assert!((est.value - LN_2).abs() < 1e-3, "value {}", est.value);
    }

    #[test]
    fn estimate_inclusion_is_zero() {
        let a = Subalgebra::diagonal_masa(2);
        let b = Subalgebra::full(2);
        let est = estimate(&a, &b, &EstimateOptions::default()).unwrap();
        assert!(est.value.abs() < 1e-6);
        assert!(est.possible_inclusion && b.contains(&a));
    }

    #[test]
    fn estimate_bell_vs_qubit() {
        let est = estimate(&bell_masa(), &Subalgebra::left_factor(2, 2), &EstimateOptions::default())
            .unwrap();
        assert!((est.value - 4f64.ln()).abs() < 1e-3);
        assert!(!est.possible_inclusion);
    }

    #[test]
    fn estimate_is_deterministic() {
        let (a, _) = complementary_masas();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = Subalgebra::diagonal_masa(2).conjugate(&random_unitary(2, &mut rng));
        let opts = EstimateOptions { restarts: 4, max_iters: 100, seed: 17, ..Default::default() };
        let e1 = estimate(&a, &b, &opts).unwrap();
        let e2 = estimate(&a, &b, &opts).unwrap();
        assert_eq!(e1, e2);
        assert!(estimate(&a, &b, &EstimateOptions { terms: Some(0), ..opts }).is_err());
    }

    #[test]
    fn estimate_json_shape() {
        let (a, b) = complementary_masas();
        let opts = EstimateOptions { restarts: 1, max_iters: 10, ..Default::default() };
        let v = serde_json::to_value(estimate(&a, &b, &opts).unwrap()).unwrap();
        for key in ["value_nats", "bound_nats", "gap", "seed", "decomposition"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["decomposition"][0]["weight"].is_f64());
        assert_eq!(v["decomposition"][0]["rho"]["dim"], 2);
    }

    #[test]
    fn appendix_examples() {
        let probe = appendix_probe(PI / 4.0, &ProbeOptions::default());
        assert!((probe.c - 0.4165).abs() < 1e-4);
        assert!((probe.f_at_zero - probe.c).abs() < 1e-12);
        // analytic oracle evaluated independently
        let s = (PI / 4.0).sin();
        let cb = (PI / 4.0).cos();
        let oracle = 0.5 * s * ((1.0 - cb) / (1.0 + cb)).ln();
        assert!((oracle - (-0.623_225_240_140_230_5)).abs() < 1e-12);
        assert!((probe.f_prime_0 - oracle).abs() < 1e-5);
        assert!(probe.refuted && probe.margin.unwrap() > 0.01);
        let t = probe.witness_t.unwrap();
        assert!((-PI / 2.0..0.0).contains(&t), "witness {t}");
        assert!((probe.f(t) - probe.c - probe.margin.unwrap()).abs() < 1e-15);

        let flat = appendix_probe(PI / 2.0, &ProbeOptions::default());
        assert!(flat.f_prime_0.abs() < 1e-6);
        assert!(!flat.refuted && flat.witness_t.is_none());
    }

    #[test]
    fn appendix_f_matches_decomposition_value() {
        let beta = 0.9;
        let (a, b) = appendix_algebras(beta);
        for t in [-1.0, -0.3, 0.0, 0.4, 2.0] {
            let direct = appendix_f(beta, t);
            let via_eval = evaluate(&a, &b, &appendix_decomposition(t)).unwrap();
            assert!((direct - via_eval).abs() < 1e-12, "t = {t}");
        }
    }
}
