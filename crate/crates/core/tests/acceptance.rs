//! Acceptance criteria, one line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the table.

use std::f64::consts::{LN_2, PI};
use std::time::{Duration, Instant};

use quasiorth::constructions::{
    bell_masa, block_criterion, car_model, quantum_fourier, weyl_subalgebra, PhaseVector,
};
use quasiorth::entropy::{
    appendix_probe, estimate, evaluate, prune, upper_bound, ConvexDecomposition, EstimateOptions,
    ProbeOptions,
};
use quasiorth::four_level::{
    bell_factorize, classify_triplet, complementary_family_search, reference_families,
    DecompositionFamily, TripletKind,
};
use quasiorth::matrix::{random_hermitian, random_unitary};
use quasiorth::subalgebra::complementarity_report_with_tol;
use quasiorth::{complementarity_report, transition_is_hadamard, ComplexMatrix, PauliWord, Subalgebra};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

/// A random pair of subalgebras of `M_n` together with a label.
fn random_pair(n: usize, k: usize, rng: &mut ChaCha8Rng) -> (String, Subalgebra, Subalgebra) {
    let u = random_unitary(n, rng);
    let diag = Subalgebra::diagonal_masa(n);
    let fourier = Subalgebra::masa_of_basis(&quantum_fourier(n)).unwrap();
    match (n, k % 5) {
        (_, 0) => ("MUB MASAs, common conjugation".into(), diag.conjugate(&u), fourier.conjugate(&u)),
        (_, 1) => {
            let v = random_unitary(n, rng);
            ("random MASAs".into(), diag.conjugate(&u), diag.conjugate(&v))
        }
        (_, 2) => {
            let h = random_hermitian(n, rng);
            let a = Subalgebra::from_generators(n, &[h]).unwrap();
            ("generated MASA vs full".into(), a, Subalgebra::full(n).conjugate(&u))
        }
        (4, 3) => {
            let left = Subalgebra::left_factor(2, 2);
            let right = Subalgebra::right_factor(2, 2);
            ("qubit factors, common conjugation".into(), left.conjugate(&u), right.conjugate(&u))
        }
        (4, _) => {
            let left = Subalgebra::left_factor(2, 2);
            ("qubit factor vs conjugate".into(), left.clone(), left.conjugate(&u))
        }
        (_, 3) => ("MASA vs scalars".into(), diag.conjugate(&u), Subalgebra::scalars(n)),
        _ => {
            let eps = 1e-3 * rng.random::<f64>();
            let h = random_hermitian(n, rng).scale_real(eps);
            let w = h.unitary_exp().unwrap();
            ("perturbed MUB MASAs".into(), diag.clone(), fourier.conjugate(&w))
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut pairs, mut complementary) = (0, 0);
    for n in 2..=4 {
        for k in 0..40 {
            let (label, a, b) = random_pair(n, k, &mut rng);
            let r = complementarity_report_with_tol(&a, &b, 1e-8).map_err(|e| e.to_string())?;
            ensure(r.conditions_agree(), || format!("n = {n}, {label}: conditions disagree {r:?}"))?;
            pairs += 1;
            complementary += usize::from(r.verdict);
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("{pairs} pairs agree ({complementary} complementary)"))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        let h = transition_is_hadamard(&ComplexMatrix::identity(n), &quantum_fourier(n))
            .map_err(|e| e.to_string())?;
        ensure(h.holds && h.residual < 1e-10, || format!("n = {n}: {h:?}"))?;
        worst = worst.max(h.residual);
    }
    Ok(format!("n = 2..8 Hadamard, worst residual {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    for p in [3u64, 5] {
        let u = PhaseVector::new(1, 0, 1, 0, p);
        let v = PhaseVector::new(0, 1, 0, 1, p);
        let alg = weyl_subalgebra(&u, &v, p).map_err(|e| e.to_string())?;
        let n = p as usize;
        for (side, factor) in
            [("left", Subalgebra::left_factor(n, n)), ("right", Subalgebra::right_factor(n, n))]
        {
            let r = complementarity_report_with_tol(&alg, &factor, 1e-8).map_err(|e| e.to_string())?;
            ensure(r.verdict, || format!("p = {p}: not complementary to the {side} factor"))?;
        }
    }
    let f4 = block_criterion(&quantum_fourier(4), 2, 2).map_err(|e| e.to_string())?;
    ensure(f4.holds, || format!("Fourier block criterion fails: {f4:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fixed = Subalgebra::right_factor(2, 2);
    let mut holds = 0;
    for k in 0..50 {
        let w = if k % 2 == 0 {
            random_unitary(4, &mut rng)
        } else {
            let left = random_unitary(2, &mut rng).tensor(&random_unitary(2, &mut rng));
            let right = random_unitary(2, &mut rng).tensor(&random_unitary(2, &mut rng));
            &(&left * &quantum_fourier(4)) * &right
        };
        let bc = block_criterion(&w, 2, 2).map_err(|e| e.to_string())?;
        let r = complementarity_report_with_tol(&fixed.conjugate(&w), &fixed, 1e-8)
            .map_err(|e| e.to_string())?;
        ensure(bc.holds == r.verdict, || format!("unitary {k}: block {bc:?} vs report {}", r.verdict))?;
        holds += usize::from(bc.holds);
    }
    Ok(format!("Weyl p = 3, 5 complementary; 50 block verdicts match ({holds} hold)"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let opts = EstimateOptions::default();
    let d2 = Subalgebra::diagonal_masa(2);
    let f2 = Subalgebra::masa_of_basis(&quantum_fourier(2)).unwrap();
    let e = estimate(&d2, &f2, &opts).map_err(|e| e.to_string())?;
    ensure((e.value - LN_2).abs() < 1e-3, || format!("M2 MUB MASAs: {}", e.value))?;
    let bell = estimate(&bell_masa(), &Subalgebra::left_factor(2, 2), &opts).map_err(|e| e.to_string())?;
    ensure((bell.value - 4f64.ln()).abs() < 1e-3, || format!("Bell vs qubit: {}", bell.value))?;
    for (a, b) in [
        (d2.clone(), Subalgebra::full(2)),
        (Subalgebra::left_factor(2, 2), Subalgebra::full(4)),
        (Subalgebra::diagonal_masa(4), Subalgebra::diagonal_masa(4)),
    ] {
        let e = estimate(&a, &b, &opts).map_err(|e| e.to_string())?;
        ensure(e.value.abs() < 1e-6, || format!("inclusion gives {}", e.value))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let quick = EstimateOptions { restarts: 2, max_iters: 40, ..Default::default() };
    let mut worst_gap = f64::INFINITY;
    for k in 0..200 {
        let n = [2, 3, 4][k % 3];
        let u = random_unitary(n, &mut rng);
        let v = random_unitary(n, &mut rng);
        let (a, b) = match k % 4 {
            0 | 1 => (Subalgebra::diagonal_masa(n).conjugate(&u), Subalgebra::diagonal_masa(n).conjugate(&v)),
            2 if n == 4 => (Subalgebra::left_factor(2, 2).conjugate(&u), Subalgebra::diagonal_masa(4).conjugate(&v)),
            _ => (Subalgebra::diagonal_masa(n).conjugate(&u), Subalgebra::full(n)),
        };
        let opts = EstimateOptions { seed: k as u64, ..quick.clone() };
        let e = estimate(&a, &b, &opts).map_err(|e| e.to_string())?;
        let bound = upper_bound(&a).map_err(|e| e.to_string())?;
        ensure(e.value <= bound + 1e-8, || format!("run {k}: {} exceeds bound {bound}", e.value))?;
        worst_gap = worst_gap.min(bound - e.value);
    }
    within(start.elapsed(), 120.0)?;
    Ok(format!(
        "log 2 err {:.1e}, log 4 err {:.1e}, 200 runs within bound (min gap {worst_gap:.1e})",
        (e.value - LN_2).abs(),
        (bell.value - 4f64.ln()).abs()
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut max_len = 0;
    for k in 0..100 {
        let n = if k % 2 == 0 { 2 } else { 4 };
        let m = n * n + 1 + k % 7;
        let dec = ConvexDecomposition::random(n, m, k % 3 == 0, &mut rng).map_err(|e| e.to_string())?;
        let u = random_unitary(n, &mut rng);
        let a = Subalgebra::diagonal_masa(n);
        let b = if n == 4 && k % 4 == 1 {
            Subalgebra::left_factor(2, 2).conjugate(&u)
        } else {
            Subalgebra::diagonal_masa(n).conjugate(&u)
        };
        let before = evaluate(&a, &b, &dec).map_err(|e| e.to_string())?;
        let pruned = prune(&dec, &a, &b).map_err(|e| e.to_string())?;
        let after = evaluate(&a, &b, &pruned).map_err(|e| e.to_string())?;
        ensure(pruned.len() <= n * n, || format!("case {k}: {} terms remain", pruned.len()))?;
        ensure(after >= before - 1e-9, || format!("case {k}: value fell {before} -> {after}"))?;
        max_len = max_len.max(pruned.len());
    }
    Ok(format!("100 decompositions pruned, value non-decreasing (largest {max_len} terms)"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let beta = PI / 4.0;
    let probe = appendix_probe(beta, &ProbeOptions::default());
    let oracle = 0.5 * beta.sin() * ((1.0 - beta.cos()) / (1.0 + beta.cos())).ln();
    ensure((probe.f_at_zero - probe.c).abs() < 1e-9, || format!("f(0) - C = {}", probe.f_at_zero - probe.c))?;
    ensure((probe.f_prime_0 - oracle).abs() < 1e-5, || format!("f'(0) {} vs {oracle}", probe.f_prime_0))?;
    let margin = probe.margin.unwrap_or(f64::NEG_INFINITY);
    ensure(probe.refuted && margin > 0.01, || format!("margin {margin}"))?;
    within(start.elapsed(), 1.0)?;
    Ok(format!(
        "C = {:.6}, f'(0) = {:.6}, t* = {:.4}, margin {margin:.4} nats",
        probe.c,
        probe.f_prime_0,
        probe.witness_t.unwrap()
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let search = complementary_family_search(5).map_err(|e| e.to_string())?;
    for (ell, labels) in reference_families() {
        let fam = DecompositionFamily::from_labels(&labels).map_err(|e| e.to_string())?;
        ensure(fam.pairwise_ok && fam.ell == ell, || format!("displayed ell = {ell} family invalid"))?;
        let mut sets = fam.index_sets();
        sets.sort();
        ensure(search.families.iter().any(|f| f.index_sets() == sets), || {
            format!("displayed ell = {ell} family not found")
        })?;
    }
    ensure(search.ell_values.iter().copied().eq([0, 2, 4]), || {
        format!("ell values {:?}", search.ell_values)
    })?;
    for f in search.families.iter().filter(|f| f.ell == 4) {
        let rest: Vec<_> = f.members.iter().filter(|m| m.kind == TripletKind::M).collect();
        ensure(rest.len() == 1 && rest[0].subalgebra().kind() == quasiorth::AlgebraKind::Abelian, || {
            format!("ell = 4 family {:?} lacks a MASA", f.index_sets())
        })?;
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("{} families, ell values {:?}", search.families.len(), search.ell_values))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let words: Vec<ComplexMatrix> = ["s11", "s22", "s33"]
        .iter()
        .map(|l| l.parse::<PauliWord>().unwrap().matrix())
        .collect();
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let g = random_unitary(2, &mut rng).tensor(&random_unitary(2, &mut rng));
        let t: Vec<ComplexMatrix> = words.iter().map(|x| x.conjugate_by(&g)).collect();
        let triplet = classify_triplet(&t[0], &t[1], &t[2]).map_err(|e| e.to_string())?;
        let a = Subalgebra::left_factor(2, 2).conjugate(&g);
        let f = bell_factorize(&a, &triplet).map_err(|e| format!("case {k}: {e}"))?;
        for (i, x) in t.iter().enumerate() {
            worst = worst.max(x.max_abs_diff(&(&f.a.s[i] * &f.b.s[i])));
        }
        for tr in [&f.a, &f.b] {
            let c = classify_triplet(&tr.s[0], &tr.s[1], &tr.s[2]).map_err(|e| e.to_string())?;
            ensure(c.kind == TripletKind::F, || format!("case {k}: recovered triplet is {:?}", c.kind))?;
        }
    }
    ensure(worst < 1e-9, || format!("worst residual {worst:e}"))?;
    Ok(format!("50 local conjugations, worst residual {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let v = car_model().verify().map_err(|e| e.to_string())?;
    ensure(v.car_residual <= 1e-12, || format!("CAR residual {:e}", v.car_residual))?;
    ensure(v.modes_complementary, || "modes not complementary".into())?;
    ensure(v.bell_complementary_to_mode1 && v.bell_complementary_to_mode2, || {
        "Bell MASA not complementary to both modes".into()
    })?;
    ensure(v.parity_fixes_bell, || format!("parity residual {:e}", v.parity_residual))?;
    let r = complementarity_report(&bell_masa(), &car_model().algebra1).map_err(|e| e.to_string())?;
    ensure(r.conditions_agree(), || "report conditions disagree".into())?;
    Ok(format!("CAR residual {:.1e}, parity residual {:.1e}", v.car_residual, v.parity_residual))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("complementarity conditions agree", criterion_1),
        ("Fourier MUBs", criterion_2),
        ("Weyl subalgebras and block criterion", criterion_3),
        ("entropy optimum and bound", criterion_4),
        ("pruning", criterion_5),
        ("closed-form refutation", criterion_6),
        ("M4 decompositions", criterion_7),
        ("Bell factorization", criterion_8),
        ("CAR model", criterion_9),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.2} s]", k + 1),
            Err(why) => {
                println!("criterion {}: FAIL  {name}: {why} [{secs:.2} s]", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
