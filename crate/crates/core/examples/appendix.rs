//! The closed form (1/n) Σ η(Tr p_i q_j) is not the supremum for two MASAs of M_2.

use std::f64::consts::PI;

use quasiorth::entropy::{appendix_probe, ProbeOptions};

fn main() {
    for beta in [PI / 8.0, PI / 4.0, PI / 3.0, PI / 2.0] {
        let p = appendix_probe(beta, &ProbeOptions::default());
        match (p.witness_t, p.margin) {
            (Some(t), Some(m)) => println!(
                "beta = {beta:.4}: C = {:.6}, f'(0) = {:.6}, f({t:.4}) - C = {m:.4}",
                p.c, p.f_prime_0
            ),
            _ => println!("beta = {beta:.4}: C = {:.6}, f'(0) = {:.1e}, no refutation", p.c, p.f_prime_0),
        }
    }
}
