//! Complementary decompositions of M_4 into five Pauli-spanned subalgebras.

use quasiorth::four_level::{complementary_family_search, enumerate_pauli_subalgebras};

fn main() -> quasiorth::Result<()> {
    let cat = enumerate_pauli_subalgebras();
    println!("{} triples: {} MASAs, {} factors", cat.len(), cat.masas.len(), cat.factors.len());

    let search = complementary_family_search(5)?;
    println!("{} decompositions, ell values {:?}", search.families.len(), search.ell_values);
    for ell in &search.ell_values {
        let f = search.families.iter().find(|f| f.ell == *ell).expect("ell value comes from a family");
        let members: Vec<String> = f
            .members
            .iter()
            .map(|m| format!("{:?}{{{}}}", m.kind, m.words.map(|w| w.label()).join(",")))
            .collect();
        println!("ell = {ell}: {}", members.join(" "));
    }
    Ok(())
}
