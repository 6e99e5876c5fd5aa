//! Two fermionic modes on two qubits.

use quasiorth::constructions::car_model;

fn main() -> quasiorth::Result<()> {
    let car = car_model();
    let v = car.verify()?;
    println!("CAR residual {:.1e}", v.car_residual);
    println!("modes complementary: {}", v.modes_complementary);
    println!("Bell MASA complementary to mode 1: {}, mode 2: {}", v.bell_complementary_to_mode1, v.bell_complementary_to_mode2);
    println!("parity fixes the Bell projectors: {} ({:.1e})", v.parity_fixes_bell, v.parity_residual);
    for group in car.even_bases {
        let labels: Vec<String> = group.iter().map(|w| w.label()).collect();
        println!("even words: {}", labels.join(" "));
    }
    Ok(())
}
