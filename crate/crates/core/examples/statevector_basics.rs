//! The circuit layer on its own: gates, controls on |0⟩ or |1⟩, reversible
//! permutations, adjoints and controlled powers.
//!
//!     cargo run --release --example statevector_basics

use qae_credit::circuit::{Control, Gate, Operator, StateVector};

fn main() -> qae_credit::Result<()> {
    // Bell pair: H on qubit 0, then X on qubit 1 controlled by qubit 0.
    let mut bell = Operator::identity(2, "bell");
    bell.push(Gate::H, 0)?
        .push_controlled(Gate::X, 1, &[Control::on(0)])?;
    let s = bell.apply(&StateVector::zero(2))?;
    println!(
        "Bell pair probabilities (|q1 q0⟩ little-endian): {:?}",
        s.probabilities()
    );

    // A control that fires on |0⟩.
    let mut neg = Operator::identity(2, "x-if-zero");
    neg.push_controlled(Gate::X, 1, &[Control::off(0)])?;
    let s = neg.apply(&StateVector::zero(2))?;
    println!(
        "X on q1 when q0 = 0: P[q1 = 1] = {}",
        s.probability_of(1, true)?
    );

    // Reversible arithmetic as a basis permutation: 3-qubit increment mod 8.
    let inc = Operator::permutation(3, &[0, 1, 2], |r| (r + 1) % 8, "inc")?;
    let s = inc.power(5).apply(&StateVector::basis(3, 6))?;
    let landed = s
        .probabilities()
        .iter()
        .position(|p| *p > 0.5)
        .unwrap_or_default();
    println!("6 + 5 mod 8 = {landed}");

    // Adjoints undo, controlled versions act only on the control-|1⟩ branch.
    let mut rot = Operator::identity(1, "ry");
    rot.push(Gate::Ry(0.7), 0)?.push(Gate::Phase(0.3), 0)?;
    let back = rot.adjoint().apply(&rot.apply(&StateVector::zero(1))?)?;
    println!(
        "after U then U†: P[|0⟩] = {:.15}",
        back.probability_of(0, false)?
    );

    let wide = rot.embed(2, &[0])?.controlled(&[1])?;
    let mut plus = Operator::identity(2, "prep");
    plus.push(Gate::H, 1)?;
    let s = wide.apply(&plus.apply(&StateVector::zero(2))?)?;
    println!(
        "controlled RY(0.7) on |+⟩|0⟩: P[target = 1] = {:.6}",
        s.probability_of(0, true)?
    );
    Ok(())
}
