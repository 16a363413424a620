// Auxiliary-family conditions, the minimized upper bound, the factorization
// bound and the constructions linking the two families.

use twoweight::characterize::{
    characterize, condition_system_check, construct_a_from_d, construct_d_from_a, factorization_bound_value,
    littlewood_paley_split, minimize_upper_bound, quantities_a, quantities_d, upper_bound, wolff_pair, wolff_variant,
    ConditionSystem,
};
use twoweight::operator::NormOptions;
use twoweight::{DyadicTree, Exponents, Instance};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = DyadicTree::new(2, 2)?;
    let lambda = vec![1.0, 0.5, 2.0, 0.25, 1.5, 0.75, 1.0];
    let inst = Instance::new(tree, lambda, &[1.0, 2.0, 0.5, 1.0], &[0.5, 1.0, 1.0, 2.0], Exponents::new(2.0, 0.5, 1.0)?)?;

    let report = characterize(&inst, NormOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    let ub = report.upper_bound.unwrap();
    assert!(ub / report.norm_value < 50.0 && report.norm_value / ub < 50.0);

    let ones = vec![1.0; 7];
    let search = minimize_upper_bound(&inst, None)?;
    assert!(search.value <= upper_bound(&inst, &ones)? * (1.0 + 1e-12));

    let (b, c) = littlewood_paley_split(&inst)?;
    println!("split factorization bound {:.6}", factorization_bound_value(&inst, &b, &c)?);

    let a = vec![1.0, 2.0, 0.5, 1.0, 3.0, 1.0, 0.5];
    let (a1, a2) = quantities_a(&inst, &a)?;
    let d = construct_d_from_a(&inst, &a)?;
    let (d1, d2) = quantities_d(&inst, &d)?;
    println!("A = ({a1:.4}, {a2:.4}) -> D = ({d1:.4}, {d2:.4}); D2 / (A1 A2)^p = {:.4}", d2 / (a1 * a2).powi(2));
    assert!(d1 <= 1.0 + 1e-12);
    let back = construct_a_from_d(&inst, &d)?;
    println!("A from D = {:?}", quantities_a(&inst, &back)?);

    for g in [0.5, 1.0, 2.0] {
        let v = wolff_variant(&inst, g)?;
        println!("variant γ = {g}: Carleson {:.4} (≤ {:.2}), integral {:.4}", v.carleson, 1f64.max(1.0 / g), v.integral);
    }
    let pair = wolff_pair(&inst)?;
    println!("Wolff pair conditions {:.4} {:.4} {:.4}", pair.ca, pair.cb, pair.cc);

    for sys in [ConditionSystem::I, ConditionSystem::Ii, ConditionSystem::Iii, ConditionSystem::Iv, ConditionSystem::V] {
        let chk = condition_system_check(&inst, sys, &a, Some(&b))?;
        println!("system {sys:?}: {:?} reconstructed={}", chk.values, chk.reconstructed);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
