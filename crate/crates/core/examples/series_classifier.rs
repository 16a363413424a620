// Convergence of `Σ C (k+1)^{−a−1} log(k+2)^{−b}` with certified tail bounds.

use twoweight::counterexamples::{classify_series, SeriesTerm, Verdict};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        SeriesTerm { coefficient: 1.0, a: 0.0, b: 1.0 },
        SeriesTerm { coefficient: 1.0, a: 0.0, b: 7.0 / 6.0 },
        SeriesTerm { coefficient: 2.0, a: 0.25, b: -1.0 },
        SeriesTerm { coefficient: 1.0, a: -0.5, b: 3.0 },
    ];
    for term in cases {
        let c = classify_series(term, 1000);
        println!("{term:?}: {:?}, tail from 1000 ≤ {:?}", c.verdict, c.tail_bound);
    }
    let t = SeriesTerm { coefficient: 1.0, a: 0.5, b: 0.0 };
    let bound = classify_series(t, 100).tail_bound.unwrap();
    let tail: f64 = (100..2_000_000u64).map(|k| ((k + 1) as f64).powf(-1.5)).sum();
    assert!(tail <= bound);
    assert_eq!(classify_series(cases[0], 10).verdict, Verdict::Diverges);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
