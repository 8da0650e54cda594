//! Regenerates fixtures/calibration.txt: measured worst-case residuals
//! for every check under mesh refinement, from which the default check
//! tolerances were chosen. Run from the crate root:
//!
//! ```text
//! cargo run --release --example calibrate > fixtures/calibration.txt
//! ```

use gfcalc::verify::{
    check_ftc1, check_ftc2, check_index_law, check_laplace_condition, check_pair_condition,
    default_tolerance, CheckKind,
};
use gfcalc::{standard_pairs, FunctionSpec, Grid, Kernel};

fn main() {
    let functions = [
        FunctionSpec::one(),
        FunctionSpec::Monomial { power: 1 },
        FunctionSpec::Monomial { power: 2 },
        FunctionSpec::Exponential { rate: 1.0 },
        FunctionSpec::Sinusoid { omega: 1.0 },
    ];

    println!("# worst-case max_abs residuals per check, T=1, grading r=2");
    println!("# columns: check, then one `N=<n>:<max_abs>` pair per mesh size");
    println!("# pair_condition / ftc sweeps cover the full built-in pair catalog;");
    println!("# ftc sweeps additionally cover f in {{1, t, t^2, e^t, sin t}}");

    let mut line = String::from("pair_condition");
    for n in [256usize, 512, 1024, 2048] {
        let grid = Grid::new(1.0, n, 2.0).unwrap();
        let worst = standard_pairs()
            .iter()
            .map(|(_, pair)| {
                check_pair_condition(pair, &grid, f64::INFINITY)
                    .unwrap()
                    .max_abs
            })
            .fold(0.0f64, f64::max);
        line.push_str(&format!(" N={n}:{worst:.3e}"));
    }
    println!("{line}");

    // Laplace residuals refine in quadrature density, not grid size; the
    // check runs at a fixed density, so record the p-sweep it performs.
    let p_values = [1.0, 2.0, 5.0, 10.0];
    let worst = standard_pairs()
        .iter()
        .map(|(_, pair)| {
            check_laplace_condition(pair, &p_values, f64::INFINITY)
                .unwrap()
                .max_abs
        })
        .fold(0.0f64, f64::max);
    println!("laplace_condition p=1,2,5,10:{worst:.3e}");

    type FtcCheck = fn(
        &gfcalc::KernelPair,
        &FunctionSpec,
        &Grid,
        f64,
    ) -> Result<gfcalc::ResidualReport, gfcalc::Error>;
    for (name, check) in [
        ("ftc1", check_ftc1 as FtcCheck),
        ("ftc2", check_ftc2 as FtcCheck),
    ] {
        let mut line = String::from(name);
        for n in [128usize, 256, 512] {
            let grid = Grid::new(1.0, n, 2.0).unwrap();
            let mut worst = 0.0f64;
            for (_, pair) in standard_pairs() {
                for f in &functions {
                    let r = check(&pair, f, &grid, f64::INFINITY).unwrap();
                    worst = worst.max(r.max_abs);
                }
            }
            line.push_str(&format!(" N={n}:{worst:.3e}"));
        }
        println!("{line}");
    }

    let exponent_pairs = [(0.3, 0.9), (0.5, 0.5), (0.25, 1.5)];
    let mut line = String::from("index_law");
    for n in [256usize, 512, 1024, 2048] {
        let grid = Grid::new(1.0, n, 2.0).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in exponent_pairs {
            for f in &functions[..2] {
                let r = check_index_law(
                    &Kernel::power(a).unwrap(),
                    &Kernel::power(b).unwrap(),
                    f,
                    &grid,
                    f64::INFINITY,
                )
                .unwrap();
                worst = worst.max(r.max_abs);
            }
        }
        line.push_str(&format!(" N={n}:{worst:.3e}"));
    }
    println!("{line}");

    println!("# chosen defaults (worst measured value at the grid each check");
    println!("# is normally run at, padded by at least 4x, rounded to a decade)");
    for (kind, label) in [
        (CheckKind::PairCondition, "pair_condition"),
        (CheckKind::LaplaceCondition, "laplace_condition"),
        (CheckKind::Ftc1, "ftc1"),
        (CheckKind::Ftc2, "ftc2"),
        (CheckKind::IndexLaw, "index_law"),
    ] {
        println!("default {label} {:e}", default_tolerance(kind));
    }
}
