// The likelihood of a branch distance given an edit distance, its score
// function, and the exact and floating point evaluation paths.

use gbda::model::{lambda1, z_function, Lambda1Table, ModelParams, Precision};

fn main() {
    let p = ModelParams::from_sizes(4, 3, 3).unwrap();
    println!("v = 4, {} branch types", p.d_types());
    for tau in 0..=3 {
        let row: Vec<String> = (0..=4).map(|phi| format!("{:.4}", lambda1(tau, phi, &p))).collect();
        println!("tau = {tau}: {}", row.join(" "));
    }
    println!("score at (tau 2, phi 3) = {:.5}", z_function(2, 3, &p).unwrap());

    let big = ModelParams::from_sizes(1000, 5, 4).unwrap();
    let table = Lambda1Table::build(&big, 10, Precision::Auto);
    let column = table.column(6);
    println!("v = 1000, phi = 6: {:?}", column.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>());
}
