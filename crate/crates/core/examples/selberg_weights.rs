//! Λ₂ = μ ∗ log² built two ways, with the hand values and the pointwise residuals.

use mlab::dirichlet::{pointwise_residuals, ArithTable, Column, Lambda2Method, Tolerances};

fn main() -> mlab::Result<()> {
    let table = ArithTable::build(100_000, Lambda2Method::Both, Tolerances::default())?;
    let check = table.form_check().expect("both forms were built");
    println!("max |difference| between forms: {:.3e} at n = {}", check.max_abs, check.worst_n);

    let ln2 = 2f64.ln();
    println!("Lambda2(4)  = {:.12}  (3 log^2 2 = {:.12})", table.lambda2()[4], 3.0 * ln2 * ln2);
    println!("Lambda2(12) = {:.12}  (2 log 2 log 3 = {:.12})", table.lambda2()[12], 2.0 * ln2 * 3f64.ln());

    table.write_csv(std::io::stdout(), 1..=12, &Column::ALL)?;

    let r = pointwise_residuals(&table, 100_000.0)?;
    println!("2 log n - Lambda2(n): max {:.4} at n = {}, mean {:.4}", r.lambda2_max, r.lambda2_argmax, r.lambda2_average);
    Ok(())
}
