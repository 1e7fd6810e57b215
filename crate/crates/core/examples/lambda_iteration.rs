//! The recurrence λ_k = 1 + λ λ_{k−1} and its limit 1/(1 − λ).

use mlab::h_analysis::lambda_iteration;

fn main() -> mlab::Result<()> {
    for lambda in [0.1, 0.5, 0.9] {
        let it = lambda_iteration(lambda, 50, 1.0)?;
        let last = it.steps.last().expect("at least one step");
        println!("lambda {lambda}: lambda_50 = {:.15}, limit {:.15}, gap {:.1e}", last.lambda_k, it.limit, it.limit - last.lambda_k);
    }
    lambda_iteration(0.5, 8, 1.0)?.write_csv(std::io::stdout())?;
    Ok(())
}
