// temporary instrumentation (deleted after tuning)
use robust_bayes_core::rng::RngStream;
use robust_bayes_core::sim::{generate_dataset, SimDesign};
use robust_bayes_core::baselines::{fit_penalized, lambda_grid, objective, CvConfig, Lambda, Loss, Penalty, PenaltySpec};
use std::time::Instant;

fn main() {
    let design = SimDesign::new(500, 0.5, RngStream::new(1, 0)).unwrap();
    let data = generate_dataset(&design).unwrap();
    let grid = lambda_grid(&data, Loss::Absolute, &CvConfig::default());
    // cold-start fits on the full data at several lambdas down the path
    for gi in [0usize, 10, 20, 30, 40, 49] {
        let lambda = grid[gi];
        let t = Instant::now();
        let spec = PenaltySpec::new(Loss::Absolute, Penalty::L1, Lambda::Fixed(lambda)).unwrap();
        match fit_penalized(&data, &spec) {
            Ok(beta) => {
                let obj = objective(&data, Loss::Absolute, Penalty::L1, lambda, &beta);
                println!("lambda[{gi}] {lambda:9.4}: ok in {:.2}s obj {obj:.4}", t.elapsed().as_secs_f64());
            }
            Err(e) => println!("lambda[{gi}] {lambda:9.4}: ERR after {:.2}s: {e}", t.elapsed().as_secs_f64()),
        }
    }
}
