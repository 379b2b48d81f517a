use std::time::Instant;
use robust_bayes_core::rng::RngStream;
use robust_bayes_core::sim::{generate_dataset, SimDesign};
use robust_bayes_core::baselines::{cross_validate, CvConfig, Lambda, Loss, Penalty, PenaltySpec};

fn main() {
    let design = SimDesign::new(500, 0.5, RngStream::new(1, 0)).unwrap();
    let data = generate_dataset(&design).unwrap();
    for (name, penalty) in [("lasso-lad", Penalty::L1), ("ridge-lad", Penalty::L2)] {
        let t = Instant::now();
        let spec = PenaltySpec::new(Loss::Absolute, penalty, Lambda::CrossValidate).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let cv = CvConfig { grid_size: 25, lambda_min_ratio: 1e-3, ..CvConfig::default() };
        let (lambda, _) = cross_validate(&data, &spec, &cv, &mut rng).unwrap();
        println!("cv {name} (25-pt grid) n=500 kappa=0.5: {:.2}s lambda*={lambda:.5}", t.elapsed().as_secs_f64());
    }
}
