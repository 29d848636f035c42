//! The two one-dimensional case studies used throughout the examples and
//! acceptance tests. Both live on the safe interval `(-1, 1)` with
//! multiplicative noise `sigma(x) = x`.

use crate::model::{BoundingBox, OccupationProblem, SdeModel, SemialgebraicSet, SetKind};
use crate::poly::Polynomial;

fn cubic(drift: &[f64], x0: f64, target: (f64, f64), horizon: f64, threshold: f64) -> OccupationProblem {
    let model = SdeModel::scalar(
        Polynomial::univariate(drift),
        Polynomial::univariate(&[0.0, 1.0]),
        x0,
    )
    .expect("scalar model");
    OccupationProblem::new(
        model,
        SemialgebraicSet::interval(-1.0, 1.0, SetKind::OpenInterior),
        SemialgebraicSet::interval(target.0, target.1, SetKind::Closed),
        horizon,
        threshold,
        BoundingBox::unit(1),
    )
}

/// `dX = (15 X^3 - 5 X) dt + X dW`, `x0 = 0.5`, target `[-0.1, 0.1]`,
/// `H = 10`, `K = 2`.
pub fn example1() -> OccupationProblem {
    cubic(&[0.0, -5.0, 0.0, 15.0], 0.5, (-0.1, 0.1), 10.0, 2.0)
}

/// `dX = (X^3 - 5 X) dt + X dW`, `x0 = 0.9`, target `[0.1, 0.5]`,
/// `H = 5`, `K = 0.1`.
pub fn example2() -> OccupationProblem {
    cubic(&[0.0, -5.0, 0.0, 1.0], 0.9, (0.1, 0.5), 5.0, 0.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::model::validate;

    #[test]
    fn bundled_configs_encode_the_cases() {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
        for (file, case) in [("example1.json", example1()), ("example2.json", example2())] {
            let text = std::fs::read_to_string(format!("{root}/{file}")).unwrap();
            let job = parse_config(&text).unwrap();
            assert_eq!(job.problem().unwrap(), case, "{file}");
            let kinds: Vec<&str> = job.tasks.iter().map(|t| t.kind()).collect();
            assert_eq!(kinds, ["verify", "verify", "verify", "simulate"]);
            assert!(validate(&case).is_empty());
        }
    }
}
