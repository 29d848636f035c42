//! The three closed-form probability bounds and how they react to `lambda`.

use occucert::bounds::{bound_lower1, bound_lower2, bound_upper, clamp_probability};

fn main() {
    let (h, k) = (10.0, 2.0);
    let (v0, m) = (0.8, 1.0);
    println!("{:>8} {:>12} {:>12} {:>12}", "lambda", "upper", "lower I", "lower II");
    for lambda in [1e-5, 1e-3, 1e-1, 1.0] {
        let show = |r: Result<f64, _>| match r {
            Ok(b) => format!("{:.6}", clamp_probability(b)),
            Err(e) => format!("({e})"),
        };
        println!(
            "{lambda:>8.0e} {:>12} {:>12} {:>12}",
            show(bound_upper(v0, lambda, 1e-4, h, k)),
            show(bound_lower1(v0, -1e-4, m, lambda, h, k)),
            show(bound_lower2(v0, 1e-4, m, lambda, h, k)),
        );
    }
}
