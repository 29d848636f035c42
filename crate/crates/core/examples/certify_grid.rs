//! Grid search over `lambda` for all three certificate families on the
//! second case study, printed as a table.

use occucert::cases;
use occucert::certify::{grid_search, CertificateSpec, Theorem};
use occucert::sdp::InteriorPoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = cases::example2();
    let backend = InteriorPoint::default();
    let specs = [
        CertificateSpec::new(Theorem::DissipativeUpper, 10, vec![0.1, 0.5, 1.0], vec![]),
        CertificateSpec::new(Theorem::AttractiveLowerI, 10, vec![1e-5, 1e-2], vec![1.0]),
        CertificateSpec::new(Theorem::AttractiveLowerII, 10, vec![1e-2, 1.0], vec![1.0]),
    ];
    for spec in &specs {
        let report = grid_search(&problem, spec, &backend)?;
        println!("{}", spec.theorem);
        for p in &report.points {
            println!(
                "  lambda={:<6} M={:<4} {:?} bound={:?} raw={:?}",
                p.lambda,
                p.m.map_or("-".into(), |m| m.to_string()),
                p.status,
                p.bound,
                p.raw_bound
            );
        }
        if let Some(best) = &report.best {
            println!("  best: {:.4} at lambda={}", best.bound, best.lambda);
            println!("  v = {}", best.v.pruned(1e-12));
        }
    }
    Ok(())
}
