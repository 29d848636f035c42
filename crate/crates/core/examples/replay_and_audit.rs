//! Certifies an upper bound, then checks it two ways: pointwise replay of the
//! side conditions and a Monte Carlo audit of the underlying expectation.

use occucert::cases;
use occucert::certify::{certify_point, replay, Theorem, REPLAY_SAMPLES};
use occucert::sdp::InteriorPoint;
use occucert::simulate::{audit_expectation, estimate, SimConfig, DEFAULT_DT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = cases::example2();
    let point = certify_point(
        &problem,
        Theorem::DissipativeUpper,
        0.5,
        None,
        10,
        &InteriorPoint::default(),
    )?;
    let Some(cert) = point.certificate else {
        println!("no certificate: {:?} {}", point.status, point.message);
        return Ok(());
    };
    println!("upper bound {:.4} (beta {:.2e})", cert.bound, cert.beta);

    for check in replay(&problem, &cert, REPLAY_SAMPLES)? {
        println!(
            "  {:<20} worst violation {:+.2e} over {} points",
            check.condition, check.worst_violation, check.samples
        );
    }

    let cfg = SimConfig::new(DEFAULT_DT, 20_000, 7);
    let audit = audit_expectation(&problem, &cert, &cfg)?;
    println!(
        "audit: E[Z] = {:.4} +- {:.4}, limit {:.4} ({:?}), holds: {}",
        audit.mean, audit.std_error, audit.limit, audit.side, audit.holds
    );
    let mc = estimate(&problem, &cfg)?;
    println!("monte carlo p_hat {:.4} <= bound {:.4}", mc.p_hat, cert.bound);
    Ok(())
}
