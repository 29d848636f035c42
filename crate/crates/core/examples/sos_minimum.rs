//! Largest `gamma` with `x^3 - x - gamma >= 0` on `[-1, 1]`, as an SOS program.
//! The exact answer is `-2 / (3 sqrt 3)`.

use occucert::model::BoundingBox;
use occucert::poly::Polynomial;
use occucert::sdp::{sdpa, InteriorPoint};
use occucert::sos::{
    assemble, encode_nonneg_on, solve, AffineExpr, AffinePoly, DecisionSpace, Region, Sense,
    VarKind,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = Polynomial::univariate(&[0.0, -1.0, 0.0, 1.0]);
    let mut space = DecisionSpace::new();
    let gamma = space.add("gamma", VarKind::Free);

    let mut residual = AffinePoly::from_poly(&p);
    residual.add_expr_times(&AffineExpr::term(gamma, -1.0), &Polynomial::constant(1, 1.0));
    let region = Region {
        inequalities: vec![Polynomial::univariate(&[1.0, 0.0, -1.0])],
        equalities: vec![],
    };
    let c = encode_nonneg_on("p - gamma on [-1, 1]", residual, region, 4);
    let program = assemble(&space, vec![c], AffineExpr::var(gamma), Sense::Maximize)?;
    println!(
        "SDP: {} equalities, blocks {:?}",
        program.sdp.rows.len(),
        program.sdp.blocks
    );

    let (report, sol) = solve(&program, &InteriorPoint::default(), &BoundingBox::unit(1))?;
    println!("status {:?} after {} iterations", report.status, report.iterations);
    if let Some(sol) = sol {
        let exact = -2.0 / (3.0 * 3f64.sqrt());
        println!("gamma = {:.9} (exact {exact:.9})", sol.decisions[gamma]);
    }
    println!("post-check violation {:.2e}", report.residual_sample_max_violation);

    let text = sdpa::to_sdpa_string(&program.sdp);
    println!("SDPA export: {} lines", text.lines().count());
    Ok(())
}
