//! Polynomial arithmetic and the Ito generator of a two-dimensional SDE.

use occucert::model::SdeModel;
use occucert::poly::{generator, Polynomial};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = Polynomial::var(2, 0);
    let y = Polynomial::var(2, 1);
    let one = Polynomial::constant(2, 1.0);

    // Van der Pol-like drift with additive noise on the second coordinate.
    let drift = vec![
        y.clone(),
        &(&(&one - &(&x * &x)) * &y) - &x,
    ];
    let diffusion = vec![
        vec![Polynomial::zero(2)],
        vec![Polynomial::constant(2, 0.3)],
    ];
    let model = SdeModel::new(drift, diffusion, vec![0.5, 0.0])?;

    let v = &(&x * &x) + &(&y * &y);
    println!("v      = {v}");
    println!("grad v = [{}, {}]", v.partial(0), v.partial(1));
    let lv = generator(&v, &model)?;
    println!("Lv     = {lv}");
    println!("Lv(x0) = {}", lv.eval(model.initial_state()));
    Ok(())
}
