//! Extending continuous functions off a closed set: the gap interpolation on
//! the line and the averaging construction on a circle.

use lebesgue::qc::QcFunction;
use lebesgue::rational::{int, rat};
use lebesgue::set::{Multirectangle, Rectangle};
use lebesgue::tietze::{circle_tent, extend_nd, extend_qc_1d, rho, ClosedComplementDomain, Sampler};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let removed = Multirectangle::parse("(1/4,1/2)|(5/8,7/8)")?;
    let k = ClosedComplementDomain::new(Rectangle::closed(&[(int(0), int(1))]), removed)?;
    let f = QcFunction::parse("poly:0,0,1")?;
    for i in 0..=8 {
        let x = rat(i, 8);
        let inside = k.contains(std::slice::from_ref(&x));
        println!("x = {:<5} in K: {inside:<5} F = {:.6}  rho = {:.4}", x.to_string(), extend_qc_1d(&f, &k, &x)?, rho(&k, std::slice::from_ref(&x))?);
    }

    let (circle, tent) = circle_tent(3);
    for n in 1..=5 {
        let e = extend_nd(&circle, &tent, &[0.0, 0.0], n, &Sampler::default())?;
        println!("circle tent, n = {n}: F_n(0) = {:.6}", e.value);
    }
    Ok(())
}
