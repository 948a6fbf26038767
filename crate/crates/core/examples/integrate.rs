//! Lebesgue integrals of a few quasicontinuous functions, bounded and not.

use lebesgue::lebesgue::{integrate_bounded, integrate_general, TruncationSchedule};
use lebesgue::qc::QcFunction;
use lebesgue::rational::{format_rational, int};
use lebesgue::set::Rectangle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let unit = [(int(0), int(1))];
    for text in ["dirichlet", "poly:0,0,1", "step:0,1/3,1,2,5", "thomae"] {
        let f = QcFunction::parse(text)?;
        let r = integrate_bounded(&f, &unit, 16, 1e-9)?;
        let exact = r.exact.as_ref().map(format_rational).unwrap_or_else(|| "-".into());
        println!("{text:<20} value {:<12.9} exact {exact:<6} bound {:.1e}", r.value, r.error_bound);
    }

    let f = QcFunction::parse("inv-sqrt")?;
    let r = integrate_general(&f, &TruncationSchedule::diagonal(10), 32, 1e-9)?;
    println!("\ninv-sqrt on (0,1]: {:.6} +/- {:.3} ({:?})", r.value, r.error_bound, r.verdict);
    for row in &r.schedule {
        println!("  R = N = {:<5} {:.6}", row.radius.to_string(), row.plus);
    }
    let r = integrate_general(&f.with_domain(Rectangle::whole_space(1))?, &TruncationSchedule::diagonal(10), 4, 1e-9)?;
    println!("inv-sqrt on the half-line: {:?}", r.verdict);
    Ok(())
}
