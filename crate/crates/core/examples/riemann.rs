//! Riemann integrals, the Dirichlet counterexample, and the Dini oscillation test.

use lebesgue::qc::QcFunction;
use lebesgue::rational::{format_rational, int, rat};
use lebesgue::riemann::{darboux, dini_test, riemann_integrate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let unit = [(int(0), int(1))];
    for text in ["poly:0,0,1", "abs(poly:-1/2,1)", "cos-power:2,3", "dirichlet"] {
        let f = QcFunction::parse(text)?;
        match riemann_integrate(&f.expr, &unit, 1e-8) {
            Ok(v) => println!("{text:<18} {:.10} (gap {:.1e}, {:?}, {} cells)", v.value, v.gap, v.method, v.cells),
            Err(e) => println!("{text:<18} {e}"),
        }
    }

    let dirichlet = QcFunction::parse("dirichlet")?;
    for n in [4, 64, 1024] {
        let p = darboux(&dirichlet.expr, &int(0), &int(1), n)?;
        println!("dirichlet, {n:>4} cells: lower {} upper {}", p.lower, p.upper);
    }

    let thomae = QcFunction::parse("thomae")?;
    for (alpha, eps) in [(rat(1, 4), rat(1, 10)), (rat(1, 10), rat(1, 100))] {
        let d = dini_test(&thomae.expr, &int(0), &int(1), &alpha, &eps, 4096)?;
        println!(
            "thomae alpha={} eps={}: pass={} n={} heavy length {}",
            format_rational(&alpha),
            format_rational(&eps),
            d.pass,
            d.n,
            format_rational(&d.heavy_length)
        );
    }
    Ok(())
}
