//! Iterated integrals against the double integral, and the section identity
//! for multirectangles.

use lebesgue::fubini::{fubini_check, section_identity_check, FubiniError};
use lebesgue::qc::QcFunction;
use lebesgue::set::{Multirectangle, Rectangle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let unit = Rectangle::parse("[0,1]x[0,1]")?;
    for (text, rect) in [("prod(poly:0,1;poly:0,1)", unit), ("exp-abs-y", Rectangle::whole_space(2))] {
        let f = QcFunction::parse(text)?;
        let report = match fubini_check(&f, &rect, 1e-6) {
            Ok(r) => r,
            Err(FubiniError::NotSummable(gate)) => {
                let last = gate.rows.last().map_or(0.0, |r| r.value);
                println!("{text} over {rect}: not summable, truncated integrals reach {last:.1} after {} rows", gate.rows.len());
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        println!("{text} over {rect}: {:?}, summable {}", report.verdict, report.gate.summable);
        println!("  direct {:.8}", report.direct.value);
        for o in &report.iterated {
            println!("  order {:<6} {:.8} (gap {:.1e}, allowed {:.1e})", o.order, o.result.value, o.gap, o.allowed);
        }
    }

    let a = Multirectangle::parse("[0,1]x[0,1]x[0,2]|[1/2,3]x[0,1]x[1,3]")?;
    for axis in 0..3 {
        let s = section_identity_check(&a, axis)?;
        println!("sections along axis {axis}: volume {} integral {} agree {}", s.volume, s.integral, s.agree);
    }
    Ok(())
}
