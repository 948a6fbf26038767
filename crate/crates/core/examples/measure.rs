//! Exact measure of multirectangles and the exterior/interior brackets.

use lebesgue::lebesgue::exterior_interior_measure;
use lebesgue::rational::{format_rational, int, rat};
use lebesgue::set::{disjointify_1d, outer_measure_bound, Multirectangle, Rectangle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let planar = Multirectangle::parse("[0,1]x[0,1]|[1/2,2]x[0,1/2]")?;
    println!("{planar}");
    println!("  total length {}  measure {}", planar.length(), planar.measure());

    let line = Multirectangle::parse("[1/5,6/5]|[2/11,12/11)|(3,7/2]")?;
    let disjoint = disjointify_1d(&line);
    println!("\n{line}\n  disjoint form {disjoint}\n  measure {}", line.measure());

    let eps = rat(1, 64);
    let outer = outer_measure_bound(&line, &eps)?;
    println!("  open cover of length {} (eps {})", outer.length(), format_rational(&eps));

    let bx = Rectangle::closed(&[(int(0), int(5))]);
    let b = exterior_interior_measure(&line, &bx, &eps)?;
    println!(
        "  exterior in [{}, {}], interior in [{}, {}]",
        format_rational(&b.exterior.0),
        format_rational(&b.exterior.1),
        format_rational(&b.interior.0),
        format_rational(&b.interior.1)
    );
    Ok(())
}
