//! Dyadic cube decomposition of open sets in one and two dimensions.

use lebesgue::rational::int;
use lebesgue::set::{dyadic_decompose, Multirectangle, OpenSet, Rectangle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (text, bx) in [
        ("(0,1)", Rectangle::closed(&[(int(0), int(1))])),
        ("(0,1)x(0,1)", Rectangle::closed(&[(int(0), int(1)), (int(0), int(1))])),
        ("(1/3,2)x(0,1)|(0,1)x(1/2,3/2)", Rectangle::closed(&[(int(0), int(2)), (int(0), int(2))])),
    ] {
        let o = OpenSet::new(Multirectangle::parse(text)?)?;
        println!("{text}  (measure {})", o.measure());
        for depth in [2, 4, 8] {
            let d = dyadic_decompose(&o, &bx, depth)?;
            println!("  depth {depth}: {} cubes, length {}, per level {:?}", d.cubes.len(), d.length(), d.per_level);
        }
    }
    Ok(())
}
