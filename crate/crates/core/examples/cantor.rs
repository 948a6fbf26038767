//! Stages of the ternary and Smith-Volterra-Cantor sets.

use lebesgue::cantor::{build_stage, membership, removal_stage, CantorKind};
use lebesgue::rational::{format_rational, rat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in [CantorKind::Ternary, CantorKind::SmithVolterra] {
        println!("{kind}: limit measure removed {}", format_rational(&kind.limit_measure()));
        for j in [1, 2, 3, 10, 20] {
            let st = build_stage(kind, j)?;
            println!(
                "  stage {j:>2}: {:>7} components, removed {}, retained {}",
                st.components(),
                format_rational(&st.measure_removed()),
                format_rational(&st.measure_retained())
            );
        }
        println!("  stage 2 retained: {}", build_stage(kind, 2)?.retained());
        for x in [rat(1, 4), rat(1, 2), rat(1, 3)] {
            match membership(kind, &x) {
                Ok(m) => println!("  {} -> {m:?}, removed at stage {:?}", format_rational(&x), removal_stage(kind, &x, 40)?),
                Err(e) => println!("  {} -> {e}", format_rational(&x)),
            }
        }
    }
    Ok(())
}
