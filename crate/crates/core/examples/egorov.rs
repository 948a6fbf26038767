//! Egorov witnesses for x^n on [0,1] and the failure on a travelling bump.

use lebesgue::convergence::{egorov_witness, ConvergenceConfig};
use lebesgue::qc::QcSequence;
use lebesgue::rational::{format_rational, rat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ConvergenceConfig::default();
    let sigmas = [rat(1, 2), rat(1, 4), rat(1, 8)];
    let seq = QcSequence::parse("power")?;
    let w = egorov_witness(&seq, &rat(1, 8), &sigmas, &cfg)?;
    println!("power, eps 1/8: L(O) = {} (cover {})", format_rational(&w.length), format_rational(&w.cover_length));
    for level in &w.levels {
        println!("  eta {:<6} from m = {:<6} piece length {}", format_rational(&level.eta), level.m, format_rational(&level.length));
    }
    println!("  {} of {} grid points lie outside O", w.points_off_o, w.grid_points);

    match egorov_witness(&QcSequence::parse("trapezoid")?, &rat(1, 8), &sigmas, &cfg) {
        Ok(_) => println!("trapezoid: unexpected witness"),
        Err(e) => println!("trapezoid: {e}"),
    }
    Ok(())
}
