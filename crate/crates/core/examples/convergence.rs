//! Monotone and dominated convergence, and Fatou's inequality, on the
//! catalogued sequences.

use lebesgue::convergence::{convergence_suite, ConvergenceConfig};
use lebesgue::qc::QcSequence;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ConvergenceConfig::default();
    for name in ["power", "ramp", "spike", "wide-spike", "tail-indicator"] {
        let seq = QcSequence::parse(name)?;
        println!("{seq}");
        for r in convergence_suite(&seq, &cfg)? {
            let hyp = match &r.violation {
                None => "hypotheses hold".to_string(),
                Some(v) => format!("violated: {v:?}"),
            };
            println!("  {:<10?} lim int {:<10.6} int lim {:<10.6} gap {:<10.2e} {hyp}", r.law, r.limit_of_integrals, r.integral_of_limit, r.gap);
        }
    }
    Ok(())
}
