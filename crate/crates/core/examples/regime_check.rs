//! Which bandwidth orderings a configuration violates.

use cvteleport::params::validate_regime_with;
use cvteleport::{validate_regime, TeleporterParams};

fn main() {
    let base = TeleporterParams::default().with_filter_ratio(1e-3);
    let good = TeleporterParams { gamma_a: 1e3 * base.gamma_s, ..base };
    let bad = TeleporterParams { gamma_a: 2.0 * good.gamma_b, ..good };
    for (name, p) in [("wide detector", good), ("slow detector", bad)] {
        let r = validate_regime(&p);
        println!("{name}: simplified formulas valid = {}", r.simplified_formulas_valid);
        for v in &r.violations {
            println!("  {} (ratio {:.2})", v.inequality, v.ratio);
        }
    }
    let r = validate_regime_with(&good, 10.0, Some(0.003));
    println!("filter margin for g2(0) = 0.003: {:?}", r.filter_constraint_margin);
}
