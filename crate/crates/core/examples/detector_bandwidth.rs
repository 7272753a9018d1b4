//! Background flux with a finite detector bandwidth `γ_A`.

use cvteleport::{analytic, transfer, TeleporterParams};

fn main() {
    let base = TeleporterParams {
        gamma_s: 10.0,
        gamma_b: 1.0,
        lambda: 0.6,
        ..Default::default()
    };
    println!("closed form (gamma_A -> inf): {:.5}", analytic::background_flux(&base));
    for a in [0.3, 1.0, 3.0, 10.0, 100.0, 1e4] {
        let p = TeleporterParams { gamma_a: a * base.gamma_s, ..base };
        println!(
            "gamma_A/gamma_s {a:>8}: f_s {:.5}",
            transfer::background_flux_general(&p, false)
        );
    }
}
