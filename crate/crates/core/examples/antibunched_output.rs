//! Teleported `g2` with strong squeezing and a narrow output filter.

use cvteleport::analytic;
use cvteleport::series::linspace;
use cvteleport::{lambda_from_db, TeleporterParams};

fn main() -> cvteleport::Result<()> {
    let gamma_b = 20.0;
    let p = TeleporterParams {
        gamma_b,
        gamma_s: gamma_b / 1e-4,
        gamma_a: 1e3 * gamma_b / 1e-4,
        lambda: lambda_from_db(46.0)?,
        ..Default::default()
    }
    .validated()?;
    let tau = linspace(0.0, 1.0, 11);
    let g2 = analytic::g2_out(&p, &tau)?;
    for (t, g) in tau.iter().zip(&g2.values) {
        println!("tau {t:.1}  g2_out {g:.5}");
    }
    println!("g2_out(0) closed form: {:.5}", analytic::g2_out_zero(&p)?);
    Ok(())
}
