//! Output spectrum: the input triplet on top of the squeezing-limited background.

use cvteleport::analytic;
use cvteleport::series::linspace;
use cvteleport::{lambda_from_db, TeleporterParams};

fn main() -> cvteleport::Result<()> {
    let omega = linspace(-15.0, 15.0, 31);
    for db in [0.0, 10.0, 25.0] {
        let p = TeleporterParams {
            lambda: lambda_from_db(db)?,
            ..TeleporterParams::default().with_filter_ratio(1e-1)
        };
        let out = analytic::output_spectrum(&p, &omega)?;
        let bg = analytic::background_spectrum(&p, &omega)?;
        println!("{db} dB: integral {:.4}, background share {:.3}", out.integral, bg.integral / out.integral);
        for k in (0..omega.len()).step_by(5) {
            println!("  omega {:6.1}  s_out {:.5}  background {:.5}", omega[k], out.density[k], bg.density[k]);
        }
    }
    Ok(())
}
