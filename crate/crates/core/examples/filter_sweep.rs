//! `g2_out(0)` as the output filter narrows, exact and in the narrow limit.

use cvteleport::analytic::{self, FluxMode};
use cvteleport::TeleporterParams;

fn main() -> cvteleport::Result<()> {
    let base = TeleporterParams::default();
    println!("gamma_B/gamma_s  exact     limit");
    for ratio in [1e1, 1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
        let p = base.with_filter_ratio(ratio);
        let exact = analytic::flux_ratio(&p, FluxMode::Exact)?.ratio;
        let limit = analytic::flux_ratio(&p, FluxMode::Limit)?.ratio;
        println!(
            "{ratio:<16.0e} {:.5}  {:.5}",
            analytic::g2_zero_from_ratio(exact),
            analytic::g2_zero_from_ratio(limit)
        );
    }
    Ok(())
}
