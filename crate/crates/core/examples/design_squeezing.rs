//! Squeezing and filter bandwidth needed for a target `g2_out(0)`.

use cvteleport::analytic;
use cvteleport::{lambda_from_db, TeleporterParams};

fn main() -> cvteleport::Result<()> {
    let target = 0.003;
    let p = TeleporterParams::default().with_filter_ratio(1e-4);
    let d = analytic::design(&p, target)?;
    println!("target g2(0)           {target}");
    println!("required squeezing     {:.2} dB", d.required_db);
    println!("max gamma_B/gamma_s    {:.3e}", d.max_filter_ratio);
    println!("feasible at {:.0e}       {}", p.filter_ratio(), d.feasible);
    let exact = analytic::required_squeezing_db_at_filter_ratio(target, &p)?;
    println!("exact at this ratio    {exact:.2} dB");
    for db in [d.required_db, exact] {
        let q = TeleporterParams { lambda: lambda_from_db(db)?, ..p };
        println!("  {db:.2} dB -> g2_out(0) = {:.5}", analytic::g2_out_zero(&q)?);
    }
    Ok(())
}
