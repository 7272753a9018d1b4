//! Squeezed and antisqueezed quadrature spectra of the two OPOs.

use cvteleport::mc::{self, AliceResponse, McConfig, Tap, WelchConfig};
use cvteleport::TeleporterParams;

fn main() -> cvteleport::Result<()> {
    let p = TeleporterParams {
        gamma_s: 1.0,
        gamma_a: 1e6,
        gamma_b: 1.0,
        lambda: 0.5,
        ..Default::default()
    };
    let cfg = McConfig {
        duration: 2000.0,
        n_traj: 8,
        seed: 4,
        alice: AliceResponse::Broadband,
        welch: Some(WelchConfig { sample_dt: 0.1, segment: 512 }),
        ..Default::default()
    };
    let set = mc::run_ensemble(&p, &cfg)?;
    let r = ((1.0 - p.lambda) / (1.0 + p.lambda)).powi(2);
    println!("line center: squeezed {:.4} ± {:.4} ({r:.4})", set.squeezed_zero.mean(), set.squeezed_zero.se());
    println!("             anti     {:.3} ± {:.3} ({:.3})", set.antisqueezed_zero.mean(), set.antisqueezed_zero.se(), 1.0 / r);
    let x = set.psd_of(Tap::OpoAX).expect("welch on");
    let (gm, gp) = (p.gamma_minus(), p.gamma_plus());
    for k in (0..set.omega.len()).step_by(32) {
        let w = set.omega[k];
        let exact = (gm * gm + w * w) / (gp * gp + w * w);
        println!("omega {w:7.3}  X_a {:.4} ± {:.4}  ({exact:.4})", x[k].mean(), x[k].se());
    }
    Ok(())
}
