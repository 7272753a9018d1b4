//! Monte Carlo background flux and correlation against the closed forms.

use cvteleport::mc::{self, AliceResponse, LagConfig, McConfig};
use cvteleport::{analytic, TeleporterParams};

fn main() -> cvteleport::Result<()> {
    let p = TeleporterParams {
        gamma_s: 5.0,
        gamma_a: 1e6,
        gamma_b: 2.0,
        lambda: 0.5,
        ..Default::default()
    };
    let cfg = McConfig {
        duration: 2000.0,
        n_traj: 16,
        seed: 3,
        alice: AliceResponse::Broadband,
        lags: Some(LagConfig { lag_dt: 0.2, n_lags: 6 }),
        ..Default::default()
    };
    let set = mc::run_ensemble(&p, &cfg)?;
    let fs = analytic::background_flux(&p);
    println!("flux  {:.4} ± {:.4}  (closed form {fs:.4})", set.flux.mean(), set.flux.se());
    for (k, t) in set.tau.iter().enumerate() {
        let m = set.background_corr[k];
        println!("G({t:.1}) {:.4} ± {:.4}  ({:.4})", m.mean(), m.se(), fs * analytic::a_s(*t, &p));
    }
    Ok(())
}
