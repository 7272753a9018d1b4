//! Resonance fluorescence fed into the teleporter: spectrum and `g2_in`.

use cvteleport::mollow;
use cvteleport::series::linspace;
use cvteleport::TeleporterParams;

fn main() -> cvteleport::Result<()> {
    let p = TeleporterParams { omega_rabi: 6.0, ..Default::default() };
    let omega = linspace(-12.0, 12.0, 25);
    let s = mollow::incoherent_spectrum(&p, &omega)?;
    println!("omega  S_in");
    for (w, d) in s.omega.iter().zip(&s.density) {
        println!("{w:6.1} {d:.5}");
    }
    let tau = linspace(0.0, 3.0, 7);
    let g2 = mollow::g2_in(&p, &tau)?;
    println!("\ntau  g2_in  closed form");
    for (t, g) in tau.iter().zip(&g2.values) {
        println!("{t:4.1} {g:.5} {:.5}", mollow::g2_in_closed_form(6.0, 1.0, *t));
    }
    Ok(())
}
