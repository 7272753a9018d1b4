//! A TOML sweep run through the same path as the binary.

use cvteleport::config::parse_config;
use cvteleport::run::{run, Command, RunOptions};

const CONFIG: &str = r#"
gamma_B = 20.0
gamma_s = 200.0
gamma_A = 1000.0
squeezing_db = 25.0

[[sweep]]
name = "gamma_B_over_gamma_s"
log = { start = 1e-1, stop = 1e-4, points = 4 }

[grid]
tau = { start = 0.0, stop = 1.0, points = 101 }
"#;

fn main() -> cvteleport::Result<()> {
    let cfg = parse_config(CONFIG)?;
    let out = std::env::temp_dir().join("cvteleport_config_sweep");
    let opts = RunOptions { out, seed: None, threads: None };
    let outcome = run(Command::G2, &cfg, &opts)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(())
}
