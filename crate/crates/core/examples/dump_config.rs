//! Prints a reference configuration as TOML. Used to regenerate the
//! checked-in files under `configs/`:
//!
//! ```text
//! cargo run -p mramsim-core --example dump_config -- default > configs/default.toml
//! cargo run -p mramsim-core --example dump_config -- ideal   > configs/ideal.toml
//! ```

use mramsim_core::MacroConfig;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "default".into());
    let cfg = match which.as_str() {
        "default" => MacroConfig::default(),
        "ideal" => {
            // The variability-free reference: exact resistances, offset-free
            // latches, droop-free mirrors, noise-free comparator. Left
            // uncalibrated on purpose — it is a ground-truth configuration,
            // not a fitted one.
            let mut cfg = MacroConfig::ideal();
            cfg.calibration = None;
            cfg
        }
        other => {
            eprintln!("unknown variant {other:?}; expected `default` or `ideal`");
            std::process::exit(2);
        }
    };
    print!("{}", toml::to_string(&cfg).expect("config serializes"));
}
