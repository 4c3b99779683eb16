//! Prints the calibration produced from the default target set, at full
//! precision. The library ships this fit's output as its built-in
//! defaults; rerun this after changing targets or fit internals to see
//! what the new constants would be.

use mramsim_core::{calibrate, CalibrationTargets, MacroConfig};

fn main() {
    let cfg = MacroConfig::default();
    let cal = calibrate(&CalibrationTargets::default(), &cfg).expect("calibration fit");
    println!("{}", serde_json::to_string_pretty(&cal).expect("serialize"));
}
