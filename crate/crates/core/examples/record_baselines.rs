//! Measures every stored constant and writes the baseline file.
//!
//!     cargo run --release -p stres-core --example record_baselines [PATH]

use std::time::Instant;
use stres_core::baseline::record;
use stres_core::suites::SuiteConfig;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../baselines.toml").into());
    let start = Instant::now();
    let b = record(&SuiteConfig::default()).unwrap_or_else(|e| {
        eprintln!("record_baselines: {e}");
        std::process::exit(1);
    });
    b.save(&path).unwrap();
    println!("wrote {path} in {:.1} s", start.elapsed().as_secs_f64());
    println!("dichotomy paper {:?}", b.dichotomy.paper);
    println!("dichotomy contrast {:?}", b.dichotomy.contrast);
    for (k, v) in &b.envelopes {
        println!("envelope {k} {v:.4e}");
    }
}
