//! Parses a profile, prints its lints and canonical form, and checks that
//! the canonical form parses back to the same structure.
//!
//! ```sh
//! cargo run --example profile_roundtrip -- crates/core/fixtures/e4_pull_push.prof
//! ```

use std::path::PathBuf;

use duolayer::profile::{parse_profile, serialize_profile, validate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/e1_hand.prof"));
    let text = std::fs::read_to_string(&path)?;
    let profile = match parse_profile(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            std::process::exit(2);
        }
    };
    for d in validate(&profile) {
        eprintln!("lint: {d}");
    }
    let canonical = serialize_profile(&profile);
    print!("{canonical}");
    assert_eq!(parse_profile(&canonical)?, profile, "canonical form must parse back unchanged");
    Ok(())
}
