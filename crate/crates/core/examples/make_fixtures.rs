//! Regenerates the synthetic CSV fixtures shipped in `fixtures/`.
//!
//! Usage: `cargo run -p funding-core --example make_fixtures [out_dir]`

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use funding_core::curves::write_history_csv;
use funding_core::synthetic::{linear_history, random_history, trend_history, two_regime_history};
use funding_core::CurveHistory;

fn write(dir: &Path, name: &str, history: &CurveHistory) -> funding_core::Result<()> {
    let path = dir.join(name);
    let file = File::create(&path).expect("create fixture file");
    write_history_csv(BufWriter::new(file), history)?;
    println!("wrote {} ({} curves)", path.display(), history.len());
    Ok(())
}

fn main() -> funding_core::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    std::fs::create_dir_all(&dir).expect("create fixture directory");

    let start = NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
    write(&dir, "two_regime.csv", &two_regime_history())?;
    write(&dir, "trend.csv", &trend_history())?;
    write(
        &dir,
        "linear.csv",
        &linear_history(start, 7, 104, |t| 0.02 + 0.005 * t, |_| 0.012),
    )?;
    write(&dir, "AA.csv", &random_history(11, start, 7, 8 * 52, 0.04))?;
    write(&dir, "BB.csv", &random_history(12, start, 7, 8 * 52, 0.02))?;
    Ok(())
}
