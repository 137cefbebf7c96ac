//! CSV and plain-text output.

use std::fmt::Write as _;
use std::path::Path;

use super::runner::CompareSummary;
use crate::error::Result;
use crate::metrics::{EpochRecord, TrialReport};

pub const CSV_HEADER: [&str; 5] = ["epoch", "lr", "train_loss", "test_top1_acc", "test_top5_err"];

/// Per-epoch CSV. The header is written even when there are no records.
pub fn write_trial_csv(path: &Path, records: &[EpochRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trial_csv(path: &Path) -> Result<Vec<EpochRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<EpochRecord>, _>>()?)
}

pub fn write_checksums(path: &Path, reports: &[TrialReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["loss", "trial", "seed", "init_checksum", "first_epoch_checksum"])?;
    for r in reports {
        w.write_record([
            r.loss.name().to_string(),
            (r.trial + 1).to_string(),
            r.seed.to_string(),
            format!("{:016x}", r.init_checksum),
            r.first_epoch_checksum.map_or_else(String::new, |c| format!("{c:016x}")),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Table with one block per loss: a mean ± std row, then one row per trial.
/// Values are percentages.
pub fn format_table(summary: &CompareSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "epochs [{}, {}) averaged per trial; {} trials per loss",
        summary.window[0], summary.window[1], summary.trials
    );
    let _ = writeln!(s, "{:<16} {:>18} {:>18}   trial no.", "loss function", "top-5 error (%)", "top-1 acc (%)");
    let _ = writeln!(s, "{}", "-".repeat(72));
    for block in &summary.blocks {
        let (e, a) = (&block.top5_err, &block.top1_acc);
        let _ = writeln!(
            s,
            "{:<16} {:>18} {:>18}   mean and std.",
            block.loss.name(),
            format!("{:.2} ± {:.2}", 100.0 * e.mean, 100.0 * e.std),
            format!("{:.2} ± {:.2}", 100.0 * a.mean, 100.0 * a.std),
        );
        for (t, (err, acc)) in e.per_trial.iter().zip(&a.per_trial).enumerate() {
            let _ = writeln!(
                s,
                "{:<16} {:>18} {:>18}   trial {}",
                "",
                format!("{:.2}", 100.0 * err),
                format!("{:.2}", 100.0 * acc),
                t + 1
            );
        }
    }
    let _ = writeln!(s, "{}", "-".repeat(72));
    let _ = writeln!(s, "paired seeds verified: {}", if summary.paired { "yes" } else { "NO" });
    let _ = writeln!(
        s,
        "adaptive mean top-5 error <= cross-entropy mean: {}",
        if summary.adaptive_not_worse { "yes" } else { "no" }
    );
    let _ = writeln!(s, "first-epoch order checksums:");
    for r in &summary.reports {
        let _ = writeln!(
            s,
            "  {:<14} trial {:<3} init {:016x} order {}",
            r.loss.name(),
            r.trial + 1,
            r.init_checksum,
            r.first_epoch_checksum.map_or_else(|| "-".to_string(), |c| format!("{c:016x}"))
        );
    }
    s
}
