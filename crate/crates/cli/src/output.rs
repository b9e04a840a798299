use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use sha2::{Digest, Sha256};

use crate::args::ReportFormat;
use csa_core::eval::EvalReport;

/// Writes through `body` to the file at `target`, or to standard output for `-`.
pub fn write_to(target: &str, body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
    if target == "-" {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        body(&mut lock)?;
        lock.flush().context("writing to standard output")?;
    } else {
        let file = File::create(target).with_context(|| format!("creating {target}"))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().with_context(|| format!("writing {target}"))?;
    }
    Ok(())
}

pub fn write_report(target: &str, report: &EvalReport, format: ReportFormat) -> anyhow::Result<()> {
    let text = match format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json(),
    };
    write_to(target, |w| Ok(w.write_all(text.as_bytes())?))
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
