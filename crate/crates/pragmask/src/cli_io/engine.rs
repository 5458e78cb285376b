//! Order-preserving parallel record processing.
//!
//! Lines are read in batches, parsed/transformed in parallel on a bounded
//! worker pool, then consumed sequentially in input order. Per-record
//! transforms must be pure functions of the line (all randomness keyed by
//! record id), which makes output byte-identical for any worker count.

use rayon::prelude::*;
use rayon::ThreadPool;

use std::io::BufRead;

use super::formats::Footer;

const BATCH_LINES: usize = 4096;

/// Engine failures. `Strict` carries the offending line number (1-based).
#[derive(Debug)]
pub enum EngineError {
    Io(std::io::Error),
    Strict { line: u64, message: String },
}

impl From<std::io::Error> for EngineError {
    fn from(e: std::io::Error) -> Self {
        EngineError::Io(e)
    }
}

/// Run `parse` over every input line in parallel and feed the results to
/// `consume` in input order. Parse failures are skipped (and counted) unless
/// `strict`, in which case the first failure aborts.
pub fn drive<T, P, C>(
    reader: impl BufRead,
    pool: &ThreadPool,
    strict: bool,
    footer: &mut Footer,
    parse: P,
    mut consume: C,
) -> Result<(), EngineError>
where
    T: Send,
    P: Fn(&str) -> Result<T, String> + Sync,
    C: FnMut(T, &mut Footer) -> Result<(), EngineError>,
{
    let mut lines = reader.lines();
    let mut batch: Vec<String> = Vec::with_capacity(BATCH_LINES);
    loop {
        batch.clear();
        for line in lines.by_ref().take(BATCH_LINES) {
            batch.push(line?);
        }
        if batch.is_empty() {
            return Ok(());
        }
        let results: Vec<Result<T, String>> =
            pool.install(|| batch.par_iter().map(|l| parse(l)).collect());
        for result in results {
            footer.read += 1;
            match result {
                Ok(item) => consume(item, footer)?,
                Err(message) if strict => {
                    return Err(EngineError::Strict { line: footer.read, message });
                }
                Err(_) => footer.skipped += 1,
            }
        }
    }
}
