//! Batch runs over many fields with a JSON-lines checkpoint.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context, Result};
use biquad::{fields_up_to, FieldSpec};
use rayon::prelude::*;

use crate::config::{FieldSelection, RunConfig};
use crate::report::{field_record, FieldRecord, CSV_COLUMNS};

pub fn select_fields(sel: &FieldSelection) -> Result<Vec<Arc<FieldSpec>>> {
    Ok(match sel {
        FieldSelection::Range { min_t, max_t } => fields_up_to(*max_t).into_iter().filter(|f| f.t() >= *min_t).collect(),
        FieldSelection::List(v) => {
            let mut out = Vec::new();
            for &(a, b) in v {
                out.push(FieldSpec::new(a, b)?);
            }
            out
        }
    })
}

/// Records already in `path`. A torn last line from an interrupted run is dropped.
pub fn read_checkpoint(path: &Path, hash: &str) -> Result<Vec<FieldRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Ok(rec) = serde_json::from_str::<FieldRecord>(&line) else { continue };
        if rec.config_hash != hash {
            bail!(
                "{} was written with config {}, not {}; pass --fresh to overwrite",
                path.display(),
                rec.config_hash,
                hash
            );
        }
        out.push(rec);
    }
    Ok(out)
}

fn write_all(path: &Path, records: &[FieldRecord]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        for r in records {
            serde_json::to_writer(&mut f, r)?;
            f.write_all(b"\n")?;
        }
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs every selected field not yet in the checkpoint, appending each record as
/// it completes, then rewrites the file in `(m, s)` order.
pub fn run_sweep(
    cfg: &RunConfig,
    path: &Path,
    fresh: bool,
    timing: bool,
    on_record: impl Fn(&FieldRecord) + Sync,
) -> Result<Vec<FieldRecord>> {
    cfg.validate()?;
    let hash = cfg.hash();
    let mut records = if fresh { Vec::new() } else { read_checkpoint(path, &hash)? };
    write_all(path, &records)?;
    let done: BTreeSet<(u64, u64)> = records.iter().map(|r| (r.m, r.s)).collect();
    let todo: Vec<_> = select_fields(&cfg.fields)?.into_iter().filter(|f| !done.contains(&(f.m(), f.s()))).collect();

    let sink = Mutex::new(OpenOptions::new().append(true).open(path)?);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let fresh_records: Vec<FieldRecord> = pool.install(|| {
        todo.par_iter()
            .map(|f| -> Result<FieldRecord> {
                let rec = field_record(f, cfg.budget, &hash, timing);
                let mut line = serde_json::to_vec(&rec)?;
                line.push(b'\n');
                {
                    let mut w = sink.lock().expect("writer lock");
                    w.write_all(&line)?;
                    w.flush()?;
                }
                on_record(&rec);
                Ok(rec)
            })
            .collect::<Result<_>>()
    })?;
    drop(sink);
    records.extend(fresh_records);
    records.sort_by_key(|r| (r.m, r.s));
    write_all(path, &records)?;
    Ok(records)
}

pub fn write_csv(path: &Path, records: &[FieldRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
