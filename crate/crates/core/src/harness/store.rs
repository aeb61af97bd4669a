//! Append-only, content-addressed result directory.
//!
//! ```text
//! <root>/runs/<id>.json             full ResultsRecord
//! <root>/runs/<id>.config           resolved key = value config
//! <root>/runs/<id>.forgetting.json  compact forgetting record
//! <root>/runs/<id>.retention.csv    retention matrix
//! <root>/runs/<id>.trainlog.csv     per-epoch losses
//! <root>/results.csv                one line per stored run
//! ```
//!
//! `<id>` is [`ExperimentConfig::run_id`](crate::harness::ExperimentConfig::run_id).

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::harness::experiment::ResultsRecord;
use crate::optim::write_train_logs_csv;

const RESULTS_HEADER: &str =
    "id,method,lambda,partition,seed,forgetting_pp,final_mrr,final_mrr_pooled,total_seconds\n";

#[derive(Debug)]
pub struct ResultStore {
    root: PathBuf,
    append_lock: Mutex<()>,
}

impl ResultStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let runs = root.join("runs");
        fs::create_dir_all(&runs).map_err(|e| Error::io(&runs, e))?;
        Ok(Self {
            root,
            append_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn run_path(&self, id: &str, ext: &str) -> PathBuf {
        self.root.join("runs").join(format!("{id}.{ext}"))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.run_path(id, "json").exists()
    }

    pub fn load(&self, id: &str) -> Result<Option<ResultsRecord>> {
        let path = self.run_path(id, "json");
        if !path.exists() {
            return Ok(None);
        }
        let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Some(serde_json::from_reader(BufReader::new(f))?))
    }

    /// Writes a record unless one with the same id is already stored.
    /// Returns whether anything was written.
    pub fn save(&self, record: &ResultsRecord) -> Result<bool> {
        let _guard = self.append_lock.lock().unwrap_or_else(|p| p.into_inner());
        if self.contains(&record.id) {
            return Ok(false);
        }
        let write = |ext: &str, f: &dyn Fn(&mut BufWriter<File>) -> Result<()>| -> Result<()> {
            let path = self.run_path(&record.id, ext);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| Error::io(&path, e))
        };
        write("config", &|w| {
            w.write_all(record.config.to_kv().as_bytes())
                .map_err(|e| Error::io("<config>", e))
        })?;
        write("forgetting.json", &|w| {
            Ok(serde_json::to_writer_pretty(
                w,
                &record.forgetting_record(),
            )?)
        })?;
        write("retention.csv", &|w| record.retention.write_csv(w))?;
        write("trainlog.csv", &|w| {
            write_train_logs_csv(&record.train_logs, w)
        })?;
        // the full record goes last: its presence marks the run as complete
        write("json", &|w| Ok(serde_json::to_writer(w, record)?))?;

        let csv_path = self.root.join("results.csv");
        let fresh = !csv_path.exists();
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&csv_path)
            .map_err(|e| Error::io(&csv_path, e))?;
        let mut line = String::new();
        if fresh {
            line.push_str(RESULTS_HEADER);
        }
        let c = &record.config;
        line.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            record.id,
            c.method.name(),
            c.method.lambda().map(|l| l.to_string()).unwrap_or_default(),
            c.partition,
            c.seed,
            record.report.average_pp,
            record.report.final_mrr,
            record.final_mrr_pooled,
            record.timings.total_seconds
        ));
        f.write_all(line.as_bytes())
            .map_err(|e| Error::io(&csv_path, e))?;
        Ok(true)
    }

    /// All stored records, sorted by (partition, method, seed).
    pub fn load_all(&self) -> Result<Vec<ResultsRecord>> {
        let runs = self.root.join("runs");
        let mut out = Vec::new();
        for entry in fs::read_dir(&runs).map_err(|e| Error::io(&runs, e))? {
            let path = entry.map_err(|e| Error::io(&runs, e))?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if let Some(id) = name.strip_suffix(".json") {
                if id.contains('.') {
                    continue;
                }
                if let Some(r) = self.load(id)? {
                    out.push(r);
                }
            }
        }
        out.sort_by(|a, b| {
            (
                a.config.partition.as_str(),
                a.config.method.to_string(),
                a.config.seed,
            )
                .cmp(&(
                    b.config.partition.as_str(),
                    b.config.method.to_string(),
                    b.config.seed,
                ))
        });
        Ok(out)
    }
}
