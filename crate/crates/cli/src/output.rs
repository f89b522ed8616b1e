//! Output directory: lockfile, CSV/JSON writers and the hash manifest.

use crate::failure::Failure;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const LOCK_NAME: &str = ".filament-lab.lock";
pub const MANIFEST_NAME: &str = "manifest.json";

/// One CSV cell. Floats print with 17 significant digits, which round-trips `f64`.
pub enum Field {
    Int(i64),
    Float(f64),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}
impl From<i64> for Field {
    fn from(v: i64) -> Self {
        Field::Int(v)
    }
}
impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v as i64)
    }
}
impl From<u32> for Field {
    fn from(v: u32) -> Self {
        Field::Int(v as i64)
    }
}
impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}
impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Int(v as i64)
    }
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Int(i) => i.to_string(),
            Field::Float(f) => format!("{f:.16e}"),
        }
    }
}

/// Exclusive handle on an output directory; the lock goes away on drop.
pub struct OutputDir {
    root: PathBuf,
    created: bool,
    emitted: BTreeSet<String>,
}

impl OutputDir {
    pub fn open(root: &Path) -> Result<Self, Failure> {
        let created = !root.exists();
        fs::create_dir_all(root)?;
        let lock = root.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => writeln!(f, "{}", std::process::id())?,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(Failure::Usage(format!(
                    "{} is in use by another run (remove {} if that run is gone)",
                    root.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(e.into()),
        }
        Ok(Self {
            root: root.to_path_buf(),
            created,
            emitted: BTreeSet::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Records `name` for the manifest.
    pub fn register(&mut self, name: &str) {
        self.emitted.insert(name.to_string());
    }

    pub fn has_emitted(&self) -> bool {
        !self.emitted.is_empty()
    }

    pub fn write_csv<R>(&mut self, name: &str, header: &[&str], rows: R) -> Result<(), Failure>
    where
        R: IntoIterator<Item = Vec<Field>>,
    {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for row in rows {
            if row.len() != header.len() {
                return Err(Failure::Runtime(format!("{name}: row width {} != {}", row.len(), header.len())));
            }
            w.write_record(row.iter().map(Field::render))?;
        }
        w.flush()?;
        self.register(name);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name), text)?;
        self.register(name);
        Ok(())
    }

    /// `manifest.json` with the SHA-256 of every emitted file, sorted by name.
    pub fn write_manifest(&mut self, experiment: &str) -> Result<(), Failure> {
        #[derive(Serialize)]
        struct Entry {
            path: String,
            bytes: u64,
            sha256: String,
        }
        let mut files = Vec::new();
        for name in &self.emitted {
            let data = fs::read(self.path(name))?;
            files.push(Entry {
                path: name.clone(),
                bytes: data.len() as u64,
                sha256: hex::encode(Sha256::digest(&data)),
            });
        }
        let manifest = serde_json::json!({ "experiment": experiment, "files": files });
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.path(MANIFEST_NAME), text)?;
        Ok(())
    }

    /// Removes the directory again if this run created it and wrote nothing.
    pub fn discard_if_empty(self) {
        let root = self.root.clone();
        let created = self.created && self.emitted.is_empty();
        drop(self);
        if created {
            let _ = fs::remove_dir(&root);
        }
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.root.join(LOCK_NAME));
    }
}

pub fn sync_append(file: &mut File, line: &str) -> Result<(), Failure> {
    file.write_all(line.as_bytes())?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}
