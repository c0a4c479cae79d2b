use anyhow::{Context, Result};
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

/// A CSV file whose first line is `# <command> config_sha256=<hash> units=<units>`,
/// followed by the column header.
pub struct CsvOut {
    writer: csv::Writer<File>,
    pub path: PathBuf,
}

impl CsvOut {
    pub fn create(dir: &Path, name: &str, comment: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let mut file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        writeln!(file, "# {comment}")?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        Ok(Self { writer, path })
    }

    pub fn row<I, T>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn numbers(&mut self, values: &[f64]) -> Result<()> {
        self.row(values.iter().map(|v| format!("{v:.10e}")))
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}
