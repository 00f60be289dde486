//! Persisted control fields.
//!
//! Layout: `# key = value` header lines, a CSV body with one row per
//! interval (`k`, interval midpoint, one column per channel) and a final
//! `# sha256 = <hex>` line covering every preceding byte. Numbers use
//! Rust's shortest round-trip formatting, so write → read → write is
//! byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use slc_core::models::{ModelFamily, QubitModel};
use slc_core::optimizer::ControlField;

use crate::error::CliError;

const MAGIC: &str = "# slc control field v1";
const CHECKSUM_PREFIX: &str = "# sha256 = ";

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelHeader {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub model: ModelFamily,
    pub horizon: f64,
    pub intervals: usize,
    pub channels: Vec<ChannelHeader>,
    pub seed_train: u64,
    /// Final training objective `J`.
    pub converged_j: f64,
    /// `[channel][interval]`
    pub values: Vec<Vec<f64>>,
}

impl FieldFile {
    pub fn from_field(model: &QubitModel<f64>, field: &ControlField<f64>, seed_train: u64, converged_j: f64) -> Self {
        Self {
            model: model.family,
            horizon: field.horizon(),
            intervals: field.intervals(),
            channels: model
                .channels()
                .iter()
                .map(|c| ChannelHeader { name: c.name.clone(), lower: c.lower, upper: c.upper })
                .collect(),
            seed_train,
            converged_j,
            values: field.values().to_vec(),
        }
    }

    pub fn to_field(&self) -> slc_core::Result<ControlField<f64>> {
        let bounds = self.channels.iter().map(|c| (c.lower, c.upper)).collect();
        ControlField::new(self.values.clone(), bounds, self.horizon)
    }

    /// Errors unless the header describes `model`'s channels and time grid.
    pub fn check_model(&self, model: &QubitModel<f64>) -> Result<(), String> {
        if self.model != model.family {
            return Err(format!("field was trained for model {}, config selects {}", self.model, model.family));
        }
        let expect: Vec<ChannelHeader> = model
            .channels()
            .iter()
            .map(|c| ChannelHeader { name: c.name.clone(), lower: c.lower, upper: c.upper })
            .collect();
        if self.channels != expect || self.intervals != model.intervals() || self.horizon != model.horizon() {
            return Err("channel layout or time grid differs from the model".into());
        }
        Ok(())
    }

    fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * (self.horizon / self.intervals as f64)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{MAGIC}").unwrap();
        writeln!(s, "# model = {}", self.model).unwrap();
        writeln!(s, "# horizon_ns = {}", self.horizon).unwrap();
        writeln!(s, "# intervals = {}", self.intervals).unwrap();
        for c in &self.channels {
            writeln!(s, "# channel = {},{},{}", c.name, c.lower, c.upper).unwrap();
        }
        writeln!(s, "# seed_train = {}", self.seed_train).unwrap();
        writeln!(s, "# converged_j = {}", self.converged_j).unwrap();
        let names: Vec<&str> = self.channels.iter().map(|c| c.name.as_str()).collect();
        writeln!(s, "k,t_ns,{}", names.join(",")).unwrap();
        for k in 0..self.intervals {
            write!(s, "{},{}", k, self.midpoint(k)).unwrap();
            for row in &self.values {
                write!(s, ",{}", row[k]).unwrap();
            }
            s.push('\n');
        }
        let digest = hex::encode(Sha256::digest(s.as_bytes()));
        writeln!(s, "{CHECKSUM_PREFIX}{digest}").unwrap();
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let body_end = text
            .rfind(CHECKSUM_PREFIX)
            .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
            .ok_or("missing checksum line")?;
        let (body, tail) = text.split_at(body_end);
        let stated = tail[CHECKSUM_PREFIX.len()..].strip_suffix('\n').ok_or("checksum line must end with a newline")?;
        let actual = hex::encode(Sha256::digest(body.as_bytes()));
        if stated != actual {
            return Err("checksum mismatch (file corrupted or edited)".into());
        }

        let mut lines = body.lines();
        if lines.next() != Some(MAGIC) {
            return Err("not an slc field file".into());
        }
        let mut header = |key: &str| -> Result<String, String> {
            let line = lines.next().ok_or_else(|| format!("truncated header before {key}"))?;
            line.strip_prefix("# ")
                .and_then(|l| l.strip_prefix(key))
                .and_then(|l| l.strip_prefix(" = "))
                .map(str::to_string)
                .ok_or_else(|| format!("expected header {key:?}, found {line:?}"))
        };
        let model: ModelFamily = header("model")?.parse().map_err(|e: slc_core::Error| e.to_string())?;
        let horizon: f64 = num(&header("horizon_ns")?)?;
        let intervals: usize = num(&header("intervals")?)?;
        let expected_channels = model.build::<f64>().channels().len();
        let mut channels = Vec::with_capacity(expected_channels);
        for _ in 0..expected_channels {
            let spec = header("channel")?;
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() != 3 {
                return Err(format!("malformed channel header {spec:?}"));
            }
            channels.push(ChannelHeader { name: parts[0].to_string(), lower: num(parts[1])?, upper: num(parts[2])? });
        }
        let seed_train: u64 = num(&header("seed_train")?)?;
        let converged_j: f64 = num(&header("converged_j")?)?;

        let names: Vec<&str> = channels.iter().map(|c| c.name.as_str()).collect();
        let columns = format!("k,t_ns,{}", names.join(","));
        if lines.next() != Some(columns.as_str()) {
            return Err("missing or malformed column header".into());
        }
        let mut values = vec![Vec::with_capacity(intervals); channels.len()];
        for k in 0..intervals {
            let line = lines.next().ok_or_else(|| format!("missing row {k}"))?;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != channels.len() + 2 || num::<usize>(cells[0])? != k {
                return Err(format!("malformed row {k}"));
            }
            for (row, cell) in values.iter_mut().zip(&cells[2..]) {
                row.push(num(cell)?);
            }
        }
        if lines.next().is_some() {
            return Err("unexpected trailing rows".into());
        }
        Ok(Self { model, horizon, intervals, channels, seed_train, converged_j, values })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|message| CliError::FieldFile { path: path.to_path_buf(), message })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_text()).map_err(|e| CliError::io(path, e))
    }
}

fn num<N: std::str::FromStr>(s: &str) -> Result<N, String> {
    s.trim().parse().map_err(|_| format!("cannot parse number {s:?}"))
}
