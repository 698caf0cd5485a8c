use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use spingate::control::{PulseSchedule, ScalingRow};
use spingate::tomography::TimeSeries;

#[derive(Debug)]
pub enum CliError {
    Core(spingate::Error),
    Usage(String),
    File { path: PathBuf, message: String },
}

impl CliError {
    pub fn is_refusal(&self) -> bool {
        matches!(self, CliError::Core(spingate::Error::Refused(_)))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::File { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl From<spingate::Error> for CliError {
    fn from(e: spingate::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn file_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::File { path: path.to_path_buf(), message: e.to_string() }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| file_error(path, e))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| file_error(path, e))
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| file_error(path, e))?;
    w.write_record(header).map_err(|e| file_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| file_error(path, e))?;
    }
    w.flush().map_err(|e| file_error(path, e))
}

pub fn write_signal(path: &Path, ts: &TimeSeries) -> CliResult<()> {
    let rows = ts.records().into_iter().map(|(t, n, z)| vec![t.to_string(), n.to_string(), z.re.to_string(), z.im.to_string()]);
    write_rows(path, &["t", "node", "re", "im"], rows)
}

pub fn read_signal(path: &Path, reference: Option<usize>) -> CliResult<TimeSeries> {
    let mut r = csv::Reader::from_path(path).map_err(|e| file_error(path, e))?;
    let header = r.headers().map_err(|e| file_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "node", "re", "im"] {
        return Err(file_error(path, "expected header t,node,re,im"));
    }
    let mut records = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row.map_err(|e| file_error(path, e))?;
        let bad = |what: &str| file_error(path, format!("row {}: bad {what}", line + 2));
        let t: f64 = row[0].trim().parse().map_err(|_| bad("t"))?;
        let node: usize = row[1].trim().parse().map_err(|_| bad("node"))?;
        let re: f64 = row[2].trim().parse().map_err(|_| bad("re"))?;
        let im: f64 = row[3].trim().parse().map_err(|_| bad("im"))?;
        records.push((t, node, Complex64::new(re, im)));
    }
    let reference = match reference {
        Some(r) => r,
        None => records.iter().map(|r| r.1).min().ok_or_else(|| file_error(path, "no samples"))?,
    };
    Ok(TimeSeries::from_records(&records, reference)?)
}

pub fn write_pulse(path: &Path, schedule: &PulseSchedule) -> CliResult<()> {
    let rows = schedule.rows().into_iter().map(|(s, t, u)| vec![s.to_string(), t.to_string(), u.to_string()]);
    write_rows(path, &["segment", "t_start", "amplitude"], rows)
}

pub fn write_scaling(path: &Path, rows: &[ScalingRow]) -> CliResult<()> {
    let rows = rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.duration.to_string(),
            r.segments.to_string(),
            r.infidelity.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
        ]
    });
    write_rows(path, &["n", "duration", "segments", "infidelity", "iterations", "converged"], rows)
}
