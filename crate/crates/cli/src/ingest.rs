//! CSV input: a header row, then either `x,y` or `label,x,y` per line.

use std::fmt;
use std::path::Path;

use corrbreak::SeriesPair;

/// Problem with the user's input, reported with exit status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn fail<T>(msg: String) -> Result<T, InputError> {
    Err(InputError(msg))
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub pair: SeriesPair,
    pub x_name: String,
    pub y_name: String,
    pub label_name: Option<String>,
}

fn delimiter(header: &str) -> u8 {
    if header.contains('\t') && !header.contains(',') {
        b'\t'
    } else {
        b','
    }
}

pub fn ingest_csv(path: &Path) -> Result<Dataset, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Dataset, InputError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let header_line = text.lines().next().unwrap_or("");
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter(header_line))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let header = reader.headers().map_err(|e| InputError(format!("line 1: {e}")))?.clone();
    let width = header.len();
    let (label_name, x_name, y_name) = match width {
        2 => (None, header[0].to_string(), header[1].to_string()),
        3 => (Some(header[0].to_string()), header[1].to_string(), header[2].to_string()),
        n => return fail(format!("line 1: expected 2 or 3 columns (optional label, x, y), found {n}")),
    };
    if header.iter().any(|h| h.parse::<f64>().is_ok()) {
        return fail("line 1: a header row is required".into());
    }

    let (mut x, mut y, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| InputError(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return fail(format!("line {line}: expected {width} fields, found {}", record.len()));
        }
        let offset = width - 2;
        for (k, out) in [(offset, &mut x), (offset + 1, &mut y)] {
            let cell = &record[k];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ if cell.is_empty() => return fail(format!("line {line}: missing value in column {}", k + 1)),
                _ => return fail(format!("line {line}: '{cell}' in column {} is not a finite number", k + 1)),
            }
        }
        if offset == 1 {
            labels.push(record[0].to_string());
        }
    }
    if x.len() < 2 {
        return fail(format!("need at least 2 observations, found {}", x.len()));
    }
    let mut pair = SeriesPair::new(x, y).map_err(|e| InputError(e.to_string()))?;
    if label_name.is_some() {
        pair = pair.with_timestamps(labels).map_err(|e| InputError(e.to_string()))?;
    }
    Ok(Dataset { pair, x_name, y_name, label_name })
}
