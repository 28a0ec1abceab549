//! Multivariate time series datasets: the UEA `.ts` text format, a long-form
//! CSV layout, and removal of trailing NA padding.
//!
//! Missing observations (`?`, `NaN`, empty CSV cells) are stored as `f64::NAN`
//! inside a [`Channel`]; every finite value is kept bit-for-bit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One univariate component of a multivariate instance.
#[derive(Debug, Clone, Default)]
pub struct Channel {
    values: Vec<f64>,
}

impl Channel {
    /// Builds a channel; any non-finite input is stored as missing.
    pub fn new(values: Vec<f64>) -> Self {
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { f64::NAN })
            .collect();
        Channel { values }
    }

    pub fn from_options(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        Channel::new(values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
    }

    /// Raw observations, missing entries as NaN.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.values[i].is_nan()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    /// Drops the trailing run of missing values.
    pub fn strip_trailing_missing(&self) -> Channel {
        let end = self.values.iter().rposition(|v| !v.is_nan()).map_or(0, |i| i + 1);
        Channel {
            values: self.values[..end].to_vec(),
        }
    }
}

impl PartialEq for Channel {
    fn eq(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits())
    }
}

impl From<Vec<f64>> for Channel {
    fn from(values: Vec<f64>) -> Self {
        Channel::new(values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MtsInstance {
    pub id: String,
    pub channels: Vec<Channel>,
    pub label: String,
}

/// A labeled collection of multivariate instances sharing one channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct MtsDataset {
    pub name: String,
    pub instances: Vec<MtsInstance>,
    /// Sorted, deduplicated class symbols.
    pub class_alphabet: Vec<String>,
    pub dims: usize,
}

impl MtsDataset {
    /// Validates the dataset invariants and returns it.
    pub fn new(
        name: impl Into<String>,
        instances: Vec<MtsInstance>,
        class_alphabet: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let alphabet: BTreeSet<String> = class_alphabet.into_iter().collect();
        let Some(first) = instances.first() else {
            return Err(Error::Dataset("dataset has no instances".into()));
        };
        let dims = first.channels.len();
        if dims == 0 {
            return Err(Error::Dataset(format!("instance {} has no channels", first.id)));
        }
        for inst in &instances {
            if inst.channels.len() != dims {
                return Err(Error::Dataset(format!(
                    "instance {} has {} channels, expected {}",
                    inst.id,
                    inst.channels.len(),
                    dims
                )));
            }
            if !alphabet.contains(&inst.label) {
                return Err(Error::Dataset(format!(
                    "instance {} has label {:?} outside the class alphabet",
                    inst.id, inst.label
                )));
            }
        }
        Ok(MtsDataset {
            name: name.into(),
            instances,
            class_alphabet: alphabet.into_iter().collect(),
            dims,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.instances.iter().map(|i| i.label.clone()).collect()
    }
}

fn parse_value(token: &str) -> std::result::Result<f64, ()> {
    let t = token.trim();
    if t == "?" || t.eq_ignore_ascii_case("nan") || t.eq_ignore_ascii_case("na") {
        return Ok(f64::NAN);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Ok(f64::NAN),
        Err(_) => Err(()),
    }
}

#[derive(Default)]
struct TsHeader {
    name: Option<String>,
    dims: Option<usize>,
    univariate: Option<bool>,
    labels: Option<Vec<String>>,
}

/// Parses a UEA `.ts` document.
pub fn parse_ts(text: &str) -> Result<MtsDataset> {
    let mut header = TsHeader::default();
    let mut in_data = false;
    let mut instances = Vec::new();
    let mut dims: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            if !line.starts_with('@') {
                return Err(Error::parse(line_no, "expected a header line starting with '@'"));
            }
            let mut parts = line[1..].split_whitespace();
            let keyword = parts.next().unwrap_or("").to_ascii_lowercase();
            let rest: Vec<&str> = parts.collect();
            match keyword.as_str() {
                "problemname" => header.name = Some(rest.join(" ")),
                "timestamps" => {
                    if parse_bool(&rest, line_no)? {
                        return Err(Error::parse(line_no, "timestamped series are not supported"));
                    }
                }
                "missing" | "equallength" => {
                    parse_bool(&rest, line_no)?;
                }
                "univariate" => header.univariate = Some(parse_bool(&rest, line_no)?),
                "dimensions" | "dimension" => {
                    let d = rest
                        .first()
                        .and_then(|s| s.parse::<usize>().ok())
                        .filter(|&d| d > 0)
                        .ok_or_else(|| Error::parse(line_no, "@dimensions needs a positive integer"))?;
                    header.dims = Some(d);
                }
                "serieslength" => {
                    rest.first()
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| Error::parse(line_no, "@seriesLength needs an integer"))?;
                }
                "classlabel" => {
                    if !parse_bool(&rest[..rest.len().min(1)], line_no)? {
                        return Err(Error::parse(line_no, "datasets without class labels are not supported"));
                    }
                    let labels: Vec<String> = rest[1..].iter().map(|s| s.to_string()).collect();
                    if labels.is_empty() {
                        return Err(Error::parse(line_no, "@classLabel true lists no labels"));
                    }
                    header.labels = Some(labels);
                }
                "targetlabel" => {
                    return Err(Error::parse(line_no, "regression targets are not supported"));
                }
                "data" => {
                    if header.labels.is_none() {
                        return Err(Error::parse(line_no, "@data reached before @classLabel"));
                    }
                    dims = match (header.dims, header.univariate) {
                        (Some(d), Some(true)) if d != 1 => {
                            return Err(Error::parse(line_no, "@univariate true conflicts with @dimensions"))
                        }
                        (Some(d), _) => Some(d),
                        (None, Some(true)) => Some(1),
                        (None, _) => None,
                    };
                    in_data = true;
                }
                other => {
                    return Err(Error::parse(line_no, format!("unknown header keyword @{other}")));
                }
            }
            continue;
        }

        let labels = header.labels.as_ref().expect("checked at @data");
        let tokens: Vec<&str> = line.split(':').collect();
        if tokens.len() < 2 {
            return Err(Error::parse(line_no, "record has no class label"));
        }
        let (label, channel_tokens) = tokens.split_last().expect("len >= 2");
        let label = label.trim().to_string();
        let expected = *dims.get_or_insert(channel_tokens.len());
        if channel_tokens.len() != expected {
            return Err(Error::parse(
                line_no,
                format!(
                    "record has {} dimensions, header declares {}",
                    channel_tokens.len(),
                    expected
                ),
            ));
        }
        if !labels.contains(&label) {
            return Err(Error::parse(line_no, format!("unknown class label {label:?}")));
        }
        let mut channels = Vec::with_capacity(expected);
        for (d, tok) in channel_tokens.iter().enumerate() {
            if tok.trim().is_empty() {
                return Err(Error::parse(line_no, format!("dimension {} is empty", d + 1)));
            }
            let values = tok
                .split(',')
                .map(|v| {
                    parse_value(v).map_err(|_| {
                        Error::parse(line_no, format!("invalid value {:?} in dimension {}", v.trim(), d + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            channels.push(Channel { values });
        }
        instances.push(MtsInstance {
            id: instances.len().to_string(),
            channels,
            label,
        });
    }

    if !in_data {
        return Err(Error::parse(text.lines().count().max(1), "missing @data section"));
    }
    let labels = header.labels.unwrap_or_default();
    MtsDataset::new(header.name.unwrap_or_default(), instances, labels)
}

fn parse_bool(rest: &[&str], line_no: usize) -> Result<bool> {
    match rest.first().map(|s| s.to_ascii_lowercase()) {
        Some(s) if s == "true" => Ok(true),
        Some(s) if s == "false" => Ok(false),
        _ => Err(Error::parse(line_no, "expected true or false")),
    }
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "?".to_string()
    } else {
        format!("{v:?}")
    }
}

/// Writes a dataset in `.ts` form. `parse_ts(&serialize_ts(d))` reproduces `d`.
pub fn serialize_ts(dataset: &MtsDataset) -> String {
    let lengths: BTreeSet<usize> = dataset
        .instances
        .iter()
        .flat_map(|i| i.channels.iter().map(Channel::len))
        .collect();
    let missing = dataset
        .instances
        .iter()
        .any(|i| i.channels.iter().any(Channel::has_missing));
    let mut out = String::new();
    if !dataset.name.is_empty() {
        let _ = writeln!(out, "@problemName {}", dataset.name);
    }
    let _ = writeln!(out, "@timeStamps false");
    let _ = writeln!(out, "@missing {missing}");
    let _ = writeln!(out, "@univariate {}", dataset.dims == 1);
    let _ = writeln!(out, "@dimensions {}", dataset.dims);
    let _ = writeln!(out, "@equalLength {}", lengths.len() == 1);
    if lengths.len() == 1 {
        let _ = writeln!(out, "@seriesLength {}", lengths.iter().next().unwrap());
    }
    let _ = writeln!(out, "@classLabel true {}", dataset.class_alphabet.join(" "));
    out.push_str("@data\n");
    for inst in &dataset.instances {
        for ch in &inst.channels {
            let vals: Vec<String> = ch.values.iter().map(|&v| format_value(v)).collect();
            out.push_str(&vals.join(","));
            out.push(':');
        }
        out.push_str(&inst.label);
        out.push('\n');
    }
    out
}

/// Parses the long CSV layout `Ts_id,Ts_dimId,Ts_class,v1,v2,...`.
///
/// Rows are grouped by `Ts_id` in order of first appearance; `Ts_dimId` is
/// 1-based and orders channels. Empty value cells are missing.
pub fn parse_long_csv(text: &str, name: &str) -> Result<MtsDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let expected = ["Ts_id", "Ts_dimId", "Ts_class"];
    if headers.len() < 4 || headers.iter().take(3).ne(expected.iter().copied()) {
        return Err(Error::parse(
            1,
            "header must start with Ts_id,Ts_dimId,Ts_class followed by value columns",
        ));
    }

    struct Pending {
        label: String,
        channels: BTreeMap<usize, Channel>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_id: BTreeMap<String, Pending> = BTreeMap::new();
    let mut max_dim = 0;

    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 2;
        let record = record?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if record.len() < 3 {
            return Err(Error::parse(line_no, "row has fewer than three key columns"));
        }
        let id = record[0].to_string();
        let dim: usize = record[1]
            .parse()
            .ok()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::parse(line_no, format!("invalid Ts_dimId {:?}", &record[1])))?;
        let class = record[2].to_string();
        let mut values = Vec::with_capacity(record.len() - 3);
        for cell in record.iter().skip(3) {
            if cell.is_empty() {
                values.push(f64::NAN);
            } else {
                values.push(parse_value(cell).map_err(|_| Error::parse(line_no, format!("invalid value {cell:?}")))?);
            }
        }
        let channel = Channel::new(values).strip_trailing_missing();
        if channel.is_empty() {
            return Err(Error::parse(
                line_no,
                format!("series {id} dimension {dim} has no values"),
            ));
        }
        max_dim = max_dim.max(dim);
        let entry = by_id.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Pending {
                label: class.clone(),
                channels: BTreeMap::new(),
            }
        });
        if entry.label != class {
            return Err(Error::parse(
                line_no,
                format!("series {id} has conflicting classes {:?} and {:?}", entry.label, class),
            ));
        }
        if entry.channels.insert(dim, channel).is_some() {
            return Err(Error::parse(line_no, format!("series {id} repeats dimension {dim}")));
        }
    }

    let mut instances = Vec::with_capacity(order.len());
    let mut labels = BTreeSet::new();
    for id in order {
        let mut pending = by_id.remove(&id).expect("id recorded");
        let mut channels = Vec::with_capacity(max_dim);
        for d in 1..=max_dim {
            match pending.channels.remove(&d) {
                Some(c) => channels.push(c),
                None => {
                    return Err(Error::Dataset(format!("series {id}: missing dimension {d}")));
                }
            }
        }
        labels.insert(pending.label.clone());
        instances.push(MtsInstance {
            id,
            channels,
            label: pending.label,
        });
    }
    MtsDataset::new(name, instances, labels)
}

/// Writes the long CSV layout; channels shorter than the longest series are
/// padded with empty cells.
pub fn to_long_csv(dataset: &MtsDataset) -> String {
    let width = dataset
        .instances
        .iter()
        .flat_map(|i| i.channels.iter().map(Channel::len))
        .max()
        .unwrap_or(0);
    let mut out = String::from("Ts_id,Ts_dimId,Ts_class");
    for k in 1..=width {
        let _ = write!(out, ",v{k}");
    }
    out.push('\n');
    for inst in &dataset.instances {
        for (d, ch) in inst.channels.iter().enumerate() {
            let _ = write!(out, "{},{},{}", inst.id, d + 1, inst.label);
            for k in 0..width {
                out.push(',');
                if let Some(&v) = ch.values.get(k) {
                    if !v.is_nan() {
                        let _ = write!(out, "{v:?}");
                    }
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Removes trailing NA padding from every channel, keeping interior gaps.
pub fn strip_padding(dataset: &MtsDataset) -> Result<MtsDataset> {
    let mut out = dataset.clone();
    for inst in &mut out.instances {
        for (d, ch) in inst.channels.iter_mut().enumerate() {
            let stripped = ch.strip_trailing_missing();
            if stripped.is_empty() {
                return Err(Error::Dataset(format!(
                    "instance {} channel {} is empty after removing padding",
                    inst.id,
                    d + 1
                )));
            }
            *ch = stripped;
        }
    }
    Ok(out)
}

/// Reads a dataset from disk, choosing the parser by extension (`.csv` for
/// the long layout, anything else as `.ts`), and strips padding.
pub fn load_dataset(path: &std::path::Path) -> Result<MtsDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut dataset = if is_csv {
        parse_long_csv(&text, &stem)?
    } else {
        parse_ts(&text)?
    };
    if dataset.name.is_empty() {
        dataset.name = stem;
    }
    strip_padding(&dataset)
}
