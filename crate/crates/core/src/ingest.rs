//! Trial and manifest CSV parsing plus linear gap repair.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Activity labels run 1..=10.
pub type Label = u8;
pub const MAX_LABEL: Label = 10;

pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 100.0;

/// Markers the default stream catalog relies on.
pub const REQUIRED_MARKERS: [&str; 8] = [
    "FrontHead", "VSacral", "LShoulder", "RShoulder", "LElbow", "RElbow", "LWrist", "RWrist",
];

/// Fill-ins for the remaining upper-body markers of the default 13-marker layout.
pub const EXTRA_MARKERS: [&str; 5] = ["BackHead", "Sternum", "Clavicle", "LHand", "RHand"];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn axis(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }

    pub fn axis_mut(&mut self, axis: usize) -> &mut f64 {
        match axis {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

pub(crate) const AXIS_NAMES: [&str; 3] = ["X", "Y", "Z"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerSchema {
    names: Vec<String>,
}

impl MarkerSchema {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || n.contains(',') || n.contains('.') {
                return Err(Error::BadSchema(format!("invalid marker name {n:?}")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::BadSchema(format!("duplicate marker {n}")));
            }
        }
        for r in REQUIRED_MARKERS {
            if !seen.contains(r) {
                return Err(Error::BadSchema(format!("required marker {r} missing")));
            }
        }
        Ok(MarkerSchema { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownMarker(name.to_string()))
    }
}

impl Default for MarkerSchema {
    fn default() -> Self {
        let names = REQUIRED_MARKERS.iter().chain(EXTRA_MARKERS.iter()).map(|s| s.to_string());
        MarkerSchema { names: names.collect() }
    }
}

/// One recording. `frames[t][m]` is marker `m` at frame `t`; missing samples
/// are NaN until [`interpolate_gaps`] runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub trial_id: String,
    pub subject_id: String,
    pub label: Option<Label>,
    pub sample_rate_hz: f64,
    pub schema: MarkerSchema,
    pub frames: Vec<Vec<Vec3>>,
}

impl Trial {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.frames.len() as f64 / self.sample_rate_hz
    }

    pub fn is_complete(&self) -> bool {
        self.frames.iter().all(|f| f.iter().all(Vec3::is_finite))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub subject_id: String,
    pub label: Option<Label>,
}

impl ManifestRow {
    /// Trial identity is the file stem.
    pub fn trial_id(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn new(rows: Vec<ManifestRow>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &rows {
            if !seen.insert(r.path.clone()) {
                return Err(Error::DuplicatePath(r.path.display().to_string()));
            }
        }
        Ok(Manifest { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.rows.iter().all(|r| r.label.is_some())
    }
}

pub fn parse_label(raw: &str) -> Result<Option<Label>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<u8>() {
        Ok(v) if (1..=MAX_LABEL).contains(&v) => Ok(Some(v)),
        _ => Err(Error::BadLabel { value: raw.to_string() }),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    for (i, want) in ["path", "subject", "label"].iter().enumerate() {
        if headers.get(i) != Some(*want) {
            return Err(Error::MissingColumn {
                path: path.to_path_buf(),
                column: want.to_string(),
            });
        }
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if rec.len() != 3 {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row: i + 1,
                found: rec.len(),
                expected: 3,
            });
        }
        let rel = PathBuf::from(&rec[0]);
        let resolved = if rel.is_absolute() { rel } else { base.join(rel) };
        rows.push(ManifestRow {
            path: resolved,
            subject_id: rec[1].to_string(),
            label: parse_label(&rec[2])?,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyManifest(path.to_path_buf()));
    }
    Manifest::new(rows)
}

/// Writes `manifest` with paths made relative to the manifest's directory
/// where possible.
pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut out = String::from("path,subject,label\n");
    for r in &manifest.rows {
        let p = r.path.strip_prefix(base).unwrap_or(&r.path);
        let label = r.label.map(|l| l.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", p.display(), r.subject_id, label));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Parses a trial file. Columns other than `time` and the schema's
/// `<marker>.X/.Y/.Z` are ignored; an empty cell parses as a missing sample.
pub fn parse_trial_csv(
    path: impl AsRef<Path>,
    schema: &MarkerSchema,
    meta: &ManifestRow,
    sample_rate_hz: f64,
) -> Result<Trial> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let find = |col: &str| headers.iter().position(|h| h.trim() == col);
    let mut columns = Vec::with_capacity(schema.len() * 3);
    for m in schema.names() {
        for axis in AXIS_NAMES {
            let col = format!("{m}.{axis}");
            let idx = find(&col).ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: col.clone(),
            })?;
            columns.push(idx);
        }
    }
    let time_col = find("time");

    let mut frames = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if rec.len() != headers.len() {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row: i + 1,
                found: rec.len(),
                expected: headers.len(),
            });
        }
        let cell = |idx: usize| -> Result<f64> {
            let raw = rec[idx].trim();
            if raw.is_empty() {
                return Ok(f64::NAN);
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::BadNumber {
                    path: path.to_path_buf(),
                    row: i + 1,
                    value: raw.to_string(),
                }),
            }
        };
        if let Some(t) = time_col {
            cell(t)?;
        }
        let mut frame = Vec::with_capacity(schema.len());
        for m in 0..schema.len() {
            frame.push(Vec3::new(
                cell(columns[3 * m])?,
                cell(columns[3 * m + 1])?,
                cell(columns[3 * m + 2])?,
            ));
        }
        frames.push(frame);
    }
    if frames.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(Trial {
        trial_id: meta.trial_id(),
        subject_id: meta.subject_id.clone(),
        label: meta.label,
        sample_rate_hz,
        schema: schema.clone(),
        frames,
    })
}

/// Decimal places used for coordinates when writing trial files.
pub const COORD_PRECISION: usize = 4;

pub fn trial_to_csv(trial: &Trial) -> String {
    let mut out = String::with_capacity(trial.len() * trial.schema.len() * 3 * 12);
    out.push_str("time");
    for m in trial.schema.names() {
        for axis in AXIS_NAMES {
            out.push_str(&format!(",{m}.{axis}"));
        }
    }
    out.push('\n');
    for (t, frame) in trial.frames.iter().enumerate() {
        out.push_str(&format!("{:.4}", t as f64 / trial.sample_rate_hz));
        for p in frame {
            for axis in 0..3 {
                let v = p.axis(axis);
                out.push(',');
                if v.is_finite() {
                    out.push_str(&format!("{:.*}", COORD_PRECISION, v));
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_trial_csv(trial: &Trial, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(trial_to_csv(trial).as_bytes()).map_err(|e| Error::io(path, e))
}

/// Fills missing samples (NaN) in a single coordinate series: interior runs
/// by linear interpolation between the nearest valid neighbours, edge runs by
/// the nearest valid value. Returns the number of filled samples, or `None`
/// if the series has no valid sample at all.
pub fn fill_series(values: &mut [f64]) -> Option<usize> {
    let valid: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_finite()).collect();
    let (&first, &last) = (valid.first()?, valid.last()?);
    let missing = values.len() - valid.len();
    if missing == 0 {
        return Some(0);
    }
    let head = values[first];
    values[..first].iter_mut().for_each(|v| *v = head);
    let tail = values[last];
    values[last + 1..].iter_mut().for_each(|v| *v = tail);
    for w in valid.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a > 1 {
            let (va, vb) = (values[a], values[b]);
            let span = (b - a) as f64;
            for i in a + 1..b {
                let frac = (i - a) as f64 / span;
                values[i] = va + (vb - va) * frac;
            }
        }
    }
    Some(missing)
}

pub const DEFAULT_MAX_MISSING_FRACTION: f64 = 0.2;

pub fn interpolate_gaps(mut trial: Trial, max_missing_fraction: f64) -> Result<Trial> {
    let n = trial.len();
    let mut series = vec![0.0; n];
    for m in 0..trial.schema.len() {
        for axis in 0..3 {
            for (t, frame) in trial.frames.iter().enumerate() {
                series[t] = frame[m].axis(axis);
            }
            let coordinate = || format!("{}.{}", trial.schema.names()[m], AXIS_NAMES[axis]);
            let missing = series.iter().filter(|v| !v.is_finite()).count();
            if missing == 0 {
                continue;
            }
            let fraction = missing as f64 / n as f64;
            if missing == n {
                return Err(Error::AllMissing {
                    trial: trial.trial_id.clone(),
                    coordinate: coordinate(),
                });
            }
            if fraction > max_missing_fraction {
                return Err(Error::TooManyMissing {
                    trial: trial.trial_id.clone(),
                    coordinate: coordinate(),
                    fraction,
                    cap: max_missing_fraction,
                });
            }
            fill_series(&mut series);
            for (t, frame) in trial.frames.iter_mut().enumerate() {
                *frame[m].axis_mut(axis) = series[t];
            }
        }
    }
    Ok(trial)
}

/// Parses, repairs and validates one manifest row.
pub fn load_trial(
    row: &ManifestRow,
    schema: &MarkerSchema,
    sample_rate_hz: f64,
    max_missing_fraction: f64,
) -> Result<Trial> {
    let trial = parse_trial_csv(&row.path, schema, row, sample_rate_hz)?;
    let trial = interpolate_gaps(trial, max_missing_fraction)?;
    if trial.len() < 2 {
        return Err(Error::TooShort { len: trial.len(), min: 2 });
    }
    Ok(trial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn row(path: &Path) -> ManifestRow {
        ManifestRow {
            path: path.to_path_buf(),
            subject_id: "S1".into(),
            label: Some(3),
        }
    }

    fn tiny_trial(frames: usize) -> Trial {
        let schema = MarkerSchema::default();
        let frames = (0..frames)
            .map(|t| {
                (0..schema.len())
                    .map(|m| Vec3::new(t as f64 + m as f64, 2.5 * m as f64, -(t as f64) * 0.125))
                    .collect()
            })
            .collect();
        Trial {
            trial_id: "t".into(),
            subject_id: "S1".into(),
            label: Some(3),
            sample_rate_hz: 100.0,
            schema,
            frames,
        }
    }

    #[test]
    fn manifest_three_rows() {
        let dir = TempDir::new().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "path,subject,label\na.csv,S1,1\nb.csv,S1,10\nsub/c.csv,S2,\n").unwrap();
        let m = load_manifest(&p).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.rows[0].path, dir.path().join("a.csv"));
        assert_eq!(m.rows[2].label, None);
        assert_eq!(m.rows[2].trial_id(), "c");
        assert!(!m.is_labeled());
    }

    #[test]
    fn manifest_errors() {
        let dir = TempDir::new().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "path,subject,label\na.csv,S1,11\n").unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::BadLabel { .. })));
        fs::write(&p, "path,subject,label\na.csv,S1,0\n").unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::BadLabel { .. })));
        fs::write(&p, "path,subject,label\na.csv,S1,1\na.csv,S2,2\n").unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::DuplicatePath(_))));
        fs::write(&p, "path,subject,label\n").unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::EmptyManifest(_))));
        fs::write(&p, "file,subject,label\na.csv,S1,1\n").unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::MissingColumn { .. })));
        let err = load_manifest(dir.path().join("nope.csv")).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn parse_two_frames() {
        let dir = TempDir::new().unwrap();
        let p = dir.path().join("t.csv");
        let trial = tiny_trial(2);
        write_trial_csv(&trial, &p).unwrap();
        let parsed = parse_trial_csv(&p, &trial.schema, &row(&p), 100.0).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed.frames, trial.frames);
        assert_eq!(parsed.label, Some(3));
    }

    #[test]
    fn parse_missing_column_and_empty() {
        let dir = TempDir::new().unwrap();
        let p = dir.path().join("t.csv");
        let text = trial_to_csv(&tiny_trial(2)).replace(",LWrist.Z", ",LWrist.Q");
        fs::write(&p, text).unwrap();
        let schema = MarkerSchema::default();
        match parse_trial_csv(&p, &schema, &row(&p), 100.0) {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "LWrist.Z"),
            other => panic!("unexpected {other:?}"),
        }
        let header = trial_to_csv(&tiny_trial(2)).lines().next().unwrap().to_string();
        fs::write(&p, format!("{header}\n")).unwrap();
        assert!(matches!(parse_trial_csv(&p, &schema, &row(&p), 100.0), Err(Error::EmptyFile(_))));
        fs::write(&p, "").unwrap();
        assert!(matches!(parse_trial_csv(&p, &schema, &row(&p), 100.0), Err(Error::EmptyFile(_))));
    }

    #[test]
    fn parse_ragged_and_missing_cells() {
        let dir = TempDir::new().unwrap();
        let p = dir.path().join("t.csv");
        let schema = MarkerSchema::default();
        let text = trial_to_csv(&tiny_trial(3));
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[2] = lines[2].rsplit_once(',').unwrap().0.to_string();
        fs::write(&p, lines.join("\n")).unwrap();
        assert!(matches!(
            parse_trial_csv(&p, &schema, &row(&p), 100.0),
            Err(Error::RaggedRow { row: 2, .. })
        ));

        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let cells: Vec<&str> = lines[2].split(',').collect();
        let mut cells: Vec<String> = cells.into_iter().map(String::from).collect();
        cells[1].clear();
        lines[2] = cells.join(",");
        fs::write(&p, lines.join("\n")).unwrap();
        let t = parse_trial_csv(&p, &schema, &row(&p), 100.0).unwrap();
        assert!(t.frames[1][0].x.is_nan());
        let repaired = interpolate_gaps(t, 0.5).unwrap();
        assert_eq!(repaired.frames[1][0].x, 1.0);
    }

    #[test]
    fn fill_examples() {
        let nan = f64::NAN;
        let mut a = [1.0, nan, 3.0];
        fill_series(&mut a);
        assert_eq!(a, [1.0, 2.0, 3.0]);
        let mut b = [nan, 5.0, 5.0];
        fill_series(&mut b);
        assert_eq!(b, [5.0, 5.0, 5.0]);
        let mut c = [4.0, 4.0, 4.0];
        assert_eq!(fill_series(&mut c), Some(0));
        assert_eq!(c, [4.0, 4.0, 4.0]);
        let mut d = [nan, 2.0, nan, nan, 8.0, nan];
        assert_eq!(fill_series(&mut d), Some(4));
        assert_eq!(d, [2.0, 2.0, 4.0, 6.0, 8.0, 8.0]);
        let mut e = [nan, nan];
        assert_eq!(fill_series(&mut e), None);
    }

    #[test]
    fn gap_errors() {
        let mut t = tiny_trial(10);
        for f in t.frames.iter_mut().take(3) {
            f[2].y = f64::NAN;
        }
        match interpolate_gaps(t.clone(), 0.2) {
            Err(Error::TooManyMissing { coordinate, .. }) => assert_eq!(coordinate, "LShoulder.Y"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(interpolate_gaps(t.clone(), 0.3).unwrap().is_complete());
        for f in t.frames.iter_mut() {
            f[2].y = f64::NAN;
        }
        assert!(matches!(interpolate_gaps(t, 1.0), Err(Error::AllMissing { .. })));
    }

    #[test]
    fn schema_validation() {
        assert_eq!(MarkerSchema::default().len(), 13);
        assert!(MarkerSchema::new(REQUIRED_MARKERS).is_ok());
        assert!(MarkerSchema::new(["FrontHead"]).is_err());
        let mut dup: Vec<&str> = REQUIRED_MARKERS.to_vec();
        dup.push("LWrist");
        assert!(MarkerSchema::new(dup).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(parse_label("").unwrap(), None);
        assert_eq!(parse_label(" 7 ").unwrap(), Some(7));
        assert!(parse_label("11").is_err());
        assert!(parse_label("x").is_err());
    }
}
