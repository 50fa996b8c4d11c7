//! Derived scalar streams for a segment: marker coordinates and their time
//! derivatives, inter-marker distances, joint angles and planar bone angles
//! together with their angular speeds.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{MarkerSchema, Vec3};
use crate::windowing::Segment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    Position,
    Velocity,
    Acceleration,
    Jerk,
    Distance,
    JointAngle,
    JointAngleSpeed,
    PlanarAngle,
    PlanarAngleSpeed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub name: String,
    pub kind: StreamKind,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    XY,
    YZ,
    ZX,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::XY, Plane::YZ, Plane::ZX];

    /// Index of the coordinate axis orthogonal to the plane.
    fn normal_axis(self) -> usize {
        match self {
            Plane::XY => 2,
            Plane::YZ => 0,
            Plane::ZX => 1,
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plane::XY => "XY",
            Plane::YZ => "YZ",
            Plane::ZX => "ZX",
        })
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "XY" => Ok(Plane::XY),
            "YZ" => Ok(Plane::YZ),
            "ZX" => Ok(Plane::ZX),
            other => Err(Error::BadConfig(format!("unknown plane {other}"))),
        }
    }
}

const POSITION_SUFFIXES: [&str; 4] = ["", ".vel", ".acc", ".jerk"];
const POSITION_KINDS: [StreamKind; 4] = [
    StreamKind::Position,
    StreamKind::Velocity,
    StreamKind::Acceleration,
    StreamKind::Jerk,
];
const AXES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamCatalog {
    pub schema: MarkerSchema,
    /// Number of position derivative orders kept, 1..=4 (position .. jerk).
    pub position_orders: usize,
    /// 1 keeps angles only, 2 adds angular speed.
    pub angle_orders: usize,
    pub distances: Vec<(String, String)>,
    /// `(a, vertex, c)`: angle at the middle marker.
    pub joint_angles: Vec<(String, String, String)>,
    pub bones: Vec<(String, String)>,
    pub planes: Vec<Plane>,
}

fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
    list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

impl Default for StreamCatalog {
    fn default() -> Self {
        StreamCatalog {
            schema: MarkerSchema::default(),
            position_orders: 4,
            angle_orders: 2,
            distances: pairs(&[
                ("LWrist", "LShoulder"),
                ("RWrist", "RShoulder"),
                ("VSacral", "LElbow"),
                ("VSacral", "RElbow"),
                ("FrontHead", "LElbow"),
                ("FrontHead", "RElbow"),
                ("LWrist", "RWrist"),
                ("VSacral", "FrontHead"),
                ("LWrist", "VSacral"),
                ("RWrist", "VSacral"),
            ]),
            joint_angles: [
                ("LShoulder", "LElbow", "LWrist"),
                ("RShoulder", "RElbow", "RWrist"),
                ("LElbow", "LShoulder", "VSacral"),
                ("RElbow", "RShoulder", "VSacral"),
                ("LWrist", "LShoulder", "FrontHead"),
                ("RWrist", "RShoulder", "FrontHead"),
                ("FrontHead", "VSacral", "LShoulder"),
                ("FrontHead", "VSacral", "RShoulder"),
            ]
            .iter()
            .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
            .collect(),
            bones: pairs(&[
                ("LShoulder", "LElbow"),
                ("RShoulder", "RElbow"),
                ("LElbow", "LWrist"),
                ("RElbow", "RWrist"),
                ("VSacral", "FrontHead"),
                ("LShoulder", "RShoulder"),
            ]),
            planes: Plane::ALL.to_vec(),
        }
    }
}

impl StreamCatalog {
    /// Coordinates and their derivatives only.
    pub fn positions_only() -> Self {
        StreamCatalog {
            distances: Vec::new(),
            joint_angles: Vec::new(),
            bones: Vec::new(),
            ..StreamCatalog::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.position_orders) {
            return Err(Error::BadConfig("position_orders must be in 1..=4".into()));
        }
        if !(1..=2).contains(&self.angle_orders) {
            return Err(Error::BadConfig("angle_orders must be in 1..=2".into()));
        }
        for (a, b) in self.distances.iter().chain(&self.bones) {
            self.schema.index_of(a)?;
            self.schema.index_of(b)?;
            if a == b {
                return Err(Error::BadConfig(format!("degenerate pair {a}-{b}")));
            }
        }
        for (a, b, c) in &self.joint_angles {
            for m in [a, b, c] {
                self.schema.index_of(m)?;
            }
            if a == b || b == c || a == c {
                return Err(Error::BadConfig(format!("joint angle markers must be distinct: {a}-{b}-{c}")));
            }
        }
        let names = self.stream_names();
        let unique: std::collections::HashSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::BadConfig("catalog produces duplicate stream names".into()));
        }
        Ok(())
    }

    pub fn stream_count(&self) -> usize {
        self.schema.len() * 3 * self.position_orders
            + self.distances.len()
            + self.joint_angles.len() * self.angle_orders
            + self.bones.len() * self.planes.len() * self.angle_orders
    }

    /// Stream names in emission order.
    pub fn stream_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.stream_count());
        for m in self.schema.names() {
            for axis in AXES {
                for suffix in &POSITION_SUFFIXES[..self.position_orders] {
                    names.push(format!("{m}.{axis}{suffix}"));
                }
            }
        }
        for (a, b) in &self.distances {
            names.push(format!("dist.{a}-{b}"));
        }
        for (a, b, c) in &self.joint_angles {
            names.push(format!("jang.{a}-{b}-{c}"));
            if self.angle_orders > 1 {
                names.push(format!("jang.{a}-{b}-{c}.spd"));
            }
        }
        for (a, b) in &self.bones {
            for plane in &self.planes {
                names.push(format!("pang.{a}-{b}.{plane}"));
                if self.angle_orders > 1 {
                    names.push(format!("pang.{a}-{b}.{plane}.spd"));
                }
            }
        }
        names
    }

    /// Parses the line-oriented catalog format:
    ///
    /// ```text
    /// # comment
    /// markers FrontHead VSacral LShoulder ...
    /// position_orders 4
    /// angle_orders 2
    /// distance LWrist LShoulder
    /// joint_angle LShoulder LElbow LWrist
    /// bone LShoulder LElbow
    /// planes XY YZ ZX
    /// ```
    ///
    /// Family lines replace the default family entirely once any line of that
    /// family appears.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cat = StreamCatalog::default();
        let (mut distances, mut angles, mut bones) = (None::<Vec<_>>, None::<Vec<_>>, None::<Vec<_>>);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::BadConfig(format!("catalog line {}: {raw:?}", lineno + 1));
            match (words[0], words.len()) {
                ("markers", n) if n > 1 => cat.schema = MarkerSchema::new(words[1..].iter().copied())?,
                ("position_orders", 2) => cat.position_orders = words[1].parse().map_err(|_| bad())?,
                ("angle_orders", 2) => cat.angle_orders = words[1].parse().map_err(|_| bad())?,
                ("distance", 3) => distances
                    .get_or_insert_with(Vec::new)
                    .push((words[1].to_string(), words[2].to_string())),
                ("joint_angle", 4) => angles.get_or_insert_with(Vec::new).push((
                    words[1].to_string(),
                    words[2].to_string(),
                    words[3].to_string(),
                )),
                ("bone", 3) => bones
                    .get_or_insert_with(Vec::new)
                    .push((words[1].to_string(), words[2].to_string())),
                ("planes", _) => {
                    cat.planes = words[1..].iter().map(|w| w.parse()).collect::<Result<_>>()?
                }
                ("no_distances", 1) => distances = Some(Vec::new()),
                ("no_joint_angles", 1) => angles = Some(Vec::new()),
                ("no_bones", 1) => bones = Some(Vec::new()),
                _ => return Err(bad()),
            }
        }
        if let Some(d) = distances {
            cat.distances = d;
        }
        if let Some(a) = angles {
            cat.joint_angles = a;
        }
        if let Some(b) = bones {
            cat.bones = b;
        }
        cat.validate()?;
        Ok(cat)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Forward difference scaled by the sample rate; the last sample repeats the
/// previous difference so the length is preserved.
pub fn differentiate_samples(samples: &[f64], fs: f64) -> Result<Vec<f64>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooShort { len: n, min: 2 });
    }
    let mut out: Vec<f64> = samples.windows(2).map(|w| (w[1] - w[0]) * fs).collect();
    out.push(out[n - 2]);
    Ok(out)
}

pub fn differentiate(s: &Stream, fs: f64) -> Result<Stream> {
    let (suffix, kind) = match s.kind {
        StreamKind::Position => (".vel", StreamKind::Velocity),
        StreamKind::Velocity => (".acc", StreamKind::Acceleration),
        StreamKind::Acceleration => (".jerk", StreamKind::Jerk),
        StreamKind::JointAngle => (".spd", StreamKind::JointAngleSpeed),
        StreamKind::PlanarAngle => (".spd", StreamKind::PlanarAngleSpeed),
        other => (".d", other),
    };
    let base = [".vel", ".acc"]
        .iter()
        .find_map(|d| s.name.strip_suffix(d))
        .unwrap_or(&s.name);
    Ok(Stream {
        name: format!("{base}{suffix}"),
        kind,
        samples: differentiate_samples(&s.samples, fs)?,
    })
}

/// Euclidean norm of the per-frame difference vector.
pub fn distance_series(a: &[Vec3], b: &[Vec3]) -> Vec<f64> {
    a.iter().zip(b).map(|(&p, &q)| p.sub(q).norm()).collect()
}

/// Replaces NaN angles (degenerate frames) with the previous value, or 0.
fn hold_degenerate(angles: &mut [f64]) {
    let mut prev = 0.0;
    for v in angles.iter_mut() {
        if v.is_nan() {
            *v = prev;
        } else {
            prev = *v;
        }
    }
}

/// Angle at `vertex` between the rays to `a` and `c`, in `[0, π]`.
pub fn joint_angle_series(a: &[Vec3], vertex: &[Vec3], c: &[Vec3]) -> Vec<f64> {
    let mut out: Vec<f64> = a
        .iter()
        .zip(vertex)
        .zip(c)
        .map(|((&pa, &pb), &pc)| {
            let v1 = pa.sub(pb);
            let v2 = pc.sub(pb);
            let (n1, n2) = (v1.norm(), v2.norm());
            if n1 == 0.0 || n2 == 0.0 {
                return f64::NAN;
            }
            let cos = v1.scale(1.0 / n1).dot(v2.scale(1.0 / n2));
            cos.clamp(-1.0, 1.0).acos()
        })
        .collect();
    hold_degenerate(&mut out);
    out
}

/// Elevation of the bone `from -> to` out of `plane`, in `[0, π/2]`.
pub fn planar_angle_series(from: &[Vec3], to: &[Vec3], plane: Plane) -> Vec<f64> {
    let normal = plane.normal_axis();
    let mut out: Vec<f64> = from
        .iter()
        .zip(to)
        .map(|(&p, &q)| {
            let v = q.sub(p);
            let len = v.norm();
            if len == 0.0 {
                return f64::NAN;
            }
            let mut proj = v;
            *proj.axis_mut(normal) = 0.0;
            (proj.norm() / len).clamp(-1.0, 1.0).acos()
        })
        .collect();
    hold_degenerate(&mut out);
    out
}

/// Per-marker trajectories of a segment, indexed like the schema.
fn trajectories(segment: &Segment) -> Vec<Vec<Vec3>> {
    let m = segment.trial.schema.len();
    let mut out = vec![Vec::with_capacity(segment.len()); m];
    for frame in segment.frames() {
        for (i, p) in frame.iter().enumerate() {
            out[i].push(*p);
        }
    }
    out
}

fn marker<'a>(segment: &Segment, traj: &'a [Vec<Vec3>], name: &str) -> Result<&'a [Vec3]> {
    Ok(&traj[segment.trial.schema.index_of(name)?])
}

pub fn distance_stream(a: &str, b: &str, segment: &Segment) -> Result<Stream> {
    let traj = trajectories(segment);
    Ok(Stream {
        name: format!("dist.{a}-{b}"),
        kind: StreamKind::Distance,
        samples: distance_series(marker(segment, &traj, a)?, marker(segment, &traj, b)?),
    })
}

pub fn joint_angle_stream(a: &str, vertex: &str, c: &str, segment: &Segment) -> Result<Stream> {
    let traj = trajectories(segment);
    Ok(Stream {
        name: format!("jang.{a}-{vertex}-{c}"),
        kind: StreamKind::JointAngle,
        samples: joint_angle_series(
            marker(segment, &traj, a)?,
            marker(segment, &traj, vertex)?,
            marker(segment, &traj, c)?,
        ),
    })
}

pub fn planar_angle_stream(bone: (&str, &str), plane: Plane, segment: &Segment) -> Result<Stream> {
    let traj = trajectories(segment);
    Ok(Stream {
        name: format!("pang.{}-{}.{plane}", bone.0, bone.1),
        kind: StreamKind::PlanarAngle,
        samples: planar_angle_series(
            marker(segment, &traj, bone.0)?,
            marker(segment, &traj, bone.1)?,
            plane,
        ),
    })
}

fn push_with_derivatives(
    out: &mut Vec<Stream>,
    base: Stream,
    orders: usize,
    fs: f64,
) -> Result<()> {
    let mut current = base;
    for order in 0..orders {
        let next = if order + 1 < orders {
            Some(differentiate(&current, fs)?)
        } else {
            None
        };
        out.push(current);
        match next {
            Some(n) => current = n,
            None => break,
        }
    }
    Ok(())
}

/// Emits the full catalog for one segment, in [`StreamCatalog::stream_names`] order.
pub fn synthesize_streams(segment: &Segment, catalog: &StreamCatalog, fs: f64) -> Result<Vec<Stream>> {
    let traj = trajectories(segment);
    let mut out = Vec::with_capacity(catalog.stream_count());
    let schema = &segment.trial.schema;
    for name in catalog.schema.names() {
        let series = &traj[schema.index_of(name)?];
        for (axis, axis_name) in AXES.iter().enumerate() {
            let base = Stream {
                name: format!("{name}.{axis_name}"),
                kind: POSITION_KINDS[0],
                samples: series.iter().map(|p| p.axis(axis)).collect(),
            };
            push_with_derivatives(&mut out, base, catalog.position_orders, fs)?;
        }
    }
    for (a, b) in &catalog.distances {
        out.push(Stream {
            name: format!("dist.{a}-{b}"),
            kind: StreamKind::Distance,
            samples: distance_series(marker(segment, &traj, a)?, marker(segment, &traj, b)?),
        });
    }
    for (a, v, c) in &catalog.joint_angles {
        let base = Stream {
            name: format!("jang.{a}-{v}-{c}"),
            kind: StreamKind::JointAngle,
            samples: joint_angle_series(
                marker(segment, &traj, a)?,
                marker(segment, &traj, v)?,
                marker(segment, &traj, c)?,
            ),
        };
        push_with_derivatives(&mut out, base, catalog.angle_orders, fs)?;
    }
    for (a, b) in &catalog.bones {
        for &plane in &catalog.planes {
            let base = Stream {
                name: format!("pang.{a}-{b}.{plane}"),
                kind: StreamKind::PlanarAngle,
                samples: planar_angle_series(marker(segment, &traj, a)?, marker(segment, &traj, b)?, plane),
            };
            push_with_derivatives(&mut out, base, catalog.angle_orders, fs)?;
        }
    }
    Ok(out)
}

/// Debug dump: one column per stream, one row per frame.
pub fn write_streams_csv(streams: &[Stream], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(streams.iter().map(|s| s.name.as_str()))
        .map_err(|e| Error::csv(path, e))?;
    let n = streams.first().map_or(0, |s| s.samples.len());
    for t in 0..n {
        w.write_record(streams.iter().map(|s| s.samples[t].to_string()))
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Trial;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    use std::sync::Arc;

    fn segment_with(points: &[(&str, Vec3)], n: usize) -> Segment {
        let schema = MarkerSchema::default();
        let mut frame = vec![Vec3::new(1.0, 2.0, 3.0); schema.len()];
        for (i, f) in frame.iter_mut().enumerate() {
            *f = Vec3::new(i as f64, 10.0 + i as f64, -(i as f64));
        }
        for (name, p) in points {
            frame[schema.index_of(name).unwrap()] = *p;
        }
        let trial = Trial {
            trial_id: "t".into(),
            subject_id: "S1".into(),
            label: Some(1),
            sample_rate_hz: 100.0,
            schema,
            frames: vec![frame; n],
        };
        Segment { trial: Arc::new(trial), start_frame: 0, length_frames: n }
    }

    #[test]
    fn default_catalog_has_218_streams() {
        let cat = StreamCatalog::default();
        cat.validate().unwrap();
        assert_eq!(cat.stream_count(), 218);
        let seg = segment_with(&[], 8);
        let streams = synthesize_streams(&seg, &cat, 100.0).unwrap();
        assert_eq!(streams.len(), 218);
        let names: Vec<String> = streams.iter().map(|s| s.name.clone()).collect();
        assert_eq!(names, cat.stream_names());
        assert!(streams.iter().all(|s| s.samples.len() == 8));
        assert_eq!(StreamCatalog::positions_only().stream_count(), 156);
        let only = synthesize_streams(&seg, &StreamCatalog::positions_only(), 100.0).unwrap();
        assert_eq!(only.len(), 156);
    }

    #[test]
    fn differentiate_examples() {
        assert_eq!(differentiate_samples(&[5.0, 5.0, 5.0], 100.0).unwrap(), vec![0.0; 3]);
        let ramp: Vec<f64> = (0..10).map(|t| 0.5 * t as f64).collect();
        assert_eq!(differentiate_samples(&ramp, 4.0).unwrap(), vec![2.0; 10]);
        assert!(matches!(differentiate_samples(&[1.0], 100.0), Err(Error::TooShort { .. })));
        let s = Stream { name: "a.x".into(), kind: StreamKind::Position, samples: ramp };
        let d = differentiate(&s, 4.0).unwrap();
        assert_eq!((d.name.as_str(), d.kind), ("a.x.vel", StreamKind::Velocity));
    }

    #[test]
    fn distance_examples() {
        let o = Vec3::default();
        let seg = segment_with(&[("LWrist", Vec3::new(1.0, 2.0, 2.0)), ("RWrist", o)], 3);
        assert_eq!(distance_stream("LWrist", "RWrist", &seg).unwrap().samples, vec![3.0; 3]);
        let seg = segment_with(&[("LWrist", o), ("RWrist", o)], 3);
        assert_eq!(distance_stream("LWrist", "RWrist", &seg).unwrap().samples, vec![0.0; 3]);
        let seg = segment_with(&[("LWrist", Vec3::new(1.0, 0.0, 0.0)), ("RWrist", o)], 3);
        assert_eq!(distance_stream("LWrist", "RWrist", &seg).unwrap().samples, vec![1.0; 3]);
        assert!(matches!(distance_stream("Nose", "RWrist", &seg), Err(Error::UnknownMarker(_))));
    }

    #[test]
    fn joint_angle_examples() {
        let o = Vec3::default();
        let x = Vec3::new(1.0, 0.0, 0.0);
        let cases = [
            (Vec3::new(0.0, 1.0, 0.0), FRAC_PI_2),
            (Vec3::new(2.0, 0.0, 0.0), 0.0),
            (Vec3::new(-1.0, 0.0, 0.0), PI),
        ];
        for (c, want) in cases {
            let seg = segment_with(&[("LShoulder", x), ("LElbow", o), ("LWrist", c)], 2);
            let s = joint_angle_stream("LShoulder", "LElbow", "LWrist", &seg).unwrap();
            for v in s.samples {
                assert!((v - want).abs() < 1e-9, "{v} vs {want}");
            }
        }
    }

    #[test]
    fn degenerate_angle_holds_previous() {
        let o = Vec3::default();
        let a = [Vec3::new(1.0, 0.0, 0.0), o, Vec3::new(0.0, 1.0, 0.0)];
        let c = [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        let v = [o, o, o];
        assert_eq!(joint_angle_series(&a, &v, &c), vec![FRAC_PI_2, FRAC_PI_2, 0.0]);
        assert_eq!(joint_angle_series(&[o], &[o], &[o]), vec![0.0]);
        assert_eq!(planar_angle_series(&[o], &[o], Plane::XY), vec![0.0]);
    }

    #[test]
    fn planar_angle_examples() {
        let o = Vec3::default();
        let cases = [
            (Vec3::new(1.0, 0.0, 0.0), 0.0),
            (Vec3::new(0.0, 0.0, 1.0), FRAC_PI_2),
            (Vec3::new(1.0, 0.0, 1.0), FRAC_PI_4),
        ];
        for (to, want) in cases {
            let seg = segment_with(&[("LShoulder", o), ("LElbow", to)], 2);
            let s = planar_angle_stream(("LShoulder", "LElbow"), Plane::XY, &seg).unwrap();
            assert!((s.samples[0] - want).abs() < 1e-9);
            assert_eq!(s.name, "pang.LShoulder-LElbow.XY");
        }
        assert!((planar_angle_series(&[o], &[Vec3::new(1.0, 0.0, 0.0)], Plane::YZ)[0] - FRAC_PI_2).abs() < 1e-12);
        assert!((planar_angle_series(&[o], &[Vec3::new(0.0, 1.0, 0.0)], Plane::ZX)[0] - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn catalog_parse() {
        let text = "# minimal\nposition_orders 2\nangle_orders 1\ndistance LWrist RWrist\nno_joint_angles\nbone LElbow LWrist\nplanes XY\n";
        let cat = StreamCatalog::parse(text).unwrap();
        assert_eq!(cat.stream_count(), 13 * 3 * 2 + 1 + 1);
        assert!(StreamCatalog::parse("distance LWrist Nose\n").is_err());
        assert!(StreamCatalog::parse("bogus line\n").is_err());
        assert!(StreamCatalog::parse("position_orders 5\n").is_err());
        assert_eq!(StreamCatalog::parse("").unwrap(), StreamCatalog::default());
    }
}
