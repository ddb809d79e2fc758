//! Result writers: fixed-column CSV, canonical JSON, SVG convergence plots
//! and the timestamped sidecar.
//!
//! Every float is written as C `%.12e` (`-2.599122700000e+01`), so payloads
//! are byte-stable across reruns; wall-clock data lives in the sidecar.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::asymptotics::leading_target;
use crate::Result;

pub const CSV_HEADER: &str = "eps,a,j,mode,E,residual,dof,wall_ms";

/// C-style `%.12e`: two-digit signed exponent, `nan`/`inf` spelled out.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_e(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with sorted keys and `%.12e` floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    // through Value so map keys come out sorted
    let value = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Hex SHA-256 of the canonical JSON of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let digest = Sha256::digest(to_json_string(value)?.as_bytes());
    Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

/// One line of the result table; `None` fields are left empty in CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub eps: Option<f64>,
    pub a: Option<f64>,
    pub j: usize,
    pub mode: String,
    #[serde(rename = "E")]
    pub e: Option<f64>,
    pub residual: Option<f64>,
    pub dof: usize,
    pub wall_ms: f64,
    pub config_hash: String,
    pub mesh: String,
    pub solver: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn csv_string(rows: &[Row]) -> String {
    let opt = |v: Option<f64>| v.map(fmt_e).unwrap_or_default();
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            opt(r.eps),
            opt(r.a),
            r.j,
            r.mode,
            opt(r.e),
            opt(r.residual),
            r.dof,
            fmt_e(r.wall_ms)
        );
    }
    s
}

/// Series of `E_j(ε)` for one index, drawn as `E·ε²` against ε.
pub struct PlotSeries {
    pub j: usize,
    pub points: Vec<(f64, f64)>,
}

/// Static plot of `E·ε²` vs ε with the leading-order target of each index
/// as a dashed line.
pub fn svg_plot(title: &str, n_omega: f64, n: usize, series: &[PlotSeries]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 80.0;
    const R: f64 = 130.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

    let targets: Vec<f64> = series.iter().map(|s| -leading_target(n_omega, n, s.j)).collect();
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|s| s.points.iter().map(|&(e, v)| v * e * e)).chain(targets.iter().copied());
    let (x0, x1) = xs.fold((0.0f64, f64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let (mut y0, mut y1) = ys.fold((f64::MAX, f64::MIN), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let x1 = if x1 > x0 { x1 * 1.05 } else { 1.0 };
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.08 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| T + (y1 - y) / (y1 - y0) * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - T - B
    );
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x:.3}</text>"#, px(x), H - B + 18.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.3}</text>"#, L - 6.0, py(y) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">ε</text>"#, L + (W - L - R) / 2.0, H - 10.0);
    let _ = writeln!(s, r#"<text x="18" y="{:.1}" transform="rotate(-90 18 {:.1})" text-anchor="middle">E·ε²</text>"#, H / 2.0, H / 2.0);
    for (i, (series, target)) in series.iter().zip(&targets).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{L}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-dasharray="6 4"/>"#,
            W - R,
            y = py(*target)
        );
        let pts: Vec<String> =
            series.points.iter().map(|&(e, v)| format!("{:.1},{:.1}", px(e), py(v * e * e))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, pts.join(" "));
        for &(e, v) in &series.points {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, px(e), py(v * e * e));
        }
        let ly = T + 16.0 + 34.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">E{}·ε²</text>"#, W - R + 10.0, series.j);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" fill="{color}">target {target:.4}</text>"#, W - R + 10.0, ly + 14.0);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `<stem>.<ext>` next to the requested output path.
pub fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut name = stem.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(ext);
    stem.with_file_name(name)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(fmt_e(-25.991227), "-2.599122700000e+01");
        assert_eq!(fmt_e(1e-300), "1.000000000000e-300");
        assert_eq!(fmt_e(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e(f64::NAN), "nan");
        assert_eq!(fmt_e(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn json_floats_and_key_order() {
        let v = serde_json::json!({"b": 1.5, "a": [2, -0.25], "c": null});
        assert_eq!(to_json_string(&v).unwrap(), r#"{"a":[2,-2.500000000000e-01],"b":1.500000000000e+00,"c":null}"#);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&serde_json::json!({"eps": 0.2})).unwrap();
        assert_eq!(a.len(), 64);
        assert_eq!(a, config_hash(&serde_json::json!({"eps": 0.2})).unwrap());
        assert_ne!(a, config_hash(&serde_json::json!({"eps": 0.1})).unwrap());
    }

    #[test]
    fn csv_leaves_missing_fields_empty() {
        let row = Row {
            eps: None,
            a: None,
            j: 2,
            mode: "full".into(),
            e: Some(-1.0),
            residual: None,
            dof: 7,
            wall_ms: 0.0,
            config_hash: String::new(),
            mesh: String::new(),
            solver: Value::Null,
            error: None,
        };
        assert_eq!(csv_string(&[row]), format!("{CSV_HEADER}\n,,2,full,-1.000000000000e+00,,7,0.000000000000e+00\n"));
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(with_ext(Path::new("out/cone"), "meta.json"), PathBuf::from("out/cone.meta.json"));
    }
}
