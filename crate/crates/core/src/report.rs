//! CSV and SVG renderings of analysis results.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::evaluate::{Method, RmsCell, SummaryStats};
use crate::geo::GeoCoord;
use crate::ingest::Variable;
use crate::pattern::{cluster_verdict, CoverageReport, LFunctionResult};
use crate::scalar::Scalar;

pub const LFUNCTION_HEADER: [&str; 5] = [
    "distance_km",
    "l_observed",
    "envelope_low",
    "envelope_high",
    "verdict",
];
pub const PREDICTION_HEADER: [&str; 7] = [
    "target_id",
    "lat",
    "lon",
    "method",
    "variable",
    "timestamp",
    "predicted_value",
];
pub const RMS_HEADER: [&str; 5] = ["method", "variable", "timestamp", "rms", "optimized_param"];
pub const SUMMARY_HEADER: [&str; 6] = [
    "variable",
    "timestamp",
    "count",
    "mean",
    "std_dev",
    "cv_percent",
];

fn csv_err(e: csv::Error) -> Error {
    Error::input(format!("failed to write CSV: {e}"))
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()
        .map_err(|e| Error::input(format!("failed to write CSV: {e}")))
}

pub fn write_lfunction<T: Scalar>(out: impl Write, result: &LFunctionResult<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LFUNCTION_HEADER).map_err(csv_err)?;
    for (k, verdict) in cluster_verdict(result).into_iter().enumerate() {
        w.write_record([
            result.distances[k].to_string(),
            result.l_observed[k].to_string(),
            result.envelope_low[k].to_string(),
            result.envelope_high[k].to_string(),
            verdict.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// One interpolated value destined for the prediction table.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub target_id: String,
    pub location: GeoCoord<T>,
    pub method: Method,
    pub variable: Variable,
    pub timestamp: String,
    pub value: T,
}

pub fn write_predictions<T: Scalar>(out: impl Write, rows: &[Prediction<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PREDICTION_HEADER).map_err(csv_err)?;
    for p in rows {
        w.write_record([
            p.target_id.clone(),
            p.location.lat().to_string(),
            p.location.lon().to_string(),
            p.method.to_string(),
            p.variable.to_string(),
            p.timestamp.clone(),
            p.value.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn write_rms_table<T: Scalar>(out: impl Write, cells: &[RmsCell<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RMS_HEADER).map_err(csv_err)?;
    for c in cells {
        w.write_record([
            c.method.to_string(),
            c.variable.to_string(),
            c.timestamp.clone(),
            c.rms.to_string(),
            c.optimized_param.map(|p| p.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// CV% is printed as a whole percent; undefined CV is an empty field.
pub fn write_summary<T: Scalar>(out: impl Write, rows: &[SummaryStats<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for s in rows {
        w.write_record([
            s.variable.to_string(),
            s.timestamp.clone(),
            s.count.to_string(),
            s.mean.to_string(),
            s.std_dev.to_string(),
            s.cv_percent
                .map(|c| format!("{}", c.round()))
                .unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn write_coverage<T: Scalar>(out: impl Write, report: &CoverageReport<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "label".to_string(),
        "count_total".into(),
        "mean_nn_km".into(),
    ];
    header.extend(report.region_names.iter().map(|n| format!("in:{n}")));
    header.push("count_in_regions".into());
    header.push("regional_ratio".into());
    w.write_record(&header).map_err(csv_err)?;
    for row in &report.rows {
        let mut rec = vec![
            row.label.clone(),
            row.count_total.to_string(),
            row.mean_nn_km.to_string(),
        ];
        rec.extend(row.counts_per_region.iter().map(usize::to_string));
        rec.push(row.count_in_regions.to_string());
        rec.push(
            row.regional_ratio
                .map(|r| r.to_string())
                .unwrap_or_default(),
        );
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

/// Line chart of the observed L function over its simulation envelope band.
pub fn lfunction_svg<T: Scalar>(result: &LFunctionResult<T>, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 60.0;

    let f = |v: T| v.to_f64().unwrap_or(0.0);
    let xs: Vec<f64> = result.distances.iter().map(|&d| f(d)).collect();
    let x_max = xs
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let y_max = result
        .l_observed
        .iter()
        .chain(&result.envelope_high)
        .map(|&v| f(v))
        .fold(x_max, f64::max);
    let px = |x: f64| LEFT + x / x_max * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - y / y_max * (H - TOP - BOTTOM);
    let path = |vals: &[T]| {
        xs.iter()
            .zip(vals)
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(f(y))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );

    let band: Vec<String> = xs
        .iter()
        .zip(&result.envelope_high)
        .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(f(y))))
        .chain(
            xs.iter()
                .zip(&result.envelope_low)
                .rev()
                .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(f(y)))),
        )
        .collect();
    let _ = writeln!(
        svg,
        r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##,
        band.join(" ")
    );
    // CSR expectation L(d) = d
    let _ = writeln!(
        svg,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#3182bd" stroke-dasharray="4 3"/>"##,
        px(0.0),
        py(0.0),
        px(x_max),
        py(x_max.min(y_max))
    );
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#de2d26" stroke-width="2"/>"##,
        path(&result.l_observed)
    );

    // axes with five ticks each
    let (x0, y0) = (px(0.0), py(0.0));
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black"/>"#,
        px(x_max)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{:.2}" stroke="black"/>"#,
        py(y_max)
    );
    for i in 0..=5 {
        let xv = x_max * i as f64 / 5.0;
        let yv = y_max * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.1}</text>"#,
            px(xv),
            y0 + 18.0,
            xv
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.1}</text>"#,
            x0 - 6.0,
            py(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">distance (km)</text>"#,
        (px(0.0) + px(x_max)) / 2.0,
        H - 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">L(d) (km)</text>"#,
        (py(0.0) + py(y_max)) / 2.0,
        (py(0.0) + py(y_max)) / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result() -> LFunctionResult<f64> {
        LFunctionResult {
            distances: vec![1.0, 2.0],
            l_observed: vec![1.5, 2.0],
            envelope_low: vec![0.9, 1.8],
            envelope_high: vec![1.1, 2.2],
            n_simulations: 9,
            seed: 42,
        }
    }

    #[test]
    fn lfunction_csv_layout() {
        let mut out = Vec::new();
        write_lfunction(&mut out, &result()).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "distance_km,l_observed,envelope_low,envelope_high,verdict\n1,1.5,0.9,1.1,Clustered\n2,2,1.8,2.2,Random\n"
        );
    }

    #[test]
    fn summary_cv_formatting() {
        let rows = vec![
            SummaryStats {
                variable: Variable::WindSpeed,
                timestamp: "t".into(),
                count: 80,
                mean: 4.912,
                std_dev: 6.419,
                cv_percent: Some(100.0 * 6.419 / 4.912),
            },
            SummaryStats {
                variable: Variable::AirTemp,
                timestamp: "t".into(),
                count: 80,
                mean: -1.921,
                std_dev: 5.195,
                cv_percent: None,
            },
        ];
        let mut out = Vec::new();
        write_summary(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[1], "wind_speed_kmh,t,80,4.912,6.419,131");
        assert_eq!(lines[2], "air_temp_C,t,80,-1.921,5.195,");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = lfunction_svg(&result(), "RWIS <stations>");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("polyline") && svg.contains("distance (km)"));
        assert!(svg.contains("RWIS &lt;stations&gt;"));
    }
}
