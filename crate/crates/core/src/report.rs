//! CSV writers for posterior results and SVG figures: Pareto fronts with
//! overlays and zone bands, paired boxplots, and Sobol bar charts.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::moo::{Formulation, ParetoArchive};
use crate::objective::ObjectiveInfo;
use crate::robust::{PosteriorRecord, Zone, ZonePair};
use crate::sampling::{csv_err, fmt_f64};
use crate::sensitivity::SobolResult;
use crate::space::DesignSpace;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

pub fn formulation_color(f: Formulation) -> &'static str {
    match f {
        Formulation::Deterministic => "#1f77b4",
        Formulation::Expectation => "#d62728",
        Formulation::WorstCase => "#2ca02c",
    }
}

const STAT_NAMES: [&str; 8] = ["min", "q1", "q2", "q3", "max", "mean", "std", "worst_case"];

/// One row per design: index, native variables, then per objective the
/// natural `min, q1, q2, q3, max, mean, std, worst_case`, then `error`.
pub fn write_posterior_csv<W: Write>(
    w: W,
    records: &[PosteriorRecord],
    space: &DesignSpace,
    infos: &[ObjectiveInfo],
) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["design".to_string()];
    header.extend(space.names());
    for info in infos {
        header.extend(STAT_NAMES.iter().map(|s| format!("{}_{s}", info.name)));
    }
    header.push("error".into());
    wr.write_record(&header).map_err(csv_err)?;
    for (i, r) in records.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(space.denormalize(&r.x).into_iter().map(fmt_f64));
        match &r.stats {
            Some(s) => {
                for o in s.natural(infos) {
                    let m = o.summary;
                    rec.extend([m.min, m.q1, m.q2, m.q3, m.max, m.mean, m.std].map(fmt_f64));
                    rec.push(o.worst_case.map(fmt_f64).unwrap_or_default());
                }
            }
            None => rec.extend(std::iter::repeat(String::new()).take(STAT_NAMES.len() * infos.len())),
        }
        rec.push(r.error.clone().unwrap_or_default());
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// One row per zone and side with the matched design's natural statistics.
pub fn write_zones_csv<W: Write>(w: W, pairs: &[ZonePair], labels: [&str; 2], infos: &[ObjectiveInfo]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["zone", "target", "tol", "front", "design", "key"].map(String::from).to_vec();
    for info in infos {
        header.extend(STAT_NAMES.iter().map(|s| format!("{}_{s}", info.name)));
    }
    for info in infos {
        header.extend(["mean", "std", "q3", "worst_case"].map(|s| format!("delta_{}_{s}", info.name)));
    }
    wr.write_record(&header).map_err(csv_err)?;
    for p in pairs {
        for (side, m) in [(labels[0], &p.a), (labels[1], &p.b)] {
            let mut rec = vec![p.zone.name.clone(), fmt_f64(p.zone.target), fmt_f64(p.zone.tol), side.to_string()];
            match m {
                Some(m) => {
                    rec.push(m.index.to_string());
                    rec.push(fmt_f64(m.key));
                    for o in &m.stats {
                        let s = o.summary;
                        rec.extend([s.min, s.q1, s.q2, s.q3, s.max, s.mean, s.std].map(fmt_f64));
                        rec.push(o.worst_case.map(fmt_f64).unwrap_or_default());
                    }
                }
                None => {
                    rec.push("unmatched".into());
                    rec.push(String::new());
                    rec.extend(std::iter::repeat(String::new()).take(STAT_NAMES.len() * infos.len()));
                }
            }
            match &p.deltas {
                Some(ds) => {
                    for d in ds {
                        rec.extend([d.mean, d.std, d.q3].map(fmt_f64));
                        rec.push(d.worst_case.map(fmt_f64).unwrap_or_default());
                    }
                }
                None => rec.extend(std::iter::repeat(String::new()).take(4 * infos.len())),
            }
            wr.write_record(&rec).map_err(csv_err)?;
        }
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Affine map from data to pixels with a little padding.
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(mut lo: f64, mut hi: f64, p0: f64, p1: f64) -> Self {
        if !(lo.is_finite() && hi.is_finite()) {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= 1e-12 * lo.abs().max(1.0) {
            let pad = 0.5 * lo.abs().max(1.0) * 1e-3;
            (lo, hi) = (lo - pad, hi + pad);
        }
        let pad = 0.05 * (hi - lo);
        Scale {
            d0: lo - pad,
            d1: hi + pad,
            p0,
            p1,
        }
    }

    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }

    fn ticks(&self) -> Vec<f64> {
        let span = self.d1 - self.d0;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut t = (self.d0 / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.d1 + 1e-9 * step {
            out.push(t);
            t += step;
        }
        out
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    }
}

fn open_svg(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        esc(title)
    );
}

fn axes(out: &mut String, xs: Option<&Scale>, ys: &Scale, xlabel: &str, ylabel: &str) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(out, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(out, "</g>");
    if let Some(xs) = xs {
        for t in xs.ticks() {
            let x = xs.at(t);
            let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y0 + 18.0,
                tick_label(t)
            );
        }
    }
    for t in ys.ticks() {
        let y = ys.at(t);
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        esc(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(ylabel)
    );
}

fn legend(out: &mut String, entries: &[(String, String)]) {
    let x = WIDTH - MARGIN_R + 15.0;
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN_T + 10.0 + 20.0 * i as f64;
        let _ = writeln!(out, r#"<rect x="{x}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, y - 9.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, x + 15.0, esc(label));
    }
    let _ = writeln!(out, "</g>");
}

/// An extra point series drawn over the fronts, in natural objective values.
#[derive(Clone, Debug)]
pub struct Overlay {
    pub label: String,
    pub color: String,
    pub points: Vec<[f64; 2]>,
}

/// Scatter of each archive (objective 0 on x, objective 1 on y, natural
/// values), overlay series drawn hollow, and shaded vertical zone bands.
pub fn emit_front_svg(archives: &[&ParetoArchive], overlays: &[Overlay], zones: &[Zone], title: &str) -> Result<String> {
    let first = archives.first().ok_or_else(|| Error::invalid("front figure needs at least one archive"))?;
    let infos = first.infos();
    if infos.len() < 2 {
        return Err(Error::invalid("front figure needs two objectives"));
    }
    for a in archives {
        let names: Vec<&str> = a.infos().iter().map(|i| i.name.as_str()).collect();
        let want: Vec<&str> = infos.iter().map(|i| i.name.as_str()).collect();
        if names != want {
            return Err(Error::invalid(format!("objective names differ: {names:?} vs {want:?}")));
        }
    }
    let mut series: Vec<(String, String, Vec<[f64; 2]>, bool)> = archives
        .iter()
        .map(|a| {
            let (x, y) = (a.natural_column(0), a.natural_column(1));
            let f = a.formulation();
            (f.name().to_string(), formulation_color(f).to_string(), x.into_iter().zip(y).map(|(a, b)| [a, b]).collect(), false)
        })
        .collect();
    series.extend(overlays.iter().map(|o| (o.label.clone(), o.color.clone(), o.points.clone(), true)));

    let all = series.iter().flat_map(|s| s.2.iter());
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        xlo = xlo.min(p[0]);
        xhi = xhi.max(p[0]);
        ylo = ylo.min(p[1]);
        yhi = yhi.max(p[1]);
    }
    for z in zones.iter().filter(|z| !z.is_all()) {
        xlo = xlo.min(z.target - z.tol);
        xhi = xhi.max(z.target + z.tol);
    }
    let xs = Scale::new(xlo, xhi, MARGIN_L, WIDTH - MARGIN_R);
    let ys = Scale::new(ylo, yhi, HEIGHT - MARGIN_B, MARGIN_T);

    let mut out = String::new();
    open_svg(&mut out, title);
    let _ = writeln!(out, r##"<g class="zones" fill="#808080" fill-opacity="0.35">"##);
    for z in zones.iter().filter(|z| !z.is_all()) {
        let (a, b) = (xs.at(z.target - z.tol), xs.at(z.target + z.tol));
        let w = (b - a).max(2.0);
        let x = (a + b) / 2.0 - w / 2.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{MARGIN_T}" width="{w:.2}" height="{:.2}"><title>{}</title></rect>"#,
            HEIGHT - MARGIN_B - MARGIN_T,
            esc(&z.name)
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" fill="#404040" fill-opacity="1">{}</text>"##,
            x + w / 2.0,
            MARGIN_T + 12.0,
            esc(&z.name)
        );
    }
    let _ = writeln!(out, "</g>");
    axes(&mut out, Some(&xs), &ys, &infos[0].label(), &infos[1].label());
    for (label, color, pts, hollow) in &series {
        let kind = if *hollow { "overlay" } else { "front" };
        let _ = writeln!(out, r#"<g class="{kind}" data-label="{}">"#, esc(label));
        for p in pts {
            let (fill, stroke) = if *hollow { ("none", color.as_str()) } else { (color.as_str(), "none") };
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}" stroke="{stroke}"/>"#,
                xs.at(p[0]),
                ys.at(p[1])
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let entries: Vec<(String, String)> = series.iter().map(|s| (s.0.clone(), s.1.clone())).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Paired boxplots of objective `objective` per zone: box q1..q3, median
/// line, whiskers at min and max, mean marker and a std annotation.
pub fn emit_boxplot_svg(
    pairs: &[ZonePair],
    objective: usize,
    info: &ObjectiveInfo,
    labels: [(&str, &str); 2],
    title: &str,
) -> Result<String> {
    if pairs.is_empty() {
        return Err(Error::invalid("boxplot figure needs at least one zone"));
    }
    let boxes: Vec<(usize, usize, &crate::robust::ObjectiveStats)> = pairs
        .iter()
        .enumerate()
        .flat_map(|(z, p)| {
            [(0, &p.a), (1, &p.b)]
                .into_iter()
                .filter_map(move |(side, m)| m.as_ref().and_then(|m| m.stats.get(objective)).map(|s| (z, side, s)))
        })
        .collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, _, s) in &boxes {
        lo = lo.min(s.summary.min);
        hi = hi.max(s.summary.max);
    }
    let ys = Scale::new(lo, hi, HEIGHT - MARGIN_B, MARGIN_T);
    let slot = (WIDTH - MARGIN_R - MARGIN_L) / pairs.len() as f64;
    let bw = (slot * 0.3).min(40.0);

    let mut out = String::new();
    open_svg(&mut out, title);
    axes(&mut out, None, &ys, "zone", &info.label());
    for (z, p) in pairs.iter().enumerate() {
        let cx = MARGIN_L + slot * (z as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_B + 18.0,
            esc(&p.zone.name)
        );
    }
    for (z, side, s) in boxes {
        let cx = MARGIN_L + slot * (z as f64 + 0.5) + if side == 0 { -0.6 * bw } else { 0.6 * bw };
        let color = labels[side].1;
        let m = s.summary;
        let (y_q1, y_q3) = (ys.at(m.q1), ys.at(m.q3));
        let _ = writeln!(
            out,
            r#"<g class="box" data-zone="{}" data-front="{}">"#,
            esc(&pairs[z].zone.name),
            esc(labels[side].0)
        );
        let _ = writeln!(
            out,
            r#"<line class="whisker" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{color}"/>"#,
            ys.at(m.min),
            ys.at(m.max)
        );
        for v in [m.min, m.max] {
            let _ = writeln!(
                out,
                r#"<line class="cap" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"/>"#,
                cx - bw / 4.0,
                ys.at(v),
                cx + bw / 4.0,
                ys.at(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<rect class="iqr" x="{:.2}" y="{:.2}" width="{bw:.2}" height="{:.2}" fill="{color}" fill-opacity="0.4" stroke="{color}"/>"#,
            cx - bw / 2.0,
            y_q3,
            y_q1 - y_q3
        );
        let _ = writeln!(
            out,
            r#"<line class="median" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - bw / 2.0,
            ys.at(m.q2),
            cx + bw / 2.0,
            ys.at(m.q2)
        );
        let _ = writeln!(
            out,
            r#"<circle class="mean" cx="{cx:.2}" cy="{:.2}" r="3" fill="white" stroke="black"/>"#,
            ys.at(m.mean)
        );
        let _ = writeln!(
            out,
            r#"<text class="std" x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="10">std {:.2}</text>"#,
            ys.at(m.max) - 6.0,
            m.std
        );
        let _ = writeln!(out, "</g>");
    }
    let entries: Vec<(String, String)> = labels.iter().map(|(l, c)| (l.to_string(), c.to_string())).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Grouped bars of `S` and `S_total` for the `top` variables with the
/// largest total index.
pub fn emit_sobol_svg(result: &SobolResult, top: usize) -> String {
    let order: Vec<usize> = result.ranking().into_iter().take(top).collect();
    let ys = Scale::new(0.0, 1.0, HEIGHT - MARGIN_B, MARGIN_T);
    let slot = (WIDTH - MARGIN_R - MARGIN_L) / order.len().max(1) as f64;
    let bw = (slot * 0.35).min(40.0);
    let mut out = String::new();
    open_svg(&mut out, &format!("Sobol indices of {}", result.output));
    axes(&mut out, None, &ys, "variable", "index");
    for (k, &i) in order.iter().enumerate() {
        let cx = MARGIN_L + slot * (k as f64 + 0.5);
        for (off, v, color, class) in [(-bw, result.first_order[i], "#1f77b4", "first"), (0.0, result.total[i], "#ff7f0e", "total")] {
            let y = ys.at(v);
            let _ = writeln!(
                out,
                r#"<rect class="{class}" x="{:.2}" y="{y:.2}" width="{bw:.2}" height="{:.2}" fill="{color}"><title>{:.4}</title></rect>"#,
                cx + off,
                ys.at(0.0) - y,
                v
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            HEIGHT - MARGIN_B + 18.0,
            esc(&result.variables[i])
        );
    }
    legend(&mut out, &[("S".into(), "#1f77b4".into()), ("S_total".into(), "#ff7f0e".into())]);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robust::{boxplot_stats, compare_fronts, ObjectiveStats, RobustStats, ZoneKey, ZoneStatistic};

    fn parse(svg: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse(svg).expect("well-formed SVG")
    }

    fn archive(f: Formulation, pts: &[(f64, f64)]) -> ParetoArchive {
        let infos = vec![ObjectiveInfo::maximize("torque", "N·m"), ObjectiveInfo::minimize("ripple", "%")];
        let mut a = ParetoArchive::new(f, infos);
        for (i, (t, r)) in pts.iter().enumerate() {
            a.insert(&[i as f64], &[-t, *r]);
        }
        a
    }

    #[test]
    fn plain_front_and_zone_bands() {
        let a = archive(Formulation::Deterministic, &[(430.0, 4.0), (440.0, 5.0), (450.0, 6.5)]);
        let svg = emit_front_svg(&[&a], &[], &[], "front").unwrap();
        let doc = parse(&svg);
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 3);
        assert!(svg.contains("torque [N·m]") && svg.contains("ripple [%]"));
        assert!(!svg.contains("class=\"overlay\""));

        let zones: Vec<Zone> = [430.0, 435.0, 440.0, 445.0, 450.0]
            .iter()
            .zip(["A", "B", "C", "D", "E"])
            .map(|(&t, n)| Zone::new(n, t, 0.1))
            .collect();
        let overlay = Overlay {
            label: "posterior".into(),
            color: "#e377c2".into(),
            points: vec![[429.0, 4.5]],
        };
        let svg = emit_front_svg(&[&a], &[overlay], &zones, "zones").unwrap();
        let doc = parse(&svg);
        let bands = doc
            .descendants()
            .find(|n| n.attribute("class") == Some("zones"))
            .unwrap()
            .children()
            .filter(|n| n.has_tag_name("rect"))
            .count();
        assert_eq!(bands, 5);
        assert!(svg.contains("class=\"overlay\""));
    }

    #[test]
    fn mismatched_objectives_are_rejected() {
        let a = archive(Formulation::Deterministic, &[(430.0, 4.0)]);
        let b = ParetoArchive::anonymous(2);
        assert!(emit_front_svg(&[&a, &b], &[], &[], "x").is_err());
        assert!(emit_front_svg(&[], &[], &[], "x").is_err());
    }

    fn record(values: &[f64]) -> PosteriorRecord {
        let summary = boxplot_stats(values).unwrap();
        PosteriorRecord {
            x: vec![0.0],
            stats: Some(RobustStats {
                x: vec![0.0],
                n: values.len(),
                objectives: vec![ObjectiveStats {
                    summary,
                    worst_case: Some(summary.max),
                }],
            }),
            error: None,
        }
    }

    fn pairs(a: &[f64], b: &[f64]) -> Vec<ZonePair> {
        let infos = vec![ObjectiveInfo::minimize("ripple", "%")];
        let key = ZoneKey {
            objective: 0,
            statistic: ZoneStatistic::Mean,
        };
        compare_fronts(&[record(a)], &[record(b)], &infos, &[Zone::all()], key).unwrap()
    }

    fn attrs(doc: &roxmltree::Document<'_>, class: &str, name: &str) -> Vec<String> {
        doc.descendants()
            .filter(|n| n.attribute("class") == Some(class))
            .map(|n| n.attribute(name).unwrap().to_string())
            .collect()
    }

    #[test]
    fn identical_pairs_draw_identical_boxes() {
        let info = ObjectiveInfo::minimize("ripple", "%");
        let p = pairs(&[4.0, 4.5, 5.0, 6.0], &[4.0, 4.5, 5.0, 6.0]);
        let svg = emit_boxplot_svg(&p, 0, &info, [("deterministic", "#1f77b4"), ("expectation", "#d62728")], "b").unwrap();
        let doc = parse(&svg);
        for attr in ["y", "height"] {
            let v = attrs(&doc, "iqr", attr);
            assert_eq!(v.len(), 2);
            assert_eq!(v[0], v[1]);
        }
        let std = doc.descendants().filter(|n| n.attribute("class") == Some("std")).map(|n| n.text().unwrap().to_string()).collect::<Vec<_>>();
        let want = format!("std {:.2}", boxplot_stats(&[4.0, 4.5, 5.0, 6.0]).unwrap().std);
        assert_eq!(std, vec![want.clone(), want]);
    }

    #[test]
    fn constant_sample_gives_flat_box() {
        let info = ObjectiveInfo::minimize("ripple", "%");
        let p = pairs(&[5.0; 4], &[5.0; 4]);
        let svg = emit_boxplot_svg(&p, 0, &info, [("a", "#000"), ("b", "#111")], "b").unwrap();
        let doc = parse(&svg);
        assert!(attrs(&doc, "iqr", "height").iter().all(|h| h.parse::<f64>().unwrap() == 0.0));
        for w in doc.descendants().filter(|n| n.attribute("class") == Some("whisker")) {
            assert_eq!(w.attribute("y1"), w.attribute("y2"));
        }
        assert!(svg.contains("std 0.00"));
    }

    #[test]
    fn sobol_chart_shows_top_six() {
        let r = SobolResult {
            output: "torque".into(),
            variables: (1..=8).map(|j| format!("v{j}")).collect(),
            first_order: vec![0.1; 8],
            total: vec![0.1, 0.8, 0.2, 0.3, 0.05, 0.4, 0.01, 0.6],
            raw_first_order: vec![0.1; 8],
            raw_total: vec![0.0; 8],
            variance: 1.0,
            n_base: 64,
            seed: 0,
        };
        let svg = emit_sobol_svg(&r, 6);
        let doc = parse(&svg);
        assert_eq!(attrs(&doc, "total", "height").len(), 6);
        assert!(!svg.contains(">v7<") && !svg.contains(">v5<"));
    }

    #[test]
    fn posterior_csv_layout() {
        let space = DesignSpace::uniform(1, 0.0, 2.0, 0.0, false);
        let infos = vec![ObjectiveInfo::maximize("t", "")];
        let mut failed = record(&[1.0]);
        failed.stats = None;
        failed.error = Some("boom".into());
        let mut buf = Vec::new();
        write_posterior_csv(&mut buf, &[record(&[-2.0, -1.0]), failed], &space, &infos).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "design,x1,t_min,t_q1,t_q2,t_q3,t_max,t_mean,t_std,t_worst_case,error");
        assert!(lines[1].starts_with("0,0.0000000000000000e0,1.0000000000000000e0,"));
        assert!(lines[2].ends_with(",boom"));
    }
}
