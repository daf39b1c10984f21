//! Plot documents: before/after network panels and item stability bars,
//! rendered as SVG with a CSV table of the plotted values.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bootega::BootResult;
use crate::ega::EgaResult;
use crate::network::Network;
use crate::pipeline::TypeResult;
use crate::seed::stage_seed;

const PANEL: f64 = 480.0;
const MARGIN: f64 = 36.0;
const HEADER: f64 = 48.0;
const LAYOUT_ITERATIONS: usize = 300;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

/// An SVG document plus the table of values it draws.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PlotDocument {
    #[serde(skip)]
    pub svg: String,
    /// CSV of the plotted values, header included.
    #[serde(skip)]
    pub table: String,
    /// Panel annotations, such as `NMI: 86.91%`.
    pub annotations: Vec<String>,
    pub panels: usize,
    pub degraded: bool,
}

/// Format an NMI value the way every plot annotates it.
pub fn nmi_annotation(nmi: f64) -> String {
    format!("NMI: {nmi:.2}%")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n\
<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn notice(svg: &mut String, x: f64, y: f64, text: &str) {
    let _ = writeln!(
        svg,
        "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"13\" fill=\"#b00020\">{}</text>",
        escape(text)
    );
}

/// Fruchterman-Reingold layout in the unit square, seeded for reproducibility.
/// Edge attraction scales with absolute weight.
pub fn force_layout(net: &Network, seed: u64) -> Vec<(f64, f64)> {
    let n = net.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    if n < 2 {
        return pos.iter().map(|_| (0.5, 0.5)).collect();
    }
    let edges = net.edges();
    let k = (1.0 / n as f64).sqrt();
    for it in 0..LAYOUT_ITERATIONS {
        let temp = 0.1 * (1.0 - it as f64 / LAYOUT_ITERATIONS as f64);
        let mut disp = vec![(0.0f64, 0.0f64); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pos[i].0 - pos[j].0;
                let dy = pos[i].1 - pos[j].1;
                let d = (dx * dx + dy * dy).sqrt().max(1e-6);
                let f = k * k / d;
                disp[i].0 += dx / d * f;
                disp[i].1 += dy / d * f;
                disp[j].0 -= dx / d * f;
                disp[j].1 -= dy / d * f;
            }
        }
        for &(i, j, w) in &edges {
            let dx = pos[i].0 - pos[j].0;
            let dy = pos[i].1 - pos[j].1;
            let d = (dx * dx + dy * dy).sqrt().max(1e-6);
            let f = d * d / k * w.abs();
            disp[i].0 -= dx / d * f;
            disp[i].1 -= dy / d * f;
            disp[j].0 += dx / d * f;
            disp[j].1 += dy / d * f;
        }
        for (p, (dx, dy)) in pos.iter_mut().zip(disp) {
            let len = (dx * dx + dy * dy).sqrt().max(1e-12);
            let step = len.min(temp);
            p.0 += dx / len * step;
            p.1 += dy / len * step;
        }
    }
    let (min_x, max_x) = pos.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (min_y, max_y) = pos.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let sx = (max_x - min_x).max(1e-9);
    let sy = (max_y - min_y).max(1e-9);
    pos.iter().map(|p| ((p.0 - min_x) / sx, (p.1 - min_y) / sy)).collect()
}

fn network_panel(svg: &mut String, table: &mut String, label: &str, ega: &EgaResult, x0: f64, seed: u64) -> String {
    let net = &ega.network;
    let pos = force_layout(net, seed);
    let inner = PANEL - 2.0 * MARGIN;
    let at = |i: usize| (x0 + MARGIN + pos[i].0 * inner, HEADER + MARGIN + pos[i].1 * inner);
    let annotation = ega.nmi.map(nmi_annotation);
    let title = match &annotation {
        Some(a) => format!("{label} ({}, {} communities) {a}", ega.model, ega.n_communities),
        None => format!("{label} ({}, {} communities)", ega.model, ega.n_communities),
    };
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"28\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        x0 + PANEL / 2.0,
        escape(&title)
    );
    let max_w = net.edges().iter().fold(0.0f64, |m, e| m.max(e.2.abs())).max(1e-12);
    for (i, j, w) in net.edges() {
        let (a, b) = (at(i), at(j));
        let color = if w < 0.0 { "#c0392b" } else { "#555555" };
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-opacity=\"0.5\" stroke-width=\"{:.2}\"/>",
            a.0,
            a.1,
            b.0,
            b.1,
            0.3 + 2.7 * w.abs() / max_w
        );
    }
    for (i, id) in net.item_ids().iter().enumerate() {
        let (x, y) = at(i);
        let community = ega.communities.get(id).unwrap_or(0);
        let fill = PALETTE[(community as usize).saturating_sub(1) % PALETTE.len()];
        let _ = writeln!(
            svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"9\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"0.5\"><title>{}</title></circle>",
            escape(id)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"8\" text-anchor=\"middle\">{}</text>",
            y + 3.0,
            escape(id)
        );
        let _ = writeln!(table, "{label},{},{community}", csv_field(id));
    }
    annotation.unwrap_or_default()
}

fn stability_panel(svg: &mut String, table: &mut String, label: &str, boot: &BootResult, threshold: f64, x0: f64) {
    let mut rows: Vec<(&String, f64)> = boot.item_stability.iter().map(|(id, s)| (id, *s)).collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let inner = PANEL - 2.0 * MARGIN;
    let bar = (inner / rows.len().max(1) as f64).min(24.0);
    let left = x0 + MARGIN + 40.0;
    let width = inner - 40.0;
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"28\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        x0 + PANEL / 2.0,
        escape(&format!("{label} ({} items, {} replicates)", rows.len(), boot.n_replicates))
    );
    for (k, (id, s)) in rows.iter().enumerate() {
        let y = HEADER + MARGIN + k as f64 * bar;
        let community = boot.empirical.get(id).unwrap_or(0);
        let fill = PALETTE[(community as usize).saturating_sub(1) % PALETTE.len()];
        let _ = writeln!(
            svg,
            "<rect x=\"{left:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"><title>{} {s:.2}</title></rect>",
            s * width,
            bar * 0.8,
            escape(id)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"{:.1}\" text-anchor=\"end\">{}</text>",
            left - 4.0,
            y + bar * 0.7,
            (bar * 0.7).clamp(4.0, 10.0),
            escape(id)
        );
        let _ = writeln!(table, "{label},{},{s},{community}", csv_field(id));
    }
    let tx = left + threshold * width;
    let bottom = HEADER + MARGIN + rows.len() as f64 * bar;
    let _ = writeln!(
        svg,
        "<line x1=\"{tx:.2}\" y1=\"{:.2}\" x2=\"{tx:.2}\" y2=\"{bottom:.2}\" stroke=\"black\" stroke-dasharray=\"4 3\"/>",
        HEADER + MARGIN - 4.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{tx:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"middle\">threshold {threshold:.2}</text>",
        bottom + 14.0
    );
}

fn network_document(result: &TypeResult, seed: u64) -> PlotDocument {
    let mut table = String::from("panel,item,community\n");
    let panels: Vec<(&str, &EgaResult)> = match (&result.initial_ega, &result.final_ega) {
        (Some(i), Some(f)) if !result.degraded => vec![("before", i), ("after", f)],
        (_, Some(f)) => vec![("after", f)],
        (Some(i), None) => vec![("before", i)],
        (None, None) => Vec::new(),
    };
    let width = PANEL * panels.len().max(1) as f64;
    let height = HEADER + PANEL + if result.degraded { 24.0 } else { 0.0 };
    let mut svg = svg_open(width, height);
    let mut annotations = Vec::new();
    for (k, (label, ega)) in panels.iter().enumerate() {
        let a = network_panel(&mut svg, &mut table, label, ega, k as f64 * PANEL, stage_seed(seed, "layout", k as u64));
        if !a.is_empty() {
            annotations.push(a);
        }
    }
    if result.degraded {
        let text = format!(
            "Degraded run: {}",
            result.notes.first().map(String::as_str).unwrap_or("reduction incomplete")
        );
        notice(&mut svg, 12.0, HEADER + PANEL + 12.0, &text);
    }
    svg.push_str("</svg>\n");
    PlotDocument {
        svg,
        table,
        annotations,
        panels: panels.len(),
        degraded: result.degraded,
    }
}

fn stability_document(result: &TypeResult) -> PlotDocument {
    let report = &result.boot_ega;
    let mut table = String::from("panel,item,stability,community\n");
    let panels: Vec<(&str, &BootResult)> = match (&report.initial_boot, &report.final_boot) {
        (Some(i), Some(f)) if !result.degraded => vec![("before", i), ("after", f)],
        (_, Some(f)) => vec![("after", f)],
        (Some(i), None) => vec![("before", i)],
        (None, None) => Vec::new(),
    };
    let degraded = result.degraded || panels.is_empty();
    let width = PANEL * panels.len().max(1) as f64;
    let height = HEADER + PANEL + if degraded { 24.0 } else { 0.0 };
    let mut svg = svg_open(width, height);
    for (k, (label, boot)) in panels.iter().enumerate() {
        stability_panel(&mut svg, &mut table, label, boot, report.threshold, k as f64 * PANEL);
    }
    if degraded {
        let reason = if report.skipped {
            "bootstrap stability was not run"
        } else {
            "reduction incomplete"
        };
        notice(&mut svg, 12.0, HEADER + PANEL + 12.0, &format!("Degraded run: {reason}"));
    }
    svg.push_str("</svg>\n");
    PlotDocument {
        svg,
        table,
        annotations: Vec::new(),
        panels: panels.len(),
        degraded,
    }
}

/// Render the network and stability documents for one reduction run.
///
/// Panels: before on the left, after on the right. A degraded run gets a
/// single panel and a notice. Output depends only on `result` and `seed`.
pub fn render_plots(result: &TypeResult, seed: u64) -> (PlotDocument, PlotDocument) {
    (network_document(result, seed), stability_document(result))
}
