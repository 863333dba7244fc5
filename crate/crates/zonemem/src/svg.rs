//! Static SVG line charts: cumulative loads, cumulative unloads and WM size
//! against frame.

use std::fmt::Write;

use zonemem_core::ScenarioTrace;

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 120.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 36.0;
const TITLE_H: f64 = 32.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
    /// Dashed horizontal reference line.
    pub hline: Option<(f64, String)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round-number tick spacing giving roughly `n` ticks over `0..max`.
fn tick_step(max: f64, n: f64) -> f64 {
    let raw = (max / n).max(1.0);
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

fn render_panel(out: &mut String, panel: &Panel, top: f64) {
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let x0 = MARGIN_L;
    let y0 = top + MARGIN_T;
    let pts = panel.series.iter().flat_map(|s| s.points.iter());
    let x_max = pts.clone().map(|p| p.0).fold(1.0, f64::max);
    let mut y_max = pts.map(|p| p.1).fold(1.0, f64::max);
    if let Some((y, _)) = panel.hline {
        y_max = y_max.max(y);
    }
    y_max *= 1.05;
    let sx = |x: f64| x0 + x / x_max * plot_w;
    let sy = |y: f64| y0 + plot_h - y / y_max * plot_h;

    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" font-weight="bold">{}</text>"#,
        x0,
        top + 24.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#444"/>"##
    );
    let xs = tick_step(x_max, 8.0);
    let mut t = 0.0;
    while t <= x_max + 1e-9 {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="#ddd"/><text x="{0:.1}" y="{3:.1}" font-size="10" text-anchor="middle">{4}</text>"##,
            sx(t),
            y0,
            y0 + plot_h,
            y0 + plot_h + 14.0,
            t
        );
        t += xs;
    }
    let ys = tick_step(y_max, 5.0);
    let mut t = 0.0;
    while t <= y_max + 1e-9 {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="#ddd"/><text x="{3:.1}" y="{4:.1}" font-size="10" text-anchor="end">{5}</text>"##,
            x0,
            sy(t),
            x0 + plot_w,
            x0 - 6.0,
            sy(t) + 3.0,
            t
        );
        t += ys;
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">frame</text>"#,
        x0 + plot_w / 2.0,
        y0 + plot_h + 30.0
    );
    if let Some((y, label)) = &panel.hline {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="#888" stroke-dasharray="6 4"/><text x="{3:.1}" y="{4:.1}" font-size="10" fill="#666">{5}</text>"##,
            x0,
            sy(*y),
            x0 + plot_w,
            x0 + plot_w + 6.0,
            sy(*y) + 3.0,
            escape(label)
        );
    }
    for (i, s) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|p| format!("{:.1},{:.1}", sx(p.0), sy(p.1)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = y0 + 12.0 + i as f64 * 16.0;
        let _ = writeln!(
            out,
            r#"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="{color}" stroke-width="2"/><text x="{3:.1}" y="{4:.1}" font-size="11">{5}</text>"#,
            x0 + plot_w + 8.0,
            ly,
            x0 + plot_w + 24.0,
            x0 + plot_w + 28.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
}

/// Panels stacked vertically in one document.
pub fn render(title: &str, panels: &[Panel]) -> String {
    let height = TITLE_H + PANEL_H * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, TITLE_H + PANEL_H * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

fn curves(trace: &ScenarioTrace) -> [Series; 3] {
    let label = trace.policy.as_str().to_string();
    let (mut cl, mut cu) = (0u64, 0u64);
    let mut loads = Vec::with_capacity(trace.records.len());
    let mut unloads = Vec::with_capacity(trace.records.len());
    let mut wm = Vec::with_capacity(trace.records.len());
    for r in &trace.records {
        cl += r.loads;
        cu += r.unloads;
        let f = r.frame as f64;
        loads.push((f, cl as f64));
        unloads.push((f, cu as f64));
        wm.push((f, r.wm_size_end as f64));
    }
    [
        Series {
            label: label.clone(),
            points: loads,
        },
        Series {
            label: label.clone(),
            points: unloads,
        },
        Series { label, points: wm },
    ]
}

fn panels_for(traces: &[&ScenarioTrace]) -> Vec<Panel> {
    let mut panels = vec![
        Panel {
            title: "cumulative loads (retrieve)".to_string(),
            series: vec![],
            hline: None,
        },
        Panel {
            title: "cumulative unloads (remove)".to_string(),
            series: vec![],
            hline: None,
        },
        Panel {
            title: "working memory size (end of frame)".to_string(),
            series: vec![],
            hline: traces
                .first()
                .map(|t| (t.memory_thr as f64, format!("thr {}", t.memory_thr))),
        },
    ];
    for t in traces {
        for (panel, series) in panels.iter_mut().zip(curves(t)) {
            panel.series.push(series);
        }
    }
    panels
}

pub fn trace_svg(trace: &ScenarioTrace) -> String {
    render(
        &format!("{} / {}", trace.scenario, trace.policy.as_str()),
        &panels_for(&[trace]),
    )
}

pub fn comparison_svg(a: &ScenarioTrace, b: &ScenarioTrace) -> String {
    render(
        &format!("{}: {} vs {}", a.scenario, a.policy.as_str(), b.policy.as_str()),
        &panels_for(&[a, b]),
    )
}
