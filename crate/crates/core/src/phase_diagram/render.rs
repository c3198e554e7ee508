use std::fmt::Write as _;

use super::cell::{Classification, PhaseCell};

pub const CSV_HEADER: &str = "lambda,Q,alpha,dim,ball_energy,annulus_energy,annulus_r,competitor_N,competitor_R,competitor_energy,lower_bound,classification";

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

/// CSV with one row per cell, in scan order.
pub fn to_csv(cells: &[PhaseCell]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in cells {
        let (n, r, e) = match c.best_competitor {
            Some(w) => (w.n.to_string(), num(w.radius), num(w.energy)),
            None => Default::default(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            num(c.lambda),
            num(c.q),
            num(c.alpha),
            c.dim,
            num(c.ball_energy),
            num(c.annulus_energy),
            num(c.annulus_r),
            n,
            r,
            e,
            num(c.connected_lower_bound),
            c.classification
        );
    }
    out
}

fn color(c: Classification) -> &'static str {
    match c {
        Classification::Ball => "#4e79a7",
        Classification::Annulus => "#59a14f",
        Classification::NonexistenceCertified => "#e15759",
        Classification::Unknown => "#bab0ac",
    }
}

fn sorted_unique(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = v.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Colored cell grid with log-log axes and a four-color legend.
pub fn to_svg(cells: &[PhaseCell]) -> String {
    const CELL: f64 = 24.0;
    const LEFT: f64 = 90.0;
    const TOP: f64 = 20.0;
    let lambdas = sorted_unique(cells.iter().map(|c| c.lambda));
    let qs = sorted_unique(cells.iter().map(|c| c.q));
    let (nx, ny) = (lambdas.len().max(1), qs.len().max(1));
    let width = LEFT + nx as f64 * CELL + 20.0;
    let plot_h = ny as f64 * CELL;
    let height = TOP + plot_h + 60.0 + 20.0 * Classification::ALL.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let idx = |v: &[f64], x: f64| v.iter().position(|&y| y == x).unwrap_or(0);
    for c in cells {
        let i = idx(&lambdas, c.lambda);
        // Q grows upward
        let j = ny - 1 - idx(&qs, c.q);
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{CELL:.1}" height="{CELL:.1}" fill="{}"><title>lambda={} Q={} {}</title></rect>"#,
            LEFT + i as f64 * CELL,
            TOP + j as f64 * CELL,
            color(c.classification),
            c.lambda,
            c.q,
            c.classification
        );
    }
    let bottom = TOP + plot_h;
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#,
        nx as f64 * CELL
    );
    if let (Some(l0), Some(l1)) = (lambdas.first(), lambdas.last()) {
        let _ = writeln!(s, r#"<text x="{LEFT:.1}" y="{:.1}">{l0:.3e}</text>"#, bottom + 14.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{l1:.3e}</text>"#,
            LEFT + nx as f64 * CELL,
            bottom + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">lambda (log scale)</text>"#,
            LEFT + 0.5 * nx as f64 * CELL,
            bottom + 30.0
        );
    }
    if let (Some(q0), Some(q1)) = (qs.first(), qs.last()) {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{bottom:.1}" text-anchor="end">{q0:.3e}</text>"#, LEFT - 4.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{q1:.3e}</text>"#, LEFT - 4.0, TOP + 10.0);
        let _ = writeln!(
            s,
            r#"<text x="12" y="{:.1}" transform="rotate(-90 12 {:.1})" text-anchor="middle">Q (log scale)</text>"#,
            TOP + 0.5 * plot_h,
            TOP + 0.5 * plot_h
        );
    }
    for (k, c) in Classification::ALL.iter().enumerate() {
        let y = bottom + 44.0 + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT:.1}" y="{y:.1}" width="14" height="14" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            color(*c),
            LEFT + 20.0,
            y + 11.0,
            c
        );
    }
    s.push_str("</svg>\n");
    s
}
