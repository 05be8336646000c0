//! Deterministic SVG rendering of periodic barcodes.
//!
//! Bars are drawn over the action range `[lo, hi]`, one row per degree.
//! Orbit representatives (births in `[0, 1)`) are drawn solid, translates
//! faded; dashed guides mark integer actions, and finite representatives
//! carry their length.

use std::fmt::Write as _;

use crate::persistence::PeriodicBarcode;

const WIDTH: f64 = 720.0;
const ROW: f64 = 18.0;
const MARGIN: f64 = 48.0;

pub fn barcode_svg(b: &PeriodicBarcode, lo: f64, hi: f64) -> String {
    let mut bars = b.expand(lo, hi);
    bars.retain(|x| x.death.is_none_or(|d| d > lo) && x.birth < hi);
    bars.sort_by(|x, y| {
        x.degree
            .cmp(&y.degree)
            .then(x.birth.total_cmp(&y.birth))
            .then(x.death.unwrap_or(f64::INFINITY).total_cmp(&y.death.unwrap_or(f64::INFINITY)))
    });
    let mut degrees: Vec<i64> = bars.iter().map(|x| x.degree).collect();
    degrees.dedup();
    let rows = degrees.len().max(1) as f64;
    let height = 2.0 * MARGIN + rows * ROW;
    let span = WIDTH - 2.0 * MARGIN;
    let x = |t: f64| MARGIN + (t.clamp(lo, hi) - lo) / (hi - lo) * span;
    let y = |deg: i64| MARGIN + degrees.iter().position(|&d| d == deg).unwrap_or(0) as f64 * ROW + ROW / 2.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN:.0}" y="20">|q| = {} field {} finite {} infinite {}</text>"#,
        b.total_weight,
        b.field,
        b.finite.len(),
        b.infinite.len()
    );
    for k in lo.ceil() as i64..=hi.floor() as i64 {
        let xk = x(k as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{xk:.2}" y1="{:.2}" x2="{xk:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            MARGIN - 8.0,
            height - MARGIN + 8.0
        );
        let _ = writeln!(s, r#"<text x="{xk:.2}" y="{:.2}" text-anchor="middle">{k}</text>"#, height - MARGIN + 20.0);
    }
    for &d in &degrees {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{d}</text>"#, MARGIN - 6.0, y(d) + 3.0);
    }
    for bar in &bars {
        let rep = (0.0..1.0).contains(&bar.birth);
        let (color, opacity) = match (bar.death.is_some(), rep) {
            (true, true) => ("#c0392b", 1.0),
            (true, false) => ("#c0392b", 0.35),
            (false, true) => ("#1f4e8c", 1.0),
            (false, false) => ("#1f4e8c", 0.35),
        };
        let (x0, x1, yy) = (x(bar.birth), x(bar.death.unwrap_or(hi)), y(bar.degree));
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.2}" y1="{yy:.2}" x2="{x1:.2}" y2="{yy:.2}" stroke="{color}" stroke-opacity="{opacity}" stroke-width="{}"/>"#,
            if rep { 4 } else { 2 }
        );
        if let (Some(dth), true) = (bar.death, rep) {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{:.6}</text>"#, x1 + 4.0, yy + 3.0, dth - bar.birth);
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::{FiniteBar, InfiniteBar};
    use crate::weights::CoefficientField;

    #[test]
    fn deterministic_and_annotated() {
        let b = PeriodicBarcode::new(
            3,
            CoefficientField::Rationals,
            vec![FiniteBar { birth: 0.2, death: 0.5, degree: 1 }],
            vec![
                InfiniteBar { birth: 0.0, degree: 0 },
                InfiniteBar { birth: 0.1, degree: 2 },
                InfiniteBar { birth: 0.6, degree: 4 },
            ],
        )
        .unwrap();
        let a = barcode_svg(&b, -1.0, 2.0);
        assert_eq!(a, barcode_svg(&b.clone(), -1.0, 2.0));
        assert!(a.contains("0.300000"));
        assert_eq!(a.matches("stroke-dasharray").count(), 4);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
    }
}
