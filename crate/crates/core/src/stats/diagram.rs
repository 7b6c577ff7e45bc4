use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ranking::NemenyiResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramModel {
    pub name: String,
    pub average_rank: f64,
}

/// Models joined by a bar are pairwise not significantly different.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramBar {
    pub from_rank: f64,
    pub to_rank: f64,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdDiagram {
    pub axis: [f64; 2],
    pub critical_difference: f64,
    pub alpha: f64,
    /// Ascending average rank.
    pub models: Vec<DiagramModel>,
    pub bars: Vec<DiagramBar>,
}

/// Number line of average ranks with a bar over every maximal run of
/// mutually non-significant models.
pub fn cd_diagram(result: &NemenyiResult) -> CdDiagram {
    let mut models: Vec<DiagramModel> = result
        .models
        .iter()
        .zip(&result.average_ranks)
        .map(|(n, &r)| DiagramModel {
            name: n.clone(),
            average_rank: r,
        })
        .collect();
    models.sort_by(|a, b| a.average_rank.total_cmp(&b.average_rank).then_with(|| a.name.cmp(&b.name)));
    let cd = result.critical_difference;
    let mut bars: Vec<DiagramBar> = Vec::new();
    let mut last_end = 0;
    for i in 0..models.len() {
        let mut j = i;
        while j + 1 < models.len() && models[j + 1].average_rank - models[i].average_rank < cd {
            j += 1;
        }
        // Runs ending where an earlier run ended are contained in it.
        if j > i && j > last_end {
            bars.push(DiagramBar {
                from_rank: models[i].average_rank,
                to_rank: models[j].average_rank,
                members: models[i..=j].iter().map(|m| m.name.clone()).collect(),
            });
            last_end = j;
        }
    }
    CdDiagram {
        axis: [1.0, result.models.len() as f64],
        critical_difference: cd,
        alpha: result.alpha,
        models,
        bars,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl CdDiagram {
    pub fn to_svg(&self) -> String {
        let width = 640.0;
        let margin = 60.0;
        let axis_y = 60.0;
        let [lo, hi] = self.axis;
        let span = (hi - lo).max(1.0);
        let x = |r: f64| margin + (r - lo) / span * (width - 2.0 * margin);
        let n = self.models.len();
        let half = n.div_ceil(2);
        let height = axis_y + 40.0 + 22.0 * half as f64 + 14.0 * self.bars.len() as f64 + 20.0;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.0}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{axis_y}" x2="{:.2}" y2="{axis_y}" stroke="black"/>"#,
            x(lo),
            x(hi)
        );
        let mut tick = lo.ceil();
        while tick <= hi {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="black"/><text x="{0:.2}" y="{3}" text-anchor="middle">{4}</text>"#,
                x(tick),
                axis_y - 5.0,
                axis_y,
                axis_y - 10.0,
                tick
            );
            tick += 1.0;
        }
        let cd_end = (lo + self.critical_difference).min(hi);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="20" x2="{:.2}" y2="20" stroke="black" stroke-width="2"/><text x="{:.2}" y="15">CD = {:.3}</text>"#,
            x(lo),
            x(cd_end),
            x(lo),
            self.critical_difference
        );
        for (i, m) in self.models.iter().enumerate() {
            let left = i < half;
            let row = if left { i } else { n - 1 - i };
            let y = axis_y + 40.0 + 22.0 * row as f64 + 14.0 * self.bars.len() as f64;
            let (lx, anchor) = if left { (margin - 5.0, "end") } else { (width - margin + 5.0, "start") };
            let px = x(m.average_rank);
            let _ = writeln!(
                s,
                r#"<polyline points="{px:.2},{axis_y} {px:.2},{y:.2} {lx:.2},{y:.2}" fill="none" stroke="gray"/><text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{} ({:.2})</text>"#,
                if left { lx - 2.0 } else { lx + 2.0 },
                y + 4.0,
                escape(&m.name),
                m.average_rank
            );
        }
        for (b, bar) in self.bars.iter().enumerate() {
            let y = axis_y + 14.0 + 14.0 * b as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="4"/>"#,
                x(bar.from_rank) - 3.0,
                x(bar.to_rank) + 3.0
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
