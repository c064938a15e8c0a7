//! E_2-page chart rendering: total degree on the horizontal axis, homological
//! filtration s on the vertical axis, one arrow per nonzero Dyer-Lashof
//! entry. ASCII and SVG renderings are generated from one document, so their
//! class and arrow sets always agree.

use serde::{Deserialize, Serialize};

use crate::koszul::TorClass;
use crate::pipeline::DLActionTable;
use crate::steenrod::{DLOperation, OpKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedClass {
    /// ASCII-safe label (`2b`, `v1b`, `2b*v1b`).
    pub label: String,
    /// Rendered label; equals `label` in ascii-safe mode.
    pub display: String,
    pub s: usize,
    pub total: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartArrow {
    pub op: String,
    pub op_display: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartDocument {
    pub title: String,
    pub ascii_safe: bool,
    pub classes: Vec<PlacedClass>,
    pub arrows: Vec<ChartArrow>,
}

const MACRON: char = '\u{0304}';

/// Bar decoration for a single factor: `2b` -> `2-bar`, `v1b` -> `v-bar`
/// with a subscript 1.
fn decorate_factor(part: &str) -> String {
    let Some(base) = part.strip_suffix('b') else { return part.to_string() };
    if base.is_empty() {
        return part.to_string();
    }
    let split = base.find(|c: char| c.is_ascii_digit()).unwrap_or(base.len());
    let (head, digits) = base.split_at(split);
    if head.is_empty() {
        // a numeric class like 2-bar: the bar goes over the number
        let mut out = String::new();
        for c in base.chars() {
            out.push(c);
            out.push(MACRON);
        }
        return out;
    }
    let mut out = String::new();
    for c in head.chars() {
        out.push(c);
        out.push(MACRON);
    }
    for d in digits.chars() {
        out.push(subscript_digit(d));
    }
    out
}

fn subscript_digit(d: char) -> char {
    char::from_u32(0x2080 + (d as u32 - '0' as u32)).expect("subscript digit")
}

fn superscript_digit(d: char) -> char {
    match d {
        '1' => '\u{00B9}',
        '2' => '\u{00B2}',
        '3' => '\u{00B3}',
        _ => char::from_u32(0x2070 + (d as u32 - '0' as u32)).expect("superscript digit"),
    }
}

/// Pretty form of a class label: each bar factor decorated, factors joined
/// without the `*`.
pub fn display_label(label: &str, ascii_safe: bool) -> String {
    if ascii_safe {
        return label.to_string();
    }
    label.split('*').map(decorate_factor).collect()
}

/// Pretty form of an operation: `Q^2` -> `Q` with a superscript 2.
pub fn display_op(op: DLOperation, ascii_safe: bool) -> String {
    if ascii_safe {
        return op.display();
    }
    let head = match op.kind {
        OpKind::Q => "Q".to_string(),
        OpKind::BetaQ => "\u{03B2}Q".to_string(),
    };
    let digits: String =
        op.superscript.to_string().chars().map(superscript_digit).collect();
    format!("{head}{digits}")
}

/// Lay out a class list (and optionally the nonzero action entries) as a
/// chart document.
pub fn render_chart(
    title: &str,
    classes: &[TorClass],
    actions: Option<&DLActionTable>,
    ascii_safe: bool,
) -> ChartDocument {
    let mut placed: Vec<PlacedClass> = classes
        .iter()
        .map(|c| PlacedClass {
            label: c.label.clone(),
            display: display_label(&c.label, ascii_safe),
            s: c.s,
            total: c.total,
        })
        .collect();
    placed.sort_by_key(|c| (c.s, c.total, c.label.clone()));
    let arrows = actions
        .map(|t| {
            t.entries
                .iter()
                .filter_map(|e| {
                    let target = e.target.as_ref()?;
                    Some(ChartArrow {
                        op: e.op.display(),
                        op_display: display_op(e.op, ascii_safe),
                        source: e.source.clone(),
                        target: target.clone(),
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    ChartDocument { title: title.to_string(), ascii_safe, classes: placed, arrows }
}

/// Width of a rendered string: combining marks take no column.
fn visual_width(s: &str) -> usize {
    s.chars().filter(|&c| !('\u{0300}'..='\u{036F}').contains(&c)).count()
}

fn pad_to(s: &str, width: usize) -> String {
    let mut out = s.to_string();
    for _ in visual_width(s)..width {
        out.push(' ');
    }
    out
}

impl ChartDocument {
    pub fn max_s(&self) -> usize {
        self.classes.iter().map(|c| c.s).max().unwrap_or(0)
    }

    pub fn max_total(&self) -> u32 {
        self.classes.iter().map(|c| c.total).max().unwrap_or(0)
    }

    fn cell(&self, s: usize, total: u32) -> String {
        let labels: Vec<&str> = self
            .classes
            .iter()
            .filter(|c| c.s == s && c.total == total)
            .map(|c| c.display.as_str())
            .collect();
        labels.join(",")
    }

    pub fn to_ascii(&self) -> String {
        let max_s = self.max_s();
        let max_total = self.max_total();
        let widths: Vec<usize> = (0..=max_total)
            .map(|t| {
                let w = (0..=max_s)
                    .map(|s| visual_width(&self.cell(s, t)))
                    .max()
                    .unwrap_or(0);
                w.max(t.to_string().len()) + 2
            })
            .collect();
        let arrow_sep = if self.ascii_safe { "->" } else { "\u{2192}" };
        let mut out = String::new();
        out.push_str(&format!("{}\n\n", self.title));
        out.push_str("  s\n");
        for s in (0..=max_s).rev() {
            out.push_str(&format!("{s:>3} |"));
            for t in 0..=max_total {
                out.push_str(&pad_to(&format!(" {}", self.cell(s, t)), widths[t as usize] + 1));
            }
            out.push('\n');
        }
        out.push_str("    +");
        out.push_str(&"-".repeat(widths.iter().map(|w| w + 1).sum::<usize>()));
        out.push('\n');
        out.push_str("     ");
        for t in 0..=max_total {
            out.push_str(&pad_to(&format!(" {t}"), widths[t as usize] + 1));
        }
        out.push_str(" (total degree)\n");
        if !self.arrows.is_empty() {
            out.push_str("\narrows:\n");
            for a in &self.arrows {
                out.push_str(&format!(
                    "  {}: {} {} {}\n",
                    a.op_display,
                    display_label(&a.source, self.ascii_safe),
                    arrow_sep,
                    display_label(&a.target, self.ascii_safe)
                ));
            }
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let max_s = self.max_s();
        let max_total = self.max_total();
        let dx = 70.0;
        let dy = 50.0;
        let margin = 50.0;
        let width = margin * 2.0 + dx * max_total as f64;
        let height = margin * 2.0 + dy * max_s as f64;
        let pos = |s: usize, total: u32| -> (f64, f64) {
            (margin + total as f64 * dx, margin + (max_s - s) as f64 * dy)
        };
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n",
            width + 40.0,
            height + 40.0,
            width + 40.0,
            height + 40.0
        ));
        out.push_str(
            "  <defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" \
             refX=\"6\" refY=\"3\" orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\"/>\
             </marker></defs>\n",
        );
        out.push_str(&format!(
            "  <text x=\"{:.0}\" y=\"20\" font-size=\"14\">{}</text>\n",
            margin,
            xml_escape(&self.title)
        ));
        // axes
        out.push_str(&format!(
            "  <line x1=\"{:.0}\" y1=\"{:.0}\" x2=\"{:.0}\" y2=\"{:.0}\" stroke=\"black\"/>\n",
            margin - 20.0,
            height + 10.0,
            width + 10.0,
            height + 10.0
        ));
        out.push_str(&format!(
            "  <line x1=\"{:.0}\" y1=\"{:.0}\" x2=\"{:.0}\" y2=\"{:.0}\" stroke=\"black\"/>\n",
            margin - 20.0,
            height + 10.0,
            margin - 20.0,
            margin - 20.0
        ));
        for t in 0..=max_total {
            out.push_str(&format!(
                "  <text x=\"{:.0}\" y=\"{:.0}\" font-size=\"11\" text-anchor=\"middle\">{t}</text>\n",
                margin + t as f64 * dx,
                height + 28.0
            ));
        }
        for s in 0..=max_s {
            out.push_str(&format!(
                "  <text x=\"{:.0}\" y=\"{:.0}\" font-size=\"11\" text-anchor=\"middle\">{s}</text>\n",
                margin - 35.0,
                margin + (max_s - s) as f64 * dy + 4.0
            ));
        }
        for a in &self.arrows {
            let from = self.classes.iter().find(|c| c.label == a.source);
            let to = self.classes.iter().find(|c| c.label == a.target);
            let (Some(from), Some(to)) = (from, to) else { continue };
            let (x1, y1) = pos(from.s, from.total);
            let (x2, y2) = pos(to.s, to.total);
            out.push_str(&format!(
                "  <line x1=\"{x1:.0}\" y1=\"{y1:.0}\" x2=\"{x2:.0}\" y2=\"{y2:.0}\" \
                 stroke=\"gray\" marker-end=\"url(#arrow)\"/>\n"
            ));
            out.push_str(&format!(
                "  <text x=\"{:.0}\" y=\"{:.0}\" font-size=\"10\" fill=\"gray\">{}</text>\n",
                (x1 + x2) / 2.0,
                (y1 + y2) / 2.0 - 4.0,
                xml_escape(&a.op_display)
            ));
        }
        for c in &self.classes {
            let (x, y) = pos(c.s, c.total);
            out.push_str(&format!(
                "  <text x=\"{x:.0}\" y=\"{y:.0}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
                xml_escape(&c.display)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
