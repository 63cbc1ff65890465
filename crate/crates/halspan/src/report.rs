//! Renders evaluation results as JSON, CSV and aligned text tables.

use std::collections::BTreeSet;
use std::fmt::Write;

use halspan_core::{EvalReport, Lang, ScoreSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Iou,
    Corr,
}

impl Metric {
    fn of(self, s: &ScoreSummary) -> f64 {
        match self {
            Metric::Iou => s.mean_iou,
            Metric::Corr => s.mean_corr,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Metric::Iou => "IoU",
            Metric::Corr => "Corr",
        }
    }
}

fn row_label(lang: Lang) -> String {
    format!("{} ({})", lang.name(), lang.code())
}

pub fn to_json(report: &EvalReport) -> String {
    serde_json::to_string_pretty(report).expect("reports always serialize")
}

/// One row per language plus an `all` row.
pub fn language_csv(report: &EvalReport) -> String {
    let mut out = String::from("lang,n,mean_iou,mean_corr\n");
    for (lang, s) in &report.per_language {
        let _ = writeln!(out, "{},{},{},{}", lang.code(), s.n, s.mean_iou, s.mean_corr);
    }
    let o = &report.overall;
    let _ = writeln!(out, "all,{},{},{}", o.n, o.mean_iou, o.mean_corr);
    out
}

/// Per-instance scores in prediction order.
pub fn instance_csv(report: &EvalReport) -> String {
    let mut out = String::from("id,lang,iou,corr\n");
    for s in &report.per_instance {
        let _ = writeln!(out, "{},{},{},{}", csv_field(&s.id), s.lang.code(), s.iou, s.corr);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            let pad = w - cell.chars().count();
            if i == 0 {
                s.push_str(cell);
                s.extend(std::iter::repeat_n(' ', pad));
            } else {
                s.push_str("  ");
                s.extend(std::iter::repeat_n(' ', pad));
                s.push_str(cell);
            }
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(&rule));
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

/// Language rows with IoU and Corr columns, closed by an `All` row.
pub fn language_table(report: &EvalReport) -> String {
    let header = ["Language", "N", "IoU", "Corr"].map(String::from);
    let mut rows: Vec<Vec<String>> = report
        .per_language
        .iter()
        .map(|(lang, s)| {
            vec![
                row_label(*lang),
                s.n.to_string(),
                format!("{:.4}", s.mean_iou),
                format!("{:.4}", s.mean_corr),
            ]
        })
        .collect();
    let o = &report.overall;
    rows.push(vec![
        "All".into(),
        o.n.to_string(),
        format!("{:.4}", o.mean_iou),
        format!("{:.4}", o.mean_corr),
    ]);
    render_table(&header, &rows)
}

/// Results of running several plans over the same corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grid {
    pub cells: Vec<(String, EvalReport)>,
}

impl Grid {
    fn languages(&self) -> BTreeSet<Lang> {
        self.cells
            .iter()
            .flat_map(|(_, r)| r.per_language.keys().copied())
            .collect()
    }

    /// Long-format CSV: one line per cell and language, plus `all`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,lang,n,mean_iou,mean_corr\n");
        for (name, r) in &self.cells {
            let name = csv_field(name);
            for (lang, s) in &r.per_language {
                let _ = writeln!(out, "{name},{},{},{},{}", lang.code(), s.n, s.mean_iou, s.mean_corr);
            }
            let o = &r.overall;
            let _ = writeln!(out, "{name},all,{},{},{}", o.n, o.mean_iou, o.mean_corr);
        }
        out
    }

    /// Languages down, cells across, one metric per table.
    pub fn table(&self, metric: Metric) -> String {
        let mut header = vec![metric.name().to_string()];
        header.extend((1..=self.cells.len()).map(|i| format!("#{i}")));
        let fmt = |s: Option<&ScoreSummary>| s.map_or("-".to_string(), |s| format!("{:.4}", metric.of(s)));
        let mut rows: Vec<Vec<String>> = self
            .languages()
            .into_iter()
            .map(|lang| {
                let mut row = vec![row_label(lang)];
                row.extend(self.cells.iter().map(|(_, r)| fmt(r.per_language.get(&lang))));
                row
            })
            .collect();
        let mut all = vec!["All".to_string()];
        all.extend(self.cells.iter().map(|(_, r)| fmt(Some(&r.overall))));
        rows.push(all);
        let mut out = render_table(&header, &rows);
        for (i, (name, _)) in self.cells.iter().enumerate() {
            let _ = writeln!(out, "#{} = {}", i + 1, name);
        }
        out
    }
}
