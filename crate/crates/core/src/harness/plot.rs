//! Plain-text plot data: `#` header lines naming the kind and the columns,
//! then one whitespace-separated row per point.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::table::ResultTable;
use crate::error::{parse_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Success rate per `k` (and per profile when the table has one).
    SuccessVsK,
    /// Equal-width histogram of the `rho` column.
    RhoHistogram { bins: usize },
    /// Product bound against empirical collection frequency.
    BoundVsEmpirical,
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlotKind::SuccessVsK => f.write_str("success-vs-k"),
            PlotKind::RhoHistogram { bins } => write!(f, "rho-histogram({bins})"),
            PlotKind::BoundVsEmpirical => f.write_str("bound-vs-empirical"),
        }
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    /// `rho-histogram` defaults to 10 bins; `rho-histogram(n)` sets `n`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "success-vs-k" => Ok(PlotKind::SuccessVsK),
            "bound-vs-empirical" => Ok(PlotKind::BoundVsEmpirical),
            "rho-histogram" => Ok(PlotKind::RhoHistogram { bins: 10 }),
            other => other
                .strip_prefix("rho-histogram(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|n| n.parse().ok())
                .filter(|&bins| bins > 0)
                .map(|bins| PlotKind::RhoHistogram { bins })
                .ok_or_else(|| Error::ConfigInvalid(format!("unknown plot kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotData {
    pub kind: String,
    pub table: ResultTable,
}

impl PlotData {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# kind: {}\n# columns: {}\n",
            self.kind,
            self.table.columns().join(" ")
        );
        for row in self.table.rows() {
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut table: Option<ResultTable> = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(k) = comment.strip_prefix("kind:") {
                    kind = Some(k.trim().to_string());
                } else if let Some(c) = comment.strip_prefix("columns:") {
                    table = Some(ResultTable::new(c.split_whitespace()));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let t = table
                .as_mut()
                .ok_or_else(|| parse_err(line_no, "data before `# columns:` header"))?;
            t.push(line.split_whitespace().map(String::from).collect())
                .map_err(|e| parse_err(line_no, e.to_string()))?;
        }
        Ok(PlotData {
            kind: kind.ok_or_else(|| parse_err(0, "missing `# kind:` header"))?,
            table: table.ok_or_else(|| parse_err(0, "missing `# columns:` header"))?,
        })
    }
}

fn parse_success(cell: &str) -> Result<bool> {
    match cell {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::SchemaMismatch(format!(
            "`{other}` is not a success flag"
        ))),
    }
}

/// Reduces a result table to the points of the requested plot.
pub fn plot_table(table: &ResultTable, kind: PlotKind) -> Result<ResultTable> {
    match kind {
        PlotKind::SuccessVsK => {
            let ks = table.column("k")?;
            let success = table.column("success")?;
            let profiles = if table.has_column("profile") {
                Some(table.column("profile")?)
            } else {
                None
            };
            let mut groups: BTreeMap<(String, usize), (usize, usize)> = BTreeMap::new();
            for i in 0..table.len() {
                let k: usize = ks[i].parse().map_err(|_| {
                    Error::SchemaMismatch(format!("`{}` is not a list size", ks[i]))
                })?;
                let p = profiles
                    .as_ref()
                    .map_or(String::new(), |p| p[i].to_string());
                let entry = groups.entry((p, k)).or_default();
                entry.0 += usize::from(parse_success(success[i])?);
                entry.1 += 1;
            }
            let mut out = if profiles.is_some() {
                ResultTable::new(["profile", "k", "success_rate"])
            } else {
                ResultTable::new(["k", "success_rate"])
            };
            for ((p, k), (hits, n)) in groups {
                let rate = (hits as f64 / n as f64).to_string();
                let row = if profiles.is_some() {
                    vec![p, k.to_string(), rate]
                } else {
                    vec![k.to_string(), rate]
                };
                out.push(row)?;
            }
            Ok(out)
        }
        PlotKind::RhoHistogram { bins } => {
            if bins == 0 {
                return Err(Error::ConfigInvalid(
                    "histogram needs at least one bin".into(),
                ));
            }
            let values = table.column_f64("rho")?;
            let mut out = ResultTable::new(["bin_lo", "bin_hi", "count"]);
            if values.is_empty() {
                return Ok(out);
            }
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let bins = if hi > lo { bins } else { 1 };
            let width = (hi - lo) / bins as f64;
            let mut counts = vec![0usize; bins];
            for v in values {
                let b = if width > 0.0 {
                    (((v - lo) / width) as usize).min(bins - 1)
                } else {
                    0
                };
                counts[b] += 1;
            }
            for (b, count) in counts.into_iter().enumerate() {
                let edge = |j: usize| if j == bins { hi } else { lo + j as f64 * width };
                out.push(vec![
                    edge(b).to_string(),
                    edge(b + 1).to_string(),
                    count.to_string(),
                ])?;
            }
            Ok(out)
        }
        PlotKind::BoundVsEmpirical => {
            let bound = table.column("product_bound")?;
            let empirical = table.column("empirical")?;
            let mut out = ResultTable::new(["bound", "empirical"]);
            for (b, e) in bound.into_iter().zip(empirical) {
                out.push(vec![b.to_string(), e.to_string()])?;
            }
            Ok(out)
        }
    }
}

/// Plot data for `table` as text, ready to write to a file.
pub fn emit_plot_data(table: &ResultTable, kind: PlotKind) -> Result<String> {
    Ok(PlotData {
        kind: kind.to_string(),
        table: plot_table(table, kind)?,
    }
    .to_text())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn success_table() -> ResultTable {
        let mut t = ResultTable::new(["profile", "k", "success"]);
        for (p, k, s) in [
            ("uniform", 4, true),
            ("uniform", 4, false),
            ("piecewise", 4, true),
            ("uniform", 6, true),
        ] {
            t.push(vec![p.into(), k.to_string(), s.to_string()])
                .unwrap();
        }
        t
    }

    #[test]
    fn success_vs_k_groups() {
        let plot = plot_table(&success_table(), PlotKind::SuccessVsK).unwrap();
        assert_eq!(
            plot.rows(),
            &[
                vec!["piecewise".to_string(), "4".into(), "1".into()],
                vec!["uniform".into(), "4".into(), "0.5".into()],
                vec!["uniform".into(), "6".into(), "1".into()],
            ]
        );
    }

    #[test]
    fn empty_table_gives_header_only() {
        let t = ResultTable::new(["rho"]);
        assert_eq!(
            emit_plot_data(&t, PlotKind::RhoHistogram { bins: 4 }).unwrap(),
            "# kind: rho-histogram(4)\n# columns: bin_lo bin_hi count\n"
        );
    }

    #[test]
    fn round_trip() {
        let text = emit_plot_data(&success_table(), PlotKind::SuccessVsK).unwrap();
        let back = PlotData::from_text(&text).unwrap();
        assert_eq!(back.kind, "success-vs-k");
        assert_eq!(
            back.table,
            plot_table(&success_table(), PlotKind::SuccessVsK).unwrap()
        );
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn schema_mismatch() {
        let t = ResultTable::new(["x"]);
        for kind in [
            PlotKind::SuccessVsK,
            PlotKind::RhoHistogram { bins: 2 },
            PlotKind::BoundVsEmpirical,
        ] {
            assert!(matches!(
                emit_plot_data(&t, kind),
                Err(Error::SchemaMismatch(_))
            ));
        }
    }

    #[test]
    fn kind_names() {
        assert_eq!(
            "rho-histogram(3)".parse::<PlotKind>().unwrap(),
            PlotKind::RhoHistogram { bins: 3 }
        );
        assert_eq!(
            "rho-histogram".parse::<PlotKind>().unwrap(),
            PlotKind::RhoHistogram { bins: 10 }
        );
        assert!("rho-histogram(0)".parse::<PlotKind>().is_err());
    }
}
