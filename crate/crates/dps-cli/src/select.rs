//! Best-configuration selection from an aggregate CSV.

use std::path::Path;

use crate::error::{HarnessError, Result};

/// Argmax of mean combined score over (scale, sigma) cells; ties broken by
/// smaller sigma, then smaller scale. Rows for the same cell are averaged
/// first, so the result is invariant to input row order.
pub fn select_best(rows: &[(f64, f64, f64)]) -> Result<(f64, f64)> {
    if rows.is_empty() {
        return Err(HarnessError::Config("empty selection input".into()));
    }
    // Group duplicates of the same cell.
    let mut cells: Vec<(f64, f64, f64, usize)> = Vec::new();
    for &(scale, sigma, combined) in rows {
        match cells
            .iter_mut()
            .find(|c| c.0 == scale && c.1 == sigma)
        {
            Some(c) => {
                c.2 += combined;
                c.3 += 1;
            }
            None => cells.push((scale, sigma, combined, 1)),
        }
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for (scale, sigma, sum, n) in cells {
        let mean = sum / n as f64;
        let better = match best {
            None => true,
            Some((bs, bg, bm)) => {
                mean > bm
                    || (mean == bm && (sigma < bg || (sigma == bg && scale < bs)))
            }
        };
        if better {
            best = Some((scale, sigma, mean));
        }
    }
    let (scale, sigma, _) = best.expect("non-empty input");
    Ok((scale, sigma))
}

/// Read `(scale, sigma, combined)` triples from a CSV with named columns.
pub fn read_selection_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| HarnessError::Io(e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| HarnessError::Config(format!("missing CSV column {name:?}")))
    };
    let (ci_scale, ci_sigma, ci_comb) = (col("scale")?, col("sigma")?, col("combined")?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| HarnessError::Io(e.to_string()))?;
        let parse = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| HarnessError::Config(format!("bad CSV value in row {record:?}")))
        };
        rows.push((parse(ci_scale)?, parse(ci_sigma)?, parse(ci_comb)?));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference ablation aggregate used as a selection fixture.
    pub const TABLE_ROWS: &[(f64, f64, f64)] = &[
        (0.95, 0.01, 1.45231),
        (0.9, 0.05, 1.40065),
        (0.9, 0.01, 1.44452),
        (0.8, 0.07, 1.36506),
        (0.8, 0.05, 1.38599),
        (0.8, 0.03, 1.40976),
        (0.8, 0.01, 1.42857),
        (0.8, 0.005, 1.42954),
        (0.5, 0.05, 1.32122),
        (0.2, 0.05, 1.16456),
    ];

    #[test]
    fn selects_published_best_row() {
        assert_eq!(select_best(TABLE_ROWS).unwrap(), (0.95, 0.01));
    }

    #[test]
    fn single_row() {
        assert_eq!(select_best(&[(0.3, 0.02, 1.0)]).unwrap(), (0.3, 0.02));
    }

    #[test]
    fn tie_breaks_on_smaller_sigma() {
        let rows = [(0.5, 0.05, 1.2), (0.5, 0.01, 1.2)];
        assert_eq!(select_best(&rows).unwrap(), (0.5, 0.01));
    }

    #[test]
    fn tie_breaks_on_smaller_scale() {
        let rows = [(0.7, 0.05, 1.2), (0.4, 0.05, 1.2)];
        assert_eq!(select_best(&rows).unwrap(), (0.4, 0.05));
    }

    #[test]
    fn permutation_invariant() {
        let mut rows = TABLE_ROWS.to_vec();
        rows.reverse();
        assert_eq!(select_best(&rows).unwrap(), (0.95, 0.01));
    }

    #[test]
    fn empty_errors() {
        assert!(select_best(&[]).is_err());
    }
}
