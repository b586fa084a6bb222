//! Plain-text table formatting with round-trip exact floats.

use crate::{CMatrix, C64};

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// CSV with a header row; each row must match the header width.
pub fn csv_table(headers: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Column-oriented CSV: `columns[i]` is written under `headers[i]`.
pub fn csv_columns(headers: &[&str], columns: &[&[f64]]) -> String {
    let len = columns.first().map_or(0, |c| c.len());
    let rows: Vec<Vec<f64>> = (0..len).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    csv_table(headers, &rows)
}

/// Complex matrix as CSV with a leading `row` column followed by
/// `re_<j>,im_<j>` pairs, `j` 1-based.
pub fn complex_matrix_csv(m: &CMatrix) -> String {
    let mut headers = vec!["row".to_string()];
    for j in 1..=m.ncols() {
        headers.push(format!("re_{j}"));
        headers.push(format!("im_{j}"));
    }
    let mut out = headers.join(",");
    out.push('\n');
    for i in 0..m.nrows() {
        let mut cells = vec![(i + 1).to_string()];
        for j in 0..m.ncols() {
            let z: C64 = m[(i, j)];
            cells.push(fmt_f64(z.re));
            cells.push(fmt_f64(z.im));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
