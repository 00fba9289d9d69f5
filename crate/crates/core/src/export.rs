//! CSV and JSON rendering of tables, grids and transition matrices.
//!
//! Floats use the shortest representation that parses back to the same
//! value, so identical inputs always give byte-identical files. CSV output
//! starts with `#` comment lines carrying the resolved config.

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::SweepGrid;
use crate::error::{Error, Result};
use crate::graph::{Entry, TransitionMatrix};

pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Prefix every line of `text` with `# `.
pub fn comment_block(text: &str) -> String {
    text.lines().map(|l| if l.is_empty() { "#\n".to_string() } else { format!("# {l}\n") }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Named columns of heterogeneous cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row has {} cells but the table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self, header: &str) -> Result<String> {
        let mut out = comment_block(header);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        out.push_str(&into_string(w)?);
        Ok(out)
    }

    /// Rows as objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    Value::Object(self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect())
                })
                .collect(),
        )
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// JSON document `{ "config": .., <key>: data }`, pretty-printed.
pub fn json_document(config: &impl Serialize, key: &str, data: Value) -> Result<String> {
    let mut doc = serde_json::Map::new();
    doc.insert("config".into(), serde_json::to_value(config)?);
    doc.insert(key.into(), data);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc))?;
    s.push('\n');
    Ok(s)
}

fn check_same_axes(grids: &[SweepGrid]) -> Result<()> {
    let first = grids.first().ok_or_else(|| Error::InvalidArgument("no grids to export".into()))?;
    if grids.iter().any(|g| g.axis1 != first.axis1 || g.axis2 != first.axis2) {
        return Err(Error::InvalidArgument("grids in one file must share their axes".into()));
    }
    Ok(())
}

fn grid_metadata(grids: &[SweepGrid]) -> String {
    let g = &grids[0];
    let describe = |a: &crate::analysis::GridAxis| {
        format!(
            "{} ({} samples, {} to {})",
            a.name,
            a.values.len(),
            format_f64(a.values[0]),
            format_f64(*a.values.last().unwrap())
        )
    };
    let metrics: Vec<&str> = grids.iter().map(|g| g.metric.as_str()).collect();
    format!("axis1 (rows): {}\naxis2 (columns): {}\nmetric: {}\n", describe(&g.axis1), describe(&g.axis2), metrics.join(", "))
}

/// Long format: one row per cell with both axis values and every metric.
pub fn grids_csv(grids: &[SweepGrid], header: &str) -> Result<String> {
    check_same_axes(grids)?;
    let g = &grids[0];
    let mut table = Table::new([g.axis1.name.clone(), g.axis2.name.clone()]);
    table.columns.extend(grids.iter().map(|g| g.metric.clone()));
    for (i, &x) in g.axis1.values.iter().enumerate() {
        for (j, &y) in g.axis2.values.iter().enumerate() {
            let mut row = vec![Cell::Num(x), Cell::Num(y)];
            row.extend(grids.iter().map(|g| Cell::Num(g.values[i][j])));
            table.rows.push(row);
        }
    }
    table.to_csv(&format!("{header}{}", grid_metadata(grids)))
}

/// Gnuplot `matrix nonuniform` layout; several metrics become separate
/// data blocks addressable with `index`.
pub fn grids_gnuplot(grids: &[SweepGrid], header: &str) -> Result<String> {
    check_same_axes(grids)?;
    let mut out = comment_block(&format!("{header}{}", grid_metadata(grids)));
    for (b, g) in grids.iter().enumerate() {
        if b > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!("# block {b}: {}\n", g.metric));
        out.push_str(&g.axis2.values.len().to_string());
        for &y in &g.axis2.values {
            out.push(' ');
            out.push_str(&format_f64(y));
        }
        out.push('\n');
        for (x, row) in g.axis1.values.iter().zip(&g.values) {
            out.push_str(&format_f64(*x));
            for &v in row {
                out.push(' ');
                out.push_str(&format_f64(v));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn grids_json(grids: &[SweepGrid]) -> Result<Value> {
    check_same_axes(grids)?;
    Ok(Value::Array(grids.iter().map(serde_json::to_value).collect::<serde_json::Result<Vec<_>>>()?))
}

/// Transition matrix as a table: one row per destination node, one column
/// (classical) or a `_re`/`_im` column pair (quantum) per source node.
pub fn matrix_table<T: Entry + MatrixCell>(t: &TransitionMatrix<T>) -> Table {
    let mut columns = vec!["to".to_string()];
    for j in 0..t.dim() {
        columns.extend(T::column_names(&t.label(j)));
    }
    let mut table = Table { columns, rows: Vec::new() };
    for i in 0..t.dim() {
        let mut row = vec![Cell::Text(t.label(i))];
        for &v in t.row(i) {
            row.extend(v.cells());
        }
        table.rows.push(row);
    }
    table
}

pub trait MatrixCell: Copy {
    fn column_names(label: &str) -> Vec<String>;
    fn cells(self) -> Vec<Cell>;
}

impl MatrixCell for f64 {
    fn column_names(label: &str) -> Vec<String> {
        vec![label.to_string()]
    }

    fn cells(self) -> Vec<Cell> {
        vec![Cell::Num(self)]
    }
}

impl MatrixCell for num_complex::Complex64 {
    fn column_names(label: &str) -> Vec<String> {
        vec![format!("{label}_re"), format!("{label}_im")]
    }

    fn cells(self) -> Vec<Cell> {
        vec![Cell::Num(self.re), Cell::Num(self.im)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{sweep2d, time_grid, Axis, Metric, Param, Regime};
    use crate::graph::{build_chain, classical_transfer_matrix, quantum_transfer_matrix, RingChainSpec};

    #[test]
    fn shortest_round_trip_floats() {
        for x in [0.1, 2.0 / 3.0, 1e-300, 1.0, 0.0, -3.5e22, 1.0 / 3.0] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(1.0), "1.0");
        assert_eq!(format_f64(2.0 / 3.0), "0.6666666666666666");
    }

    #[test]
    fn table_csv_and_json() {
        let mut t = Table::new(["a", "b", "c"]);
        t.push(vec![Cell::from(1.5), Cell::from(3usize), Cell::from(None::<f64>)]).unwrap();
        assert!(t.push(vec![Cell::Empty]).is_err());
        let csv = t.to_csv("key = 1\n").unwrap();
        assert_eq!(csv, "# key = 1\na,b,c\n1.5,3,\n");
        assert_eq!(t.to_json(), json!([{ "a": 1.5, "b": 3, "c": null }]));
    }

    fn small_grid(metric: Metric) -> SweepGrid {
        let spec = RingChainSpec::single(0.5, 0.5, 1.0, 0.0).unwrap();
        sweep2d(
            &spec,
            &Axis::new(Param::coupling(0), 0.0, 1.0, 2),
            &Axis::new(Param::coupling(1), 0.0, 1.0, 3),
            metric,
            None,
        )
        .unwrap()
    }

    #[test]
    fn grid_csv_layout() {
        let csv = grids_csv(&[small_grid(Metric::ClassicalDrop)], "").unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# axis1 (rows): k1 (2 samples"));
        assert_eq!(lines[3], "k1,k2,pcd");
        assert_eq!(lines.len(), 4 + 6);
        assert_eq!(*lines.last().unwrap(), "1.0,1.0,1.0");
    }

    #[test]
    fn gnuplot_layout() {
        let g = small_grid(Metric::ClassicalDrop);
        let out = grids_gnuplot(&[g], "").unwrap();
        let data: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "3 0.0 0.5 1.0");
        assert_eq!(data.len(), 3);
    }

    #[test]
    fn mismatched_axes_rejected() {
        let spec = RingChainSpec::single(0.5, 0.5, 1.0, 0.0).unwrap();
        let tg = time_grid(&spec, &Axis::new(Param::Phase, 0.0, 1.0, 2), 3, Regime::Quantum).unwrap();
        assert!(grids_csv(&[small_grid(Metric::ClassicalDrop), tg], "").is_err());
        assert!(grids_csv(&[], "").is_err());
    }

    #[test]
    fn matrix_tables() {
        let spec = RingChainSpec::single(0.5, 0.25, 1.0, 0.0).unwrap();
        let g = build_chain(&spec).unwrap();
        let c = matrix_table(&classical_transfer_matrix(&g));
        assert_eq!(c.columns.len(), 6);
        assert_eq!(c.rows.len(), 5);
        let q = matrix_table(&quantum_transfer_matrix(&g));
        assert_eq!(q.columns.len(), 11);
        assert_eq!(q.columns[1], format!("{}_re", g.label(0)));
    }

    #[test]
    fn json_document_has_config() {
        let doc = json_document(&json!({"k": 1}), "rows", json!([])).unwrap();
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["config"]["k"], 1);
    }
}
