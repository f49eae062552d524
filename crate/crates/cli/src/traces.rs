//! CSV trace files: a header row of port names, then one time step per row.
//! Vector ports spread over columns `p[0]`, `p[1]`, ...

use std::collections::BTreeMap;
use std::path::Path;

use opwire::{Interface, Side, Valuation, ValueType};

/// Input rows as read from disk, keyed by column name.
pub struct TraceFile {
    columns: BTreeMap<String, usize>,
    rows: Vec<Vec<String>>,
}

impl TraceFile {
    pub fn read(path: &Path) -> Result<TraceFile, String> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        let headers = reader.headers().map_err(|e| format!("{}: {e}", path.display()))?.clone();
        let mut columns = BTreeMap::new();
        for (i, h) in headers.iter().enumerate() {
            if h.is_empty() {
                continue;
            }
            if columns.insert(h.to_string(), i).is_some() {
                return Err(format!("{}: duplicate column `{h}`", path.display()));
            }
        }
        let mut rows = Vec::new();
        for (n, record) in reader.records().enumerate() {
            let record = record.map_err(|e| format!("{}: {e}", path.display()))?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            rows.push(record.iter().map(str::to_string).collect());
            if rows.last().map(Vec::len) != Some(headers.len()) {
                return Err(format!("{}: row {} has the wrong number of fields", path.display(), n + 2));
            }
        }
        Ok(TraceFile { columns, rows })
    }

    /// Number of steps: the row count, or `horizon` when given. Rows past the
    /// horizon are dropped; a short file repeats its last row.
    fn steps(&self, horizon: Option<usize>) -> Result<Vec<&[String]>, String> {
        let n = horizon.unwrap_or(self.rows.len());
        if n > 0 && self.rows.is_empty() {
            return Err("input trace has no rows".into());
        }
        Ok((0..n).map(|t| self.rows[t.min(self.rows.len() - 1)].as_slice()).collect())
    }

    fn cell<'a>(&self, row: &'a [String], column: &str) -> Result<&'a str, String> {
        let i = self
            .columns
            .get(column)
            .ok_or_else(|| format!("input trace has no column `{column}`"))?;
        Ok(&row[*i])
    }

    fn check_columns(&self, expected: &[String]) -> Result<(), String> {
        if let Some(extra) = self.columns.keys().find(|c| !expected.contains(c)) {
            return Err(format!("input trace column `{extra}` is not an outer input"));
        }
        Ok(())
    }

    /// Label-valued inputs for a finite interface.
    pub fn finite_inputs(&self, iface: &Interface, horizon: Option<usize>) -> Result<Vec<Valuation>, String> {
        self.check_columns(&columns(iface, Side::Input))?;
        if iface.inputs.is_empty() {
            return Ok(vec![Vec::new(); horizon.unwrap_or(self.rows.len())]);
        }
        self.steps(horizon)?
            .into_iter()
            .enumerate()
            .map(|(t, row)| {
                iface
                    .inputs
                    .iter()
                    .map(|p| {
                        let text = self.cell(row, &p.name)?;
                        let labels = p.ty.labels().unwrap_or(&[]);
                        labels
                            .iter()
                            .position(|l| l == text)
                            .ok_or_else(|| format!("step {t}: `{text}` is not a value of port `{}` ({})", p.name, p.ty))
                    })
                    .collect()
            })
            .collect()
    }

    /// Packed real input vectors for a real interface.
    pub fn real_inputs(&self, iface: &Interface, horizon: Option<usize>) -> Result<Vec<Vec<f64>>, String> {
        let names = columns(iface, Side::Input);
        self.check_columns(&names)?;
        if names.is_empty() {
            return Ok(vec![Vec::new(); horizon.unwrap_or(self.rows.len())]);
        }
        self.steps(horizon)?
            .into_iter()
            .enumerate()
            .map(|(t, row)| {
                names
                    .iter()
                    .map(|c| {
                        let text = self.cell(row, c)?;
                        let v: f64 = text.parse().map_err(|_| format!("step {t}: `{text}` in column `{c}` is not a number"))?;
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(format!("step {t}: column `{c}` is not finite"))
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Column names of one side, in packing order.
pub fn columns(iface: &Interface, side: Side) -> Vec<String> {
    let mut out = Vec::new();
    for p in iface.ports(side) {
        match p.ty {
            ValueType::RealVector(n) => out.extend((0..n).map(|i| format!("{}[{i}]", p.name))),
            _ => out.push(p.name.clone()),
        }
    }
    out
}

pub fn write_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut full = vec!["t".to_string()];
    full.extend(header.iter().cloned());
    w.write_record(&full).expect("in-memory write");
    for (t, row) in rows.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().cloned());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
