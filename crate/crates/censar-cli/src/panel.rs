//! Dyadic panel ingestion: a flows CSV (`year,exporter,importer,value`) and
//! a covariates CSV (`year,exporter,importer,<names...>`). Flows absent
//! from the file are zeros, i.e. censored; the per-year threshold is the
//! log of the smallest strictly positive flow.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use censar::mcem::CensoredNetwork;
use censar::net::EdgeIndex;
use ndarray::{Array1, Array2};

use crate::{CliError, CliResult};

/// One year's ingested slice.
#[derive(Debug, Clone)]
pub struct YearData {
    pub year: i64,
    /// Raw flow value per slot (zero = censored).
    pub flows: Vec<f64>,
    /// Design matrix rows in slot order.
    pub design: Array2<f64>,
}

/// Validated multi-year panel.
#[derive(Debug, Clone)]
pub struct DyadicPanel {
    pub nodes: Vec<String>,
    pub covariate_names: Vec<String>,
    pub years: Vec<i64>,
    data: BTreeMap<i64, YearData>,
}

impl DyadicPanel {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.n() * (self.n() - 1)
    }

    pub fn year_data(&self, year: i64) -> &YearData {
        &self.data[&year]
    }

    pub fn edge_index(&self) -> EdgeIndex {
        EdgeIndex::new(self.n()).expect("validated panel has n >= 2")
    }

    /// Log-transform one year into a censored network: observed slots carry
    /// `log(flow)`, absent flows are censored at `c = log(min positive
    /// flow)`.
    pub fn censored_network(&self, year: i64) -> CliResult<CensoredNetwork> {
        let yd = self
            .data
            .get(&year)
            .ok_or_else(|| CliError::Data(format!("year {year} not present in the panel")))?;
        let ne = self.num_edges();
        let mut y = Array1::zeros(ne);
        let mut observed = vec![false; ne];
        let mut min_pos = f64::INFINITY;
        for (s, &v) in yd.flows.iter().enumerate() {
            if v > 0.0 {
                observed[s] = true;
                y[s] = v.ln();
                min_pos = min_pos.min(v);
            }
        }
        if !min_pos.is_finite() {
            return Err(CliError::Data(format!(
                "year {year} has no strictly positive flows; the threshold is undefined"
            )));
        }
        let c = min_pos.ln();
        CensoredNetwork::new(
            self.edge_index(),
            y,
            observed,
            c,
            yd.design.clone(),
            self.covariate_names.clone(),
        )
        .map_err(|e| CliError::Data(format!("year {year}: {e}")))
    }
}

fn open_reader(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))
}

fn parse_f64(field: &str, what: &str, line: u64, path: &Path) -> CliResult<f64> {
    field.parse::<f64>().map_err(|_| {
        CliError::Data(format!(
            "{}:{line}: cannot parse {what} value '{field}'",
            path.display()
        ))
    })
}

/// Load and validate a panel from the two CSV files.
///
/// Hard errors (with file and line): self-loops, unknown node labels,
/// negative or non-finite flows, duplicate keys, missing or surplus
/// covariate rows.
pub fn load_panel(flows_path: &Path, covariates_path: &Path) -> CliResult<DyadicPanel> {
    // Pass 1 over covariates: node labels, years, covariate names.
    let mut reader = open_reader(covariates_path)?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Io(format!("{}: {e}", covariates_path.display())))?
        .clone();
    let cols: Vec<String> = headers.iter().map(|s| s.to_string()).collect();
    if cols.len() < 4 || cols[0] != "year" || cols[1] != "exporter" || cols[2] != "importer" {
        return Err(CliError::Data(format!(
            "{}: header must start with year,exporter,importer and carry at least one covariate",
            covariates_path.display()
        )));
    }
    let covariate_names: Vec<String> = cols[3..].to_vec();
    let p = covariate_names.len();

    struct CovRow {
        year: i64,
        exporter: String,
        importer: String,
        values: Vec<f64>,
        line: u64,
    }
    let mut rows: Vec<CovRow> = Vec::new();
    let mut nodes: BTreeSet<String> = BTreeSet::new();
    let mut years: BTreeSet<i64> = BTreeSet::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Io(format!("{}: {e}", covariates_path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 + p {
            return Err(CliError::Data(format!(
                "{}:{line}: expected {} fields, found {}",
                covariates_path.display(),
                3 + p,
                rec.len()
            )));
        }
        let year: i64 = rec[0].parse().map_err(|_| {
            CliError::Data(format!(
                "{}:{line}: cannot parse year '{}'",
                covariates_path.display(),
                &rec[0]
            ))
        })?;
        let exporter = rec[1].to_string();
        let importer = rec[2].to_string();
        if exporter == importer {
            return Err(CliError::Data(format!(
                "{}:{line}: self-loop {exporter}->{importer}",
                covariates_path.display()
            )));
        }
        let mut values = Vec::with_capacity(p);
        for (k, name) in covariate_names.iter().enumerate() {
            let v = parse_f64(&rec[3 + k], name, line, covariates_path)?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "{}:{line}: non-finite covariate {name}",
                    covariates_path.display()
                )));
            }
            values.push(v);
        }
        nodes.insert(exporter.clone());
        nodes.insert(importer.clone());
        years.insert(year);
        rows.push(CovRow {
            year,
            exporter,
            importer,
            values,
            line,
        });
    }
    if nodes.len() < 3 {
        return Err(CliError::Data(format!(
            "{}: need at least 3 nodes, found {}",
            covariates_path.display(),
            nodes.len()
        )));
    }
    let nodes: Vec<String> = nodes.into_iter().collect();
    let node_id: HashMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let n = nodes.len();
    let idx = EdgeIndex::new(n).expect("n >= 3");
    let ne = idx.num_edges();

    // Pass 2: place covariate rows, demanding uniqueness and completeness.
    let mut design: BTreeMap<i64, (Array2<f64>, Vec<bool>)> = years
        .iter()
        .map(|&y| (y, (Array2::zeros((ne, p)), vec![false; ne])))
        .collect();
    for row in rows {
        let i = node_id[row.exporter.as_str()];
        let j = node_id[row.importer.as_str()];
        let slot = idx.slot(i, j);
        let (x, seen) = design.get_mut(&row.year).unwrap();
        if seen[slot] {
            return Err(CliError::Data(format!(
                "{}:{}: duplicate covariate row for ({}, {}, {})",
                covariates_path.display(),
                row.line,
                row.year,
                row.exporter,
                row.importer
            )));
        }
        seen[slot] = true;
        for (k, v) in row.values.iter().enumerate() {
            x[[slot, k]] = *v;
        }
    }
    for (&year, (_, seen)) in &design {
        if let Some(slot) = seen.iter().position(|&s| !s) {
            let (i, j) = idx.pair(slot);
            return Err(CliError::Data(format!(
                "{}: year {year} is missing the covariate row for ({}, {})",
                covariates_path.display(),
                nodes[i],
                nodes[j]
            )));
        }
    }

    // Flows: validate against the node set and fill per-year values.
    let mut flows: BTreeMap<i64, Vec<f64>> = years.iter().map(|&y| (y, vec![0.0; ne])).collect();
    let mut seen_flow: BTreeMap<i64, Vec<bool>> =
        years.iter().map(|&y| (y, vec![false; ne])).collect();
    let mut reader = open_reader(flows_path)?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Io(format!("{}: {e}", flows_path.display())))?
        .clone();
    let fcols: Vec<&str> = headers.iter().collect();
    if fcols != ["year", "exporter", "importer", "value"] {
        return Err(CliError::Data(format!(
            "{}: header must be year,exporter,importer,value",
            flows_path.display()
        )));
    }
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Io(format!("{}: {e}", flows_path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let year: i64 = rec[0].parse().map_err(|_| {
            CliError::Data(format!(
                "{}:{line}: cannot parse year '{}'",
                flows_path.display(),
                &rec[0]
            ))
        })?;
        let exporter = &rec[1];
        let importer = &rec[2];
        if exporter == importer {
            return Err(CliError::Data(format!(
                "{}:{line}: self-loop {exporter}->{importer}",
                flows_path.display()
            )));
        }
        let (Some(&i), Some(&j)) = (node_id.get(exporter), node_id.get(importer)) else {
            return Err(CliError::Data(format!(
                "{}:{line}: unknown node label in {exporter}->{importer} \
                 (labels must appear in the covariates file)",
                flows_path.display()
            )));
        };
        let value = parse_f64(&rec[3], "flow", line, flows_path)?;
        if !value.is_finite() || value < 0.0 {
            return Err(CliError::Data(format!(
                "{}:{line}: flow must be finite and non-negative, got {value}",
                flows_path.display()
            )));
        }
        let Some(per_year) = flows.get_mut(&year) else {
            return Err(CliError::Data(format!(
                "{}:{line}: year {year} has no covariate rows",
                flows_path.display()
            )));
        };
        let slot = idx.slot(i, j);
        let seen = seen_flow.get_mut(&year).unwrap();
        if seen[slot] {
            return Err(CliError::Data(format!(
                "{}:{line}: duplicate flow for ({year}, {exporter}, {importer})",
                flows_path.display()
            )));
        }
        seen[slot] = true;
        per_year[slot] = value;
    }

    let data: BTreeMap<i64, YearData> = years
        .iter()
        .map(|&year| {
            (
                year,
                YearData {
                    year,
                    flows: flows[&year].clone(),
                    design: design[&year].0.clone(),
                },
            )
        })
        .collect();
    Ok(DyadicPanel {
        nodes,
        covariate_names,
        years: years.into_iter().collect(),
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &std::path::Path, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn toy_covariates() -> String {
        let mut s = String::from("year,exporter,importer,intercept,dist\n");
        for (e, i, d) in [
            ("A", "B", 0.5),
            ("A", "C", 1.5),
            ("B", "A", 0.7),
            ("B", "C", 1.1),
            ("C", "A", 0.9),
            ("C", "B", 1.3),
        ] {
            s.push_str(&format!("2000,{e},{i},1.0,{d}\n"));
        }
        s
    }

    #[test]
    fn toy_panel_thresholds_and_counts() {
        let dir = tempfile::tempdir().unwrap();
        let f = write_file(
            dir.path(),
            "flows.csv",
            &format!(
                "year,exporter,importer,value\n2000,A,B,{}\n2000,A,C,{}\n",
                std::f64::consts::E * std::f64::consts::E,
                std::f64::consts::E
            ),
        );
        let c = write_file(dir.path(), "cov.csv", &toy_covariates());
        let panel = load_panel(&f, &c).unwrap();
        assert_eq!(panel.nodes, vec!["A", "B", "C"]);
        assert_eq!(panel.num_edges(), 6);
        let net = panel.censored_network(2000).unwrap();
        assert!((net.threshold() - 1.0).abs() < 1e-12);
        assert_eq!(net.n_observed(), 2);
        assert_eq!(net.n_missing(), 4);
        let idx = panel.edge_index();
        assert!((net.response()[idx.slot(0, 1)] - 2.0).abs() < 1e-12);
        assert!((net.response()[idx.slot(0, 2)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn self_loop_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let f = write_file(
            dir.path(),
            "flows.csv",
            "year,exporter,importer,value\n2000,A,A,3.0\n",
        );
        let c = write_file(dir.path(), "cov.csv", &toy_covariates());
        let err = load_panel(&f, &c).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:"), "message must name the row: {msg}");
        assert!(msg.contains("self-loop"));
    }

    #[test]
    fn negative_flow_duplicate_and_unknown_label_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_file(dir.path(), "cov.csv", &toy_covariates());
        for (content, needle) in [
            (
                "year,exporter,importer,value\n2000,A,B,-1.0\n",
                "non-negative",
            ),
            (
                "year,exporter,importer,value\n2000,A,B,1.0\n2000,A,B,2.0\n",
                "duplicate",
            ),
            (
                "year,exporter,importer,value\n2000,A,Z,1.0\n",
                "unknown node label",
            ),
        ] {
            let f = write_file(dir.path(), "flows.csv", content);
            let err = load_panel(&f, &c).unwrap_err();
            assert!(
                err.to_string().contains(needle),
                "expected '{needle}' in '{err}'"
            );
        }
    }

    #[test]
    fn missing_covariate_row_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut cov = toy_covariates();
        cov = cov.replace("2000,C,B,1.0,1.3\n", "");
        let c = write_file(dir.path(), "cov.csv", &cov);
        let f = write_file(
            dir.path(),
            "flows.csv",
            "year,exporter,importer,value\n2000,A,B,1.0\n",
        );
        let err = load_panel(&f, &c).unwrap_err();
        assert!(err.to_string().contains("missing the covariate row"));
        assert!(err.to_string().contains("(C, B)"));
    }

    #[test]
    fn empirical_scale_shape() {
        // 59 nodes, 22 years: N = 3422 slots per year.
        let dir = tempfile::tempdir().unwrap();
        let nodes: Vec<String> = (0..59).map(|k| format!("N{k:02}")).collect();
        let mut cov = String::from("year,exporter,importer,x1\n");
        let mut flows = String::from("year,exporter,importer,value\n");
        for year in 1993..2015 {
            for (a, ea) in nodes.iter().enumerate() {
                for (b, eb) in nodes.iter().enumerate() {
                    if a == b {
                        continue;
                    }
                    cov.push_str(&format!("{year},{ea},{eb},{}\n", (a + 2 * b) % 7));
                    if (a * 31 + b * 17 + year as usize) % 3 == 0 {
                        flows.push_str(&format!(
                            "{year},{ea},{eb},{}\n",
                            1.0 + ((a * b + year as usize) % 50) as f64
                        ));
                    }
                }
            }
        }
        let f = write_file(dir.path(), "flows.csv", &flows);
        let c = write_file(dir.path(), "cov.csv", &cov);
        let panel = load_panel(&f, &c).unwrap();
        assert_eq!(panel.n(), 59);
        assert_eq!(panel.num_edges(), 3422);
        assert_eq!(panel.years.len(), 22);
        let net = panel.censored_network(1993).unwrap();
        assert_eq!(net.num_edges(), 3422);
    }
}
