use std::collections::HashMap;
use std::fmt::Write as _;

/// Test scores of one (split, seed, method) run.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    /// Value of the sweep axis, when the row belongs to a sweep.
    pub axis_value: Option<String>,
    pub setup: String,
    pub method: String,
    pub split_seed: usize,
    pub train_seed: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Row {
    fn key(&self) -> (Option<&str>, &str, &str, usize, usize) {
        (
            self.axis_value.as_deref(),
            self.setup.as_str(),
            self.method.as_str(),
            self.split_seed,
            self.train_seed,
        )
    }
}

/// Mean and standard deviation of F1 (in points) for one method.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub axis_value: Option<String>,
    pub setup: String,
    pub method: String,
    pub runs: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    /// Name of the sweep axis; adds a leading CSV column.
    pub axis: Option<String>,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(axis: Option<String>, mut rows: Vec<Row>) -> Self {
        rows.sort_by(|a, b| a.key().cmp(&b.key()));
        Report { axis, rows }
    }

    /// Concatenates sweep parts in the order given.
    pub fn merge(axis: &str, parts: Vec<Report>) -> Report {
        Report {
            axis: Some(axis.to_string()),
            rows: parts.into_iter().flat_map(|r| r.rows).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(axis) = &self.axis {
            out.push_str(axis);
            out.push(',');
        }
        out.push_str("setup,method,split_seed,train_seed,precision,recall,f1\n");
        for r in &self.rows {
            if self.axis.is_some() {
                out.push_str(r.axis_value.as_deref().unwrap_or(""));
                out.push(',');
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6}",
                r.setup, r.method, r.split_seed, r.train_seed, r.precision, r.recall, r.f1
            );
        }
        out
    }

    /// Per (axis value, setup, method) mean and sample std of F1 x 100.
    pub fn summaries(&self) -> Vec<Summary> {
        // groups in order of first appearance
        let mut order: Vec<(Option<String>, String, String)> = Vec::new();
        let mut groups: HashMap<(Option<String>, String, String), Vec<f64>> = HashMap::new();
        for r in &self.rows {
            let key = (r.axis_value.clone(), r.setup.clone(), r.method.clone());
            if !groups.contains_key(&key) {
                order.push(key.clone());
            }
            groups.entry(key).or_default().push(100.0 * r.f1);
        }
        order
            .into_iter()
            .map(|key| {
                let f1 = groups.remove(&key).expect("grouped");
                (key, f1)
            })
            .map(|((axis_value, setup, method), f1)| {
                let n = f1.len() as f64;
                let mean = f1.iter().sum::<f64>() / n;
                let var = if f1.len() > 1 {
                    f1.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                Summary {
                    axis_value,
                    setup,
                    method,
                    runs: f1.len(),
                    mean_f1: mean,
                    std_f1: var.sqrt(),
                }
            })
            .collect()
    }

    pub fn summary(&self, method: &str) -> Option<Summary> {
        self.summaries().into_iter().find(|s| s.method == method)
    }

    pub fn summary_at(&self, axis_value: &str, method: &str) -> Option<Summary> {
        self.summaries()
            .into_iter()
            .find(|s| s.method == method && s.axis_value.as_deref() == Some(axis_value))
    }

    /// Human-readable table of [`Report::summaries`].
    pub fn summary_table(&self) -> String {
        let axis = self.axis.as_deref().unwrap_or("");
        let mut out = String::new();
        if self.axis.is_some() {
            let _ = write!(out, "{axis:<12} ");
        }
        let _ = writeln!(out, "{:<12} {:<14} {:>5} {:>8} {:>7}", "setup", "method", "runs", "F1", "std");
        for s in self.summaries() {
            if self.axis.is_some() {
                let _ = write!(out, "{:<12} ", s.axis_value.as_deref().unwrap_or(""));
            }
            let _ = writeln!(
                out,
                "{:<12} {:<14} {:>5} {:>8.2} {:>7.2}",
                s.setup, s.method, s.runs, s.mean_f1, s.std_f1
            );
        }
        out
    }
}
