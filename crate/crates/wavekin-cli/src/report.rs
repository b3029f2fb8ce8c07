//! Aggregation of CSV artifacts. The schema of each input is recognised
//! from its header; summaries go to `summary.json` and a long-format
//! `summary.csv` (`table,key,metric,value`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use wavekin::counting::fit_exponents;
use wavekin::{Error, Result};

use crate::manifest::Run;

struct Schema {
    name: &'static str,
    columns: &'static [&'static str],
    /// Columns holding text rather than numbers.
    text: &'static [&'static str],
}

const SCHEMAS: &[Schema] = &[
    Schema {
        name: "counting",
        columns: &["problemId", "family", "L", "T", "sigma", "D", "k", "beta", "count", "bound", "ratio"],
        text: &["problemId", "family"],
    },
    Schema { name: "residuals", columns: &["L", "sigma", "t", "tau", "k", "shift", "se", "kinetic", "residual"], text: &[] },
    Schema {
        name: "ensemble",
        columns: &["t", "k", "meanSq", "se", "meanChange", "seChange", "meanReduced", "seReduced"],
        text: &[],
    },
    Schema { name: "kernel", columns: &["xi", "value"], text: &[] },
    Schema { name: "k2", columns: &["k", "k2", "ratio", "kinetic"], text: &[] },
    Schema {
        name: "identities",
        columns: &["molecule", "n", "m3", "m2", "m0", "m1", "m4", "check", "lhs", "rhs", "holds"],
        text: &["check", "holds"],
    },
    Schema { name: "twistSum", columns: &["q", "h", "ks", "relErr", "pass"], text: &["ks", "pass"] },
    Schema { name: "fiveVector", columns: &["L", "T", "oracle", "boxCount", "overTarget"], text: &[] },
    Schema { name: "enumerate", columns: &["order", "couples", "expected"], text: &[] },
];

/// Parsed table: numeric columns by name, text columns kept verbatim.
struct Table {
    schema: &'static Schema,
    num: BTreeMap<&'static str, Vec<f64>>,
    text: BTreeMap<&'static str, Vec<String>>,
    rows: usize,
}

impl Table {
    fn col(&self, c: &str) -> &[f64] {
        &self.num[c]
    }
}

fn detect(path: &Path, header: &[String]) -> Result<&'static Schema> {
    let overlap = |s: &Schema| header.iter().filter(|h| s.columns.contains(&h.as_str())).count();
    let best = SCHEMAS.iter().max_by_key(|s| (overlap(s), std::cmp::Reverse(s.columns.len().abs_diff(header.len()))));
    let best = best.filter(|s| overlap(s) > 0).ok_or_else(|| {
        Error::Data(format!("{}: unrecognised column `{}`", path.display(), header.first().map_or("", String::as_str)))
    })?;
    if let Some(m) = best.columns.iter().find(|c| !header.iter().any(|h| h == *c)) {
        return Err(Error::Data(format!("{}: missing column `{m}` for a {} table", path.display(), best.name)));
    }
    if let Some(x) = header.iter().find(|h| !best.columns.contains(&h.as_str())) {
        return Err(Error::Data(format!("{}: unexpected column `{x}` in a {} table", path.display(), best.name)));
    }
    Ok(best)
}

fn load(path: &Path) -> Result<Table> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let header: Vec<String> =
        rd.headers().map_err(|e| Error::Data(format!("{}: {e}", path.display())))?.iter().map(str::to_string).collect();
    let schema = detect(path, &header)?;
    let mut t = Table { schema, num: BTreeMap::new(), text: BTreeMap::new(), rows: 0 };
    for c in schema.columns {
        if schema.text.contains(c) {
            t.text.insert(c, Vec::new());
        } else {
            t.num.insert(c, Vec::new());
        }
    }
    for (r, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("{}: row {}: {e}", path.display(), r + 1)))?;
        for (h, v) in header.iter().zip(rec.iter()) {
            let c = *schema.columns.iter().find(|c| *c == h).expect("detected");
            if let Some(col) = t.text.get_mut(c) {
                col.push(v.to_string());
            } else {
                let x: f64 = v.trim().parse().map_err(|_| {
                    Error::Data(format!("{}: column `{c}`, row {}: cannot parse `{v}`", path.display(), r + 1))
                })?;
                t.num.get_mut(c).expect("numeric").push(x);
            }
        }
        t.rows += 1;
    }
    Ok(t)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Check {
    name: String,
    pass: bool,
}

#[derive(Default, Serialize)]
#[serde(rename_all = "camelCase")]
struct Summary {
    inputs: Vec<String>,
    /// `table -> key -> metric -> value`.
    tables: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
    checks: Vec<Check>,
}

impl Summary {
    fn put(&mut self, table: &str, key: impl Into<String>, metric: &str, v: f64) {
        self.tables.entry(table.into()).or_default().entry(key.into()).or_default().insert(metric.into(), v);
    }

    fn check(&mut self, name: String, pass: bool) {
        self.checks.push(Check { name, pass });
    }
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

fn summarize(t: &Table, file: &str, s: &mut Summary) -> Result<()> {
    match t.schema.name {
        "counting" => {
            let mut best: BTreeMap<(String, i64), f64> = BTreeMap::new();
            for i in 0..t.rows {
                let e = best.entry((t.text["family"][i].clone(), t.col("L")[i] as i64)).or_insert(0.0);
                *e = e.max(t.col("ratio")[i]);
            }
            for ((fam, l), r) in best {
                s.put("countingMaxRatio", format!("{fam}/L={l}"), "maxRatio", r);
            }
        }
        "residuals" => {
            // sup_k |residual| / tau per (sigma, t, L), then the trend in L
            let mut sup: BTreeMap<(String, String), BTreeMap<i64, f64>> = BTreeMap::new();
            for i in 0..t.rows {
                let tau = t.col("tau")[i];
                if tau <= 0.0 {
                    continue;
                }
                let key = (t.col("sigma")[i].to_string(), t.col("t")[i].to_string());
                let e = sup.entry(key).or_default().entry(t.col("L")[i] as i64).or_insert(0.0);
                *e = e.max(t.col("residual")[i].abs() / tau);
            }
            for ((sigma, time), by_l) in sup {
                for (l, r) in &by_l {
                    s.put("residualTrend", format!("sigma={sigma}/t={time}/L={l}"), "supRatio", *r);
                }
                if by_l.len() >= 2 {
                    let v: Vec<f64> = by_l.values().copied().collect();
                    s.check(format!("residual decreasing in L (sigma={sigma}, t={time})"), v.windows(2).all(|w| w[1] < w[0]));
                }
            }
        }
        "ensemble" => {
            let mut by_t: BTreeMap<String, (f64, f64)> = BTreeMap::new();
            for i in 0..t.rows {
                let e = by_t.entry(t.col("t")[i].to_string()).or_insert((0.0, 0.0));
                e.0 = e.0.max(t.col("meanReduced")[i].abs());
                e.1 = e.1.max(t.col("seReduced")[i]);
            }
            for (time, (m, se)) in by_t {
                s.put("ensemble", format!("{file}/t={time}"), "maxAbsShift", m);
                s.put("ensemble", format!("{file}/t={time}"), "maxSe", se);
            }
        }
        "kernel" => {
            let (xi, v) = (t.col("xi"), t.col("value"));
            let mass: f64 = xi.windows(2).zip(v.windows(2)).map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0).sum();
            s.put("kernel", file, "supAbs", max_abs(v.iter().copied()));
            s.put("kernel", file, "trapezoidMass", mass);
        }
        "k2" => {
            s.put("k2", file, "supAbsRatio", max_abs(t.col("ratio").iter().copied()));
            let kin = max_abs(t.col("kinetic").iter().copied());
            if kin > 0.0 {
                let err = max_abs(t.col("ratio").iter().zip(t.col("kinetic")).map(|(r, k)| r - k));
                s.put("k2", file, "relErrorToKernel", err / kin);
            }
        }
        "identities" => {
            let fails = t.text["holds"].iter().filter(|h| h.as_str() != "true").count();
            let mols = t.col("molecule").iter().fold(-1.0f64, |m, x| m.max(*x)) + 1.0;
            s.put("identities", file, "molecules", mols);
            s.put("identities", file, "failedChecks", fails as f64);
            s.check(format!("count identities ({file})"), fails == 0);
        }
        "twistSum" => {
            s.put("twistSum", file, "maxRelErr", max_abs(t.col("relErr").iter().copied()));
            s.check(format!("twist-sum factorization ({file})"), t.text["pass"].iter().all(|p| p == "true"));
        }
        "fiveVector" => {
            let pts: Vec<(f64, f64, f64)> =
                (0..t.rows).map(|i| (t.col("L")[i], t.col("T")[i], t.col("oracle")[i])).collect();
            if let Ok((_, a, b)) = fit_exponents(&pts) {
                s.put("fiveVector", file, "lExponent", a);
                s.put("fiveVector", file, "tExponent", b);
            }
            s.check(format!("oracle dominates the box ({file})"), (0..t.rows).all(|i| t.col("oracle")[i] >= t.col("boxCount")[i]));
        }
        "enumerate" => {
            s.check(format!("couple counts ({file})"), (0..t.rows).all(|i| t.col("couples")[i] == t.col("expected")[i]));
        }
        _ => unreachable!("schema list and summaries agree"),
    }
    Ok(())
}

pub fn report(inputs: &[PathBuf], run: &mut Run) -> Result<()> {
    run.config = json!({ "inputs": inputs });
    let mut s = Summary::default();
    // residual tables from several runs are pooled so the trend spans L
    let mut pooled: Option<Table> = None;
    for p in inputs {
        let t = load(p)?;
        let file = p.file_name().map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned());
        s.inputs.push(p.display().to_string());
        if t.schema.name == "residuals" {
            match &mut pooled {
                None => pooled = Some(t),
                Some(acc) => {
                    for (c, v) in t.num {
                        acc.num.get_mut(c).expect("same schema").extend(v);
                    }
                    acc.rows += t.rows;
                }
            }
        } else {
            summarize(&t, &file, &mut s)?;
        }
    }
    if let Some(t) = pooled {
        summarize(&t, "residuals", &mut s)?;
    }
    let mut csv = String::from("table,key,metric,value\n");
    for (table, keys) in &s.tables {
        for (key, metrics) in keys {
            for (m, v) in metrics {
                writeln!(csv, "{table},{key},{m},{v:e}").unwrap();
            }
        }
    }
    for c in &s.checks {
        writeln!(csv, "checks,{},pass,{}", c.name.replace(',', ";"), u8::from(c.pass)).unwrap();
    }
    run.text("summary.csv", &csv)?;
    run.json("summary.json", &s)?;
    Ok(())
}
