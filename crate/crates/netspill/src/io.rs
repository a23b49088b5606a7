//! Edge lists, node data, and estimate tables.
//!
//! * edges: `from,to`
//! * data: `id,exposure,outcome,z1,...,zp`; an empty or `NA` outcome is missing
//! * results: `estimator,effect,alpha1,alpha0,estimate,se,ci_lo,ci_hi`

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use netspill_core::data::StudyData;
use netspill_core::estimator::{EffectEstimate, EffectKind, EstimatorKind};
use netspill_core::graph::Network;
use netspill_core::Error;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(r)
}

fn csv_error(what: &str, err: csv::Error) -> CliError {
    CliError::validation("PARSE_ERROR", format!("{what}: {err}"))
}

fn open(path: &Path) -> CliResult<std::fs::File> {
    std::fs::File::open(path).map_err(|e| CliError::io(path, e))
}

/// Parses a `from,to` edge list.
pub fn parse_edges<R: Read>(r: R) -> CliResult<Network> {
    let mut rows = Vec::new();
    for (i, rec) in reader(r).records().enumerate() {
        let rec = rec.map_err(|e| csv_error("edges", e))?;
        if rec.len() < 2 {
            return Err(CliError::validation(
                "PARSE_ERROR",
                format!("edges row {}: expected 2 fields, got {}", i + 1, rec.len()),
            ));
        }
        rows.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(Network::from_edges(rows)?)
}

pub fn read_edges(path: &Path) -> CliResult<Network> {
    parse_edges(open(path)?)
}

pub fn write_edges<W: Write>(w: W, net: &Network) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["from", "to"]).map_err(|e| csv_error("edges", e))?;
    for (i, j) in net.edges() {
        out.write_record([net.id(i), net.id(j)]).map_err(|e| csv_error("edges", e))?;
    }
    out.flush().map_err(|e| CliError::runtime("IO_ERROR", e.to_string()))
}

/// Node records as read from a data file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub ids: Vec<String>,
    pub exposure: Vec<bool>,
    pub outcome: Vec<Option<f64>>,
    pub covariates: Vec<Vec<f64>>,
    pub covariate_names: Vec<String>,
}

impl DataTable {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field.eq_ignore_ascii_case("na") || field.eq_ignore_ascii_case("nan")
}

pub fn parse_data<R: Read>(r: R) -> CliResult<DataTable> {
    let mut rdr = reader(r);
    let header = rdr.headers().map_err(|e| csv_error("data", e))?.clone();
    if header.len() == 0 || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyInput.into());
    }
    let expected = ["id", "exposure", "outcome"];
    if header.len() < 3 || (0..3).any(|k| !header[k].eq_ignore_ascii_case(expected[k])) {
        return Err(CliError::validation(
            "BAD_HEADER",
            format!("data header must start with id,exposure,outcome; got {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }
    let covariate_names: Vec<String> = header.iter().skip(3).map(String::from).collect();
    let mut table = DataTable {
        ids: Vec::new(),
        exposure: Vec::new(),
        outcome: Vec::new(),
        covariates: Vec::new(),
        covariate_names,
    };
    let mut seen = BTreeSet::new();
    for (row0, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error("data", e))?;
        let row = row0 + 1;
        if rec.len() != header.len() {
            return Err(CliError::validation(
                "PARSE_ERROR",
                format!("data row {row}: expected {} fields, got {}", header.len(), rec.len()),
            ));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(Error::EmptyId { row }.into());
        }
        if !seen.insert(id.clone()) {
            return Err(CliError::validation("DUPLICATE_ID", format!("data row {row}: node `{id}` repeated")));
        }
        let number = |field: &str, what: &str| -> CliResult<f64> {
            field.parse::<f64>().map_err(|_| {
                CliError::validation("PARSE_ERROR", format!("data row {row}: {what} `{field}` is not a number"))
            })
        };
        let a = number(&rec[1], "exposure")?;
        let exposed = match a {
            v if v == 0.0 => false,
            v if v == 1.0 => true,
            value => return Err(Error::NonBinaryExposure { node: id, value }.into()),
        };
        let outcome = if is_missing(&rec[2]) { None } else { Some(number(&rec[2], "outcome")?) };
        let mut z = Vec::with_capacity(header.len() - 3);
        for field in rec.iter().skip(3) {
            let v = if is_missing(field) { f64::NAN } else { number(field, "covariate")? };
            if !v.is_finite() {
                return Err(Error::NonFinite { node: id }.into());
            }
            z.push(v);
        }
        if outcome.is_some_and(|y| !y.is_finite()) {
            return Err(Error::NonFinite { node: id }.into());
        }
        table.ids.push(id);
        table.exposure.push(exposed);
        table.outcome.push(outcome);
        table.covariates.push(z);
    }
    if table.is_empty() {
        return Err(Error::EmptyInput.into());
    }
    Ok(table)
}

pub fn read_data(path: &Path) -> CliResult<DataTable> {
    parse_data(open(path)?)
}

pub fn write_data<W: Write>(w: W, table: &DataTable) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["id".to_string(), "exposure".into(), "outcome".into()];
    header.extend(table.covariate_names.iter().cloned());
    out.write_record(&header).map_err(|e| csv_error("data", e))?;
    for i in 0..table.len() {
        let mut rec = vec![
            table.ids[i].clone(),
            u8::from(table.exposure[i]).to_string(),
            table.outcome[i].map_or_else(|| "NA".to_string(), |y| y.to_string()),
        ];
        rec.extend(table.covariates[i].iter().map(|v| v.to_string()));
        out.write_record(&rec).map_err(|e| csv_error("data", e))?;
    }
    out.flush().map_err(|e| CliError::runtime("IO_ERROR", e.to_string()))
}

/// Network and data restricted to analyzable nodes.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub network: Network,
    pub data: StudyData,
    /// Data rows with no edges, plus nodes left without neighbors once
    /// missing-outcome nodes are removed.
    pub excluded_isolates: usize,
    pub dropped_missing_outcome: usize,
}

/// Aligns data rows with the network. Nodes whose outcome is missing are
/// removed from the network; nodes without neighbors are excluded.
pub fn prepare(net: &Network, table: &DataTable) -> CliResult<Prepared> {
    let row_of: BTreeMap<&str, usize> = table.ids.iter().enumerate().map(|(r, id)| (id.as_str(), r)).collect();
    if let Some(i) = (0..net.n()).find(|&i| !row_of.contains_key(net.id(i))) {
        return Err(CliError::validation(
            "MISSING_DATA_ROW",
            format!("node `{}` appears in the edge list but not in the data", net.id(i)),
        ));
    }
    let mut isolates = table.ids.iter().filter(|id| net.index_of(id).is_none()).count();
    let keep: Vec<bool> = (0..net.n()).map(|i| table.outcome[row_of[net.id(i)]].is_some()).collect();
    let dropped = keep.iter().filter(|k| !**k).count();
    let mut reduced = net.induced(&keep);
    let stranded: Vec<bool> = (0..reduced.n()).map(|i| reduced.degree(i) > 0).collect();
    let stranded_count = stranded.iter().filter(|k| !**k).count();
    if stranded_count > 0 {
        isolates += stranded_count;
        reduced = reduced.induced(&stranded);
    }
    if reduced.n() == 0 {
        return Err(Error::EmptyInput.into());
    }
    let rows: Vec<usize> = (0..reduced.n()).map(|i| row_of[reduced.id(i)]).collect();
    let data = StudyData::new(
        rows.iter().map(|&r| table.exposure[r]).collect(),
        rows.iter().map(|&r| table.outcome[r].expect("kept nodes have outcomes")).collect(),
        rows.iter().map(|&r| table.covariates[r].clone()).collect(),
    )?;
    data.validate(&reduced)?;
    Ok(Prepared {
        network: reduced,
        data,
        excluded_isolates: isolates,
        dropped_missing_outcome: dropped,
    })
}

/// Formats `x` with `digits` significant digits, trimming trailing zeros.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NA".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        let s = format!("{:.*e}", digits - 1, x);
        let (mant, e) = s.split_once('e').expect("scientific format");
        return format!("{}e{e}", trim_zeros(mant));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One results row; the serialized form of [`EffectEstimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub estimator: String,
    pub effect: String,
    pub alpha1: f64,
    pub alpha0: f64,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub const RESULT_HEADER: [&str; 8] = ["estimator", "effect", "alpha1", "alpha0", "estimate", "se", "ci_lo", "ci_hi"];

fn to_estimate(estimator: &str, effect: &str, nums: [f64; 6]) -> CliResult<EffectEstimate> {
    let bad = |what: &str, v: &str| CliError::validation("PARSE_ERROR", format!("unknown {what} `{v}`"));
    Ok(EffectEstimate {
        estimator: EstimatorKind::parse(estimator).ok_or_else(|| bad("estimator", estimator))?,
        kind: EffectKind::parse(effect).ok_or_else(|| bad("effect", effect))?,
        alpha1: nums[0],
        alpha0: nums[1],
        estimate: nums[2],
        se: nums[3],
        ci: (nums[4], nums[5]),
    })
}

/// Writes results with 6 significant digits, after `# key=value` comment lines.
pub fn write_results_csv<W: Write>(mut w: W, meta: &[(String, String)], rows: &[EffectEstimate]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::runtime("IO_ERROR", e.to_string());
    for (k, v) in meta {
        writeln!(w, "# {k}={v}").map_err(io)?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULT_HEADER).map_err(|e| csv_error("results", e))?;
    for r in rows {
        let nums = [r.alpha1, r.alpha0, r.estimate, r.se, r.ci.0, r.ci.1].map(|v| fmt_sig(v, 6));
        let mut rec = vec![r.estimator.name().to_string(), r.kind.name().to_string()];
        rec.extend(nums);
        out.write_record(&rec).map_err(|e| csv_error("results", e))?;
    }
    out.flush().map_err(io)
}

pub fn parse_results_csv<R: Read>(r: R) -> CliResult<Vec<EffectEstimate>> {
    let mut rdr = reader(r);
    let header = rdr.headers().map_err(|e| csv_error("results", e))?.clone();
    if header.iter().ne(RESULT_HEADER) {
        return Err(CliError::validation("BAD_HEADER", "not a results table"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error("results", e))?;
        let mut nums = [0.0; 6];
        for (k, slot) in nums.iter_mut().enumerate() {
            let f = &rec[k + 2];
            *slot = if f == "NA" {
                f64::NAN
            } else {
                f.parse().map_err(|_| CliError::validation("PARSE_ERROR", format!("bad number `{f}`")))?
            };
        }
        out.push(to_estimate(&rec[0], &rec[1], nums)?);
    }
    Ok(out)
}

impl From<&EffectEstimate> for ResultRecord {
    fn from(e: &EffectEstimate) -> Self {
        Self {
            estimator: e.estimator.name().into(),
            effect: e.kind.name().into(),
            alpha1: e.alpha1,
            alpha0: e.alpha0,
            estimate: e.estimate,
            se: e.se,
            ci_lo: e.ci.0,
            ci_hi: e.ci.1,
        }
    }
}

impl ResultRecord {
    pub fn to_estimate(&self) -> CliResult<EffectEstimate> {
        to_estimate(
            &self.estimator,
            &self.effect,
            [self.alpha1, self.alpha0, self.estimate, self.se, self.ci_lo, self.ci_hi],
        )
    }
}

/// Full-precision results document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub meta: BTreeMap<String, String>,
    pub results: Vec<ResultRecord>,
}

pub fn results_document(meta: &[(String, String)], rows: &[EffectEstimate]) -> ResultsDocument {
    ResultsDocument {
        meta: meta.iter().cloned().collect(),
        results: rows.iter().map(ResultRecord::from).collect(),
    }
}

pub fn parse_results_json(text: &str) -> CliResult<Vec<EffectEstimate>> {
    let doc: ResultsDocument =
        serde_json::from_str(text).map_err(|e| CliError::validation("PARSE_ERROR", format!("results: {e}")))?;
    doc.results.iter().map(ResultRecord::to_estimate).collect()
}
