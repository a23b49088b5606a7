//! Per-node study records and the derived design used by the propensity
//! models and estimators.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Network;

/// Exposure, outcome, and covariates aligned 1:1 with network nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyData {
    exposure: Vec<bool>,
    outcome: Vec<f64>,
    covariates: Vec<f64>,
    width: usize,
}

impl StudyData {
    /// `covariates` holds one row per node, without an intercept column.
    pub fn new(exposure: Vec<bool>, outcome: Vec<f64>, covariates: Vec<Vec<f64>>) -> Result<Self> {
        let n = exposure.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if outcome.len() != n || covariates.len() != n {
            return Err(Error::Misaligned {
                rows: outcome.len().min(covariates.len()),
                nodes: n,
            });
        }
        let width = covariates[0].len();
        let mut flat = Vec::with_capacity(n * width);
        for (i, row) in covariates.iter().enumerate() {
            if row.len() != width {
                return Err(Error::CovariateWidth {
                    node: alloc::format!("#{i}"),
                    got: row.len(),
                    expected: width,
                });
            }
            flat.extend_from_slice(row);
        }
        Ok(Self {
            exposure,
            outcome,
            covariates: flat,
            width,
        })
    }

    pub fn n(&self) -> usize {
        self.exposure.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn exposure(&self) -> &[bool] {
        &self.exposure
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn covariates(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.width..(i + 1) * self.width]
    }

    /// Replaces outcomes, keeping exposures and covariates.
    pub fn with_outcome(&self, outcome: Vec<f64>) -> Self {
        assert_eq!(outcome.len(), self.n());
        Self {
            outcome,
            ..self.clone()
        }
    }

    /// Replaces exposures, keeping outcomes and covariates.
    pub fn with_exposure(&self, exposure: Vec<bool>) -> Self {
        assert_eq!(exposure.len(), self.n());
        Self {
            exposure,
            ..self.clone()
        }
    }

    /// Alignment, finiteness, and the no-isolates requirement.
    pub fn validate(&self, net: &Network) -> Result<()> {
        if self.n() != net.n() {
            return Err(Error::Misaligned {
                rows: self.n(),
                nodes: net.n(),
            });
        }
        for i in 0..self.n() {
            let finite = self.outcome[i].is_finite() && self.covariates(i).iter().all(|v| v.is_finite());
            if !finite {
                return Err(Error::NonFinite {
                    node: net.id(i).into(),
                });
            }
        }
        if let Some(i) = net.isolates().next() {
            return Err(Error::Isolate {
                node: net.id(i).into(),
            });
        }
        Ok(())
    }
}

/// Summary `h(Z_{N_i})` of neighbor covariates used by the neighborhood
/// binomial model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    #[default]
    Mean,
    Sum,
    ProportionPositive,
}

impl Aggregator {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::Sum => "sum",
            Self::ProportionPositive => "proportion-positive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mean" => Some(Self::Mean),
            "sum" => Some(Self::Sum),
            "proportion-positive" => Some(Self::ProportionPositive),
            _ => None,
        }
    }
}

/// Network and data flattened into the arrays the models iterate over.
#[derive(Debug, Clone)]
pub struct Design {
    ids: Vec<String>,
    exposure: Vec<bool>,
    outcome: Vec<f64>,
    x: Vec<f64>,
    x_width: usize,
    h: Vec<f64>,
    h_width: usize,
    degree: Vec<usize>,
    exposed_neighbors: Vec<usize>,
    hood_offsets: Vec<usize>,
    hood_members: Vec<usize>,
}

impl Design {
    /// Validates `data` against `net` and precomputes the individual design
    /// rows `[1, Z_i]`, neighbor summaries `[1, h(Z_{N_i})]`, degrees,
    /// exposed-neighbor counts, and closed neighborhoods `N_i ∪ {i}`.
    pub fn new(net: &Network, data: &StudyData, aggregator: Aggregator) -> Result<Self> {
        data.validate(net)?;
        let n = net.n();
        let p = data.width();
        let x_width = p + 1;
        let mut x = Vec::with_capacity(n * x_width);
        let mut h = Vec::with_capacity(n * x_width);
        let mut degree = Vec::with_capacity(n);
        let mut exposed_neighbors = Vec::with_capacity(n);
        let mut hood_offsets = Vec::with_capacity(n + 1);
        let mut hood_members = Vec::new();
        hood_offsets.push(0);
        for i in 0..n {
            x.push(1.0);
            x.extend_from_slice(data.covariates(i));
            let nb = net.neighbors(i);
            let d = nb.len();
            degree.push(d);
            exposed_neighbors.push(nb.iter().filter(|&&j| data.exposure()[j]).count());
            h.push(1.0);
            for c in 0..p {
                let vals = nb.iter().map(|&j| data.covariates(j)[c]);
                let v = match aggregator {
                    Aggregator::Mean => vals.sum::<f64>() / d as f64,
                    Aggregator::Sum => vals.sum::<f64>(),
                    Aggregator::ProportionPositive => vals.filter(|v| *v > 0.0).count() as f64 / d as f64,
                };
                h.push(v);
            }
            hood_members.push(i);
            hood_members.extend_from_slice(nb);
            hood_offsets.push(hood_members.len());
        }
        Ok(Self {
            ids: net.ids().to_vec(),
            exposure: data.exposure().to_vec(),
            outcome: data.outcome().to_vec(),
            x,
            x_width,
            h,
            h_width: x_width,
            degree,
            exposed_neighbors,
            hood_offsets,
            hood_members,
        })
    }

    pub fn n(&self) -> usize {
        self.exposure.len()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn exposure(&self) -> &[bool] {
        &self.exposure
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn x_width(&self) -> usize {
        self.x_width
    }

    /// Individual design row `[1, Z_i]`.
    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.x_width..(i + 1) * self.x_width]
    }

    pub fn h_width(&self) -> usize {
        self.h_width
    }

    /// Neighbor summary row `[1, h(Z_{N_i})]`.
    pub fn h(&self, i: usize) -> &[f64] {
        &self.h[i * self.h_width..(i + 1) * self.h_width]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    pub fn exposed_neighbors(&self, i: usize) -> usize {
        self.exposed_neighbors[i]
    }

    /// `N_i ∪ {i}`, with `i` first.
    pub fn closed_neighborhood(&self, i: usize) -> &[usize] {
        &self.hood_members[self.hood_offsets[i]..self.hood_offsets[i + 1]]
    }

    /// Same design with a different outcome vector.
    pub fn with_outcome(&self, outcome: &[f64]) -> Self {
        assert_eq!(outcome.len(), self.n());
        let mut out = self.clone();
        out.outcome.copy_from_slice(outcome);
        out
    }
}
