//! Discrete Bayesian networks and the graph machinery used as ground truth:
//! sampling, d-separation, latent projection to a maximal ancestral graph,
//! m-separation and structural Markov blankets.

pub mod alarm;
mod bif;
mod dag;
mod mag;
mod sample;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bif::parse_network;
pub use dag::Dag;
pub use mag::{latent_project, latent_project_with, true_mag_mb, Mag, Mark, ProjectionMethod};
pub use sample::{forward_sample, forward_sample_with};

/// Tolerance on CPT row sums accepted by the parser before renormalising.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesNet {
    pub names: Vec<String>,
    pub states: Vec<Vec<String>>,
    pub parents: Vec<Vec<usize>>,
    /// `cpts[i][config * r_i + k]` is `P(X_i = k | parents = config)`, where
    /// `config` is the mixed-radix index of the parent values with the last
    /// parent varying fastest.
    pub cpts: Vec<Vec<f64>>,
}

impl BayesNet {
    /// Validate and build. Rows must sum to one within
    /// [`ROW_SUM_TOLERANCE`]; they are renormalised exactly.
    pub fn new(
        names: Vec<String>,
        states: Vec<Vec<String>>,
        parents: Vec<Vec<usize>>,
        mut cpts: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = names.len();
        if states.len() != n || parents.len() != n || cpts.len() != n {
            return Err(Error::invalid("network component lengths disagree"));
        }
        for (i, ps) in parents.iter().enumerate() {
            if states[i].is_empty() || states[i].len() > u8::MAX as usize {
                return Err(Error::invalid(format!(
                    "variable {} has unsupported cardinality {}",
                    names[i],
                    states[i].len()
                )));
            }
            if let Some(&p) = ps.iter().find(|&&p| p >= n || p == i) {
                return Err(Error::invalid(format!("variable {} has bad parent index {p}", names[i])));
            }
            let q: usize = ps.iter().map(|&p| states[p].len()).product();
            let r = states[i].len();
            if cpts[i].len() != q * r {
                return Err(Error::invalid(format!(
                    "CPT of {} has {} entries, expected {}",
                    names[i],
                    cpts[i].len(),
                    q * r
                )));
            }
            for (j, row) in cpts[i].chunks_mut(r).enumerate() {
                let s: f64 = row.iter().sum();
                if row.iter().any(|p| !(*p >= 0.0)) || (s - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::invalid(format!(
                        "CPT row {j} of {} sums to {s}, not 1",
                        names[i]
                    )));
                }
                row.iter_mut().for_each(|p| *p /= s);
            }
        }
        let net = BayesNet {
            names,
            states,
            parents,
            cpts,
        };
        if net.dag().topological_order().is_none() {
            return Err(Error::invalid("network graph has a directed cycle"));
        }
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.states[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn dag(&self) -> Dag {
        Dag::from_parents(self.names.clone(), self.parents.clone())
    }

    /// Probability row for node `i` given the full assignment `values`.
    pub fn cpt_row(&self, i: usize, values: &[u8]) -> &[f64] {
        let r = self.cardinality(i);
        let mut config = 0usize;
        for &p in &self.parents[i] {
            config = config * self.cardinality(p) + values[p] as usize;
        }
        &self.cpts[i][config * r..(config + 1) * r]
    }

    /// Random CPTs on a given DAG, with every cardinality equal to `card`.
    /// Rows are drawn uniformly from the simplex and pushed away from
    /// uniform so that dependencies are clearly visible in samples.
    pub fn random_on<R: rand::Rng>(dag: &Dag, card: usize, rng: &mut R) -> Self {
        let n = dag.len();
        let states: Vec<Vec<String>> = (0..n)
            .map(|_| (0..card).map(|k| format!("s{k}")).collect())
            .collect();
        let mut cpts = Vec::with_capacity(n);
        for i in 0..n {
            let q = card.pow(dag.parents(i).len() as u32);
            let mut t = Vec::with_capacity(q * card);
            for _ in 0..q {
                let raw: Vec<f64> = (0..card)
                    .map(|_| {
                        let u: f64 = rng.random::<f64>();
                        u * u * u + 0.02
                    })
                    .collect();
                let s: f64 = raw.iter().sum();
                t.extend(raw.into_iter().map(|x| x / s));
            }
            cpts.push(t);
        }
        BayesNet::new(dag.names().to_vec(), states, dag.parent_lists(), cpts)
            .expect("random network is valid by construction")
    }
}

/// Discrete data: one column of category indices per variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSet {
    pub names: Vec<String>,
    pub cards: Vec<usize>,
    pub columns: Vec<Vec<u8>>,
}

impl DataSet {
    pub fn new(names: Vec<String>, cards: Vec<usize>, columns: Vec<Vec<u8>>) -> Result<Self> {
        if names.len() != cards.len() || names.len() != columns.len() {
            return Err(Error::invalid("data set component lengths disagree"));
        }
        let m = columns.first().map_or(0, Vec::len);
        for (i, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(Error::invalid("data set columns have different lengths"));
            }
            if cards[i] == 0 || cards[i] > u8::MAX as usize + 1 {
                return Err(Error::invalid(format!("bad cardinality for {}", names[i])));
            }
            if let Some(v) = col.iter().find(|&&v| v as usize >= cards[i]) {
                return Err(Error::invalid(format!(
                    "value {v} of {} exceeds cardinality {}",
                    names[i], cards[i]
                )));
            }
        }
        Ok(DataSet {
            names,
            cards,
            columns,
        })
    }

    /// Sample count.
    pub fn m(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Drop the named columns.
    pub fn hide_latents<S: AsRef<str>>(&self, latents: &[S]) -> Result<DataSet> {
        let mut drop = vec![false; self.width()];
        for l in latents {
            let i = self
                .index_of(l.as_ref())
                .ok_or_else(|| Error::UnknownVariable(l.as_ref().to_string()))?;
            drop[i] = true;
        }
        fn keep<T: Clone>(v: &[T], drop: &[bool]) -> Vec<T> {
            v.iter()
                .zip(drop)
                .filter(|(_, d)| !**d)
                .map(|(x, _)| x.clone())
                .collect()
        }
        Ok(DataSet {
            names: keep(&self.names, &drop),
            cards: keep(&self.cards, &drop),
            columns: keep(&self.columns, &drop),
        })
    }

    /// Duplicate every row `k` times (row order: the whole table repeated).
    pub fn repeated(&self, k: usize) -> DataSet {
        DataSet {
            names: self.names.clone(),
            cards: self.cards.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| c.iter().copied().cycle().take(c.len() * k).collect())
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.names)?;
        for r in 0..self.m() {
            w.write_record(self.columns.iter().map(|c| c[r].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read integer-coded CSV. Cardinalities are taken as `max + 1` per
    /// column unless `cards` overrides them by name.
    pub fn read_csv<R: Read>(input: R, cards: Option<&BTreeMap<String, usize>>) -> Result<DataSet> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != names.len() {
                return Err(Error::Row {
                    row: k + 2,
                    msg: format!("expected {} fields, found {}", names.len(), rec.len()),
                });
            }
            for (i, f) in rec.iter().enumerate() {
                let v: u8 = f.parse().map_err(|_| Error::Row {
                    row: k + 2,
                    msg: format!("`{f}` is not a category index"),
                })?;
                columns[i].push(v);
            }
        }
        let cards = names
            .iter()
            .zip(&columns)
            .map(|(n, c)| {
                cards
                    .and_then(|m| m.get(n).copied())
                    .unwrap_or_else(|| c.iter().copied().max().map_or(1, |v| v as usize + 1))
            })
            .collect();
        DataSet::new(names, cards, columns)
    }
}
