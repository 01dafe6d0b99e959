//! Synthetic labelled data and a multinomial logistic client loss.
//!
//! Parameters are a `classes x features` weight matrix stored row-major in a
//! [`ParameterVector`] of dimension `features * classes`; there is no bias.

use std::path::Path;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::objective::{Objective, SharedObjective};
use crate::rng::{Purpose, RngStream};
use crate::vector::ParameterVector;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticClassification {
    features: usize,
    classes: usize,
    samples: Vec<f64>,
    labels: Vec<usize>,
    clients: Vec<Vec<usize>>,
}

impl SyntheticClassification {
    pub fn new(features: usize, classes: usize, samples: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if features == 0 || classes < 2 {
            return Err(Error::config(format!(
                "need features >= 1 and classes >= 2, got {features} and {classes}"
            )));
        }
        if labels.is_empty() {
            return Err(Error::Empty("dataset has no samples".into()));
        }
        if samples.len() != labels.len() * features {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * features,
                actual: samples.len(),
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset features"));
        }
        if let Some(bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::config(format!("label {bad} outside [0, {classes})")));
        }
        Ok(Self {
            features,
            classes,
            samples,
            labels,
            clients: Vec::new(),
        })
    }

    /// Gaussian class-conditional clusters: class means are standard normal
    /// vectors scaled by `separation`, samples add unit Gaussian noise, and
    /// labels cycle through the classes so the dataset is balanced.
    pub fn generate(n: usize, features: usize, classes: usize, separation: f64, seed: u64) -> Result<Self> {
        if !(separation.is_finite() && separation >= 0.0) {
            return Err(Error::config(format!("separation must be >= 0, got {separation}")));
        }
        let mut rng = RngStream::keyed(seed, Purpose::Dataset, 0, 0, 0).rng();
        let means: Vec<f64> = (0..classes * features)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                separation * z
            })
            .collect();
        let mut samples = Vec::with_capacity(n * features);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let y = i % classes.max(1);
            for j in 0..features {
                let z: f64 = StandardNormal.sample(&mut rng);
                samples.push(means[y * features + j] + z);
            }
            labels.push(y);
        }
        Self::new(features, classes, samples, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn param_dim(&self) -> usize {
        self.features * self.classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.features..(i + 1) * self.features]
    }

    pub fn clients(&self) -> &[Vec<usize>] {
        &self.clients
    }

    /// Attaches per-client index lists, which must partition the samples.
    pub fn with_clients(mut self, clients: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        for list in &clients {
            for &i in list {
                if i >= self.len() {
                    return Err(Error::config(format!("sample index {i} out of range")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::config(format!("sample {i} assigned to two clients")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::config(format!("sample {missing} assigned to no client")));
        }
        self.clients = clients;
        Ok(self)
    }

    /// Writes feature columns `f0..f{d-1}` followed by a `label` column.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)?;
        let mut header: Vec<String> = (0..self.features).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            rec.push(self.labels[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a file written by [`write_csv`](Self::write_csv). The class count
    /// defaults to `max label + 1`.
    pub fn read_csv(path: impl AsRef<Path>, classes: Option<usize>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        if header.iter().next_back() != Some("label") || header.len() < 2 {
            return Err(Error::config("dataset csv must end with a `label` column"));
        }
        let features = header.len() - 1;
        let mut samples = Vec::new();
        let mut labels = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse_err = |what: &str| Error::config(format!("dataset csv row {}: bad {what}", line + 2));
            for field in rec.iter().take(features) {
                samples.push(field.parse::<f64>().map_err(|_| parse_err("feature"))?);
            }
            labels.push(rec[features].parse::<usize>().map_err(|_| parse_err("label"))?);
        }
        let k = classes.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1).max(2));
        Self::new(features, k, samples, labels)
    }
}

/// Mean cross-entropy over `client`'s samples and its exact gradient.
pub fn logistic_eval(
    data: &SyntheticClassification,
    client: usize,
    x: &ParameterVector,
) -> Result<(f64, ParameterVector)> {
    if x.dim() != data.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: data.param_dim(),
            actual: x.dim(),
        });
    }
    let indices = data
        .clients
        .get(client)
        .ok_or_else(|| Error::config(format!("unknown client {client}")))?;
    if indices.is_empty() {
        return Err(Error::Empty(format!("client {client} has no samples")));
    }
    let (d, k) = (data.features, data.classes);
    let w = x.as_slice();
    let mut loss = 0.0;
    let mut grad = vec![0.0; d * k];
    let mut logits = vec![0.0; k];
    for &i in indices {
        let a = data.row(i);
        for (c, z) in logits.iter_mut().enumerate() {
            *z = w[c * d..(c + 1) * d].iter().zip(a).map(|(wj, aj)| wj * aj).sum();
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = logits.iter().map(|z| (z - max).exp()).sum();
        let lse = max + sum_exp.ln();
        let y = data.labels[i];
        loss += lse - logits[y];
        for c in 0..k {
            let p = (logits[c] - lse).exp();
            let coeff = p - if c == y { 1.0 } else { 0.0 };
            for (gj, aj) in grad[c * d..(c + 1) * d].iter_mut().zip(a) {
                *gj += coeff * aj;
            }
        }
    }
    let n = indices.len() as f64;
    let value = loss / n;
    if !value.is_finite() {
        return Err(Error::NonFinite("logistic loss"));
    }
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((value, ParameterVector::new(grad)?))
}

#[derive(Debug, Clone)]
pub struct LogisticClient {
    data: Arc<SyntheticClassification>,
    client: usize,
}

impl LogisticClient {
    pub fn new(data: Arc<SyntheticClassification>, client: usize) -> Result<Self> {
        match data.clients.get(client) {
            None => Err(Error::config(format!("unknown client {client}"))),
            Some(list) if list.is_empty() => Err(Error::Empty(format!("client {client} has no samples"))),
            Some(_) => Ok(Self { data, client }),
        }
    }

    /// One objective per attached client, in client order.
    pub fn all(data: Arc<SyntheticClassification>) -> Result<Vec<SharedObjective>> {
        (0..data.clients.len())
            .map(|c| Ok(Arc::new(Self::new(data.clone(), c)?) as SharedObjective))
            .collect()
    }
}

impl Objective for LogisticClient {
    fn dim(&self) -> usize {
        self.data.param_dim()
    }

    fn value(&self, x: &ParameterVector) -> Result<f64> {
        Ok(logistic_eval(&self.data, self.client, x)?.0)
    }

    fn gradient(&self, x: &ParameterVector) -> Result<ParameterVector> {
        Ok(logistic_eval(&self.data, self.client, x)?.1)
    }
}
