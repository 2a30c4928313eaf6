use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbedError, EmbeddingTable, WalkCorpus};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    /// Rate reached at the very last update.
    pub min_learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
    /// Keep sentence order and negative draws identical across epochs.
    pub fixed_order: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 5,
            epochs: 10,
            negatives: 5,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            min_count: 1,
            seed: 0,
            fixed_order: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::Config(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..=self.learning_rate).contains(&self.min_learning_rate) {
            return bad("min_learning_rate must lie in [0, learning_rate]");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean per-pair loss of each epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
    pub pairs_per_epoch: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairGrad {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Loss `-ln σ(u·v) - Σ ln σ(-n_k·v)` for center `v`, context `u` and
/// negatives `n_k`, with its gradient in every argument.
pub fn pair_loss_and_grad(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGrad {
    let s = dot(context, center);
    let mut loss = softplus(-s);
    let g = sigmoid(s) - 1.0;
    let mut d_center: Vec<f64> = context.iter().map(|u| g * u).collect();
    let d_context: Vec<f64> = center.iter().map(|v| g * v).collect();
    let mut d_neg = Vec::with_capacity(negatives.len());
    for n in negatives {
        let t = dot(n, center);
        loss += softplus(t);
        let h = sigmoid(t);
        for (d, x) in d_center.iter_mut().zip(n.iter()) {
            *d += h * x;
        }
        d_neg.push(center.iter().map(|v| h * v).collect());
    }
    PairGrad { loss, center: d_center, context: d_context, negatives: d_neg }
}

struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Sampler { cumulative }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

/// Skip-gram with negative sampling, trained in f64 by plain SGD with a
/// linearly decaying rate. Single-threaded, so a fixed config and corpus
/// always give the same table.
pub fn train_skipgram(corpus: &WalkCorpus, cfg: &TrainConfig) -> Result<(EmbeddingTable, TrainReport), EmbedError> {
    cfg.validate()?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in corpus.tokens() {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut vocab: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= cfg.min_count.max(1)).collect();
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary);
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (t, _))| (*t, i)).collect();
    let sentences: Vec<Vec<usize>> = corpus
        .sentences
        .iter()
        .map(|(_, s)| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| s.len() > 1)
        .collect();

    let (v, d) = (vocab.len(), cfg.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input: Vec<f64> = (0..v * d).map(|_| (rng.gen::<f64>() - 0.5) / d as f64).collect();
    let mut output = vec![0.0f64; v * d];
    let sampler = Sampler::new(&vocab.iter().map(|(_, c)| *c).collect::<Vec<_>>());

    let pairs_per_epoch: usize = sentences
        .iter()
        .map(|s| (0..s.len()).map(|i| i.min(cfg.window) + (s.len() - 1 - i).min(cfg.window)).sum::<usize>())
        .sum();
    let total = (pairs_per_epoch * cfg.epochs).max(1) as f64;
    let mut done = 0usize;
    let mut report = TrainReport { epoch_losses: Vec::with_capacity(cfg.epochs), pairs_per_epoch };
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut neg_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut negs: Vec<usize> = Vec::with_capacity(cfg.negatives);

    for _ in 0..cfg.epochs {
        if cfg.fixed_order {
            neg_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
        } else {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for &si in &order {
            let s = &sentences[si];
            for i in 0..s.len() {
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window).min(s.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let lr = cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * (done as f64 / total);
                    done += 1;
                    let (c, u) = (s[i], s[j]);
                    negs.clear();
                    for _ in 0..cfg.negatives {
                        let n = sampler.draw(&mut neg_rng);
                        if n != u {
                            negs.push(n);
                        }
                    }
                    let neg_rows: Vec<&[f64]> = negs.iter().map(|&n| &output[n * d..(n + 1) * d]).collect();
                    let g = pair_loss_and_grad(&input[c * d..(c + 1) * d], &output[u * d..(u + 1) * d], &neg_rows);
                    epoch_loss += g.loss;
                    for k in 0..d {
                        output[u * d + k] -= lr * g.context[k];
                    }
                    for (n, dn) in negs.iter().zip(&g.negatives) {
                        for k in 0..d {
                            output[n * d + k] -= lr * dn[k];
                        }
                    }
                    for k in 0..d {
                        input[c * d + k] -= lr * g.center[k];
                    }
                }
            }
        }
        let mean = if pairs_per_epoch == 0 { 0.0 } else { epoch_loss / pairs_per_epoch as f64 };
        log::debug!("epoch loss {mean:.6}");
        report.epoch_losses.push(mean);
    }
    let tokens = vocab.iter().map(|(t, _)| t.to_string()).collect();
    let vectors = input.iter().map(|&x| x as f32).collect();
    Ok((EmbeddingTable::new(d, tokens, vectors)?, report))
}
