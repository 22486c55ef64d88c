use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TowerInput;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerConfig {
    /// Token-hash bucket count.
    pub hash_dim: usize,
    pub embed_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub content: TowerConfig,
    pub user: TowerConfig,
    pub fusion_hidden: Vec<usize>,
    pub n_classes: usize,
    pub content_dense_dim: usize,
    pub user_dense_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            content: TowerConfig { hash_dim: 2048, embed_dim: 64, hidden: vec![128], output_dim: 32 },
            user: TowerConfig { hash_dim: 2048, embed_dim: 64, hidden: vec![128], output_dim: 16 },
            fusion_hidden: vec![128],
            n_classes: 23,
            content_dense_dim: 8,
            user_dense_dim: 8,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, t) in [("content", &self.content), ("user", &self.user)] {
            if t.hash_dim == 0 || t.embed_dim == 0 || t.output_dim == 0 || t.hidden.contains(&0) {
                return Err(format!("{name} tower dimensions must be >= 1"));
            }
        }
        if self.n_classes == 0 || self.fusion_hidden.contains(&0) {
            return Err("n_classes and fusion sizes must be >= 1".into());
        }
        Ok(())
    }
}

/// A fully connected layer stored row-major (`n_out` rows of `n_in`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Dense {
    pub w: usize,
    pub b: usize,
    pub n_in: usize,
    pub n_out: usize,
}

impl Dense {
    fn affine(&self, p: &[f64], x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &p[self.w + o * self.n_in..self.w + (o + 1) * self.n_in];
            out.push(p[self.b + o] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>());
        }
    }

    /// Accumulates parameter gradients and returns the input gradient.
    fn backward(&self, p: &[f64], x: &[f64], d_pre: &[f64], g: &mut [f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.n_in];
        for (o, &d) in d_pre.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            g[self.b + o] += d;
            let w = self.w + o * self.n_in;
            for i in 0..self.n_in {
                g[w + i] += d * x[i];
                dx[i] += d * p[w + i];
            }
        }
        dx
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Tower {
    pub table: usize,
    pub hash_dim: usize,
    pub embed_dim: usize,
    pub dense_dim: usize,
    /// Hidden layers then the output layer, all tanh.
    pub layers: Vec<Dense>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub content: Tower,
    pub user: Tower,
    pub fusion: Vec<Dense>,
    pub output: Dense,
    pub len: usize,
}

struct Alloc(usize);

impl Alloc {
    fn take(&mut self, n: usize) -> usize {
        let at = self.0;
        self.0 += n;
        at
    }

    fn dense(&mut self, n_in: usize, n_out: usize) -> Dense {
        Dense { w: self.take(n_in * n_out), b: self.take(n_out), n_in, n_out }
    }

    fn tower(&mut self, t: &TowerConfig, dense_dim: usize) -> Tower {
        let table = self.take(t.hash_dim * t.embed_dim);
        let mut n_in = t.embed_dim + dense_dim;
        let mut layers = Vec::new();
        for &h in t.hidden.iter().chain([&t.output_dim]) {
            layers.push(self.dense(n_in, h));
            n_in = h;
        }
        Tower { table, hash_dim: t.hash_dim, embed_dim: t.embed_dim, dense_dim, layers }
    }
}

impl Layout {
    pub fn new(c: &ModelConfig) -> Self {
        let mut a = Alloc(0);
        let content = a.tower(&c.content, c.content_dense_dim);
        let user = a.tower(&c.user, c.user_dense_dim);
        let mut n_in = c.content.output_dim + c.user.output_dim;
        let mut fusion = Vec::new();
        for &h in &c.fusion_hidden {
            fusion.push(a.dense(n_in, h));
            n_in = h;
        }
        let output = a.dense(n_in, c.n_classes);
        Self { content, user, fusion, output, len: a.0 }
    }

    fn dense_layers(&self) -> impl Iterator<Item = &Dense> {
        self.content.layers.iter().chain(&self.user.layers).chain(&self.fusion).chain([&self.output])
    }
}

/// Activations of one tower: the pooled input then each layer's output.
type TowerCache = Vec<Vec<f64>>;

pub(crate) struct Cache {
    content: TowerCache,
    user: TowerCache,
    fusion: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
}

fn tanh_layer(layer: &Dense, p: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(layer.n_out);
    layer.affine(p, x, &mut out);
    out.iter_mut().for_each(|v| *v = v.tanh());
    out
}

impl Tower {
    fn pooled(&self, p: &[f64], input: &TowerInput) -> Vec<f64> {
        let mut x = vec![0.0; self.embed_dim + self.dense_dim];
        if !input.buckets.is_empty() {
            let scale = 1.0 / input.buckets.len() as f64;
            for &bucket in &input.buckets {
                let row = self.table + (bucket as usize % self.hash_dim) * self.embed_dim;
                for (xi, w) in x.iter_mut().zip(&p[row..row + self.embed_dim]) {
                    *xi += scale * w;
                }
            }
        }
        for (xi, d) in x[self.embed_dim..].iter_mut().zip(&input.dense) {
            *xi = *d;
        }
        x
    }

    fn forward(&self, p: &[f64], input: &TowerInput) -> TowerCache {
        let mut cache = vec![self.pooled(p, input)];
        for layer in &self.layers {
            let next = tanh_layer(layer, p, cache.last().expect("non-empty"));
            cache.push(next);
        }
        cache
    }

    fn backward(&self, p: &[f64], input: &TowerInput, cache: &TowerCache, d_out: &[f64], g: &mut [f64]) {
        let mut d_a = d_out.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let a = &cache[l + 1];
            let d_pre: Vec<f64> = d_a.iter().zip(a).map(|(d, a)| d * (1.0 - a * a)).collect();
            d_a = layer.backward(p, &cache[l], &d_pre, g);
        }
        if input.buckets.is_empty() {
            return;
        }
        let scale = 1.0 / input.buckets.len() as f64;
        for &bucket in &input.buckets {
            let row = self.table + (bucket as usize % self.hash_dim) * self.embed_dim;
            for (gi, d) in g[row..row + self.embed_dim].iter_mut().zip(&d_a[..self.embed_dim]) {
                *gi += scale * d;
            }
        }
    }
}

/// Two towers fused by an MLP into one logit per class. Parameters live in
/// one flat vector addressed through a layout derived from the config.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTowerModel {
    pub(crate) config: ModelConfig,
    pub(crate) layout: Layout,
    pub(crate) params: Vec<f64>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy on a logit, stable for large |z|.
pub(crate) fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl TwoTowerModel {
    /// Weights and biases uniform in `[-r, r]` with `r = 1/sqrt(fan_in)`.
    /// Embedding rows have fan-in 1.
    pub fn new(config: ModelConfig, seed: u64) -> Self {
        let mut m = Self::zeros(config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in [&m.layout.content, &m.layout.user] {
            for v in &mut m.params[t.table..t.table + t.hash_dim * t.embed_dim] {
                *v = rng.gen_range(-1.0..=1.0);
            }
        }
        let layers: Vec<Dense> = m.layout.dense_layers().copied().collect();
        for d in layers {
            let r = 1.0 / (d.n_in as f64).sqrt();
            for v in &mut m.params[d.w..d.w + d.n_in * d.n_out] {
                *v = rng.gen_range(-r..=r);
            }
            for v in &mut m.params[d.b..d.b + d.n_out] {
                *v = rng.gen_range(-r..=r);
            }
        }
        m
    }

    pub fn zeros(config: ModelConfig) -> Self {
        let layout = Layout::new(&config);
        let params = vec![0.0; layout.len];
        Self { config, layout, params }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Content-tower output: the embedding exported for ranking.
    pub fn encode_content(&self, input: &TowerInput) -> Vec<f64> {
        self.layout.content.forward(&self.params, input).pop().expect("tower has layers")
    }

    pub fn encode_user(&self, input: &TowerInput) -> Vec<f64> {
        self.layout.user.forward(&self.params, input).pop().expect("tower has layers")
    }

    pub(crate) fn forward(&self, content: &TowerInput, user: &TowerInput) -> Cache {
        let p = &self.params;
        let c = self.layout.content.forward(p, content);
        let u = self.layout.user.forward(p, user);
        let mut x: Vec<f64> =
            c.last().expect("non-empty").iter().chain(u.last().expect("non-empty")).copied().collect();
        let mut fusion = Vec::with_capacity(self.layout.fusion.len() + 1);
        for layer in &self.layout.fusion {
            let next = tanh_layer(layer, p, &x);
            fusion.push(std::mem::replace(&mut x, next));
        }
        let mut logits = Vec::with_capacity(self.layout.output.n_out);
        self.layout.output.affine(p, &x, &mut logits);
        fusion.push(x);
        Cache { content: c, user: u, fusion, logits }
    }

    pub fn logits(&self, content: &TowerInput, user: &TowerInput) -> Vec<f64> {
        self.forward(content, user).logits
    }

    /// One probability per class.
    pub fn predict(&self, content: &TowerInput, user: &TowerInput) -> Vec<f64> {
        self.logits(content, user).into_iter().map(sigmoid).collect()
    }

    /// Adds the gradient of `weight * loss(example)` into `g` and returns the
    /// unweighted loss, which sums binary cross-entropy over classes.
    pub(crate) fn accumulate(
        &self,
        content: &TowerInput,
        user: &TowerInput,
        labels: &[f64],
        weight: f64,
        g: &mut [f64],
    ) -> f64 {
        let p = &self.params;
        let cache = self.forward(content, user);
        let loss: f64 = cache.logits.iter().zip(labels).map(|(&z, &y)| bce_with_logit(z, y)).sum();
        let d_z: Vec<f64> = cache.logits.iter().zip(labels).map(|(&z, &y)| weight * (sigmoid(z) - y)).collect();
        // fusion[i] is the input of fusion layer i; the last entry feeds the output layer
        let mut d_a = self.layout.output.backward(p, cache.fusion.last().expect("non-empty"), &d_z, g);
        for (i, layer) in self.layout.fusion.iter().enumerate().rev() {
            let a = &cache.fusion[i + 1];
            let d_pre: Vec<f64> = d_a.iter().zip(a).map(|(d, a)| d * (1.0 - a * a)).collect();
            d_a = layer.backward(p, &cache.fusion[i], &d_pre, g);
        }
        let split = self.config.content.output_dim;
        self.layout.content.backward(p, content, &cache.content, &d_a[..split], g);
        self.layout.user.backward(p, user, &cache.user, &d_a[split..], g);
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ModelConfig {
        ModelConfig {
            content: TowerConfig { hash_dim: 16, embed_dim: 3, hidden: vec![4], output_dim: 5 },
            user: TowerConfig { hash_dim: 8, embed_dim: 2, hidden: vec![3], output_dim: 2 },
            fusion_hidden: vec![4],
            n_classes: 3,
            content_dense_dim: 2,
            user_dense_dim: 1,
        }
    }

    #[test]
    fn layout_covers_every_parameter_once() {
        let l = Layout::new(&small());
        let mut spans = vec![(l.content.table, 16 * 3), (l.user.table, 8 * 2)];
        for d in l.dense_layers() {
            spans.push((d.w, d.n_in * d.n_out));
            spans.push((d.b, d.n_out));
        }
        spans.sort();
        let mut at = 0;
        for (start, n) in spans {
            assert_eq!(start, at);
            at += n;
        }
        assert_eq!(at, l.len);
    }

    #[test]
    fn zero_model_predicts_one_half() {
        let m = TwoTowerModel::zeros(small());
        let c = TowerInput { buckets: vec![1, 2], dense: vec![0.3, -1.0] };
        let u = TowerInput { buckets: vec![], dense: vec![2.0] };
        assert_eq!(m.predict(&c, &u), vec![0.5; 3]);
    }

    #[test]
    fn bce_matches_direct_formula() {
        for (z, y) in [(0.3, 1.0), (-2.0, 0.0), (4.0, 0.0), (-30.0, 1.0)] {
            let p: f64 = sigmoid(z);
            let direct = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
            assert!((bce_with_logit(z, y) - direct).abs() < 1e-9, "{z} {y}");
        }
    }
}
