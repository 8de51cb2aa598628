//! Attention policy and value networks.
//!
//! Node and bar rows are embedded and encoded together with incidence masking. A short decoder
//! reads the target token (and, for the value network, the action token) against the encoded
//! layout; the decoded target state feeds the policy heads and the decoded action state feeds
//! the value head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::autodiff::{Matrix, Tape, Var};
use super::nn::{Attention, LayerNorm, Mlp, ParamStore};
use super::obs::{Featurizer, Observation, Target};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub embed_hidden: usize,
    pub width: usize,
    pub heads: usize,
    /// Hidden width of the position-wise feed-forward blocks.
    pub ffn: usize,
    pub encoder_layers: usize,
    pub decoder_layers: usize,
    pub head_hidden: [usize; 2],
}

impl NetConfig {
    /// Full-size network.
    pub fn full() -> Self {
        Self {
            embed_hidden: 128,
            width: 256,
            heads: 8,
            ffn: 512,
            encoder_layers: 6,
            decoder_layers: 6,
            head_hidden: [256, 512],
        }
    }

    /// Small network that trains in minutes on one core.
    pub fn desk() -> Self {
        Self {
            embed_hidden: 16,
            width: 16,
            heads: 2,
            ffn: 32,
            encoder_layers: 1,
            decoder_layers: 1,
            head_hidden: [32, 32],
        }
    }
}

impl Default for NetConfig {
    fn default() -> Self {
        Self::desk()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct EncoderLayer {
    norm_attn: LayerNorm,
    attn: Attention,
    norm_ffn: LayerNorm,
    ffn: Mlp,
}

#[derive(Debug, Clone, PartialEq)]
struct DecoderLayer {
    norm_self: LayerNorm,
    self_attn: Attention,
    norm_cross: LayerNorm,
    cross_attn: Attention,
    norm_ffn: LayerNorm,
    ffn: Mlp,
}

/// Embedders, encoder and decoder shared in shape by both network kinds.
#[derive(Debug, Clone, PartialEq)]
struct Body {
    node_embed: Mlp,
    bar_embed: Mlp,
    id_embed: Mlp,
    action_embed: Option<Mlp>,
    encoder: Vec<EncoderLayer>,
    encoder_norm: LayerNorm,
    decoder: Vec<DecoderLayer>,
    decoder_norm: LayerNorm,
    id_width: usize,
    action_width: usize,
}

fn embedder<R: Rng + ?Sized>(store: &mut ParamStore, input: usize, cfg: &NetConfig, rng: &mut R) -> Mlp {
    Mlp::new(store, &[input, cfg.embed_hidden, cfg.width], rng)
}

fn residual_ffn<R: Rng + ?Sized>(store: &mut ParamStore, cfg: &NetConfig, rng: &mut R) -> Mlp {
    Mlp::new(store, &[cfg.width, cfg.ffn, cfg.width], rng)
}

impl Body {
    fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        features: &Featurizer,
        cfg: &NetConfig,
        with_action: bool,
        rng: &mut R,
    ) -> Self {
        let id_width = 2 + features.node_features().max(features.bar_features());
        let action_width = 2 + features.max_action_dim();
        let node_embed = embedder(store, features.node_features(), cfg, rng);
        let bar_embed = embedder(store, features.bar_features(), cfg, rng);
        let id_embed = embedder(store, id_width, cfg, rng);
        let action_embed = with_action.then(|| embedder(store, action_width, cfg, rng));
        let encoder = (0..cfg.encoder_layers)
            .map(|_| EncoderLayer {
                norm_attn: LayerNorm::new(store, cfg.width),
                attn: Attention::new(store, cfg.width, cfg.heads, rng),
                norm_ffn: LayerNorm::new(store, cfg.width),
                ffn: residual_ffn(store, cfg, rng),
            })
            .collect();
        let encoder_norm = LayerNorm::new(store, cfg.width);
        let decoder = (0..cfg.decoder_layers)
            .map(|_| DecoderLayer {
                norm_self: LayerNorm::new(store, cfg.width),
                self_attn: Attention::new(store, cfg.width, cfg.heads, rng),
                norm_cross: LayerNorm::new(store, cfg.width),
                cross_attn: Attention::new(store, cfg.width, cfg.heads, rng),
                norm_ffn: LayerNorm::new(store, cfg.width),
                ffn: residual_ffn(store, cfg, rng),
            })
            .collect();
        let decoder_norm = LayerNorm::new(store, cfg.width);
        Self {
            node_embed,
            bar_embed,
            id_embed,
            action_embed,
            encoder,
            encoder_norm,
            decoder,
            decoder_norm,
            id_width,
            action_width,
        }
    }

    fn encode<'p>(&self, tape: &mut Tape<'p>, store: &'p ParamStore, obs: &'p Observation) -> Var {
        let nodes = tape.constant(&obs.nodes);
        let nodes = self.node_embed.forward(tape, store, nodes);
        let mut x = if obs.bars.rows > 0 {
            let bars = tape.constant(&obs.bars);
            let bars = self.bar_embed.forward(tape, store, bars);
            tape.concat_rows(&[nodes, bars])
        } else {
            nodes
        };
        let bias = obs.attention_bias();
        for layer in &self.encoder {
            let h = layer.norm_attn.forward(tape, store, x);
            let h = layer.attn.forward(tape, store, h, h, Some(&bias));
            x = tape.add(x, h);
            let h = layer.norm_ffn.forward(tape, store, x);
            let h = layer.ffn.forward(tape, store, h);
            x = tape.add(x, h);
        }
        self.encoder_norm.forward(tape, store, x)
    }

    fn id_input(&self, obs: &Observation) -> Matrix {
        let mut row = vec![0.0; self.id_width];
        let features = match obs.target {
            Target::Node(i) => {
                row[0] = 1.0;
                obs.nodes.row(i)
            }
            Target::Bar(j) => {
                row[1] = 1.0;
                obs.bars.row(j)
            }
        };
        row[2..2 + features.len()].copy_from_slice(features);
        Matrix::row_vector(row)
    }

    /// Decoded states of the target token and, when `action` is given, of the action token.
    fn forward<'p>(
        &self,
        tape: &mut Tape<'p>,
        store: &'p ParamStore,
        obs: &'p Observation,
        action: Option<Var>,
    ) -> (Var, Option<Var>) {
        let memory = self.encode(tape, store, obs);
        let id = tape.input(self.id_input(obs));
        let id = self.id_embed.forward(tape, store, id);
        let at_target = tape.rows(memory, &[obs.target_token()]);
        let id = tape.add(id, at_target);
        let mut y = match action {
            Some(a) => {
                let mut flag = Matrix::zeros(1, 2);
                flag.data[if obs.target.is_node() { 0 } else { 1 }] = 1.0;
                let k = tape.value(a).cols;
                let padding = self.action_width - 2 - k;
                let flag = tape.input(flag);
                let mut parts = vec![a];
                if padding > 0 {
                    parts.push(tape.input(Matrix::zeros(1, padding)));
                }
                parts.push(flag);
                let input = tape.concat_cols(&parts);
                let embed = self.action_embed.as_ref().expect("value networks embed actions");
                let token = embed.forward(tape, store, input);
                tape.concat_rows(&[id, token])
            }
            None => id,
        };
        let tokens = tape.value(y).rows;
        let causal = (tokens > 1).then(|| {
            let mut m = Matrix::zeros(tokens, tokens);
            for r in 0..tokens {
                for c in (r + 1)..tokens {
                    m.data[r * tokens + c] = -1e9;
                }
            }
            m
        });
        for layer in &self.decoder {
            let h = layer.norm_self.forward(tape, store, y);
            let h = layer.self_attn.forward(tape, store, h, h, causal.as_ref());
            y = tape.add(y, h);
            let h = layer.norm_cross.forward(tape, store, y);
            let h = layer.cross_attn.forward(tape, store, h, memory, None);
            y = tape.add(y, h);
            let h = layer.norm_ffn.forward(tape, store, y);
            let h = layer.ffn.forward(tape, store, h);
            y = tape.add(y, h);
        }
        let y = self.decoder_norm.forward(tape, store, y);
        let h_id = tape.rows(y, &[0]);
        let h_a = action.map(|_| tape.rows(y, &[1]));
        (h_id, h_a)
    }
}

/// Squashed-Gaussian parameters for one target.
#[derive(Debug, Clone, Copy)]
pub struct PolicyOutput {
    pub mean: Var,
    pub log_std: Var,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    pub store: ParamStore,
    body: Body,
    move_head: Mlp,
    section_head: Mlp,
}

impl PolicyNet {
    pub fn new<R: Rng + ?Sized>(features: &Featurizer, cfg: &NetConfig, rng: &mut R) -> Self {
        let mut store = ParamStore::new();
        let body = Body::new(&mut store, features, cfg, false, rng);
        let [h1, h2] = cfg.head_hidden;
        let move_head = Mlp::new(&mut store, &[cfg.width, h1, h2, 2 * features.dim()], rng);
        let section_head = Mlp::new(&mut store, &[cfg.width, h1, h2, 2 * features.section_features()], rng);
        Self {
            store,
            body,
            move_head,
            section_head,
        }
    }

    pub fn forward<'p>(&'p self, tape: &mut Tape<'p>, obs: &'p Observation) -> PolicyOutput {
        self.forward_with(tape, &self.store, obs)
    }

    /// Runs the network with substitute weights of identical layout.
    pub fn forward_with<'p>(&self, tape: &mut Tape<'p>, store: &'p ParamStore, obs: &'p Observation) -> PolicyOutput {
        let (h_id, _) = self.body.forward(tape, store, obs, None);
        let head = if obs.target.is_node() { &self.move_head } else { &self.section_head };
        let out = head.forward(tape, store, h_id);
        let k = tape.value(out).cols / 2;
        let mean = tape.slice_cols(out, 0, k);
        let raw = tape.slice_cols(out, k, k);
        let squashed = tape.tanh(raw);
        let half = 0.5 * (LOG_STD_MAX - LOG_STD_MIN);
        let scaled = tape.scale(squashed, half);
        let log_std = tape.add_scalar(scaled, LOG_STD_MIN + half);
        PolicyOutput { mean, log_std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet {
    pub store: ParamStore,
    body: Body,
    q_head: Mlp,
}

impl ValueNet {
    pub fn new<R: Rng + ?Sized>(features: &Featurizer, cfg: &NetConfig, rng: &mut R) -> Self {
        let mut store = ParamStore::new();
        let body = Body::new(&mut store, features, cfg, true, rng);
        let [h1, h2] = cfg.head_hidden;
        let q_head = Mlp::new(&mut store, &[cfg.width, h1, h2, 1], rng);
        Self { store, body, q_head }
    }

    /// Soft action value of the squashed action `action` (1×k) at `obs`.
    pub fn forward<'p>(&'p self, tape: &mut Tape<'p>, obs: &'p Observation, action: Var) -> Var {
        self.forward_with(tape, &self.store, obs, action)
    }

    pub fn forward_with<'p>(&self, tape: &mut Tape<'p>, store: &'p ParamStore, obs: &'p Observation, action: Var) -> Var {
        let (_, h_a) = self.body.forward(tape, store, obs, Some(action));
        let h_a = h_a.expect("action token decoded");
        self.q_head.forward(tape, store, h_a)
    }
}

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// Reparameterized sample `u = tanh(μ + σ·ε)` and its log-density.
pub fn sample_squashed(tape: &mut Tape, out: PolicyOutput, noise: &[f64]) -> (Var, Var) {
    let eps = tape.input(Matrix::row_vector(noise.to_vec()));
    let std = tape.exp(out.log_std);
    let spread = tape.mul(std, eps);
    let pre = tape.add(out.mean, spread);
    let u = tape.tanh(pre);
    // log(1 − tanh²x) = 2·(ln 2 − x − softplus(−2x))
    let neg2 = tape.scale(pre, -2.0);
    let sp = tape.softplus(neg2);
    let t = tape.add(pre, sp);
    let t = tape.scale(t, -2.0);
    let log_jacobian = tape.add_scalar(t, 2.0 * std::f64::consts::LN_2);
    let gauss: f64 = noise.iter().map(|e| -0.5 * e * e - HALF_LN_TWO_PI).sum();
    let per_dim = tape.add(out.log_std, log_jacobian);
    let s = tape.sum(per_dim);
    let neg = tape.scale(s, -1.0);
    let log_prob = tape.add_scalar(neg, gauss);
    (u, log_prob)
}

/// Log-density of the squashed Gaussian at `u ∈ (−1, 1)^k`.
pub fn squashed_log_density(mean: &[f64], log_std: &[f64], u: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(u)
        .map(|((m, ls), u)| {
            let pre = u.atanh();
            let z = (pre - m) / ls.exp();
            -0.5 * z * z - HALF_LN_TWO_PI - ls - (1.0 - u * u).ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::read_layout;
    use crate::testbeds::load_case;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> NetConfig {
        NetConfig {
            embed_hidden: 8,
            width: 8,
            heads: 2,
            ffn: 8,
            encoder_layers: 1,
            decoder_layers: 1,
            head_hidden: [8, 8],
        }
    }

    #[test]
    fn full_size_embeddings_and_sequence_length() {
        let case = load_case("ten-bar-load1", Some(6)).unwrap();
        let f = Featurizer::new(&case);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut store = ParamStore::new();
        let cfg = NetConfig::full();
        let body = Body::new(&mut store, &f, &cfg, false, &mut rng);
        let mut layout = case.initial_layout();
        for p in [[9.144, 9.144, 0.0], [18.288, 9.144, 0.0]] {
            layout.push_node(crate::model::NodeSpec::free(p)).unwrap();
        }
        let pairs = [(1, 4), (4, 5), (0, 2), (2, 3), (2, 4), (3, 5), (1, 2), (4, 3), (0, 4), (1, 5)];
        for (u, v) in pairs {
            layout.push_bar(crate::model::Bar::new(u, v, crate::model::CrossSection::flat(0.01))).unwrap();
        }
        let obs = f.observe(&layout, Target::Node(4));
        let mut tape = Tape::new();
        let memory = body.encode(&mut tape, &store, &obs);
        assert_eq!((tape.value(memory).rows, tape.value(memory).cols), (16, 256));
    }

    #[test]
    fn head_widths_follow_the_case_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (name, p, node_k, bar_k) in [("ten-bar-load1", 6, 2, 1), ("sundial", 7, 3, 2)] {
            let case = load_case(name, Some(p)).unwrap();
            let f = Featurizer::new(&case);
            let net = PolicyNet::new(&f, &tiny(), &mut rng);
            let layout = if name == "sundial" {
                let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/layouts/sundial-p7.json");
                read_layout(std::path::Path::new(path)).unwrap().unwrap()
            } else {
                let mut l = case.initial_layout();
                l.push_bar(crate::model::Bar::new(0, 2, crate::model::CrossSection::flat(0.01))).unwrap();
                l
            };
            let mut tape = Tape::new();
            let (node_obs, bar_obs) = (f.observe(&layout, Target::Node(0)), f.observe(&layout, Target::Bar(0)));
            let node = net.forward(&mut tape, &node_obs);
            assert_eq!(tape.value(node.mean).cols, node_k);
            let bar = net.forward(&mut tape, &bar_obs);
            assert_eq!(tape.value(bar.mean).cols, bar_k);
            for v in [node.log_std, bar.log_std] {
                assert!(tape.value(v).data.iter().all(|x| (LOG_STD_MIN..=LOG_STD_MAX).contains(x)));
            }
        }
    }

    #[test]
    fn tape_log_density_matches_the_closed_form() {
        let mut tape = Tape::new();
        let mean = tape.input(Matrix::row_vector(vec![0.3, -1.2]));
        let log_std = tape.input(Matrix::row_vector(vec![-0.5, 0.4]));
        let (u, lp) = sample_squashed(&mut tape, PolicyOutput { mean, log_std }, &[0.7, -1.1]);
        let u = tape.value(u).data.clone();
        let expected = squashed_log_density(&[0.3, -1.2], &[-0.5, 0.4], &u);
        assert!((tape.scalar(lp) - expected).abs() < 1e-10);
    }

    #[test]
    fn squashed_density_integrates_to_one() {
        for (m, ls) in [(0.0, 0.0), (0.8, -1.0), (-1.5, 0.5)] {
            let n = 200_000;
            let h = 2.0 / n as f64;
            let total: f64 = (0..n)
                .map(|i| {
                    let u = -1.0 + (i as f64 + 0.5) * h;
                    squashed_log_density(&[m], &[ls], &[u]).exp() * h
                })
                .sum();
            assert!((total - 1.0).abs() < 0.02, "mass {total} for μ={m}, log σ={ls}");
        }
    }
}
