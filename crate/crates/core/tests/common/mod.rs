//! Reference implementations written straight from the pseudocode, sharing
//! no code with the library: plain `Vec<f64>` arithmetic, direct
//! exponentials, boxes enumerated by `(n, i)`.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `[i·2^n, (i+1)·2^n − 1]` for `i ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Covering intervals with `J1 ≤ horizon` (`by_end = false`) or
/// `J2 ≤ horizon` (`by_end = true`).
pub fn spans(horizon: usize, by_end: bool) -> Vec<Span> {
    let mut out = Vec::new();
    let mut n = 0;
    while (1usize << n) <= horizon {
        let len = 1usize << n;
        let mut i = 1;
        loop {
            let s = Span {
                start: i * len,
                end: (i + 1) * len - 1,
            };
            let keep = if by_end {
                s.end <= horizon
            } else {
                s.start <= horizon
            };
            if !keep {
                break;
            }
            out.push(s);
            i += 1;
        }
        n += 1;
    }
    out
}

/// `1 / (J1² (1 + ⌊log2 J1⌋))`, normalized over `boxes`.
pub fn jun_tau(boxes: &[Span]) -> Vec<f64> {
    let raw: Vec<f64> = boxes
        .iter()
        .map(|b| {
            let s = b.start as f64;
            1.0 / (s * s * (1.0 + s.log2().floor()))
        })
        .collect();
    let z: f64 = raw.iter().sum();
    raw.iter().map(|x| x / z).collect()
}

/// `{2^{−i} : i = 1..max(1, ⌈log2 √T⌉)}`.
pub fn grid(horizon: usize) -> Vec<f64> {
    let mut m = 0;
    while 4f64.powi(m) < horizon as f64 {
        m += 1;
    }
    (1..=m.max(1)).map(|i| 0.5f64.powi(i)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
}

#[derive(Debug, Clone)]
enum Oracle {
    Hedge {
        rate: f64,
        cum: Vec<f64>,
    },
    Squint {
        grid: Vec<f64>,
        r: Vec<f64>,
        v: Vec<f64>,
    },
}

impl Oracle {
    fn hedge(len: usize, k: usize) -> Self {
        let rate = if k < 2 {
            0.0
        } else {
            (8.0 * (k as f64).ln() / len as f64).sqrt()
        };
        Oracle::Hedge {
            rate,
            cum: vec![0.0; k],
        }
    }

    fn squint(len: usize, k: usize) -> Self {
        Oracle::Squint {
            grid: grid(len),
            r: vec![0.0; k],
            v: vec![0.0; k],
        }
    }

    fn weights(&self, pi: &[f64]) -> Vec<f64> {
        let mut w: Vec<f64> = match self {
            Oracle::Hedge { rate, cum } => {
                let lo = cum.iter().cloned().fold(f64::INFINITY, f64::min);
                pi.iter()
                    .zip(cum)
                    .map(|(p, c)| p * (-rate * (c - lo)).exp())
                    .collect()
            }
            Oracle::Squint { grid, r, v } => (0..pi.len())
                .map(|k| {
                    let per_rate: f64 = grid
                        .iter()
                        .map(|eta| (eta * r[k] - eta * eta * v[k]).exp() * eta)
                        .sum();
                    pi[k] * per_rate / grid.len() as f64
                })
                .collect(),
        };
        normalize(&mut w);
        w
    }

    fn observe(&mut self, w: &[f64], l: &[f64]) {
        match self {
            Oracle::Hedge { cum, .. } => {
                for (c, x) in cum.iter_mut().zip(l) {
                    *c += x;
                }
            }
            Oracle::Squint { r, v, .. } => {
                let wl = dot(w, l);
                for k in 0..l.len() {
                    let rk = wl - l[k];
                    r[k] += rk;
                    v[k] += rk * rk;
                }
            }
        }
    }
}

/// What the CBCE oracle reports for each round.
#[derive(Debug, Clone)]
pub struct CbceOracleRound {
    pub weights: Vec<f64>,
    /// `(span, z, v, q)` for each active box.
    pub boxes: Vec<(Span, f64, f64, f64)>,
    pub fallback: bool,
}

/// CBCE with Hedge (`squint = false`) or Squint boxes, Jun `τ` over every
/// box starting by `T`. All sums run over `i = 1..t−1` with zeros outside
/// the box's interval.
pub fn cbce_oracle(losses: &[Vec<f64>], pi: &[f64], squint: bool) -> Vec<CbceOracleRound> {
    let horizon = losses.len();
    let k = pi.len();
    let boxes = spans(horizon, false);
    let tau = jun_tau(&boxes);
    let n = boxes.len();
    let mut g_hist: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut zv_hist: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut learners: Vec<Option<Oracle>> = vec![None; n];
    let mut out = Vec::new();
    for t in 1..=horizon {
        let l = &losses[t - 1];
        let active: Vec<usize> = (0..n).filter(|&b| boxes[b].contains(t)).collect();
        let mut z = vec![0.0; n];
        let mut v = vec![0.0; n];
        for &b in &active {
            let j = boxes[b];
            z[b] = g_hist[b].iter().sum();
            let from_j1: f64 = g_hist[b][j.start - 1..].iter().sum();
            let wealth: f64 = zv_hist[b].iter().sum();
            v[b] = (1.0 / (t - j.start + 1) as f64) * from_j1 * (1.0 + wealth);
        }
        let q_hat: Vec<f64> = (0..n)
            .map(|b| {
                if active.contains(&b) {
                    tau[b] * v[b].max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        let norm: f64 = q_hat.iter().sum();
        let fallback = norm <= 0.0;
        let q: Vec<f64> = if !fallback {
            q_hat.iter().map(|x| x / norm).collect()
        } else {
            let mass: f64 = active.iter().map(|&b| tau[b]).sum();
            (0..n)
                .map(|b| {
                    if active.contains(&b) {
                        tau[b] / mass
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        for &b in &active {
            if learners[b].is_none() {
                let len = boxes[b].len();
                learners[b] = Some(if squint {
                    Oracle::squint(len, k)
                } else {
                    Oracle::hedge(len, k)
                });
            }
        }
        let box_w: Vec<Option<Vec<f64>>> = (0..n)
            .map(|b| {
                learners[b]
                    .as_ref()
                    .filter(|_| active.contains(&b))
                    .map(|o| o.weights(pi))
            })
            .collect();
        let mut w = vec![0.0; k];
        for &b in &active {
            for (acc, x) in w.iter_mut().zip(box_w[b].as_ref().unwrap()) {
                *acc += q[b] * x;
            }
        }
        let x: Vec<f64> = (0..n)
            .map(|b| box_w[b].as_ref().map_or(0.0, |w| dot(w, l)))
            .collect();
        for b in 0..n {
            let (g, zv) = if active.contains(&b) {
                // `ℓ̂ − x_b` written as `Σ q (x − x_b)`; rounding noise is a tie.
                let r: f64 = active.iter().map(|&c| q[c] * (x[c] - x[b])).sum();
                let r = if r.abs() < 1e-14 { 0.0 } else { r };
                let g = if v[b] > 0.0 { r } else { r.max(0.0) };
                (g, z[b] * v[b])
            } else {
                (0.0, 0.0)
            };
            g_hist[b].push(g);
            zv_hist[b].push(zv);
        }
        for &b in &active {
            let wb = box_w[b].clone().unwrap();
            learners[b].as_mut().unwrap().observe(&wb, l);
        }
        out.push(CbceOracleRound {
            weights: w,
            boxes: active
                .iter()
                .map(|&b| (boxes[b], z[b], v[b], q[b]))
                .collect(),
            fallback,
        });
    }
    out
}

/// One round of the Squint-CE oracle.
#[derive(Debug, Clone)]
pub struct SquintCeOracleRound {
    /// `E_{q_t}[P_t^b]` marginalized over `η`.
    pub weights: Vec<f64>,
    /// Exponent with the box normalizer `+ Σ_{s∈J, s<t} g_s(b)` restored.
    pub closed_form: Vec<f64>,
    /// The weight formula exactly as written, without that term.
    pub literal_closed_form: Vec<f64>,
    pub regret: Vec<f64>,
    pub ghat: f64,
    /// `ĝ_t` computed with `q̃_t` over all of `B`.
    pub ghat_full: f64,
}

/// Squint-CE over every box with `J2 ≤ T`, keeping `G^b` for all of them.
pub fn squint_ce_oracle(losses: &[Vec<f64>], pi: &[f64], jun: bool) -> Vec<SquintCeOracleRound> {
    let horizon = losses.len();
    let k = pi.len();
    let boxes = spans(horizon, true);
    let n = boxes.len();
    let tau = if jun {
        jun_tau(&boxes)
    } else {
        vec![1.0 / n as f64; n]
    };
    let etas = grid(horizon);
    let gamma = 1.0 / etas.len() as f64;
    let m = etas.len() * k;
    let mut big_g = vec![0.0; n];
    let mut own_g = vec![0.0; n];
    let mut f = vec![vec![0.0f64; m]; n];
    let mut rr = vec![vec![0.0; k]; n];
    let mut vv = vec![vec![0.0; k]; n];
    let mut out = Vec::new();

    for t in 1..=horizon {
        let l = &losses[t - 1];
        let active: Vec<usize> = (0..n).filter(|&b| boxes[b].contains(t)).collect();
        let p: Vec<Vec<f64>> = (0..n)
            .map(|b| {
                let mut pb: Vec<f64> = (0..m)
                    .map(|j| (-f[b][j]).exp() * gamma * pi[j % k])
                    .collect();
                normalize(&mut pb);
                pb
            })
            .collect();
        let g_min = big_g.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut q_tilde: Vec<f64> = (0..n)
            .map(|b| (-(big_g[b] - g_min)).exp() * tau[b])
            .collect();
        normalize(&mut q_tilde);
        let active_mass: f64 = active.iter().map(|&b| q_tilde[b]).sum();
        let q: Vec<f64> = (0..n)
            .map(|b| {
                if active.contains(&b) {
                    q_tilde[b] / active_mass
                } else {
                    0.0
                }
            })
            .collect();

        let mut num = vec![0.0; k];
        let mut den = 0.0;
        for &b in &active {
            for (j, pj) in p[b].iter().enumerate() {
                let eta = etas[j / k];
                num[j % k] += q[b] * pj * eta;
                den += q[b] * pj * eta;
            }
        }
        let weights: Vec<f64> = num.iter().map(|x| x / den).collect();

        let tau_active: f64 = active.iter().map(|&b| tau[b]).sum();
        let closed = |restore: bool| {
            let mut num = vec![0.0; k];
            for &b in &active {
                let extra = if restore { own_g[b] } else { 0.0 };
                for &eta in &etas {
                    for e in 0..k {
                        let x = -(big_g[b] - g_min) + extra + eta * rr[b][e] - eta * eta * vv[b][e];
                        num[e] += tau[b] / tau_active * gamma * pi[e] * x.exp() * eta;
                    }
                }
            }
            let den: f64 = num.iter().sum();
            num.iter().map(|x| x / den).collect::<Vec<f64>>()
        };
        let closed_form = closed(true);
        let literal_closed_form = closed(false);

        let wl = dot(&weights, l);
        let regret: Vec<f64> = l.iter().map(|x| wl - x).collect();
        let fhat: Vec<f64> = (0..m)
            .map(|j| {
                let eta = etas[j / k];
                let r = regret[j % k];
                -eta * r + eta * eta * r * r
            })
            .collect();
        let mut g = vec![0.0f64; n];
        for &b in &active {
            let e: f64 = p[b]
                .iter()
                .zip(&fhat)
                .map(|(pj, fj)| pj * (-fj).exp())
                .sum();
            g[b] = -e.ln();
        }
        let ghat = -active
            .iter()
            .map(|&b| q[b] * (-g[b]).exp())
            .sum::<f64>()
            .ln();
        for (b, gb) in g.iter_mut().enumerate() {
            if !active.contains(&b) {
                *gb = ghat;
            }
        }
        let ghat_full = -(0..n).map(|b| q_tilde[b] * (-g[b]).exp()).sum::<f64>().ln();
        for b in 0..n {
            big_g[b] += g[b];
        }
        for &b in &active {
            own_g[b] += g[b];
            for j in 0..m {
                f[b][j] += fhat[j];
            }
            for e in 0..k {
                rr[b][e] += regret[e];
                vv[b][e] += regret[e] * regret[e];
            }
        }
        out.push(SquintCeOracleRound {
            weights,
            closed_form,
            literal_closed_form,
            regret,
            ghat,
            ghat_full,
        });
    }
    out
}

/// Uniform losses in `[0, 1]`, with a few exact 0/1 values mixed in.
pub fn random_losses(rng: &mut ChaCha8Rng, horizon: usize, experts: usize) -> Vec<Vec<f64>> {
    (0..horizon)
        .map(|_| {
            (0..experts)
                .map(|_| match rng.gen_range(0..10) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.gen_range(0.0..=1.0),
                })
                .collect()
        })
        .collect()
}

pub fn random_prior(rng: &mut ChaCha8Rng, experts: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..experts).map(|_| rng.gen_range(0.1..1.0)).collect();
    normalize(&mut p);
    p
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
