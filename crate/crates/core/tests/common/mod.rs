//! Oracles shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use idmatrix::ensemble::HermitianMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Optimal transport cost between two discrete laws by successive shortest
/// paths on the bipartite network with cost `|x - y|`.
pub fn transport_cost(mu: &[(f64, f64)], nu: &[(f64, f64)]) -> f64 {
    let (m, k) = (mu.len(), nu.len());
    let (s, t) = (m + k, m + k + 1);
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + k + 2];
    let mut add = |edges: &mut Vec<Edge>, a: usize, b: usize, cap: f64, cost: f64| {
        adj[a].push(edges.len());
        edges.push(Edge { to: b, cap, cost });
        adj[b].push(edges.len());
        edges.push(Edge { to: a, cap: 0.0, cost: -cost });
    };
    for (i, &(_, w)) in mu.iter().enumerate() {
        add(&mut edges, s, i, w, 0.0);
    }
    for (j, &(_, w)) in nu.iter().enumerate() {
        add(&mut edges, m + j, t, w, 0.0);
    }
    for (i, &(x, _)) in mu.iter().enumerate() {
        for (j, &(y, _)) in nu.iter().enumerate() {
            add(&mut edges, i, m + j, f64::INFINITY, (x - y).abs());
        }
    }
    let mut total = 0.0;
    loop {
        let nodes = m + k + 2;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via = vec![usize::MAX; nodes];
        dist[s] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u].is_infinite() {
                    continue;
                }
                for &e in &adj[u] {
                    let edge = &edges[e];
                    if edge.cap > 1e-15 && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[t].is_infinite() {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            let e = via[v];
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = t;
        while v != s {
            let e = via[v];
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            v = edges[e ^ 1].to;
        }
        total += push * dist[t];
    }
}

/// Plain bisection on `y - (y + γ) ln(1 + y/γ) = ln x`, with no rescaling.
pub fn k_gamma_oracle(gamma: f64, x: f64) -> f64 {
    let g = |y: f64| y - (y + gamma) * (y / gamma).ln_1p() - x.ln();
    let (mut lo, mut hi) = (0.0, 1.0);
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, complex: bool) -> HermitianMatrix {
    let mut dense = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        dense[i * n + i] = Complex64::new(rng.random_range(-3.0..3.0), 0.0);
        for j in i + 1..n {
            let im = if complex { rng.random_range(-2.0..2.0) } else { 0.0 };
            let v = Complex64::new(rng.random_range(-2.0..2.0), im);
            dense[i * n + j] = v;
            dense[j * n + i] = v.conj();
        }
    }
    HermitianMatrix::from_dense(n, &dense)
}
