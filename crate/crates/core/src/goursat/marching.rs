//! Independent cross-check: a node-by-node predictor–corrector march in the
//! classical characteristic-mesh form. Node P = (i, j) is reached from
//! A = (i−1, j) along the u-direction (dβ = F dt, dr = c₋ dt) and from
//! B = (i, j−1) along the v-direction (dα = F dt, dr = c₊ dt).

use ndarray::Array2;
use rayon::prelude::*;

use super::{Boundary, GoursatGrid, GridSpec};
use crate::constraints::CharacteristicData;
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::numerics::derivative_2nd_into;
use crate::state::{CharState, Geometry, PointCoefficients};

const CORRECTOR_PASSES: usize = 2;

#[derive(Clone, Copy)]
struct Node {
    alpha: f64,
    beta: f64,
    t: f64,
    r: f64,
}

struct Local {
    f: f64,
    cp: f64,
    cm: f64,
}

fn local(n: Node, eos: &EosModel, geom: Geometry) -> Result<Local> {
    if !(n.r > 0.0) {
        return Err(Error::NonPositiveRadius { r: n.r, param: n.t });
    }
    let p = PointCoefficients::at(CharState::new(n.alpha, n.beta), n.r, geom, eos)?;
    Ok(Local {
        f: p.f,
        cp: p.c_plus,
        cm: p.c_minus,
    })
}

fn step(a: Node, b: Node, eos: &EosModel, geom: Geometry) -> Result<Node> {
    let la = local(a, eos, geom)?;
    let lb = local(b, eos, geom)?;
    // edge-averaged speeds and sources; the predictor uses the start points only
    let (mut cp, mut cm, mut fa, mut fb) = (lb.cp, la.cm, la.f, lb.f);
    let mut p = a;
    for pass in 0..=CORRECTOR_PASSES {
        if pass > 0 {
            let lp = local(p, eos, geom)?;
            cp = 0.5 * (lb.cp + lp.cp);
            cm = 0.5 * (la.cm + lp.cm);
            fa = 0.5 * (la.f + lp.f);
            fb = 0.5 * (lb.f + lp.f);
        }
        let denom = cp - cm;
        let t = (a.r - b.r + cp * b.t - cm * a.t) / denom;
        p = Node {
            t,
            r: b.r + cp * (t - b.t),
            alpha: b.alpha + fb * (t - b.t),
            beta: a.beta + fa * (t - a.t),
        };
    }
    Ok(p)
}

/// March the corner rectangle along anti-diagonals; μ and ν are recovered
/// from second-order differences of t, with the boundary values pinned.
pub fn marching_oracle(
    cp: &CharacteristicData,
    cm: &CharacteristicData,
    eos: &EosModel,
    geom: Geometry,
    spec: GridSpec,
) -> Result<GoursatGrid> {
    let b = Boundary::corner(cp, cm, spec)?;
    let (n0, n1) = (b.u.len(), b.v.len());
    let mut nodes = vec![
        Node {
            alpha: 0.0,
            beta: 0.0,
            t: 0.0,
            r: 0.0
        };
        n0 * n1
    ];
    let at = |i: usize, j: usize| i * n1 + j;
    for i in 0..n0 {
        nodes[at(i, 0)] = Node {
            alpha: b.bottom.alpha[i],
            beta: b.bottom.beta[i],
            t: b.bottom.t[i],
            r: b.bottom.r[i],
        };
    }
    for j in 0..n1 {
        nodes[at(0, j)] = Node {
            alpha: b.left.alpha[j],
            beta: b.left.beta[j],
            t: b.left.t[j],
            r: b.left.r[j],
        };
    }
    for s in 2..n0 + n1 - 1 {
        let lo = s.saturating_sub(n1 - 1).max(1);
        let hi = (s - 1).min(n0 - 1);
        if lo > hi {
            continue;
        }
        let computed: Vec<Result<Node>> = (lo..=hi)
            .into_par_iter()
            .map(|i| {
                let j = s - i;
                step(nodes[at(i - 1, j)], nodes[at(i, j - 1)], eos, geom).map_err(|e| e.at_node(i, j))
            })
            .collect();
        for (k, res) in computed.into_iter().enumerate() {
            let i = lo + k;
            nodes[at(i, s - i)] = res?;
        }
    }
    let field = |f: fn(&Node) -> f64| Array2::from_shape_fn((n0, n1), |(i, j)| f(&nodes[at(i, j)]));
    let alpha = field(|n| n.alpha);
    let beta = field(|n| n.beta);
    let t = field(|n| n.t);
    let r = field(|n| n.r);
    let du = super::spacing(&b.u);
    let dv = super::spacing(&b.v);
    let mut mu = Array2::zeros((n0, n1));
    let mut nu = Array2::zeros((n0, n1));
    let mut buf = vec![0.0; n0.max(n1)];
    for j in 0..n1 {
        derivative_2nd_into(t.column(j).iter().copied(), n0, du, &mut buf[..n0]);
        for i in 0..n0 {
            mu[[i, j]] = buf[i];
        }
    }
    for i in 0..n0 {
        derivative_2nd_into(t.row(i).iter().copied(), n1, dv, &mut buf[..n1]);
        for j in 0..n1 {
            nu[[i, j]] = buf[j];
        }
    }
    super::pin(&mut mu, &b.bottom.mu, &b.left.mu);
    super::pin(&mut nu, &b.bottom.nu, &b.left.nu);
    let valid = ndarray::Zip::from(&mu).and(&nu).map_collect(|&m, &n| m > 0.0 && n > 0.0);
    Ok(GoursatGrid {
        u: b.u,
        v: b.v,
        alpha,
        beta,
        t,
        r,
        mu,
        nu,
        valid,
    })
}
