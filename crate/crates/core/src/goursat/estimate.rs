//! Recommended strip widths from the smallness conditions of the existence
//! proof. The suprema over the compact box Ω_l = R_l × [½r_m, 3/2 r_M] are
//! taken by dense sampling; every constant that enters a bound is kept in the
//! result so a run can be audited from its manifest.

use serde::Serialize;

use crate::constraints::CharacteristicData;
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::state::{CharState, Geometry, PointCoefficients};

const SAMPLES_AB: usize = 64;
const SAMPLES_R: usize = 16;
const SCAN_STEPS: usize = 4096;

/// One smallness condition and how it entered the minimum.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundFlag {
    pub name: &'static str,
    /// Right-hand side of the condition; infinite when unconstraining.
    pub value: f64,
    /// Zero denominator or non-positive numerator: the condition is dropped.
    pub unconstraining: bool,
}

/// Constants of the width estimate. Upper-case bounds of the proof are stored
/// in the lower-case fields `a`, `b`, `d`, `g`, `m`; `r_big_m` is r_M.
#[derive(Debug, Clone, Serialize)]
pub struct StripWidthEstimate {
    pub l: f64,
    pub u_star: f64,
    pub v_star: f64,
    pub a0: f64,
    pub b0: f64,
    pub d0: f64,
    pub g0: f64,
    pub m0: f64,
    pub r_m: f64,
    #[serde(rename = "r_M")]
    pub r_big_m: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub f_bar: f64,
    pub k_bar: f64,
    pub l_bar: f64,
    pub c_plus_dagger: f64,
    pub c_minus_dagger: f64,
    pub c_plus_alpha: f64,
    pub c_plus_beta: f64,
    pub c_minus_alpha: f64,
    pub c_minus_beta: f64,
    pub c_pm: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
    pub f_r: f64,
    pub q1: f64,
    pub q2: f64,
    pub s1: f64,
    pub s2: f64,
    pub h1: f64,
    pub h2: f64,
    /// Largest prefix of C⁻ on which the data stay inside the (A, B, D, r) box.
    pub h_cap: f64,
    pub h_rec: f64,
    pub eps_rec: f64,
    pub h_bounds: Vec<BoundFlag>,
    pub eps_bounds: Vec<BoundFlag>,
    /// Ω_l samples skipped because α+β lies outside the equation-of-state range.
    pub skipped_samples: usize,
}

#[derive(Default)]
struct Sups {
    f: f64,
    cpa: f64,
    cpb: f64,
    cma: f64,
    cmb: f64,
    cpm: f64,
    cp: f64,
    cm: f64,
    fa: f64,
    fb: f64,
    fr: f64,
    a1: f64,
    a2: f64,
    // |B₁|D + |C₁|l and |B₂|D + |C₂|l at the same point
    s1: f64,
    q2: f64,
    skipped: usize,
    hit: usize,
}

fn bound(name: &'static str, num: f64, den: f64) -> BoundFlag {
    if den > 0.0 && num > 0.0 && (num / den).is_finite() {
        BoundFlag {
            name,
            value: num / den,
            unconstraining: false,
        }
    } else {
        BoundFlag {
            name,
            value: f64::INFINITY,
            unconstraining: true,
        }
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn sample_box(eos: &EosModel, geom: Geometry, a: f64, b: f64, d: f64, l: f64, r_lo: f64, r_hi: f64) -> Sups {
    use rayon::prelude::*;
    let alphas = grid(-a, a, SAMPLES_AB);
    let betas = grid(-b, b, SAMPLES_AB);
    let radii = grid(r_lo, r_hi, SAMPLES_R);
    let (chi_lo, chi_hi) = eos.chi_dagger_range();
    let partial: Vec<Sups> = alphas
        .par_iter()
        .map(|&al| {
            let mut s = Sups::default();
            for &be in &betas {
                let chi = al + be;
                if !(chi >= chi_lo && chi <= chi_hi) {
                    s.skipped += 1;
                    continue;
                }
                let Ok((eta, slope)) = eos.eta_and_slope(chi) else {
                    s.skipped += 1;
                    continue;
                };
                s.hit += 1;
                let c = CharState::new(al, be);
                for &r in &radii {
                    let p = PointCoefficients::from_eta(c, r, eta, slope, geom);
                    let g = p.grad;
                    s.cpa = s.cpa.max(g.cp_alpha.abs());
                    s.cpb = s.cpb.max(g.cp_beta.abs());
                    s.cma = s.cma.max(g.cm_alpha.abs());
                    s.cmb = s.cmb.max(g.cm_beta.abs());
                    s.cpm = s.cpm.max(1.0 / (p.c_plus - p.c_minus));
                    s.cp = s.cp.max(p.c_plus.abs());
                    s.cm = s.cm.max(p.c_minus.abs());
                    s.f = s.f.max(p.f.abs());
                    s.fa = s.fa.max(p.f_alpha.abs());
                    s.fb = s.fb.max(p.f_beta.abs());
                    s.fr = s.fr.max(p.f_r.abs());
                    let t = p.gamma_mu_transport();
                    s.a1 = s.a1.max(t.a1.abs());
                    s.a2 = s.a2.max(t.a2.abs());
                    s.s1 = s.s1.max(t.b1.abs() * d + t.c1.abs() * l);
                    s.q2 = s.q2.max(t.b2.abs() * d + t.c2.abs() * l);
                }
            }
            s
        })
        .collect();
    // maxima are order independent; fold in index order anyway
    partial.into_iter().fold(Sups::default(), |mut acc, s| {
        acc.f = acc.f.max(s.f);
        acc.cpa = acc.cpa.max(s.cpa);
        acc.cpb = acc.cpb.max(s.cpb);
        acc.cma = acc.cma.max(s.cma);
        acc.cmb = acc.cmb.max(s.cmb);
        acc.cpm = acc.cpm.max(s.cpm);
        acc.cp = acc.cp.max(s.cp);
        acc.cm = acc.cm.max(s.cm);
        acc.fa = acc.fa.max(s.fa);
        acc.fb = acc.fb.max(s.fb);
        acc.fr = acc.fr.max(s.fr);
        acc.a1 = acc.a1.max(s.a1);
        acc.a2 = acc.a2.max(s.a2);
        acc.s1 = acc.s1.max(s.s1);
        acc.q2 = acc.q2.max(s.q2);
        acc.skipped += s.skipped;
        acc.hit += s.hit;
        acc
    })
}

/// F₁(u, v) and F₂(u, v) on a uniform v-grid at fixed u.
fn f1_f2(u: f64, v_star: f64, k_bar: f64, l_bar: f64, m: f64, m0: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = SCAN_STEPS;
    let dv = v_star / n as f64;
    let vs: Vec<f64> = (0..=n).map(|k| k as f64 * dv).collect();
    let f1: Vec<f64> = vs
        .iter()
        .map(|&v| (u * k_bar).exp() * (1.0 + u * l_bar * (v * l_bar).exp() * m))
        .collect();
    let f2: Vec<f64> = vs
        .iter()
        .map(|&v| u * k_bar * l_bar * (u * k_bar + v * l_bar).exp())
        .collect();
    // Φ = ∫f₂; inner = e^{Φ(v)} ∫₀^v f₁ e^{−Φ}
    let mut phi = vec![0.0; n + 1];
    let mut w = vec![0.0; n + 1];
    for k in 1..=n {
        phi[k] = phi[k - 1] + 0.5 * dv * (f2[k - 1] + f2[k]);
        w[k] = w[k - 1] + 0.5 * dv * (f1[k - 1] * (-phi[k - 1]).exp() + f1[k] * (-phi[k]).exp());
    }
    let big_f1: Vec<f64> = (0..=n).map(|k| f1[k] + f2[k] * phi[k].exp() * w[k]).collect();
    let mut int_f1 = 0.0;
    let mut big_f2 = vec![0.0; n + 1];
    for k in 0..=n {
        if k > 0 {
            int_f1 += 0.5 * dv * (big_f1[k - 1] + big_f1[k]);
        }
        big_f2[k] = (vs[k] * l_bar).exp() * (m0 + k_bar * int_f1);
    }
    (vs, big_f1, big_f2)
}

/// Widths h_rec (in u) and ε_rec (in v) for which the iteration on the corner
/// rectangle is guaranteed to stay in the bounded set and contract.
pub fn estimate_strip_width(
    cp: &CharacteristicData,
    cm: &CharacteristicData,
    eos: &EosModel,
    geom: Geometry,
    l: f64,
) -> Result<StripWidthEstimate> {
    if !(l > 1.0) || !l.is_finite() {
        return Err(Error::InvalidL(l));
    }
    if cp.len() < 2 || cm.len() < 2 {
        return Err(Error::InvalidData("width estimate needs at least two samples per side".into()));
    }
    let sup = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let a0 = sup(&cp.alpha);
    let b0 = sup(&cp.beta);
    let d0 = sup(&cp.delta);
    let r_m = cp.r.iter().copied().fold(f64::INFINITY, f64::min);
    let r_big_m = cp.r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (a, b, d) = (l * a0, l * b0, l * d0);
    let u_star = cm.end_param();
    let v_star = cp.end_param();

    // prefix of C⁻ inside the box (non-strict, so vanishing bounds admit zero data)
    let inside = |k: usize| {
        cm.alpha[k].abs() <= a
            && cm.beta[k].abs() <= b
            && cm.delta[k].abs() <= d
            && cm.r[k] >= 0.5 * r_m
            && cm.r[k] <= 1.5 * r_big_m
    };
    let mut last = 0;
    while last + 1 < cm.len() && inside(last + 1) {
        last += 1;
    }
    let h_cap = cm.param[last.max(1)];
    let upto = |h: f64| cm.param.iter().take_while(|&&p| p <= h * (1.0 + 1e-12)).count().max(1);
    let n_cap = upto(h_cap);
    let m0 = sup(&cm.mu[..n_cap]);
    let g0 = sup(&cm.gamma[..n_cap]);

    let s = sample_box(eos, geom, a, b, d, l, 0.5 * r_m, 1.5 * r_big_m);
    if s.hit == 0 {
        return Err(Error::InvalidData(
            "no admissible state in the sampled box; the data leave the equation-of-state range".into(),
        ));
    }
    let f_bar = s.f;
    let q1 = l * s.a1;
    let q2 = s.q2;
    let s1 = s.s1;
    let s2 = l * s.a2;

    let v = v_star;
    let bracket = 1.0 + v * v * s1 * s2 * (v * (q1 + q2)).exp();
    let fb1 = (v * q1).exp() * bracket;
    let fb2 = v * s1 * (v * q2).exp() * fb1;
    let fb3 = (v * q2).exp() * bracket;
    let fb4 = v * s2 * (v * q1).exp() * fb3;
    let g = fb1 * g0 + fb2 * m0;
    let m = fb3 * m0 + fb4 * g0;

    let l_bar = s.cpm * (s.cma * l * f_bar + s.cmb * d);
    let k_bar = s.cpm * (s.cpa * g + s.cpb * m * f_bar);
    let tu = m * l_bar + l * k_bar;
    let h1 = l * (s.fa * g + s.fb * m * f_bar + s.fr * s.cm * m) + f_bar * tu;
    let h2 = m * (s.fa * l * f_bar + s.fb * d + s.fr * s.cp * l) + f_bar * tu;

    // widths in u
    let mut h_bounds = vec![
        bound("(l-1) a0 / G", (l - 1.0) * a0, g),
        bound("(l-1) b0 / (M Fbar)", (l - 1.0) * b0, m * f_bar),
        bound("r_m / (2 c-dagger M)", r_m, 2.0 * s.cm * m),
        bound("(D - d0) / H2", d - d0, h2),
    ];
    // F₁(h, 0) = e^{hK̄}(1 + hL̄M) must leave room below l for a positive ε
    let target = 0.5 * (1.0 + l);
    let f1_at = |h: f64| (h * k_bar).exp() * (1.0 + h * l_bar * m);
    if f1_at(h_cap) > target {
        // bracket geometrically first: the crossing can sit many decades below h_cap
        let mut lo = h_cap;
        while f1_at(lo) > target && lo > f64::MIN_POSITIVE {
            lo *= 0.5;
        }
        let mut hi = (2.0 * lo).min(h_cap);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f1_at(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        h_bounds.push(BoundFlag {
            name: "F1(h, 0) <= (1 + l)/2",
            value: lo,
            unconstraining: false,
        });
    } else {
        h_bounds.push(BoundFlag {
            name: "F1(h, 0) <= (1 + l)/2",
            value: f64::INFINITY,
            unconstraining: true,
        });
    }
    let h_rec = h_bounds.iter().fold(h_cap, |acc, f| acc.min(f.value));

    // widths in v, given h_rec
    let n_h = upto(h_rec);
    let sup_alpha_m = sup(&cm.alpha[..n_h]);
    let sup_beta_m = sup(&cm.beta[..n_h]);
    let r_lo = cm.r[..n_h].iter().copied().fold(f64::INFINITY, f64::min);
    let r_hi = cm.r[..n_h].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut eps_bounds = vec![
        bound("(B - sup|beta-|) / D", b - sup_beta_m, d),
        bound("(A - sup|alpha-|) / (l Fbar)", a - sup_alpha_m, l * f_bar),
        bound(
            "r-margin / (c+dagger l)",
            (r_lo - 0.5 * r_m).min(1.5 * r_big_m - r_hi),
            s.cp * l,
        ),
        bound("(G - g0) / H1", g - g0, h1),
    ];
    // largest scanned v with F₁ ≤ l and F₂ ≤ M on [0, v]; the scan window
    // shrinks when the very first step already fails
    let mut window = v_star;
    let scan = loop {
        let (vs, big_f1, big_f2) = f1_f2(h_rec, window, k_bar, l_bar, m, m0);
        let ok = |k: usize| big_f1[k] <= l * (1.0 + 1e-12) && big_f2[k] <= m * (1.0 + 1e-12);
        let mut k = 0;
        while k < SCAN_STEPS && ok(k + 1) {
            k += 1;
        }
        if k == SCAN_STEPS && window == v_star {
            break None;
        }
        if k > 0 || vs[1] <= f64::MIN_POSITIVE {
            break Some(vs[k]);
        }
        window = vs[1];
    };
    eps_bounds.push(match scan {
        None => BoundFlag {
            name: "F1 <= l, F2 <= M",
            value: f64::INFINITY,
            unconstraining: true,
        },
        Some(v) => BoundFlag {
            name: "F1 <= l, F2 <= M",
            value: v,
            unconstraining: false,
        },
    });
    let eps_rec = eps_bounds.iter().fold(v_star, |acc, f| acc.min(f.value));

    Ok(StripWidthEstimate {
        l,
        u_star,
        v_star,
        a0,
        b0,
        d0,
        g0,
        m0,
        r_m,
        r_big_m,
        a,
        b,
        d,
        g,
        m,
        f_bar,
        k_bar,
        l_bar,
        c_plus_dagger: s.cp,
        c_minus_dagger: s.cm,
        c_plus_alpha: s.cpa,
        c_plus_beta: s.cpb,
        c_minus_alpha: s.cma,
        c_minus_beta: s.cmb,
        c_pm: s.cpm,
        f_alpha: s.fa,
        f_beta: s.fb,
        f_r: s.fr,
        q1,
        q2,
        s1,
        s2,
        h1,
        h2,
        h_cap,
        h_rec,
        eps_rec,
        h_bounds,
        eps_bounds,
        skipped_samples: s.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{solve_cminus, solve_cplus, FreeData};

    fn gas() -> EosModel {
        EosModel::polytropic(2.0, 0.5, 0.0, (1e-8, 1e8)).unwrap()
    }

    fn sides(beta: impl Fn(f64) -> f64, alpha: impl Fn(f64) -> f64, geom: Geometry) -> (CharacteristicData, CharacteristicData) {
        let n = 64;
        let b: Vec<f64> = (0..=n).map(|k| beta(k as f64 / n as f64)).collect();
        let a: Vec<f64> = (0..=n).map(|k| alpha(0.5 * k as f64 / n as f64)).collect();
        let (fp, fm) = FreeData::pair(b, 1.0 / n as f64, a, 0.5 / n as f64, 1.0).unwrap();
        let e = gas();
        (solve_cplus(&fp, &e, geom).unwrap(), solve_cminus(&fm, &e, geom, 1e-3).unwrap())
    }

    #[test]
    fn rejects_l_not_above_one() {
        let (cp, cm) = sides(|_| 2.0, |_| 2.0, Geometry::Spherical);
        for l in [1.0, 0.5, f64::NAN] {
            assert!(matches!(estimate_strip_width(&cp, &cm, &gas(), Geometry::Spherical, l), Err(Error::InvalidL(_))));
        }
    }

    #[test]
    fn static_data_drop_the_vanishing_bounds() {
        let (cp, cm) = sides(|_| 2.0, |_| 2.0, Geometry::Spherical);
        let est = estimate_strip_width(&cp, &cm, &gas(), Geometry::Spherical, 2.0).unwrap();
        assert_eq!((est.d0, est.g0, est.m0), (0.0, 0.0, 1.0));
        // D − d₀ = 0 and G − g₀ = 0 leave nothing to bound
        let name = |v: &[BoundFlag], n: &str| v.iter().find(|f| f.name == n).unwrap().clone();
        assert!(name(&est.h_bounds, "(D - d0) / H2").unconstraining);
        assert!(name(&est.eps_bounds, "(B - sup|beta-|) / D").unconstraining);
        assert!(est.f_bar > 0.0, "Ω_l contains states with α ≠ β");
        assert!(est.h_rec > 0.0 && est.h_rec <= est.u_star);
        assert!(est.eps_rec > 0.0 && est.eps_rec <= est.v_star);
    }

    #[test]
    fn smooth_data_give_positive_widths_and_ordered_bounds() {
        let (cp, cm) = sides(|v| 2.0 + 0.1 * v.sin(), |u| 2.0 + 0.1 * u, Geometry::Spherical);
        let est = estimate_strip_width(&cp, &cm, &gas(), Geometry::Spherical, 2.0).unwrap();
        assert!(est.g > est.g0 && est.m > est.m0, "{} {} {} {}", est.g, est.g0, est.m, est.m0);
        assert!(est.h_rec > 0.0 && est.h_rec <= est.u_star);
        assert!(est.eps_rec > 0.0 && est.eps_rec <= est.v_star);
        assert_eq!(est.a, 2.0 * est.a0);
    }

    #[test]
    fn doubling_l_never_shrinks_the_box() {
        let (cp, cm) = sides(|v| 2.0 + 0.1 * v.sin(), |u| 2.0 + 0.1 * u, Geometry::Spherical);
        let e1 = estimate_strip_width(&cp, &cm, &gas(), Geometry::Spherical, 1.5).unwrap();
        let e2 = estimate_strip_width(&cp, &cm, &gas(), Geometry::Spherical, 3.0).unwrap();
        assert!(e2.a >= e1.a && e2.b >= e1.b && e2.d >= e1.d);
    }

    #[test]
    fn plane_geometry_has_zero_source_constants() {
        let (cp, cm) = sides(|v| 2.0 + 0.1 * v.sin(), |u| 2.0 + 0.1 * u, Geometry::Plane);
        let est = estimate_strip_width(&cp, &cm, &gas(), Geometry::Plane, 2.0).unwrap();
        assert_eq!(est.f_bar, 0.0);
        assert_eq!((est.f_alpha, est.f_beta, est.f_r), (0.0, 0.0, 0.0));
        assert!(est.h_rec > 0.0 && est.eps_rec > 0.0);
    }
}
