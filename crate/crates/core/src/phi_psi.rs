//! Frobenius `phi`, the decomposition along the p-basis
//! `{X^i (1+Y)^j : 0 <= i, j < p}`, and its left inverse `psi`.
//!
//! `psi` is computed on the canonical representative. It is a well-defined map
//! out of `R` only after projecting to [`psi_window`]: the truncation ideal
//! `(Y^My)` is not stable under the p-basis sieve once `N > 1`, because
//! `Y^{pm} = (phi(Y) - p g)^m` leaks terms `p^k Y^{m-k}` into low degrees.

use crate::error::{Error, Result};
use crate::series::{SeriesContext, TruncatedSeries, WCoordinates};

/// Images of `X` and `Y` under `phi`.
pub fn phi_generators(sctx: SeriesContext) -> (TruncatedSeries, TruncatedSeries) {
    let p = sctx.p() as usize;
    let gx = TruncatedSeries::monomial(sctx, p, 0, 1);
    let gy = &TruncatedSeries::w(sctx).pow(p) - &TruncatedSeries::one(sctx);
    (gx, gy)
}

/// `phi(f) = f(X^p, (1+Y)^p - 1)`.
pub fn phi(f: &TruncatedSeries) -> TruncatedSeries {
    let (gx, gy) = phi_generators(f.sctx());
    f.substitute(&gx, &gy).expect("phi preserves the truncation ideal")
}

pub fn phi_iterate(f: &TruncatedSeries, n: usize) -> TruncatedSeries {
    (0..n).fold(f.clone(), |acc, _| phi(&acc))
}

/// The `p^2` components `f_ij` with `f = sum_{i,j<p} phi(f_ij) X^i (1+Y)^j`,
/// indexed as `components[i][j]`.
pub fn pbasis_decompose(f: &TruncatedSeries) -> Vec<Vec<TruncatedSeries>> {
    let sctx = f.sctx();
    let p = sctx.p() as usize;
    let w = f.to_w_coordinates();
    let mut parts = vec![vec![WCoordinates::zero(sctx); p]; p];
    for (a, b, c) in w.terms() {
        parts[a % p][b % p].set(a / p, b / p, c);
    }
    parts
        .iter()
        .map(|row| row.iter().map(TruncatedSeries::from_w_coordinates).collect())
        .collect()
}

/// `sum_{i,j<p} phi(f_ij) X^i (1+Y)^j`.
pub fn pbasis_reconstruct(components: &[Vec<TruncatedSeries>]) -> TruncatedSeries {
    let sctx = components[0][0].sctx();
    let w = TruncatedSeries::w(sctx);
    let mut out = TruncatedSeries::zero(sctx);
    let mut xi = TruncatedSeries::one(sctx);
    for row in components {
        let mut basis = xi.clone();
        for fij in row {
            if !fij.is_zero() {
                out = &out + &(&phi(fij) * &basis);
            }
            basis = &basis * &w;
        }
        xi = &xi * &TruncatedSeries::x(sctx);
    }
    out
}

/// `psi(f) = f_00` on the canonical representative.
pub fn psi(f: &TruncatedSeries) -> TruncatedSeries {
    let sctx = f.sctx();
    let p = sctx.p() as usize;
    let w = f.to_w_coordinates();
    let mut part = WCoordinates::zero(sctx);
    for (a, b, c) in w.terms() {
        if a % p == 0 && b % p == 0 {
            part.set(a / p, b / p, c);
        }
    }
    TruncatedSeries::from_w_coordinates(&part)
}

pub fn psi_iterate(f: &TruncatedSeries, n: usize) -> TruncatedSeries {
    (0..n).fold(f.clone(), |acc, _| psi(&acc))
}

/// Degrees `(wx, wy)` such that `psi` followed by projection to
/// `i < wx, j < wy` is well defined on `R`.
pub fn psi_window(sctx: &SeriesContext) -> (usize, usize) {
    let p = sctx.p() as usize;
    let n = sctx.ctx().n() as usize;
    (sctx.mx() / p, (sctx.my() / p).saturating_sub(n - 1))
}

/// `psi(f)` projected to [`psi_window`].
pub fn psi_projected(f: &TruncatedSeries) -> TruncatedSeries {
    let (wx, wy) = psi_window(&f.sctx());
    psi(f).project(wx, wy)
}

/// Per-variable degree bound `floor(M / p^n)` inside which `phi^n` loses nothing
/// to truncation.
pub fn safe_window(sctx: &SeriesContext, n: u32) -> (usize, usize) {
    let q = (sctx.p() as usize).pow(n);
    (sctx.mx() / q, sctx.my() / q)
}

/// Checks `f = sum_{i,j<p^n} (1+Y)^i X^j phi^n(psi^n((1+Y)^{-i} X^{-j} f))`.
///
/// The inner terms are formed by iterated component extraction, so no inverse
/// of `X` or `1+Y` is needed.
pub fn partition_identity_check(f: &TruncatedSeries, n: u32) -> Result<bool> {
    let sctx = f.sctx();
    let p = sctx.p() as usize;
    let q = p.pow(n);
    let (bx, by) = f.support_bounds();
    if q * bx.saturating_sub(1) >= sctx.mx() || q * by.saturating_sub(1) >= sctx.my() {
        return Err(Error::UnsupportedWindow { bound: format!("M/p^{n}") });
    }
    // pieces[(j, i)] = psi^k(W^{-i} X^{-j} f) with j, i < p^k
    let mut pieces: Vec<(usize, usize, TruncatedSeries)> = vec![(0, 0, f.clone())];
    let mut scale = 1usize;
    for _ in 0..n {
        let mut next = Vec::with_capacity(pieces.len() * p * p);
        for (j, i, g) in &pieces {
            let comps = pbasis_decompose(g);
            for (dj, row) in comps.into_iter().enumerate() {
                for (di, c) in row.into_iter().enumerate() {
                    next.push((j + scale * dj, i + scale * di, c));
                }
            }
        }
        pieces = next;
        scale *= p;
    }
    let w = TruncatedSeries::w(sctx);
    let x = TruncatedSeries::x(sctx);
    let mut total = TruncatedSeries::zero(sctx);
    for (j, i, g) in pieces {
        if g.is_zero() {
            continue;
        }
        let term = &(&w.pow(i) * &x.pow(j)) * &phi_iterate(&g, n as usize);
        total = &total + &term;
    }
    Ok(total == *f)
}
