//! Howell normal form of row spans over Z/p^n.
//!
//! Over a local ring Z/p^n the Howell form is an echelon basis whose pivots are powers of p,
//! with entries above each pivot reduced into [0, pivot), and with the Howell property: for
//! every row r with pivot p^v, p^{n-v} r lies in the span of the rows below r. That property
//! makes greedy reduction a complete membership test and makes the form unique for a span.

use serde::{Deserialize, Serialize};

use super::residue::ResidueRing;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HowellBasis {
    ring: ResidueRing,
    ncols: usize,
    rows: Vec<Vec<u64>>,
    /// (pivot column, pivot valuation) per row.
    pivots: Vec<(usize, u32)>,
}

impl HowellBasis {
    pub fn new(ring: ResidueRing, ncols: usize, rows: &[Vec<u64>]) -> Self {
        let q = ring.modulus();
        let mut work: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| {
                debug_assert_eq!(r.len(), ncols);
                r.iter().map(|&x| x % q).collect::<Vec<_>>()
            })
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect();
        let mut out: Vec<Vec<u64>> = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..ncols {
            let best = work
                .iter()
                .enumerate()
                .filter(|(_, r)| r[col] != 0)
                .min_by_key(|(_, r)| ring.valuation(r[col]))
                .map(|(i, _)| i);
            let Some(bi) = best else { continue };
            let mut prow = work.swap_remove(bi);
            let v = ring.valuation(prow[col]);
            let pv = ring.p().pow(v);
            let unit = prow[col] / pv;
            let uinv = ring.inv(unit).expect("unit part");
            for x in prow.iter_mut() {
                *x = ring.mul(*x, uinv);
            }
            debug_assert_eq!(prow[col], pv);
            for r in work.iter_mut() {
                if r[col] != 0 {
                    let c = r[col] / pv;
                    for j in col..ncols {
                        r[j] = ring.sub(r[j], ring.mul(c, prow[j]));
                    }
                }
            }
            if v > 0 {
                let mult = ring.p().pow(ring.n() - v);
                let extra: Vec<u64> = prow.iter().map(|&x| ring.mul(x, mult)).collect();
                if extra.iter().any(|&x| x != 0) {
                    work.push(extra);
                }
            }
            work.retain(|r| r.iter().any(|&x| x != 0));
            out.push(prow);
            pivots.push((col, v));
        }
        // reduce entries above pivots
        for i in 0..out.len() {
            let (col, v) = pivots[i];
            let pv = ring.p().pow(v);
            for j in 0..i {
                let c = out[j][col] / pv;
                if c != 0 {
                    for k in col..ncols {
                        let t = ring.mul(c, out[i][k]);
                        out[j][k] = ring.sub(out[j][k], t);
                    }
                }
            }
        }
        Self { ring, ncols, rows: out, pivots }
    }

    pub fn ring(&self) -> &ResidueRing {
        &self.ring
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// log_p of the number of elements in the span.
    pub fn log_size(&self) -> u32 {
        self.pivots.iter().map(|&(_, v)| self.ring.n() - v).sum()
    }

    /// Reduces `v` against the basis; returns the remainder and the multipliers used.
    fn reduce(&self, v: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let ring = &self.ring;
        let mut x: Vec<u64> = v.iter().map(|&c| c % ring.modulus()).collect();
        let mut coeffs = vec![0u64; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            let (col, v) = self.pivots[i];
            let pv = ring.p().pow(v);
            if x[col] % pv != 0 {
                continue;
            }
            let c = x[col] / pv;
            if c != 0 {
                coeffs[i] = c;
                for k in col..self.ncols {
                    x[k] = ring.sub(x[k], ring.mul(c, row[k]));
                }
            }
        }
        (x, coeffs)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).0.iter().all(|&c| c == 0)
    }

    /// Expresses `v` as a combination of the canonical rows, if it lies in the span.
    pub fn coordinates(&self, v: &[u64]) -> Option<Vec<u64>> {
        let (rest, c) = self.reduce(v);
        rest.iter().all(|&x| x == 0).then_some(c)
    }

    pub fn contains_span(&self, other: &HowellBasis) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    /// Span of the union.
    pub fn join(&self, other: &HowellBasis) -> HowellBasis {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        HowellBasis::new(self.ring, self.ncols, &rows)
    }

    /// Canonical form is idempotent.
    pub fn canonical(&self) -> HowellBasis {
        HowellBasis::new(self.ring, self.ncols, &self.rows)
    }
}

/// Generators of the left kernel {x : x M = 0} of a k x l matrix over Z/p^n.
pub fn left_kernel(ring: &ResidueRing, m: &[Vec<u64>], ncols: usize) -> HowellBasis {
    let k = m.len();
    let aug: Vec<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.resize(ncols, 0);
            r.extend((0..k).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    let h = HowellBasis::new(*ring, ncols + k, &aug);
    let kern: Vec<Vec<u64>> = h
        .rows()
        .iter()
        .zip(h.pivots())
        .filter(|(_, &(c, _))| c >= ncols)
        .map(|(r, _)| r[ncols..].to_vec())
        .collect();
    HowellBasis::new(*ring, k, &kern)
}

/// Intersection of two spans with the same ambient space.
pub fn intersect(a: &HowellBasis, b: &HowellBasis) -> HowellBasis {
    let ring = *a.ring();
    let mut stacked: Vec<Vec<u64>> = a.rows().to_vec();
    stacked.extend(b.rows().iter().cloned());
    let kern = left_kernel(&ring, &stacked, a.ncols());
    let ka = a.rows().len();
    let rows: Vec<Vec<u64>> = kern
        .rows()
        .iter()
        .map(|u| {
            let mut v = vec![0u64; a.ncols()];
            for (coef, row) in u[..ka].iter().zip(a.rows()) {
                for (x, &y) in v.iter_mut().zip(row) {
                    *x = ring.add(*x, ring.mul(*coef, y));
                }
            }
            v
        })
        .collect();
    HowellBasis::new(ring, a.ncols(), &rows)
}

/// Solves x M = target for a row vector x, returning one solution if any exists.
pub fn solve_left(ring: &ResidueRing, m: &[Vec<u64>], target: &[u64]) -> Result<Option<Vec<u64>>> {
    let k = m.len();
    let ncols = target.len();
    let aug: Vec<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.resize(ncols, 0);
            r.extend((0..k).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    let h = HowellBasis::new(*ring, ncols + k, &aug);
    let mut x: Vec<u64> = target.iter().map(|&c| c % ring.modulus()).collect();
    x.extend(std::iter::repeat(0).take(k));
    let mut sol = vec![0u64; k];
    for (row, &(col, v)) in h.rows().iter().zip(h.pivots()) {
        if col >= ncols {
            break;
        }
        let pv = ring.p().pow(v);
        if x[col] % pv != 0 {
            return Ok(None);
        }
        let c = x[col] / pv;
        if c == 0 {
            continue;
        }
        for j in col..ncols + k {
            x[j] = ring.sub(x[j], ring.mul(c, row[j]));
        }
        for j in 0..k {
            sol[j] = ring.add(sol[j], ring.mul(c, row[ncols + j]));
        }
    }
    if x[..ncols].iter().any(|&c| c != 0) {
        return Ok(None);
    }
    Ok(Some(sol))
}
