//! QUBO instances, assignments, energies and the text file format.
//!
//! An instance stores linear fields `h[i]` and one coupling `w` per unordered
//! pair, so that
//!
//! ```text
//! E(x) = sum_i h[i] x[i] + sum_{i<j} w[i,j] x[i] x[j]
//! ```
//!
//! A symmetric matrix `Q` with cost `sum_{i,j} Q[i,j] x[i] x[j]` maps onto this
//! with `h[i] = Q[i,i]` and `w[i,j] = Q[i,j] + Q[j,i]`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A binary assignment `x ∈ {0,1}^n`, one byte per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<u8>);

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment(vec![0; n])
    }

    /// Builds an assignment from 0/1 values. Any nonzero byte counts as 1.
    pub fn from_bits(bits: impl IntoIterator<Item = u8>) -> Self {
        Assignment(bits.into_iter().map(|b| (b != 0) as u8).collect())
    }

    /// Bit `i` is bit `i` of `mask` (least significant bit is variable 0).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Assignment((0..n).map(|i| ((mask >> i) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: u8) {
        self.0[i] = (bit != 0) as u8;
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl std::fmt::Display for Assignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            f.write_char(if b == 1 { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Sparse QUBO instance. Immutable once built.
///
/// Couplings are kept sorted by `(i, j)` with `i < j`; exact zeros are never
/// stored. The adjacency is a CSR copy of the same couplings in both
/// directions.
#[derive(Debug, Clone)]
pub struct QuboInstance {
    fields: Vec<f64>,
    couplings: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
}

impl PartialEq for QuboInstance {
    fn eq(&self, other: &Self) -> bool {
        self.fields == other.fields && self.couplings == other.couplings
    }
}

impl QuboInstance {
    /// Builds an instance from linear fields and pair couplings.
    ///
    /// Pairs may be given in either orientation and in any order. Zero
    /// couplings are dropped; self-pairs, out-of-range indices, duplicate
    /// pairs and non-finite values are rejected.
    pub fn new(
        fields: Vec<f64>,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = fields.len();
        if let Some(i) = fields.iter().position(|h| !h.is_finite()) {
            return Err(Error::invalid(format!("field h[{i}] is not finite")));
        }
        let mut pairs = BTreeMap::new();
        for (a, b, w) in couplings {
            if a >= n || b >= n {
                return Err(Error::invalid(format!(
                    "coupling ({a}, {b}) out of range for n = {n}"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!(
                    "coupling ({a}, {b}) is a self-pair; use the linear field"
                )));
            }
            if !w.is_finite() {
                return Err(Error::invalid(format!("coupling ({a}, {b}) is not finite")));
            }
            let key = (a.min(b), a.max(b));
            if pairs.insert(key, w).is_some() {
                return Err(Error::invalid(format!(
                    "duplicate coupling ({}, {})",
                    key.0, key.1
                )));
            }
        }
        let couplings: Vec<_> = pairs
            .into_iter()
            .filter(|&(_, w)| w != 0.0)
            .map(|((i, j), w)| (i, j, w))
            .collect();
        Ok(Self::from_sorted(fields, couplings))
    }

    /// Builds an instance from a dense symmetric matrix `q` whose cost is
    /// `sum_{i,j} q[i][j] x[i] x[j]` over all ordered pairs.
    pub fn from_symmetric(q: &[Vec<f64>]) -> Result<Self> {
        let n = q.len();
        if q.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("matrix is not square"));
        }
        let fields = (0..n).map(|i| q[i][i]).collect();
        let mut couplings = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if q[i][j] != q[j][i] {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
                couplings.push((i, j, q[i][j] + q[j][i]));
            }
        }
        Self::new(fields, couplings)
    }

    fn from_sorted(fields: Vec<f64>, couplings: Vec<(usize, usize, f64)>) -> Self {
        let n = fields.len();
        let mut degree = vec![0usize; n];
        for &(i, j, _) in &couplings {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0; 2 * couplings.len()];
        let mut weights = vec![0.0; 2 * couplings.len()];
        for &(i, j, w) in &couplings {
            neighbors[cursor[i]] = j;
            weights[cursor[i]] = w;
            cursor[i] += 1;
            neighbors[cursor[j]] = i;
            weights[cursor[j]] = w;
            cursor[j] += 1;
        }
        QuboInstance {
            fields,
            couplings,
            offsets,
            neighbors,
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    #[inline]
    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    /// Couplings as `(i, j, w)` with `i < j`, sorted.
    pub fn couplings(&self) -> &[(usize, usize, f64)] {
        &self.couplings
    }

    pub fn num_couplings(&self) -> usize {
        self.couplings.len()
    }

    /// Neighbor indices of `i` and the matching coupling values.
    #[inline]
    pub fn neighbors(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.neighbors[r.clone()], &self.weights[r])
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Coupling between `i` and `j`, zero when absent.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (nbrs, ws) = self.neighbors(i);
        nbrs.iter().position(|&k| k == j).map_or(0.0, |p| ws[p])
    }

    /// Largest coefficient magnitude over fields and couplings.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.fields
            .iter()
            .copied()
            .chain(self.couplings.iter().map(|c| c.2))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::invalid(format!(
                "assignment has length {}, instance has n = {}",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    pub fn energy(&self, x: &Assignment) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &Assignment) -> f64 {
        let bits = x.bits();
        let linear: f64 = self
            .fields
            .iter()
            .zip(bits)
            .filter(|(_, &b)| b == 1)
            .map(|(h, _)| h)
            .sum();
        let quadratic: f64 = self
            .couplings
            .iter()
            .filter(|&&(i, j, _)| bits[i] & bits[j] == 1)
            .map(|c| c.2)
            .sum();
        linear + quadratic
    }

    /// `E(x with bit i flipped) - E(x)`, in O(deg(i)).
    pub fn delta_energy(&self, x: &Assignment, i: usize) -> Result<f64> {
        self.check_len(x)?;
        if i >= self.n() {
            return Err(Error::invalid(format!(
                "index {i} out of range for n = {}",
                self.n()
            )));
        }
        Ok(self.delta_energy_unchecked(x, i))
    }

    #[inline]
    pub(crate) fn delta_energy_unchecked(&self, x: &Assignment, i: usize) -> f64 {
        let (nbrs, ws) = self.neighbors(i);
        let bits = x.bits();
        let mut local = self.fields[i];
        for (&k, &w) in nbrs.iter().zip(ws) {
            if bits[k] == 1 {
                local += w;
            }
        }
        if bits[i] == 1 {
            -local
        } else {
            local
        }
    }

    /// Serializes to the line-oriented instance format.
    ///
    /// Values use the shortest decimal form that parses back to the same
    /// `f64`, so `load(save(q)) == q` bit for bit.
    pub fn save(&self) -> String {
        let diag: Vec<_> = self
            .fields
            .iter()
            .enumerate()
            .filter(|(_, &h)| h != 0.0)
            .collect();
        let mut entries: Vec<(usize, usize, f64)> = diag.iter().map(|&(i, &h)| (i, i, h)).collect();
        entries.extend_from_slice(&self.couplings);
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut out = String::new();
        writeln!(out, "qubo {} {}", self.n(), self.couplings.len()).unwrap();
        for (i, j, v) in entries {
            writeln!(out, "{i} {j} {v:?}").unwrap();
        }
        out
    }

    /// Parses the instance format: header `qubo <n> <nnz>` followed by entry
    /// lines `i j v` with `i <= j`. `nnz` is the number of off-diagonal
    /// (`i < j`) entries; diagonal entries set linear fields and are not
    /// counted. Lines starting with `#` and blank lines are skipped.
    pub fn load(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let (n, nnz) = match tokens.as_slice() {
            ["qubo", n, nnz] => {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::parse(hline, format!("bad variable count {n:?}")))?;
                let nnz: usize = nnz
                    .parse()
                    .map_err(|_| Error::parse(hline, format!("bad entry count {nnz:?}")))?;
                (n, nnz)
            }
            _ => return Err(Error::parse(hline, "expected header `qubo <n> <nnz>`")),
        };

        let mut fields = vec![0.0; n];
        let mut seen = BTreeMap::new();
        let mut couplings = Vec::new();
        let mut count = 0;
        for (lineno, line) in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [i, j, v] = tokens.as_slice() else {
                return Err(Error::parse(lineno, "expected `i j v`"));
            };
            let i: usize = i
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad index {i:?}")))?;
            let j: usize = j
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad index {j:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad value {v:?}")))?;
            if i >= n || j >= n {
                return Err(Error::parse(
                    lineno,
                    format!("index out of range: ({i}, {j}) with n = {n}"),
                ));
            }
            if i > j {
                return Err(Error::parse(lineno, format!("entry ({i}, {j}) has i > j")));
            }
            if !v.is_finite() {
                return Err(Error::parse(lineno, "value is not finite"));
            }
            if let Some(prev) = seen.insert((i, j), lineno) {
                return Err(Error::parse(
                    lineno,
                    format!("duplicate entry ({i}, {j}), first given on line {prev}"),
                ));
            }
            if i == j {
                fields[i] = v;
            } else {
                count += 1;
                if count > nnz {
                    return Err(Error::parse(
                        lineno,
                        format!("more couplings than the {nnz} declared in the header"),
                    ));
                }
                couplings.push((i, j, v));
            }
        }
        if count != nnz {
            let last = text.lines().count().max(1);
            return Err(Error::parse(
                last,
                format!("header declares {nnz} couplings, found {count}"),
            ));
        }
        Self::new(fields, couplings)
    }
}
