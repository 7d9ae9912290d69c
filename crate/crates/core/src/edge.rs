//! Binary edge matrices and the partial-closure calculus.
//!
//! Rows are `u64` bitsets, products are boolean (OR of ANDs), so long paths
//! never overflow a count. A matrix carries row and column node labels; the
//! square ones used for graphs have identical row and column orders.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeKind, NodeId, NodeSet, RegressionGraph};

const NONE: u32 = u32::MAX;

#[derive(Clone, PartialEq, Eq)]
pub struct EdgeMatrix {
    rows: Vec<NodeId>,
    cols: Vec<NodeId>,
    words: usize,
    bits: Vec<u64>,
    row_pos: Vec<u32>,
    col_pos: Vec<u32>,
}

fn positions(labels: &[NodeId]) -> Vec<u32> {
    let max = labels.iter().map(|n| n.0 as usize + 1).max().unwrap_or(0);
    let mut pos = vec![NONE; max];
    for (p, n) in labels.iter().enumerate() {
        pos[n.0 as usize] = p as u32;
    }
    pos
}

impl EdgeMatrix {
    pub fn zeros(rows: Vec<NodeId>, cols: Vec<NodeId>) -> Self {
        let words = cols.len().div_ceil(64).max(1);
        let bits = vec![0; words * rows.len()];
        let row_pos = positions(&rows);
        let col_pos = positions(&cols);
        EdgeMatrix { rows, cols, words, bits, row_pos, col_pos }
    }

    pub fn square_zeros(order: Vec<NodeId>) -> Self {
        Self::zeros(order.clone(), order)
    }

    pub fn identity(order: Vec<NodeId>) -> Self {
        let mut m = Self::square_zeros(order);
        for p in 0..m.rows.len() {
            m.set(p, p, true);
        }
        m
    }

    /// Builds a square matrix from 0/1 rows.
    pub fn from_rows(order: Vec<NodeId>, rows: &[Vec<u8>]) -> Result<Self> {
        let n = order.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("expected {n}×{n} entries")));
        }
        let mut m = Self::square_zeros(order);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::DimensionMismatch(format!("entry ({r}, {c}) is not binary")));
                }
                m.set(r, c, v == 1);
            }
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.nrows())
            .map(|r| (0..self.ncols()).map(|c| self.get(r, c) as u8).collect())
            .collect()
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row labels; for square matrices this is the node order.
    pub fn order(&self) -> &[NodeId] {
        &self.rows
    }

    pub fn row_labels(&self) -> &[NodeId] {
        &self.rows
    }

    pub fn col_labels(&self) -> &[NodeId] {
        &self.cols
    }

    pub fn row_position(&self, n: NodeId) -> Option<usize> {
        match self.row_pos.get(n.0 as usize) {
            Some(&p) if p != NONE => Some(p as usize),
            _ => None,
        }
    }

    pub fn col_position(&self, n: NodeId) -> Option<usize> {
        match self.col_pos.get(n.0 as usize) {
            Some(&p) if p != NONE => Some(p as usize),
            _ => None,
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.bits[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Entry addressed by node labels.
    pub fn at(&self, i: NodeId, j: NodeId) -> Result<bool> {
        let r = self.row_position(i).ok_or(Error::UnknownNode(i))?;
        let c = self.col_position(j).ok_or(Error::UnknownNode(j))?;
        Ok(self.get(r, c))
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    fn or_row_into(&mut self, src: usize, dst: usize) {
        if src == dst {
            return;
        }
        for w in 0..self.words {
            let v = self.bits[src * self.words + w];
            self.bits[dst * self.words + w] |= v;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> EdgeMatrix {
        let mut t = EdgeMatrix::zeros(self.cols.clone(), self.rows.clone());
        for r in 0..self.nrows() {
            for c in self.ones_in_row(r) {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Column positions of the ones in row `r`.
    pub fn ones_in_row(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(r).iter().enumerate().flat_map(|(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let t = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(w * 64 + t)
                }
            })
        })
    }

    /// Boolean product; column labels of `self` must equal row labels of `other`.
    pub fn product(&self, other: &EdgeMatrix) -> Result<EdgeMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch("inner orders differ".into()));
        }
        let mut out = EdgeMatrix::zeros(self.rows.clone(), other.cols.clone());
        for r in 0..self.nrows() {
            for k in self.ones_in_row(r) {
                for w in 0..out.words {
                    out.bits[r * out.words + w] |= other.bits[k * other.words + w];
                }
            }
        }
        Ok(out)
    }

    /// Entrywise OR.
    pub fn union(&self, other: &EdgeMatrix) -> Result<EdgeMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("orders differ".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(out)
    }

    /// Submatrix on the given row and column labels, in the given orders.
    pub fn block(&self, rows: &[NodeId], cols: &[NodeId]) -> Result<EdgeMatrix> {
        let rp: Vec<usize> = rows
            .iter()
            .map(|&n| self.row_position(n).ok_or(Error::UnknownNode(n)))
            .collect::<Result<_>>()?;
        let cp: Vec<usize> = cols
            .iter()
            .map(|&n| self.col_position(n).ok_or(Error::UnknownNode(n)))
            .collect::<Result<_>>()?;
        let mut out = EdgeMatrix::zeros(rows.to_vec(), cols.to_vec());
        for (r, &sr) in rp.iter().enumerate() {
            for (c, &sc) in cp.iter().enumerate() {
                if self.get(sr, sc) {
                    out.set(r, c, true);
                }
            }
        }
        Ok(out)
    }

    /// Principal submatrix on `keep`, in this matrix's order.
    pub fn restrict(&self, keep: &NodeSet) -> Result<EdgeMatrix> {
        if let Some(&n) = keep.iter().find(|&&n| self.row_position(n).is_none()) {
            return Err(Error::UnknownNode(n));
        }
        let order: Vec<NodeId> = self.rows.iter().copied().filter(|n| keep.contains(n)).collect();
        self.block(&order, &order)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.nrows()).all(|r| (0..r).all(|c| self.get(r, c) == self.get(c, r)))
    }

    pub fn has_unit_diagonal(&self) -> bool {
        self.is_square() && (0..self.nrows()).all(|p| self.get(p, p))
    }

    /// Unit diagonal and no ones below it.
    pub fn is_unit_upper_triangular(&self) -> bool {
        self.has_unit_diagonal() && (0..self.nrows()).all(|r| (0..r).all(|c| !self.get(r, c)))
    }

    fn positions_of(&self, a: &NodeSet) -> Result<Vec<usize>> {
        a.iter()
            .map(|&n| self.row_position(n).ok_or(Error::UnknownNode(n)))
            .collect()
    }
}

impl fmt::Debug for EdgeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "EdgeMatrix rows {:?} cols {:?}", self.rows, self.cols)?;
        for r in 0..self.nrows() {
            let line: String = (0..self.ncols()).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "  {} {}", self.rows[r], line)?;
        }
        Ok(())
    }
}

/// JSON shape of an edge matrix: `{"order": [...], "rows": [[0, 1], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMatrixJson {
    pub order: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<NodeId>>,
    pub rows: Vec<Vec<u8>>,
}

impl From<&EdgeMatrix> for EdgeMatrixJson {
    fn from(m: &EdgeMatrix) -> Self {
        EdgeMatrixJson {
            order: m.rows.clone(),
            columns: if m.is_square() { None } else { Some(m.cols.clone()) },
            rows: m.to_rows(),
        }
    }
}

impl TryFrom<EdgeMatrixJson> for EdgeMatrix {
    type Error = Error;

    fn try_from(j: EdgeMatrixJson) -> Result<Self> {
        match j.columns {
            None => EdgeMatrix::from_rows(j.order, &j.rows),
            Some(cols) => {
                let mut m = EdgeMatrix::zeros(j.order, cols);
                if j.rows.len() != m.nrows() || j.rows.iter().any(|r| r.len() != m.ncols()) {
                    return Err(Error::DimensionMismatch("rows do not match labels".into()));
                }
                for (r, row) in j.rows.iter().enumerate() {
                    for (c, &v) in row.iter().enumerate() {
                        m.set(r, c, v != 0);
                    }
                }
                Ok(m)
            }
        }
    }
}

/// `In[M]`: one where the entry is positive. Nodes are labelled `1..=n`.
pub fn indicator(m: &[Vec<i64>]) -> Result<EdgeMatrix> {
    let n = m.len();
    let order: Vec<NodeId> = (1..=n as u32).map(NodeId).collect();
    let mut out = EdgeMatrix::square_zeros(order);
    for (r, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch(format!("row {r} has {} entries, expected {n}", row.len())));
        }
        for (c, &v) in row.iter().enumerate() {
            if v < 0 {
                return Err(Error::NegativeEntry { row: r, col: c });
            }
            out.set(r, c, v > 0);
        }
    }
    Ok(out)
}

/// `zer_a M`: for each `k` in `a` (ascending label), every row with a one in
/// column `k` absorbs row `k`, i.e. `m_ij ← m_ij ∨ (m_ik ∧ m_kj)`.
pub fn partial_closure(m: &EdgeMatrix, a: &NodeSet) -> Result<EdgeMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("partial closure needs a square matrix".into()));
    }
    let ks = m.positions_of(a)?;
    let mut out = m.clone();
    close_in_place(&mut out, &ks);
    Ok(out)
}

fn close_in_place(m: &mut EdgeMatrix, ks: &[usize]) {
    for &k in ks {
        for i in 0..m.nrows() {
            if i != k && m.get(i, k) {
                m.or_row_into(k, i);
            }
        }
    }
}

/// `𝒜⁻`: the ancestor graph's edge matrix, by boolean reachability.
pub fn ancestor_closure(a: &EdgeMatrix) -> Result<EdgeMatrix> {
    if !a.is_unit_upper_triangular() {
        return Err(Error::NotTriangular);
    }
    let mut out = a.clone();
    let all: Vec<usize> = (0..a.nrows()).collect();
    close_in_place(&mut out, &all);
    Ok(out)
}

/// `𝒲⁻`: every connected component becomes complete.
pub fn component_closure(w: &EdgeMatrix) -> Result<EdgeMatrix> {
    if !w.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = w.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for r in 0..n {
        for c in w.ones_in_row(r).collect::<Vec<_>>() {
            let (x, y) = (find(&mut parent, r), find(&mut parent, c));
            if x != y {
                parent[x] = y;
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
    let mut out = EdgeMatrix::square_zeros(w.rows.clone());
    for r in 0..n {
        for c in 0..n {
            if roots[r] == roots[c] {
                out.set(r, c, true);
            }
        }
    }
    Ok(out)
}

/// Overall covariance graph `In[𝒜⁻(𝒜⁻)ᵀ]` and concentration graph `In[𝒜ᵀ𝒜]`.
pub fn induced_overall(a: &EdgeMatrix) -> Result<(EdgeMatrix, EdgeMatrix)> {
    let anc = ancestor_closure(a)?;
    let cov = anc.product(&anc.transpose())?;
    let con = a.transpose().product(a)?;
    Ok((cov, con))
}

/// True iff `[zer_a M]` restricted to `keep` equals `zer_a` of `M` restricted to `keep`.
pub fn submatrix_exchange_check(m: &EdgeMatrix, a: &NodeSet, keep: &NodeSet) -> bool {
    if !a.is_subset(keep) {
        return false;
    }
    let lhs = partial_closure(m, a).and_then(|z| z.restrict(keep));
    let rhs = m.restrict(keep).and_then(|r| partial_closure(&r, a));
    matches!((lhs, rhs), (Ok(l), Ok(r)) if l == r)
}

impl RegressionGraph {
    /// `ℋ`: ones for `i ≺— j`, for full lines and on the diagonal, in declared order.
    pub fn h_matrix(&self) -> EdgeMatrix {
        let mut h = EdgeMatrix::identity(self.order());
        for e in self.edges() {
            let (r, c) = (h.row_position(e.i).unwrap(), h.col_position(e.j).unwrap());
            match e.kind {
                EdgeKind::Arrow => h.set(r, c, true),
                EdgeKind::Full => {
                    h.set(r, c, true);
                    h.set(c, r, true);
                }
                EdgeKind::Dashed => {}
            }
        }
        h
    }

    /// `𝒲`: ones for dashed lines and on the diagonal; identity on the context block.
    pub fn w_matrix(&self) -> EdgeMatrix {
        let mut w = EdgeMatrix::identity(self.order());
        for e in self.edges().iter().filter(|e| e.kind == EdgeKind::Dashed) {
            let (r, c) = (w.row_position(e.i).unwrap(), w.col_position(e.j).unwrap());
            w.set(r, c, true);
            w.set(c, r, true);
        }
        w
    }
}

/// The three induced edge matrices for the split `N = (a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedEdgeSet {
    pub a: Vec<NodeId>,
    pub b: Vec<NodeId>,
    /// `N_aa|b`: dashed lines among the responses `a` given `b`.
    pub cov_aa_given_b: EdgeMatrix,
    /// `N_a|b`: arrows from `b` into `a`.
    pub arrows_a_given_b: EdgeMatrix,
    /// `N^bb.a`: full lines among the regressors `b`.
    pub con_bb: EdgeMatrix,
}

fn check_pair(h: &EdgeMatrix, w: &EdgeMatrix, a: &NodeSet) -> Result<()> {
    if !h.is_square() || h.rows != w.rows || w.cols != w.rows {
        return Err(Error::DimensionMismatch("ℋ and 𝒲 must share one square order".into()));
    }
    if let Some(&n) = a.iter().find(|&&n| h.row_position(n).is_none()) {
        return Err(Error::InvalidSplit(format!("node {n} is not in the matrix order")));
    }
    Ok(())
}

/// Symmetric matrix over all of `N` whose `ij`-one says an edge-inducing path
/// joins `i` and `j` for the split `(a, b)`: every inner collision node lies in
/// `b` and every inner transmitting node in `a`.
///
/// `𝒦 = zer_a ℋ` turns a-line anteriors into parents and closes a-line context
/// paths. Its symmetric ones are full lines, the others arrows. Transmitting
/// nodes of `a` left after the closure are sources (`p ≺— k —≻ q`) or carry a
/// tail and one dashed end, so each stretch between two collision nodes is a
/// direct edge or one of `p ≺— k —≻ q`, `p ≺— k --- q`, `p ≺— k --- l —≻ q`
/// with `k, l ∈ a`. Stretches that end in collision ends at both sides chain
/// through nodes of `b`. When no node of `b` has a parent or a context
/// neighbour in `a` this collapses to the block products
/// `In[𝒦_aa 𝒬_aa 𝒦_aaᵀ]` and `In[𝒦_ab + 𝒦_aa 𝒱_ab 𝒦_bb]`.
pub fn induced_connections(h: &EdgeMatrix, w: &EdgeMatrix, a: &NodeSet) -> Result<EdgeMatrix> {
    check_pair(h, w, a)?;
    let order = h.rows.clone();
    let n = order.len();
    let in_a: Vec<bool> = order.iter().map(|x| a.contains(x)).collect();

    let k = partial_closure(h, a)?;
    let kt = k.transpose();
    let mut arrows = EdgeMatrix::square_zeros(order.clone());
    let mut from_a = EdgeMatrix::square_zeros(order.clone());
    let mut conn = EdgeMatrix::identity(order.clone());
    let mut dashed = w.clone();
    for r in 0..n {
        dashed.set(r, r, false);
        for c in k.ones_in_row(r) {
            if c == r {
                continue;
            }
            conn.set(r, c, true);
            conn.set(c, r, true);
            if !kt.get(r, c) {
                arrows.set(r, c, true);
                if in_a[c] {
                    from_a.set(r, c, true);
                }
            }
        }
        for c in dashed.ones_in_row(r).collect::<Vec<_>>() {
            conn.set(r, c, true);
        }
    }

    // stretches with collision ends at both sides
    let from_a_t = from_a.transpose();
    let pd = from_a.product(&dashed)?;
    let mut links = from_a.product(&from_a_t)?;
    for m in [pd.product(&from_a_t)?, dashed.product(&from_a_t)?, pd, dashed.clone()] {
        links = links.union(&m)?;
    }
    for r in 0..n {
        links.set(r, r, false);
    }
    conn = conn.union(&links)?;

    // chains of such stretches through collision nodes in b
    let mut chain = EdgeMatrix::identity(order.clone());
    for r in (0..n).filter(|&r| !in_a[r]) {
        for c in links.ones_in_row(r) {
            if !in_a[c] {
                chain.set(r, c, true);
            }
        }
    }
    let bs: Vec<usize> = (0..n).filter(|&r| !in_a[r]).collect();
    close_in_place(&mut chain, &bs);

    // first and last stretch: collision end at the b node, anything at the endpoint
    let mut ends = links.union(&arrows)?;
    for r in (0..n).filter(|&r| in_a[r]) {
        for wd in 0..ends.words {
            ends.bits[r * ends.words + wd] = 0;
        }
    }
    let through = ends.transpose().product(&chain.product(&ends)?)?;
    conn.union(&through)
}

/// `N_aa|b`, `N_a|b` and `N^bb.a` for `b = N \ a`, read off
/// [`induced_connections`].
pub fn induced_regression(h: &EdgeMatrix, w: &EdgeMatrix, a: &NodeSet) -> Result<InducedEdgeSet> {
    let conn = induced_connections(h, w, a)?;
    let av: Vec<NodeId> = h.rows.iter().copied().filter(|n| a.contains(n)).collect();
    let bv: Vec<NodeId> = h.rows.iter().copied().filter(|n| !a.contains(n)).collect();
    Ok(InducedEdgeSet {
        cov_aa_given_b: conn.block(&av, &av)?,
        arrows_a_given_b: conn.block(&av, &bv)?,
        con_bb: conn.block(&bv, &bv)?,
        a: av,
        b: bv,
    })
}
