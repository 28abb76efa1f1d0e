//! Channel representation: validation, normalization, rank-1 factorization,
//! and ordered-subset extraction for K-user Gaussian interference channels.
//!
//! A channel is the gain matrix `H` (entry `h_ij` is the gain from
//! transmitter `j` to receiver `i`) together with the per-transmitter power
//! `P` and the per-receiver noise variance `N`. All capacity quantities
//! depend on the parameters only through `sqrt(P/N) * H`, which is what
//! [`ChannelInstance::normalize`] exploits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative second-singular-value tolerance used by
/// [`ChannelInstance::factor_degraded`].
pub const DEFAULT_RANK1_TOL: f64 = 1e-9;

/// A validated K-user Gaussian interference channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    h: DMatrix<f64>,
    p: f64,
    n: f64,
}

impl ChannelInstance {
    /// Validates and wraps a gain matrix with power `p` and noise variance `n`.
    ///
    /// Rejects non-square or empty `h`, non-finite entries, and
    /// non-positive `p` or `n`.
    pub fn new(h: DMatrix<f64>, p: f64, n: f64) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::NonSquare {
                rows: h.nrows(),
                cols: h.ncols(),
            });
        }
        if h.nrows() == 0 {
            return Err(Error::EmptyChannel);
        }
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                let value = h[(i, j)];
                if !value.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j, value });
                }
            }
        }
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::NonPositivePower(p));
        }
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::NonPositiveNoise(n));
        }
        Ok(Self { h, p, n })
    }

    /// Builds a channel from row-major gain entries.
    pub fn from_rows(k: usize, gains: &[f64], p: f64, n: f64) -> Result<Self> {
        if gains.len() != k * k {
            return Err(Error::DimensionMismatch {
                context: "gain entries",
                expected: k * k,
                got: gains.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(k, k, gains), p, n)
    }

    /// Number of transmitter-receiver pairs.
    pub fn k(&self) -> usize {
        self.h.nrows()
    }

    /// Gain matrix.
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Per-transmitter power constraint.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Noise variance at every receiver.
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Equivalent channel with P = N = 1 and gains scaled by sqrt(P/N).
    ///
    /// Capacity quantities are invariant under this map, and the map is
    /// idempotent: a channel that already has P = N = 1 is returned
    /// unchanged bit-for-bit.
    pub fn normalize(&self) -> Self {
        if self.p == 1.0 && self.n == 1.0 {
            return self.clone();
        }
        let scale = (self.p / self.n).sqrt();
        Self {
            h: &self.h * scale,
            p: 1.0,
            n: 1.0,
        }
    }

    /// The |S| x |S| submatrix `H_S` with (i, j) entry `h_{S(i),S(j)}`.
    pub fn submatrix(&self, subset: &OrderedSubset) -> Result<DMatrix<f64>> {
        subset.check_range(self.k())?;
        let idx = subset.indices();
        Ok(DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
            self.h[(idx[i], idx[j])]
        }))
    }

    /// Rank-1 factorization `H = a b^T` for degraded channels.
    ///
    /// Succeeds when the second singular value satisfies
    /// `sigma2/sigma1 <= tol` (or `H = 0`). The receiver gains `a` are made
    /// entrywise nonnegative by absorbing per-row sign flips, and rows are
    /// reindexed so `a^2` is ascending; both transforms leave capacity
    /// unchanged and are recorded on the returned [`DegradedChannel`].
    pub fn factor_degraded(&self, tol: f64) -> Result<DegradedChannel> {
        let k = self.k();
        let (sigma1, ratio, u1, v1) = principal_direction(&self.h);
        if sigma1 == 0.0 {
            // Zero channel: trivially rank deficient.
            return DegradedChannel::with_source(
                DVector::zeros(k),
                DVector::zeros(k),
                self.p,
                self.n,
            );
        }
        if ratio > tol {
            return Err(Error::NotDegraded { ratio, tol });
        }
        // Fix the scale/sign ambiguity: divide v by its largest-magnitude
        // entry so max|b_j| = 1 (capacity depends on a, b only through
        // the products a_i * b_j, so any consistent split is equivalent).
        let mut pivot = 0;
        for j in 1..k {
            if v1[j].abs() > v1[pivot].abs() {
                pivot = j;
            }
        }
        let scale = v1[pivot];
        let b = v1.map(|x| x / scale);
        let a_signed = u1.map(|x| x * sigma1 * scale);
        DegradedChannel::with_source(a_signed, b, self.p, self.n)
    }
}

/// Principal singular triple of `m`: (sigma1, sigma2/sigma1, u1, v1).
fn principal_direction(m: &DMatrix<f64>) -> (f64, f64, DVector<f64>, DVector<f64>) {
    let svd = crate::linalg::jacobi_svd(m);
    let sigma1 = svd.singular_values[0];
    let second = svd.singular_values.get(1).copied().unwrap_or(0.0);
    let ratio = if sigma1 > 0.0 { second / sigma1 } else { 0.0 };
    let u1 = svd.u.column(0).into_owned();
    let v1 = svd.v.column(0).into_owned();
    (sigma1, ratio, u1, v1)
}

/// A degraded channel `H = a b^T` in canonical form: `a` entrywise
/// nonnegative with `a_1^2 <= ... <= a_K^2`.
///
/// Canonicalization relabels whole transmitter-receiver pairs (user `i`
/// keeps its own `b_i`) and absorbs receiver-output sign flips, both of
/// which leave capacity unchanged. `perm` and `row_signs` record the
/// relabeling: source entry `H[perm[i]][perm[j]] = row_signs[i] * a[i] * b[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradedChannel {
    a: DVector<f64>,
    b: DVector<f64>,
    p: f64,
    n: f64,
    perm: Vec<usize>,
    row_signs: Vec<f64>,
}

impl DegradedChannel {
    /// Canonicalizes receiver gains `a` (possibly signed, unsorted) and
    /// transmitter gains `b` into a degraded channel.
    ///
    /// Signs of `a` entries are absorbed into recorded row flips, and the
    /// user pairs are reindexed together so `a^2` is ascending; `b` keeps
    /// its signs.
    pub fn new(a: DVector<f64>, b: DVector<f64>, p: f64, n: f64) -> Result<Self> {
        Self::with_source(a, b, p, n)
    }

    fn with_source(a_signed: DVector<f64>, b_source: DVector<f64>, p: f64, n: f64) -> Result<Self> {
        let k = a_signed.len();
        if k == 0 {
            return Err(Error::EmptyChannel);
        }
        if b_source.len() != k {
            return Err(Error::DimensionMismatch {
                context: "transmitter gains b",
                expected: k,
                got: b_source.len(),
            });
        }
        for (i, &x) in a_signed.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { row: i, col: 0, value: x });
            }
        }
        for (j, &x) in b_source.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { row: 0, col: j, value: x });
            }
        }
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::NonPositivePower(p));
        }
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::NonPositiveNoise(n));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| {
            a_signed[i]
                .abs()
                .partial_cmp(&a_signed[j].abs())
                .expect("finite gains")
        });
        let a = DVector::from_fn(k, |i, _| a_signed[order[i]].abs());
        let b = DVector::from_fn(k, |i, _| b_source[order[i]]);
        let row_signs = order
            .iter()
            .map(|&i| if a_signed[i] < 0.0 { -1.0 } else { 1.0 })
            .collect();
        Ok(Self {
            a,
            b,
            p,
            n,
            perm: order,
            row_signs,
        })
    }

    /// Number of users.
    pub fn k(&self) -> usize {
        self.a.len()
    }

    /// Receiver gains, nonnegative and ascending in square.
    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    /// Transmitter gains (signed).
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Per-transmitter power constraint.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Noise variance.
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Receiver reindexing applied during canonicalization: canonical row `i`
    /// came from source row `perm()[i]`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Per-row sign flips absorbed into `a` (indexed in canonical order).
    pub fn row_signs(&self) -> &[f64] {
        &self.row_signs
    }

    /// Canonical gain matrix `a b^T` (sorted receivers, nonnegative `a`).
    pub fn canonical_h(&self) -> DMatrix<f64> {
        let k = self.k();
        DMatrix::from_fn(k, k, |i, j| self.a[i] * self.b[j])
    }

    /// Gain matrix in the source user order with recorded signs restored.
    pub fn source_h(&self) -> DMatrix<f64> {
        let k = self.k();
        let mut h = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                h[(self.perm[i], self.perm[j])] = self.row_signs[i] * self.a[i] * self.b[j];
            }
        }
        h
    }

    /// The canonical channel as a [`ChannelInstance`].
    pub fn to_channel(&self) -> ChannelInstance {
        ChannelInstance {
            h: self.canonical_h(),
            p: self.p,
            n: self.n,
        }
    }

    /// Equivalent degraded channel with P = N = 1; `a` absorbs sqrt(P/N).
    pub fn normalize(&self) -> Self {
        if self.p == 1.0 && self.n == 1.0 {
            return self.clone();
        }
        let scale = (self.p / self.n).sqrt();
        Self {
            a: &self.a * scale,
            b: self.b.clone(),
            p: 1.0,
            n: 1.0,
            perm: self.perm.clone(),
            row_signs: self.row_signs.clone(),
        }
    }

    /// True when every gain product `a_i * b_j` vanishes.
    pub fn is_zero(&self) -> bool {
        let a_max = self.a.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        let b_max = self.b.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        a_max * b_max == 0.0
    }
}

/// An ordered tuple of distinct user indices (a decoding order), stored
/// zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedSubset {
    indices: Vec<usize>,
}

impl OrderedSubset {
    /// Creates a subset from zero-based indices; rejects duplicates and
    /// empty tuples.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut seen = vec![false; indices.iter().max().copied().unwrap_or(0) + 1];
        for &i in &indices {
            if seen[i] {
                return Err(Error::RepeatedIndex { index: i });
            }
            seen[i] = true;
        }
        Ok(Self { indices })
    }

    /// Creates a subset from one-based indices (the CLI convention),
    /// validating against the user count `k`.
    pub fn from_one_based(indices: &[usize], k: usize) -> Result<Self> {
        let mut zero_based = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > k {
                return Err(Error::IndexOutOfRange { index: i, k });
            }
            zero_based.push(i - 1);
        }
        Self::new(zero_based)
    }

    /// The identity order (1, ..., k).
    pub fn full(k: usize) -> Self {
        Self {
            indices: (0..k).collect(),
        }
    }

    /// Tuple length |S|.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// True for the (disallowed) empty tuple; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Zero-based indices in decoding order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Complement S^c within a K-user channel, in ascending order.
    pub fn complement(&self, k: usize) -> Vec<usize> {
        (0..k).filter(|i| !self.indices.contains(i)).collect()
    }

    fn check_range(&self, k: usize) -> Result<()> {
        for &i in &self.indices {
            if i >= k {
                return Err(Error::IndexOutOfRange { index: i, k });
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for OrderedSubset {
    /// One-based tuple notation, e.g. `(2,1,3)`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (pos, i) in self.indices.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn validate_accepts_single_user() {
        let ch = ChannelInstance::from_rows(1, &[1.0], 1.0, 1.0).unwrap();
        assert_eq!(ch.k(), 1);
    }

    #[test]
    fn validate_accepts_two_user() {
        let ch = ChannelInstance::from_rows(2, &[1.0, 0.5, 0.5, 1.0], 2.0, 1.0).unwrap();
        assert_eq!(ch.k(), 2);
        assert_eq!(ch.p(), 2.0);
    }

    #[test]
    fn validate_rejects_nonpositive_power() {
        let err = ChannelInstance::from_rows(2, &[1.0, 2.0, 3.0, 4.0], -1.0, 1.0).unwrap_err();
        assert_eq!(err, Error::NonPositivePower(-1.0));
        assert!(err.to_string().contains("P must be positive"));
    }

    #[test]
    fn validate_rejects_non_square_and_nan() {
        let h = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(matches!(
            ChannelInstance::new(h, 1.0, 1.0),
            Err(Error::NonSquare { rows: 1, cols: 2 })
        ));
        let h = dmatrix![1.0, f64::NAN; 0.0, 1.0];
        assert!(matches!(
            ChannelInstance::new(h, 1.0, 1.0),
            Err(Error::NonFinite { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn normalize_scales_gains() {
        let ch = ChannelInstance::from_rows(1, &[2.0], 1.0, 4.0).unwrap();
        let norm = ch.normalize();
        assert_eq!(norm.h()[(0, 0)], 1.0);
        assert_eq!(norm.p(), 1.0);
        assert_eq!(norm.n(), 1.0);

        let ch = ChannelInstance::from_rows(2, &[1.0, 1.0, 2.0, 2.0], 4.0, 1.0).unwrap();
        let norm = ch.normalize();
        assert_eq!(norm.h(), &dmatrix![2.0, 2.0; 4.0, 4.0]);
    }

    #[test]
    fn normalize_is_idempotent_bitwise() {
        let ch = ChannelInstance::from_rows(2, &[0.3, 1.7, 2.9, 0.1], 3.7, 0.9).unwrap();
        let once = ch.normalize();
        let twice = once.normalize();
        assert_eq!(once.h(), twice.h());
    }

    #[test]
    fn factor_exact_rank1() {
        let ch = ChannelInstance::from_rows(2, &[1.0, 1.0, 2.0, 2.0], 1.0, 1.0).unwrap();
        let dc = ch.factor_degraded(DEFAULT_RANK1_TOL).unwrap();
        assert!((dc.a()[0] - 1.0).abs() < 1e-12);
        assert!((dc.a()[1] - 2.0).abs() < 1e-12);
        assert!((dc.b()[0] - 1.0).abs() < 1e-12);
        assert!((dc.b()[1] - 1.0).abs() < 1e-12);
        assert_eq!(dc.perm(), &[0, 1]);
    }

    #[test]
    fn factor_reorders_to_ascending() {
        let ch = ChannelInstance::from_rows(2, &[2.0, 2.0, 1.0, 1.0], 1.0, 1.0).unwrap();
        let dc = ch.factor_degraded(DEFAULT_RANK1_TOL).unwrap();
        assert!((dc.a()[0] - 1.0).abs() < 1e-12);
        assert!((dc.a()[1] - 2.0).abs() < 1e-12);
        assert_eq!(dc.perm(), &[1, 0]);
        // Reconstruction restores the source row order.
        let src = dc.source_h();
        assert!((src[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((src[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factor_rejects_full_rank() {
        let ch = ChannelInstance::from_rows(2, &[1.0, 0.0, 0.0, 1.0], 1.0, 1.0).unwrap();
        let err = ch.factor_degraded(DEFAULT_RANK1_TOL).unwrap_err();
        match err {
            Error::NotDegraded { ratio, .. } => assert!((ratio - 1.0).abs() < 1e-12),
            other => panic!("expected NotDegraded, got {other:?}"),
        }
        assert!(err.to_string().contains("channel is not degraded"));
    }

    #[test]
    fn factor_accepts_zero_channel() {
        let ch = ChannelInstance::from_rows(2, &[0.0; 4], 1.0, 1.0).unwrap();
        let dc = ch.factor_degraded(DEFAULT_RANK1_TOL).unwrap();
        assert!(dc.is_zero());
    }

    #[test]
    fn factor_absorbs_row_signs() {
        // Receiver 0 sees the inverted signal; capacity is unchanged.
        let ch = ChannelInstance::from_rows(2, &[-1.0, -1.0, 2.0, 2.0], 1.0, 1.0).unwrap();
        let dc = ch.factor_degraded(DEFAULT_RANK1_TOL).unwrap();
        assert!(dc.a().iter().all(|&x| x >= 0.0));
        let src = dc.source_h();
        for i in 0..2 {
            for j in 0..2 {
                assert!((src[(i, j)] - ch.h()[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn submatrix_permutes_entries() {
        let ch = ChannelInstance::from_rows(2, &[1.0, 2.0, 3.0, 4.0], 1.0, 1.0).unwrap();
        let s = OrderedSubset::from_one_based(&[2, 1], 2).unwrap();
        let hs = ch.submatrix(&s).unwrap();
        assert_eq!(hs, dmatrix![4.0, 3.0; 2.0, 1.0]);

        let s1 = OrderedSubset::from_one_based(&[1], 2).unwrap();
        assert_eq!(ch.submatrix(&s1).unwrap(), dmatrix![1.0]);
    }

    #[test]
    fn submatrix_of_identity_selects_rows() {
        let ch = ChannelInstance::new(DMatrix::identity(3, 3), 1.0, 1.0).unwrap();
        let s = OrderedSubset::from_one_based(&[1, 3], 3).unwrap();
        assert_eq!(ch.submatrix(&s).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn submatrix_full_order_is_identity_map() {
        let ch = ChannelInstance::from_rows(2, &[1.0, 2.0, 3.0, 4.0], 1.0, 1.0).unwrap();
        let s = OrderedSubset::full(2);
        assert_eq!(&ch.submatrix(&s).unwrap(), ch.h());
    }

    #[test]
    fn subset_rejects_duplicates_and_range() {
        assert!(matches!(
            OrderedSubset::new(vec![0, 0]),
            Err(Error::RepeatedIndex { index: 0 })
        ));
        assert!(matches!(
            OrderedSubset::from_one_based(&[7], 2),
            Err(Error::IndexOutOfRange { index: 7, k: 2 })
        ));
        let ch = ChannelInstance::from_rows(2, &[1.0; 4], 1.0, 1.0).unwrap();
        let s = OrderedSubset::new(vec![5]).unwrap();
        assert!(ch.submatrix(&s).is_err());
    }

    #[test]
    fn subset_complement() {
        let s = OrderedSubset::new(vec![2, 0]).unwrap();
        assert_eq!(s.complement(4), vec![1, 3]);
        assert_eq!(s.to_string(), "(3,1)");
    }

    #[test]
    fn degraded_channel_sorts_and_records() {
        let dc = DegradedChannel::new(
            nalgebra::dvector![2.0, -1.0],
            nalgebra::dvector![1.0, 0.5],
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(dc.a(), &nalgebra::dvector![1.0, 2.0]);
        assert_eq!(dc.perm(), &[1, 0]);
        assert_eq!(dc.row_signs(), &[-1.0, 1.0]);
        // source_h row 1 is the (negated) weaker receiver.
        let src = dc.source_h();
        assert_eq!(src[(1, 0)], -1.0);
        assert_eq!(src[(0, 0)], 2.0);
    }

    #[test]
    fn degraded_normalize_scales_a_only() {
        let dc = DegradedChannel::new(
            nalgebra::dvector![1.0, 2.0],
            nalgebra::dvector![1.0, 1.0],
            4.0,
            1.0,
        )
        .unwrap();
        let norm = dc.normalize();
        assert_eq!(norm.a(), &nalgebra::dvector![2.0, 4.0]);
        assert_eq!(norm.b(), dc.b());
        assert_eq!(norm.p(), 1.0);
        assert_eq!(norm.n(), 1.0);
    }
}
