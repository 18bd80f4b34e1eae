//! LCU templates: discovered clusters plus per-string coefficients, with
//! fast re-evaluation for matrices sharing the source sparsity pattern.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lcu::cluster::{Cluster, SignMatrix};
use crate::lcu::pauli::PauliString;
use crate::sparse::SparseMatrix;

/// Coefficients below this magnitude count as zero.
pub const ZERO_TOL: f64 = 1e-14;

/// Below this rank clusters are solved sequentially.
const PARALLEL_MIN_RANK: usize = 1024;

pub const TEMPLATE_FORMAT: &str = "qcfd-lcu-template";
pub const TEMPLATE_VERSION: u32 = 1;

pub const SUMMARY_CSV_HEADER: &str = "mesh,N,clusters,candidates,nonzero,decomp_seconds,reeval_seconds";

/// Sparsity pattern of the matrix a template was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub rank: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub hash: u64,
}

impl Pattern {
    pub fn of(h: &SparseMatrix) -> Self {
        Self {
            rank: h.rank(),
            row_ptr: h.row_ptr().to_vec(),
            col_idx: h.col_idx().to_vec(),
            hash: h.pattern_hash(),
        }
    }

    pub fn matches(&self, h: &SparseMatrix) -> bool {
        self.rank == h.rank() && self.row_ptr == h.row_ptr() && self.col_idx == h.col_idx()
    }
}

/// Where each cluster reads its canonical-half values from the source values array.
#[derive(Debug, Clone, PartialEq, Eq)]
struct GatherPlan {
    /// Per cluster: (canonical index, value position) pairs.
    entries: Vec<Vec<(u32, u32)>>,
}

impl GatherPlan {
    fn build(clusters: &[Cluster], pattern: &Pattern) -> Result<Self> {
        let mut entries = vec![Vec::new(); clusters.len()];
        for r in 0..pattern.rank {
            for pos in pattern.row_ptr[r]..pattern.row_ptr[r + 1] {
                let c = pattern.col_idx[pos];
                let mask = (r ^ c) as u64;
                let ci = clusters
                    .binary_search_by_key(&mask, |cl| cl.mask)
                    .map_err(|_| Error::Pattern(format!("entry ({r},{c}) has no cluster for mask {mask}")))?;
                if let Some(idx) = clusters[ci].canonical_index(r as u64) {
                    entries[ci].push((idx as u32, pos as u32));
                }
            }
        }
        Ok(Self { entries })
    }
}

/// A Pauli-string LCU: clusters, coefficients aligned with the concatenated
/// cluster members, and per-string zero/active flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuTemplate {
    pub n: u32,
    clusters: Vec<Cluster>,
    offsets: Vec<usize>,
    coefficients: Vec<f64>,
    active: Vec<bool>,
    filter_limit: f64,
    pattern: Pattern,
    plan: GatherPlan,
}

impl LcuTemplate {
    /// Assembles a template; `clusters` must be sorted by mask and cover the pattern.
    pub(crate) fn from_parts(
        n: u32,
        clusters: Vec<Cluster>,
        pattern: Pattern,
        coefficients: Option<Vec<f64>>,
    ) -> Result<Self> {
        let mut offsets = Vec::with_capacity(clusters.len() + 1);
        let mut total = 0;
        for c in &clusters {
            offsets.push(total);
            total += c.len();
        }
        offsets.push(total);
        let plan = GatherPlan::build(&clusters, &pattern)?;
        let mut t = Self {
            n,
            clusters,
            offsets,
            coefficients: vec![0.0; total],
            active: vec![false; total],
            filter_limit: 0.0,
            pattern,
            plan,
        };
        match coefficients {
            Some(c) => {
                if c.len() != total {
                    return Err(Error::Dimension(format!(
                        "{} coefficients for {total} strings",
                        c.len()
                    )));
                }
                t.coefficients = c;
                t.refresh_flags();
            }
            None => {}
        }
        Ok(t)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn masks(&self) -> Vec<u64> {
        self.clusters.iter().map(|c| c.mask).collect()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Coefficients of cluster `ci`.
    pub fn cluster_coefficients(&self, ci: usize) -> &[f64] {
        &self.coefficients[self.offsets[ci]..self.offsets[ci + 1]]
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn pattern_hash(&self) -> u64 {
        self.pattern.hash
    }

    pub fn filter_limit(&self) -> f64 {
        self.filter_limit
    }

    /// All candidate strings in the clusters.
    pub fn candidate_count(&self) -> usize {
        self.coefficients.len()
    }

    /// Strings whose coefficient is at least the zero tolerance.
    pub fn nonzero_count(&self) -> usize {
        self.coefficients.iter().filter(|a| a.abs() >= ZERO_TOL).count()
    }

    /// Candidates flagged zero.
    pub fn zero_count(&self) -> usize {
        self.candidate_count() - self.nonzero_count()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    /// Every candidate as (string, coefficient, active).
    pub fn strings(&self) -> impl Iterator<Item = (PauliString, f64, bool)> + '_ {
        self.clusters.iter().enumerate().flat_map(move |(ci, c)| {
            (0..c.len()).map(move |m| {
                let i = self.offsets[ci] + m;
                (c.member(m), self.coefficients[i], self.active[i])
            })
        })
    }

    /// Active strings with their coefficients.
    pub fn active_strings(&self) -> Vec<(PauliString, f64)> {
        self.strings().filter(|s| s.2).map(|(p, a, _)| (p, a)).collect()
    }

    /// Coefficient of `s`, zero when it is not a candidate.
    pub fn coefficient_of(&self, s: &PauliString) -> f64 {
        match self.clusters.binary_search_by_key(&s.x_mask, |c| c.mask) {
            Ok(ci) => match self.clusters[ci].members.binary_search(&s.z_mask) {
                Ok(m) => self.coefficients[self.offsets[ci] + m],
                Err(_) => 0.0,
            },
            Err(_) => 0.0,
        }
    }

    fn refresh_flags(&mut self) {
        let limit = self.filter_limit;
        for (flag, a) in self.active.iter_mut().zip(&self.coefficients) {
            *flag = a.abs() >= ZERO_TOL && a.abs() >= limit;
        }
    }

    /// Flags strings with `|alpha| < limit` inactive (in place). The limit
    /// persists across re-evaluations.
    pub fn set_filter(&mut self, limit: f64) -> Result<()> {
        if !(limit >= 0.0) {
            return Err(Error::Config(format!("filter limit must be >= 0, got {limit}")));
        }
        self.filter_limit = limit;
        self.refresh_flags();
        Ok(())
    }

    /// Copy of the template with the coefficient filter applied.
    pub fn filter_by_coefficient(&self, limit: f64) -> Result<Self> {
        let mut t = self.clone();
        t.set_filter(limit)?;
        Ok(t)
    }

    /// Recomputes every coefficient for `h` (same pattern as the source)
    /// by one transform per cluster. `h` must be symmetric (not checked); only the
    /// canonical half of each cluster pattern is read.
    pub fn reevaluate(&mut self, h: &SparseMatrix) -> Result<&[f64]> {
        if !self.pattern.matches(h) {
            return Err(Error::Pattern(format!(
                "matrix pattern {:016x} differs from template pattern {:016x}; re-decompose",
                h.pattern_hash(),
                self.pattern.hash
            )));
        }
        let values = h.values();
        let solve = |(ci, out): (usize, &mut [f64])| {
            let cl = &self.clusters[ci];
            let mut hv = vec![0.0; cl.half_len()];
            for &(idx, pos) in &self.plan.entries[ci] {
                hv[idx as usize] = values[pos as usize];
            }
            let mut work = Vec::with_capacity(hv.len());
            cl.solve_into(&hv, &mut work, out);
        };
        let chunks = split_by_offsets(&mut self.coefficients, &self.offsets);
        if h.rank() >= PARALLEL_MIN_RANK {
            chunks.into_par_iter().enumerate().for_each(solve);
        } else {
            chunks.into_iter().enumerate().for_each(solve);
        }
        self.refresh_flags();
        Ok(&self.coefficients)
    }

    /// Dense-free reconstruction of the in-filled matrix: every position
    /// `(k, k ^ mask)` of every cluster is stored, including in-fill zeros.
    pub fn reconstruct(&self, active_only: bool) -> SparseMatrix {
        let dim = 1usize << self.n;
        let mut triplets = Vec::new();
        for (ci, cl) in self.clusters.iter().enumerate() {
            let alphas = self.cluster_coefficients(ci);
            let flags = &self.active[self.offsets[ci]..self.offsets[ci + 1]];
            for idx in 0..cl.half_len() {
                let mut v = 0.0;
                for (m, &a) in alphas.iter().enumerate() {
                    if active_only && !flags[m] {
                        continue;
                    }
                    if cl.signs.bit(m, idx) {
                        v += a;
                    } else {
                        v -= a;
                    }
                }
                let k = cl.canonical_row(idx) as usize;
                triplets.push((k, k ^ cl.mask as usize, v));
                if cl.mask != 0 {
                    triplets.push((k ^ cl.mask as usize, k, v));
                }
            }
        }
        SparseMatrix::from_triplets(dim, &triplets).expect("cluster positions are in range")
    }

    /// Max-norm difference between the reconstruction and `h`.
    pub fn reconstruction_error(&self, h: &SparseMatrix, active_only: bool) -> f64 {
        self.reconstruct(active_only).max_abs_diff(h)
    }

    /// One row of the LCU summary CSV.
    pub fn summary_row(&self, mesh: usize, decomp_seconds: f64, reeval_seconds: f64) -> String {
        format!(
            "{mesh},{},{},{},{},{decomp_seconds:.3e},{reeval_seconds:.3e}",
            1usize << self.n,
            self.clusters.len(),
            self.candidate_count(),
            self.nonzero_count()
        )
    }

    /// Writes the versioned text form.
    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "{TEMPLATE_FORMAT} {TEMPLATE_VERSION}");
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "pattern_hash {:016x}", self.pattern.hash);
        let _ = writeln!(s, "filter_limit {:e}", self.filter_limit);
        let _ = writeln!(s, "row_ptr {}", join(&self.pattern.row_ptr));
        let _ = writeln!(s, "col_idx {}", join(&self.pattern.col_idx));
        let _ = writeln!(s, "clusters {}", self.clusters.len());
        for (ci, c) in self.clusters.iter().enumerate() {
            let _ = writeln!(s, "cluster {} {} {}", c.mask, c.len(), c.half_len());
            let _ = writeln!(s, "members {}", join(&c.members));
            for m in 0..c.len() {
                let words: Vec<String> = c.signs.row_words(m).iter().map(|w| format!("{w:016x}")).collect();
                let _ = writeln!(s, "{}", words.join(" "));
            }
            let coeffs: Vec<String> = self.cluster_coefficients(ci).iter().map(|a| format!("{a:e}")).collect();
            let _ = writeln!(s, "coefficients {}", coeffs.join(" "));
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Reads the text form written by [`LcuTemplate::write`].
    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("truncated template".into()))?
                .map_err(Error::from)
        };
        let head = next()?;
        let mut it = head.split_whitespace();
        if it.next() != Some(TEMPLATE_FORMAT) {
            return Err(Error::Parse("not an LCU template".into()));
        }
        let version: u32 = parse(it.next())?;
        if version != TEMPLATE_VERSION {
            return Err(Error::Parse(format!("unsupported template version {version}")));
        }
        let n: u32 = parse(keyed(&next()?, "n")?.first().copied())?;
        let hash = u64::from_str_radix(keyed(&next()?, "pattern_hash")?.first().copied().unwrap_or(""), 16)
            .map_err(|e| Error::Parse(format!("pattern hash: {e}")))?;
        let filter_limit: f64 = parse(keyed(&next()?, "filter_limit")?.first().copied())?;
        let row_ptr = parse_all(&keyed(&next()?, "row_ptr")?)?;
        let col_idx = parse_all(&keyed(&next()?, "col_idx")?)?;
        let count: usize = parse(keyed(&next()?, "clusters")?.first().copied())?;
        let mut clusters = Vec::with_capacity(count);
        let mut coefficients = Vec::new();
        for _ in 0..count {
            let h: Vec<usize> = parse_all(&keyed(&next()?, "cluster")?)?;
            let [mask, rows, cols] = h[..] else {
                return Err(Error::Parse("cluster header needs mask, members, columns".into()));
            };
            let members: Vec<u64> = parse_all(&keyed(&next()?, "members")?)?;
            if members.len() != rows {
                return Err(Error::Parse("member count mismatch".into()));
            }
            let mut bits = Vec::new();
            for _ in 0..rows {
                for w in next()?.split_whitespace() {
                    bits.push(u64::from_str_radix(w, 16).map_err(|e| Error::Parse(format!("sign word: {e}")))?);
                }
            }
            let signs = SignMatrix::from_raw(rows, cols, bits)
                .ok_or_else(|| Error::Parse("sign matrix size mismatch".into()))?;
            let alphas: Vec<f64> = parse_all(&keyed(&next()?, "coefficients")?)?;
            if alphas.len() != rows {
                return Err(Error::Parse("coefficient count mismatch".into()));
            }
            coefficients.extend(alphas);
            clusters.push(Cluster {
                n,
                mask: mask as u64,
                members,
                signs,
            });
        }
        let rank = row_ptr.len().saturating_sub(1);
        let pattern = Pattern {
            rank,
            row_ptr,
            col_idx,
            hash,
        };
        let mut t = Self::from_parts(n, clusters, pattern, Some(coefficients))?;
        t.set_filter(filter_limit)?;
        Ok(t)
    }

    /// Exact integer check of `S S^T = 2^n I` over the full pattern for every cluster.
    pub fn signs_orthogonal(&self) -> bool {
        self.clusters.iter().all(cluster_orthogonal)
    }
}

/// `S S^T = 2^n I` for one cluster, computed on the full pattern.
pub fn cluster_orthogonal(c: &Cluster) -> bool {
    // The full row is the canonical half twice (mask != 0), so dot products double.
    let factor = if c.mask == 0 { 1 } else { 2 };
    let dim = 1i64 << c.n;
    (0..c.len()).all(|a| {
        (a..c.len()).all(|b| {
            let d = factor * c.signs.row_dot(a, b);
            if a == b {
                d == dim
            } else {
                d == 0
            }
        })
    })
}

fn split_by_offsets<'a>(v: &'a mut [f64], offsets: &[usize]) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(offsets.len().saturating_sub(1));
    let mut rest = v;
    for w in offsets.windows(2) {
        let (head, tail) = rest.split_at_mut(w[1] - w[0]);
        out.push(head);
        rest = tail;
    }
    out
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn keyed<'a>(line: &'a str, key: &str) -> Result<Vec<&'a str>> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(Error::Parse(format!("expected '{key}' line, got {line:?}")));
    }
    Ok(it.collect())
}

fn parse<T: std::str::FromStr>(s: Option<&str>) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let s = s.ok_or_else(|| Error::Parse("missing field".into()))?;
    s.parse().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

fn parse_all<T: std::str::FromStr>(v: &[&str]) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.iter().map(|s| parse(Some(s))).collect()
}
