//! Proper orthogonal decomposition of a snapshot matrix.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::io::{fmt_real, LineReader};
use crate::mesh::Mesh;
use crate::snapshots::SnapshotSet;
use crate::{Error, Result};

/// Leading left singular vectors of a snapshot matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    modes: DMatrix<f64>,
    singular_values: Vec<f64>,
    pub mesh_fingerprint: String,
}

impl PodBasis {
    /// Basis from the converged columns of `set`, truncated to `m` modes.
    pub fn from_snapshots(set: &SnapshotSet, m: usize) -> Result<Self> {
        let cols: Vec<&[f64]> = set.converged_indices().into_iter().map(|k| set.column(k)).collect();
        if cols.is_empty() {
            return Err(Error::NoConvergedSnapshots);
        }
        let n = set.n_dofs();
        let s = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        Self::from_matrix(s, m, set.mesh_fingerprint.clone())
    }

    /// Basis of an arbitrary `N × M` matrix.
    pub fn from_matrix(s: DMatrix<f64>, m: usize, mesh_fingerprint: String) -> Result<Self> {
        let (n, cols) = s.shape();
        if n == 0 || cols == 0 {
            return Err(Error::invalid("empty snapshot matrix"));
        }
        if m == 0 || m > n.min(cols) {
            return Err(Error::invalid(format!(
                "truncation m = {m} must lie in 1..={} for a {n}x{cols} snapshot matrix",
                n.min(cols)
            )));
        }
        let svd = nalgebra::SVD::new(s, true, false);
        let u = svd.u.ok_or_else(|| Error::invalid("SVD did not return left vectors"))?;
        let mut modes = u.columns(0, m).into_owned();
        for mut col in modes.column_iter_mut() {
            let lead = col.iter().copied().fold(0.0_f64, |a, v| if v.abs() > a.abs() { v } else { a });
            if lead < 0.0 {
                col.neg_mut();
            }
        }
        Ok(Self { modes, singular_values: svd.singular_values.iter().copied().collect(), mesh_fingerprint })
    }

    pub fn n_dofs(&self) -> usize {
        self.modes.nrows()
    }

    /// Truncation rank `m`.
    pub fn rank(&self) -> usize {
        self.modes.ncols()
    }

    pub fn modes(&self) -> &DMatrix<f64> {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> Vec<f64> {
        self.modes.column(k).iter().copied().collect()
    }

    /// All singular values of the snapshot matrix, non-increasing.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Coefficients `c = Uᵀu`.
    pub fn project(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n_dofs() {
            return Err(Error::dims("projected field", self.n_dofs(), u.len()));
        }
        let u = DVector::from_column_slice(u);
        Ok(self.modes.tr_mul(&u).iter().copied().collect())
    }

    /// Field `U c`.
    pub fn reconstruct(&self, c: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_dofs()];
        self.reconstruct_into(c, &mut out)?;
        Ok(out)
    }

    pub fn reconstruct_into(&self, c: &[f64], out: &mut [f64]) -> Result<()> {
        if c.len() != self.rank() {
            return Err(Error::dims("POD coefficients", self.rank(), c.len()));
        }
        if out.len() != self.n_dofs() {
            return Err(Error::dims("reconstructed field", self.n_dofs(), out.len()));
        }
        out.fill(0.0);
        for (col, &ck) in self.modes.column_iter().zip(c) {
            for (o, v) in out.iter_mut().zip(col.iter()) {
                *o += ck * v;
            }
        }
        Ok(())
    }

    /// Truncated copy with the first `m` modes.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.rank() {
            return Err(Error::invalid(format!("cannot truncate {} modes to {m}", self.rank())));
        }
        Ok(Self { modes: self.modes.columns(0, m).into_owned(), ..self.clone() })
    }

    /// Fingerprint of the serialised basis.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        crate::fingerprint(&buf)
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        let found = mesh.fingerprint();
        if found != self.mesh_fingerprint {
            return Err(Error::FingerprintMismatch {
                artifact: "POD basis".into(),
                expected: self.mesh_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "pod {} {}", self.n_dofs(), self.rank())?;
        writeln!(w, "mesh {}", self.mesh_fingerprint)?;
        writeln!(w, "singular_values {}", self.singular_values.len())?;
        for s in &self.singular_values {
            writeln!(w, "{}", fmt_real(*s))?;
        }
        for v in self.modes.iter() {
            writeln!(w, "{}", fmt_real(*v))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = LineReader::new(r);
        let (ln, head) = lines.next_tokens()?;
        if head.len() != 3 || head[0] != "pod" {
            return Err(Error::parse(ln, "expected 'pod N m'"));
        }
        let n: usize = lines.parse_at(ln, &head[1])?;
        let m: usize = lines.parse_at(ln, &head[2])?;
        let (ln, tok) = lines.next_tokens()?;
        if tok.len() != 2 || tok[0] != "mesh" {
            return Err(Error::parse(ln, "expected 'mesh <fingerprint>'"));
        }
        let mesh_fingerprint = tok[1].clone();
        let (ln, tok) = lines.next_tokens()?;
        if tok.len() != 2 || tok[0] != "singular_values" {
            return Err(Error::parse(ln, "expected 'singular_values <count>'"));
        }
        let k: usize = lines.parse_at(ln, &tok[1])?;
        if m == 0 || m > k {
            return Err(Error::parse(ln, format!("truncation {m} inconsistent with {k} singular values")));
        }
        let singular_values = (0..k).map(|_| lines.next_value()).collect::<Result<Vec<f64>>>()?;
        let data = (0..n * m).map(|_| lines.next_value()).collect::<Result<Vec<f64>>>()?;
        Ok(Self { modes: DMatrix::from_vec(n, m, data), singular_values, mesh_fingerprint })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Convenience wrapper for [`PodBasis::from_snapshots`].
pub fn compute_pod(set: &SnapshotSet, m: usize) -> Result<PodBasis> {
    PodBasis::from_snapshots(set, m)
}
