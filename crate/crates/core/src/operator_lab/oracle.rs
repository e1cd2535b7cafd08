//! Brute-force eigenstructure used as ground truth.

use super::LinearOperator;
use crate::cx::C64;
use crate::error::{Result, SpectreError};
use nalgebra::{DMatrix, DVector};
use std::ops::Range;

pub const DEFAULT_ORACLE_CAP: usize = 512;
pub const DEFAULT_TOL_PROJ: f64 = 1e-8;

/// Relative separation below which Schur eigenvalues are merged into one
/// cluster. Perturbed Jordan blocks split by roughly `eps^(1/m)`.
const CLUSTER_REL: f64 = 1e-5;

/// Distinct eigenvalues of `L` together with their spectral projections,
/// stored in factored form `P_i = V_i W_i` (right eigenvectors `V_i` as
/// columns, left eigenvectors `W_i` as rows of `V⁻¹`).
#[derive(Debug, Clone)]
pub struct SpectralOracle {
    n: usize,
    eigenvalues: Vec<C64>,
    multiplicities: Vec<usize>,
    jordan_defect: Vec<usize>,
    diagonalizable: bool,
    eigen_condition: f64,
    spectral_radius: f64,
    tol_proj: f64,
    right: Option<DMatrix<C64>>,
    left: Option<DMatrix<C64>>,
    columns: Vec<Range<usize>>,
}

impl SpectralOracle {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Distinct eigenvalues, sorted by real then imaginary part.
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn jordan_defect(&self) -> &[usize] {
        &self.jordan_defect
    }

    pub fn diagonalizable(&self) -> bool {
        self.diagonalizable
    }

    /// 2-norm condition number of the eigenvector matrix (∞ when defective).
    pub fn eigen_condition(&self) -> f64 {
        self.eigen_condition
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    pub fn tol_proj(&self) -> f64 {
        self.tol_proj
    }

    /// `1e-9 · spectral radius`, floored so that the zero operator still
    /// gets a usable tolerance.
    pub fn default_tol_real(&self) -> f64 {
        super::DEFAULT_TOL_REAL_REL * self.spectral_radius.max(1e-3)
    }

    fn factors(&self) -> Result<(&DMatrix<C64>, &DMatrix<C64>)> {
        match (&self.right, &self.left) {
            (Some(r), Some(l)) if self.diagonalizable => Ok((r, l)),
            _ => Err(SpectreError::Unsupported(
                "operator is not diagonalizable; spectral projections are undefined".into(),
            )),
        }
    }

    /// Spectral projection onto the eigenspace of `eigenvalues()[i]`.
    pub fn projection(&self, i: usize) -> Result<DMatrix<C64>> {
        let (v, w) = self.factors()?;
        let cols = self.columns[i].clone();
        let vi = v.columns(cols.start, cols.len());
        let wi = w.rows(cols.start, cols.len());
        Ok(vi * wi)
    }

    /// `P_i f` without forming `P_i`.
    pub fn project(&self, i: usize, f: &[C64]) -> Result<Vec<C64>> {
        let (v, w) = self.factors()?;
        let cols = self.columns[i].clone();
        let fv = DVector::from_column_slice(f);
        let coeff = w.rows(cols.start, cols.len()) * fv;
        let out = v.columns(cols.start, cols.len()) * coeff;
        Ok(out.iter().copied().collect())
    }

    /// `P_i f` for every eigenvalue.
    pub fn project_all(&self, f: &[C64]) -> Result<Vec<Vec<C64>>> {
        (0..self.eigenvalues.len()).map(|i| self.project(i, f)).collect()
    }

    /// `‖Σ P_i − I‖_F`
    pub fn completeness_error(&self) -> Result<f64> {
        let (v, w) = self.factors()?;
        Ok((v * w - DMatrix::<C64>::identity(self.n, self.n)).norm())
    }

    /// `max_{i≠j} ‖P_i P_j‖_F`
    pub fn orthogonality_error(&self) -> Result<f64> {
        let p: Vec<_> = (0..self.eigenvalues.len()).map(|i| self.projection(i)).collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for (i, a) in p.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                if i != j {
                    worst = worst.max((a * b).norm());
                }
            }
        }
        Ok(worst)
    }

    /// `max_i ‖A P_i − z_i P_i‖_F`
    pub fn eigen_residual(&self, op: &LinearOperator) -> Result<f64> {
        let a = op.matrix();
        let mut worst: f64 = 0.0;
        for (i, z) in self.eigenvalues.iter().enumerate() {
            let p = self.projection(i)?;
            worst = worst.max((&a * &p - p * *z).norm());
        }
        Ok(worst)
    }
}

pub fn spectral_oracle(op: &LinearOperator, tol_proj: f64) -> Result<SpectralOracle> {
    spectral_oracle_capped(op, tol_proj, DEFAULT_ORACLE_CAP)
}

pub fn spectral_oracle_capped(op: &LinearOperator, tol_proj: f64, cap: usize) -> Result<SpectralOracle> {
    let n = op.dim();
    if n > cap {
        return Err(SpectreError::Unsupported(format!("oracle size cap is {cap}, operator has n = {n}")));
    }
    let a = op.matrix();
    let scale = a.norm().max(1.0);
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| SpectreError::OracleFailure("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let lambda: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    if lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SpectreError::OracleFailure("non-finite eigenvalue".into()));
    }
    let spectral_radius = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let clusters = cluster(&lambda, CLUSTER_REL * scale);

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut multiplicities = Vec::with_capacity(clusters.len());
    let mut jordan_defect = Vec::with_capacity(clusters.len());
    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(clusters.len());

    for members in &clusters {
        let m = members.len();
        let z = members.iter().map(|&i| lambda[i]).sum::<C64>() / m as f64;
        let start = vectors.len();
        if m == 1 {
            let v = &q * schur_eigenvector(&t, members[0], f64::EPSILON * scale);
            vectors.push(v.normalize());
            jordan_defect.push(0);
        } else {
            let shifted = &a - DMatrix::<C64>::identity(n, n) * z;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.as_ref().expect("requested V^H");
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
            let null_tol = CLUSTER_REL * scale;
            let geometric = order.iter().filter(|&&i| svd.singular_values[i] <= null_tol).count();
            jordan_defect.push(m.saturating_sub(geometric));
            for &i in order.iter().take(m.min(geometric.max(1))) {
                vectors.push(v_t.row(i).adjoint());
            }
        }
        columns.push(start..vectors.len());
        eigenvalues.push(z);
        multiplicities.push(m);
    }

    let defective = jordan_defect.iter().any(|&d| d > 0);
    let (mut diagonalizable, mut eigen_condition, mut right, mut left) = (false, f64::INFINITY, None, None);
    if !defective && vectors.len() == n {
        let v = DMatrix::from_columns(&vectors);
        let sv = v.clone().singular_values();
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        eigen_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if eigen_condition <= 1.0 / tol_proj {
            if let Some(w) = v.clone().lu().try_inverse() {
                diagonalizable = true;
                left = Some(w);
            }
        }
        right = Some(v);
    }

    // Sort clusters by (re, im) for a stable presentation order.
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&x, &y| {
        eigenvalues[x].re.total_cmp(&eigenvalues[y].re).then(eigenvalues[x].im.total_cmp(&eigenvalues[y].im))
    });
    let (right, left, columns) = reorder(right, left, &columns, &order);

    Ok(SpectralOracle {
        n,
        eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
        multiplicities: order.iter().map(|&i| multiplicities[i]).collect(),
        jordan_defect: order.iter().map(|&i| jordan_defect[i]).collect(),
        diagonalizable,
        eigen_condition,
        spectral_radius,
        tol_proj,
        right,
        left,
        columns,
    })
}

type Factors = (Option<DMatrix<C64>>, Option<DMatrix<C64>>, Vec<Range<usize>>);

fn reorder(
    right: Option<DMatrix<C64>>,
    left: Option<DMatrix<C64>>,
    columns: &[Range<usize>],
    order: &[usize],
) -> Factors {
    let perm: Vec<usize> = order.iter().flat_map(|&c| columns[c].clone()).collect();
    let mut new_cols = Vec::with_capacity(order.len());
    let mut start = 0;
    for &c in order {
        let len = columns[c].len();
        new_cols.push(start..start + len);
        start += len;
    }
    if perm.len() != columns.iter().map(|r| r.len()).sum::<usize>() {
        return (right, left, new_cols);
    }
    let right = right.map(|v| v.select_columns(perm.iter()));
    let left = left.map(|w| w.select_rows(perm.iter()));
    (right, left, new_cols)
}

/// Groups indices whose values lie within `tol` of each other (transitively).
fn cluster(lambda: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = lambda.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (lambda[i] - lambda[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    groups
}

/// Eigenvector of upper-triangular `t` for the eigenvalue `t[k,k]`, by back
/// substitution with tiny pivots clamped to `small`.
fn schur_eigenvector(t: &DMatrix<C64>, k: usize, small: f64) -> DVector<C64> {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let mut x = DVector::<C64>::zeros(n);
    x[k] = C64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * x[j]).sum();
        let mut d = t[(i, i)] - lambda;
        if d.norm() < small {
            d = C64::new(small, 0.0);
        }
        x[i] = -s / d;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_lab::{build_operator, OperatorSpec};

    fn close(a: C64, b: f64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn diagonal_projections() {
        let op = build_operator(&OperatorSpec::diagonal(&[4.0, 1.0])).unwrap();
        let o = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        assert!(o.diagonalizable());
        assert!(close(o.eigenvalues()[0], 1.0) && close(o.eigenvalues()[1], 4.0));
        let p1 = o.projection(0).unwrap();
        assert!(close(p1[(0, 0)], 0.0) && close(p1[(1, 1)], 1.0));
        let p4 = o.projection(1).unwrap();
        assert!(close(p4[(0, 0)], 1.0) && close(p4[(1, 1)], 0.0));
    }

    #[test]
    fn jordan_block_is_defective() {
        let op = build_operator(&OperatorSpec::dense_real(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap();
        let o = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        assert!(!o.diagonalizable());
        assert_eq!(o.eigenvalues().len(), 1);
        assert!(o.eigenvalues()[0].norm() < 1e-12);
        assert_eq!(o.jordan_defect(), &[1]);
        assert!(o.projection(0).is_err());
    }

    #[test]
    fn repeated_diagonalizable_eigenvalue() {
        let op = build_operator(&OperatorSpec::diagonal(&[2.0, 2.0, 5.0])).unwrap();
        let o = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        assert!(o.diagonalizable());
        assert_eq!(o.multiplicities(), &[2, 1]);
        assert!(o.completeness_error().unwrap() < 1e-12);
        let p = o.projection(0).unwrap();
        assert!((p[(0, 0)] - 1.0).norm() < 1e-12 && (p[(1, 1)] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn random_six_by_six_is_complete() {
        let spec = OperatorSpec::planted(
            &[1.0, 2.5, -0.5, 3.0, 7.0, 0.3].map(|x| C64::new(x, 0.0)),
            0.6,
            42,
        );
        let op = build_operator(&spec).unwrap();
        let o = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        assert!(o.diagonalizable());
        assert!(o.completeness_error().unwrap() < 1e-10);
        assert!(o.orthogonality_error().unwrap() < 1e-10);
        assert!(o.eigen_residual(&op).unwrap() < 1e-10);
    }

    #[test]
    fn size_cap_enforced() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0; 5])).unwrap();
        assert!(matches!(spectral_oracle_capped(&op, 1e-8, 4), Err(SpectreError::Unsupported(_))));
    }
}
