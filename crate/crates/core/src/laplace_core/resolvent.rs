use crate::cx::C64;
use crate::error::{Result, SpectreError};
use crate::operator_lab::LinearOperator;
use nalgebra::{DMatrix, DVector};

/// Systems with a larger 1-norm condition number are treated as sitting on a pole.
pub const MAX_CONDITION: f64 = 1e12;

fn norm1(m: &DMatrix<C64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `(L + shift·I) x = f`. `p_report` is carried in the error.
pub fn shifted_solve(op: &LinearOperator, f: &[C64], shift: C64, p_report: C64) -> Result<Vec<C64>> {
    let n = op.dim();
    if f.len() != n {
        return Err(SpectreError::Usage(format!("f has length {}, operator has n = {n}", f.len())));
    }
    let mut m = op.matrix();
    for i in 0..n {
        m[(i, i)] += shift;
    }
    let lu = m.clone().lu();
    let inv = lu.try_inverse().ok_or(SpectreError::PoleProximity { p: p_report, condition: f64::INFINITY })?;
    let condition = norm1(&m) * norm1(&inv);
    if !(condition <= MAX_CONDITION) {
        return Err(SpectreError::PoleProximity { p: p_report, condition });
    }
    let b = DVector::from_column_slice(f);
    let mut x = lu.solve(&b).ok_or(SpectreError::PoleProximity { p: p_report, condition })?;
    // one step of iterative refinement
    let r = &b - &m * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(x.iter().copied().collect())
}

/// `W(p) = (L + p²I)⁻¹ f`
pub fn resolvent_solve_p(op: &LinearOperator, f: &[C64], p: C64) -> Result<Vec<C64>> {
    shifted_solve(op, f, p * p, p)
}

/// `v = (L − k²I)⁻¹ f` for complex `k²`.
pub fn resolvent_solve_k(op: &LinearOperator, f: &[C64], k2: C64) -> Result<Vec<C64>> {
    let p = -C64::i() * k2.sqrt();
    shifted_solve(op, f, -k2, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::{diff_norm, norm};
    use crate::operator_lab::{build_operator, OperatorSpec};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar_and_diagonal_solves() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0])).unwrap();
        let w = resolvent_solve_p(&op, &[c(1.0, 0.0)], c(1.0, 0.0)).unwrap();
        assert!((w[0] - 0.5).norm() < 1e-15);

        let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0])).unwrap();
        let f = [c(1.0, 0.0), c(1.0, 0.0)];
        let v = resolvent_solve_k(&op, &f, c(2.0, 0.0)).unwrap();
        assert!(diff_norm(&v, &[c(-1.0, 0.0), c(0.5, 0.0)]) < 1e-15);
    }

    #[test]
    fn poles_are_rejected() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0])).unwrap();
        let f = [c(1.0, 0.0), c(1.0, 0.0)];
        let err = resolvent_solve_p(&op, &f, C64::i()).unwrap_err();
        assert!(matches!(err, SpectreError::PoleProximity { p, .. } if (p - C64::i()).norm() < 1e-15));
        assert!(matches!(resolvent_solve_k(&op, &f, c(1.0, 0.0)), Err(SpectreError::PoleProximity { .. })));
    }

    #[test]
    fn random_residual_is_tiny() {
        let spec = OperatorSpec::planted(&[0.5, 1.0, 2.0, -1.0, 3.0, 6.0].map(|x| c(x, 0.0)), 0.5, 11);
        let op = build_operator(&spec).unwrap();
        let f = vec![c(1.0, 0.0); 6];
        let p = c(2.0, 3.0);
        let w = resolvent_solve_p(&op, &f, p).unwrap();
        let lw = op.apply(&w);
        let r: Vec<C64> = lw.iter().zip(&w).zip(&f).map(|((a, b), fi)| a + p * p * b - fi).collect();
        assert!(norm(&r) <= 1e-10 * norm(&f));
    }

    proptest! {
        #[test]
        fn resolvent_identity(seed in 0u64..500, re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let spec = OperatorSpec::planted(&[0.7, 1.9, 3.3, 5.0].map(|x| c(x, 0.0)), 0.4, seed);
            let op = build_operator(&spec).unwrap();
            let f = vec![c(1.0, -0.5), c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 0.3)];
            let p = c(re, im);
            if let Ok(w) = resolvent_solve_p(&op, &f, p) {
                let lw = op.apply(&w);
                let r: Vec<C64> = lw.iter().zip(&w).zip(&f).map(|((a, b), fi)| a + p * p * b - fi).collect();
                prop_assert!(norm(&r) <= 1e-10 * norm(&f));
            }
        }
    }
}
