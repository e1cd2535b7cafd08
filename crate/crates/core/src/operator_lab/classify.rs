use super::SpectralOracle;
use crate::cx::{norm, C64};
use crate::error::{Result, SpectreError};
use serde::Serialize;

/// Buckets of the oracle spectrum relevant to the wave-equation criteria.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumClassification {
    /// `Re z < 0`
    pub unstable: Vec<C64>,
    /// Real `z > 0` paired with `k_d = +√z`.
    pub positive: Vec<(C64, f64)>,
    pub zero_eigenvalue: bool,
    /// Non-real with `Re z ≥ 0`, or defective.
    pub assumption_a_violations: Vec<C64>,
    pub diagonalizable: bool,
}

impl SpectrumClassification {
    /// Simple poles only, none at the origin, none off-axis in `Re z ≥ 0`.
    pub fn assumption_a_ok(&self) -> bool {
        self.assumption_a_violations.is_empty() && !self.zero_eigenvalue && self.diagonalizable
    }

    pub fn has_unstable(&self) -> bool {
        !self.unstable.is_empty()
    }
}

pub fn classify_spectrum(oracle: &SpectralOracle, tol_real: f64) -> SpectrumClassification {
    classify_eigenvalues(oracle.eigenvalues(), oracle.jordan_defect(), oracle.diagonalizable(), tol_real)
}

pub(crate) fn classify_eigenvalues(
    eigenvalues: &[C64],
    defects: &[usize],
    diagonalizable: bool,
    tol_real: f64,
) -> SpectrumClassification {
    let mut out = SpectrumClassification {
        unstable: Vec::new(),
        positive: Vec::new(),
        zero_eigenvalue: false,
        assumption_a_violations: Vec::new(),
        diagonalizable,
    };
    for (i, &z) in eigenvalues.iter().enumerate() {
        let real = z.im.abs() <= tol_real;
        if z.norm() <= tol_real {
            out.zero_eigenvalue = true;
        } else if z.re < 0.0 {
            out.unstable.push(z);
        } else if real {
            out.positive.push((z, z.re.sqrt()));
        } else {
            out.assumption_a_violations.push(z);
        }
        if defects.get(i).copied().unwrap_or(0) > 0 && !out.assumption_a_violations.contains(&z) {
            out.assumption_a_violations.push(z);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityReport {
    pub seen: Vec<bool>,
    pub projection_norms: Vec<f64>,
    pub generic: bool,
}

/// Eigenvalue `z_i` is seen by `f` iff `‖P_i f‖ > tol_gen ‖f‖`.
pub fn check_generic(oracle: &SpectralOracle, f: &[C64], tol_gen: f64) -> Result<GenericityReport> {
    if !oracle.diagonalizable() {
        return Err(SpectreError::Unsupported(
            "genericity of f is only defined here for diagonalizable operators".into(),
        ));
    }
    if f.len() != oracle.dim() {
        return Err(SpectreError::Usage(format!("f has length {}, operator has n = {}", f.len(), oracle.dim())));
    }
    let fnorm = norm(f);
    let projection_norms: Vec<f64> =
        oracle.project_all(f)?.iter().map(|p| norm(p)).collect();
    let seen: Vec<bool> = projection_norms.iter().map(|&p| p > tol_gen * fnorm).collect();
    let generic = seen.iter().all(|&s| s);
    Ok(GenericityReport { seen, projection_norms, generic })
}
