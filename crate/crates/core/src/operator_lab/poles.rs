//! Poles of `W(p) = (L + p²)⁻¹ f` in the Laplace plane, `p = −ik`.

use super::SpectralOracle;
use crate::cx::C64;
use crate::error::{Result, SpectreError};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleClass {
    ImaginaryAxis,
    RightHalf,
    LeftHalf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PPole {
    pub pole: C64,
    pub residue: Vec<C64>,
    pub class: PoleClass,
    /// Index into `SpectralOracle::eigenvalues`.
    pub eigen_index: usize,
}

impl PPole {
    /// Real frequency `k_j = i p₀` for imaginary-axis poles.
    pub fn k(&self) -> Option<f64> {
        (self.class == PoleClass::ImaginaryAxis).then(|| (C64::i() * self.pole).re)
    }
}

/// Principal square root, with `|Im z| ≤ tol_real` snapped onto the real axis
/// so that real negative `z` maps to `i√|z|` regardless of the sign of a
/// rounding-level imaginary part.
pub fn principal_sqrt(z: C64, tol_real: f64) -> C64 {
    if z.im.abs() <= tol_real {
        if z.re >= 0.0 {
            C64::new(z.re.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-z.re).sqrt())
        }
    } else {
        z.sqrt()
    }
}

/// Both poles `±i√z_i` per eigenvalue with residues `P_i f / (2p₀)`.
pub fn p_plane_poles(oracle: &SpectralOracle, f: &[C64], tol_real: f64) -> Result<Vec<PPole>> {
    if !oracle.diagonalizable() {
        return Err(SpectreError::Unsupported("defective operator: poles are not simple".into()));
    }
    let mut poles = Vec::with_capacity(2 * oracle.eigenvalues().len());
    for (i, &z) in oracle.eigenvalues().iter().enumerate() {
        if z.norm() <= tol_real {
            return Err(SpectreError::Unsupported(
                "zero eigenvalue gives a double pole at p = 0".into(),
            ));
        }
        let pf = oracle.project(i, f)?;
        let s = principal_sqrt(z, tol_real);
        let snapped = z.im.abs() <= tol_real;
        for p0 in [C64::i() * s, -C64::i() * s] {
            let p0 = if snapped && z.re > 0.0 { C64::new(0.0, p0.im) } else { p0 };
            let class = if snapped && z.re > 0.0 {
                PoleClass::ImaginaryAxis
            } else if p0.re > 0.0 {
                PoleClass::RightHalf
            } else {
                PoleClass::LeftHalf
            };
            let denom = 2.0 * p0;
            poles.push(PPole { pole: p0, residue: pf.iter().map(|x| x / denom).collect(), class, eigen_index: i });
        }
    }
    Ok(poles)
}
