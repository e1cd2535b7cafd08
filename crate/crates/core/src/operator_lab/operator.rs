use crate::cx::{Cx, C64};
use crate::error::{Result, SpectreError};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Potential `q(x)` for the discretized 1D Schrödinger operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Potential {
    Zero,
    /// `amplitude · (1 + |x|)^(-2 - decay_rate)`
    PowerDecay { amplitude: f64, decay_rate: f64 },
    /// `amplitude · exp(-(x / width)²)`
    Gaussian { amplitude: f64, width: f64 },
    /// `-depth` on `|x| ≤ half_width`, zero outside.
    Well { depth: f64, half_width: f64 },
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::PowerDecay { amplitude, decay_rate } => {
                amplitude * (1.0 + x.abs()).powf(-2.0 - decay_rate)
            }
            Potential::Gaussian { amplitude, width } => amplitude * (-(x / width).powi(2)).exp(),
            Potential::Well { depth, half_width } => {
                if x.abs() <= half_width {
                    -depth
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Dirichlet,
}

/// Declarative recipe for a test operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum OperatorSpec {
    Diagonal {
        eigenvalues: Vec<Cx>,
    },
    /// Row-major entries, one inner list per row.
    Dense {
        entries: Vec<Vec<Cx>>,
    },
    Schrodinger1d {
        n: usize,
        half_width: f64,
        potential: Potential,
        #[serde(default)]
        boundary: Boundary,
    },
    /// `S · diag(base_spectrum) · S⁻¹` with `S = I + magnitude · G`, `G` a
    /// seeded complex random matrix scaled by `1/√n`.
    PerturbedRandom {
        base_spectrum: Vec<Cx>,
        magnitude: f64,
        seed: u64,
    },
}

impl OperatorSpec {
    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::Diagonal { eigenvalues } => eigenvalues.len(),
            OperatorSpec::Dense { entries } => entries.len(),
            OperatorSpec::Schrodinger1d { n, .. } => *n,
            OperatorSpec::PerturbedRandom { base_spectrum, .. } => base_spectrum.len(),
        }
    }

    pub fn diagonal(eigenvalues: &[f64]) -> Self {
        OperatorSpec::Diagonal { eigenvalues: eigenvalues.iter().map(|&x| Cx(x, 0.0)).collect() }
    }

    pub fn dense_real(rows: &[&[f64]]) -> Self {
        OperatorSpec::Dense {
            entries: rows.iter().map(|r| r.iter().map(|&x| Cx(x, 0.0)).collect()).collect(),
        }
    }

    pub fn planted(spectrum: &[C64], magnitude: f64, seed: u64) -> Self {
        OperatorSpec::PerturbedRandom {
            base_spectrum: spectrum.iter().copied().map(Cx::from).collect(),
            magnitude,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |c: &Cx| c.0.is_finite() && c.1.is_finite();
        match self {
            OperatorSpec::Diagonal { eigenvalues } => {
                if eigenvalues.is_empty() {
                    return Err(SpectreError::config("operator.params.eigenvalues", "n must be ≥ 1"));
                }
                if let Some(i) = eigenvalues.iter().position(|c| !finite(c)) {
                    return Err(SpectreError::config(
                        format!("operator.params.eigenvalues[{i}]"),
                        "non-finite value",
                    ));
                }
            }
            OperatorSpec::Dense { entries } => {
                let n = entries.len();
                if n == 0 {
                    return Err(SpectreError::config("operator.params.entries", "n must be ≥ 1"));
                }
                for (i, row) in entries.iter().enumerate() {
                    if row.len() != n {
                        return Err(SpectreError::config(
                            format!("operator.params.entries[{i}]"),
                            format!("row has {} entries, expected {n}", row.len()),
                        ));
                    }
                    if let Some(j) = row.iter().position(|c| !finite(c)) {
                        return Err(SpectreError::config(
                            format!("operator.params.entries[{i}][{j}]"),
                            "non-finite value",
                        ));
                    }
                }
            }
            OperatorSpec::Schrodinger1d { n, half_width, potential, .. } => {
                if *n == 0 {
                    return Err(SpectreError::config("operator.params.n", "n must be ≥ 1"));
                }
                if !(half_width.is_finite() && *half_width > 0.0) {
                    return Err(SpectreError::config("operator.params.half_width", "must be a positive number"));
                }
                let h = 2.0 * half_width / (*n as f64 + 1.0);
                if let Some(i) = (1..=*n).position(|i| !potential.eval(-half_width + i as f64 * h).is_finite()) {
                    return Err(SpectreError::config(
                        "operator.params.potential",
                        format!("potential not finite at grid point {i}"),
                    ));
                }
            }
            OperatorSpec::PerturbedRandom { base_spectrum, magnitude, .. } => {
                if base_spectrum.is_empty() {
                    return Err(SpectreError::config("operator.params.base_spectrum", "n must be ≥ 1"));
                }
                if let Some(i) = base_spectrum.iter().position(|c| !finite(c)) {
                    return Err(SpectreError::config(
                        format!("operator.params.base_spectrum[{i}]"),
                        "non-finite value",
                    ));
                }
                if !(magnitude.is_finite() && *magnitude >= 0.0) {
                    return Err(SpectreError::config("operator.params.magnitude", "must be ≥ 0"));
                }
            }
        }
        Ok(())
    }
}

/// Dense complex `n × n` operator, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    n: usize,
    entries: Vec<C64>,
    spec: OperatorSpec,
}

#[derive(Serialize)]
struct OperatorExport<'a> {
    schema: u32,
    n: usize,
    entries: Vec<Vec<Cx>>,
    spec: &'a OperatorSpec,
}

impl LinearOperator {
    pub fn from_entries(n: usize, entries: Vec<C64>, spec: OperatorSpec) -> Result<Self> {
        if entries.len() != n * n {
            return Err(SpectreError::Usage(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SpectreError::config("operator", "matrix has non-finite entries"));
        }
        Ok(LinearOperator { n, entries, spec })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.n + j]
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    /// `out = A x`
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        for (row, o) in self.entries.chunks_exact(self.n).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        self.apply_into(x, &mut out);
        out
    }

    /// Largest eigenvalue modulus. Falls back to the ∞-norm if the Schur
    /// iteration does not converge.
    pub fn spectral_radius(&self) -> f64 {
        match self.matrix().try_schur(f64::EPSILON, 0) {
            Some(s) => {
                let t = s.unpack().1;
                (0..self.n).map(|i| t[(i, i)].norm()).fold(0.0, f64::max)
            }
            None => self.inf_norm(),
        }
    }

    pub fn inf_norm(&self) -> f64 {
        self.entries
            .chunks_exact(self.n)
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_real_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let a = self.get(i, j);
                a.im.abs() <= tol && (a - self.get(j, i)).norm() <= tol
            })
        })
    }

    /// JSON export `{schema, n, entries, spec}`.
    pub fn to_json(&self) -> String {
        let export = OperatorExport {
            schema: 1,
            n: self.n,
            entries: self.entries.chunks_exact(self.n).map(crate::cx::to_cx).collect(),
            spec: &self.spec,
        };
        serde_json::to_string_pretty(&export).expect("operator export is always serializable")
    }

    /// Raw bytes of the entries (little-endian re/im pairs).
    pub fn entry_bytes(&self) -> Vec<u8> {
        self.entries
            .iter()
            .flat_map(|z| z.re.to_le_bytes().into_iter().chain(z.im.to_le_bytes()))
            .collect()
    }
}

pub fn build_operator(spec: &OperatorSpec) -> Result<LinearOperator> {
    spec.validate()?;
    let zero = C64::new(0.0, 0.0);
    let n = spec.dim();
    let entries = match spec {
        OperatorSpec::Diagonal { eigenvalues } => {
            let mut a = vec![zero; n * n];
            for (i, z) in eigenvalues.iter().enumerate() {
                a[i * n + i] = (*z).into();
            }
            a
        }
        OperatorSpec::Dense { entries } => entries.iter().flatten().map(|&c| c.into()).collect(),
        OperatorSpec::Schrodinger1d { n, half_width, potential, boundary: Boundary::Dirichlet } => {
            let n = *n;
            let h = 2.0 * half_width / (n as f64 + 1.0);
            let inv_h2 = 1.0 / (h * h);
            let mut a = vec![zero; n * n];
            for i in 0..n {
                let x = -half_width + (i as f64 + 1.0) * h;
                a[i * n + i] = C64::new(2.0 * inv_h2 + potential.eval(x), 0.0);
                if i + 1 < n {
                    a[i * n + i + 1] = C64::new(-inv_h2, 0.0);
                    a[(i + 1) * n + i] = C64::new(-inv_h2, 0.0);
                }
            }
            a
        }
        OperatorSpec::PerturbedRandom { base_spectrum, magnitude, seed } => {
            planted_matrix(base_spectrum, *magnitude, *seed)?
        }
    };
    LinearOperator::from_entries(n, entries, spec.clone())
}

fn planted_matrix(spectrum: &[Cx], magnitude: f64, seed: u64) -> Result<Vec<C64>> {
    let n = spectrum.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = magnitude / (n as f64).sqrt();
    let s = DMatrix::<C64>::from_fn(n, n, |i, j| {
        let g = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id, 0.0) + g * scale
    });
    let s_inv = s.clone().lu().try_inverse().ok_or_else(|| {
        SpectreError::config("operator.params.magnitude", "perturbation made the eigenbasis singular")
    })?;
    let d = DMatrix::<C64>::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        spectrum.iter().map(|&c| C64::from(c)),
    ));
    let a = &s * d * s_inv;
    // row-major
    Ok((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)]).collect())
}
