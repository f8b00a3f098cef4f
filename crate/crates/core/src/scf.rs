//! Dense self-consistent field reference solutions.

use faer::Mat;

use crate::matfun::dense::{dense_eigh, spectral_diagonal, spectral_function};
use crate::matfun::fermi;
use crate::mirror::Problem;
use crate::rng::gaussian_vector;
use crate::{Error, Result};

/// Converged (or best) dense SCF iterate.
#[derive(Clone, Debug)]
pub struct ScfResult {
    pub x_star: Mat<f64>,
    pub rho_star: Vec<f64>,
    /// `F_β(X⋆) = Tr[C X⋆] + ½ρ⋆ᵀVρ⋆ + S_FD(X⋆)/β`.
    pub free_energy: f64,
    pub hartree_energy: f64,
    pub electrons: f64,
    pub iterations: usize,
    /// `‖ρ(f_β(C + diag(Vρ) - μI)) - ρ‖_∞` at the returned density.
    pub residual: f64,
    /// Eigenpairs of `H⋆ = C + diag(Vρ_in) - μI` with `X⋆ = f_β(H⋆)`.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<f64>,
}

impl ScfResult {
    /// `X⋆^{1/2}`.
    pub fn sqrt_x_star(&self, beta: f64) -> Mat<f64> {
        spectral_function(&self.eigenvalues, &self.eigenvectors, |x| fermi::sqrt_fermi(x, beta))
    }

    /// Optimal value of `F_β(X) - μ Tr[X]`.
    pub fn grand_potential(&self, mu: f64) -> f64 {
        self.free_energy - mu * self.electrons
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScfConfig {
    /// Mixing weight `θ` on the potential.
    pub mixing: f64,
    /// Tolerance on `‖ρ_{k+1} - ρ_k‖_∞`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            mixing: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

struct Dense {
    core: Mat<f64>,
}

impl Dense {
    fn hamiltonian(&self, potential: &[f64], mu: f64) -> Mat<f64> {
        let mut h = self.core.clone();
        for (i, w) in potential.iter().enumerate() {
            h[(i, i)] += w - mu;
        }
        h
    }
}

/// Simple mixing on the potential, `W_{k+1} = (1-θ)W_k + θ·Vρ(f_β(C + W_k - μI))`,
/// from `W₀ = 0`.
pub fn dense_scf(problem: &Problem, cfg: &ScfConfig) -> Result<ScfResult> {
    if !(cfg.mixing > 0.0 && cfg.mixing <= 1.0) {
        return Err(Error::InvalidParameter(format!("mixing {} must lie in (0, 1]", cfg.mixing)));
    }
    let beta = problem.beta;
    let dense = Dense {
        core: problem.core_hamiltonian().to_dense(),
    };
    let occupation = |x: f64| fermi::fermi(x, beta);
    let mut potential = vec![0.0; problem.len()];
    let mut previous: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let converged = loop {
        if iterations >= cfg.max_iter {
            break false;
        }
        iterations += 1;
        let (values, vectors) = dense_eigh(&dense.hamiltonian(&potential, problem.mu))?;
        let rho = spectral_diagonal(&values, &vectors, occupation);
        let output = problem.interaction.apply(&rho)?;
        if output == potential {
            break true;
        }
        let change = previous
            .as_ref()
            .map(|p| p.iter().zip(&rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        for (w, o) in potential.iter_mut().zip(&output) {
            *w = (1.0 - cfg.mixing) * *w + cfg.mixing * o;
        }
        previous = Some(rho);
        if change.is_some_and(|c| c <= cfg.tol) {
            break true;
        }
    };

    // Rebuild X⋆ from the self-consistent potential of the last density and
    // measure how far it is from being a fixed point.
    let rho_in = match previous {
        Some(rho) => rho,
        None => {
            let (values, vectors) = dense_eigh(&dense.hamiltonian(&potential, problem.mu))?;
            spectral_diagonal(&values, &vectors, occupation)
        }
    };
    let w_in = problem.interaction.apply(&rho_in)?;
    let h_star = dense.hamiltonian(&w_in, problem.mu);
    let (eigenvalues, eigenvectors) = dense_eigh(&h_star)?;
    let x_star = spectral_function(&eigenvalues, &eigenvectors, occupation);
    let rho_star: Vec<f64> = (0..problem.len()).map(|i| x_star[(i, i)]).collect();
    let residual = rho_star.iter().zip(&rho_in).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let single_particle: f64 = (0..problem.len())
        .flat_map(|i| (0..problem.len()).map(move |j| (i, j)))
        .map(|(i, j)| dense.core[(i, j)] * x_star[(i, j)])
        .sum();
    let hartree_energy = problem.hartree_energy(&rho_star)?;
    let entropy: f64 = eigenvalues.iter().map(|&x| fermi::entropy_density(x, beta)).sum();
    let result = ScfResult {
        electrons: rho_star.iter().sum(),
        free_energy: single_particle + hartree_energy + entropy / beta,
        hartree_energy,
        x_star,
        rho_star,
        iterations,
        residual,
        eigenvalues,
        eigenvectors,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::NotConverged(Box::new(result)))
    }
}

/// Running gold-standard density `Σ_{s≤t} Σ_j (X⋆^{1/2} z_{s,j})² / (N_g t)`,
/// replaying the Gaussian vectors of a mirror descent run.
#[derive(Clone, Debug)]
pub struct GoldStandard {
    sqrt_x: Mat<f64>,
    sum: Vec<f64>,
    count: usize,
}

impl GoldStandard {
    pub fn new(sqrt_x: Mat<f64>) -> Self {
        let n = sqrt_x.nrows();
        Self {
            sqrt_x,
            sum: vec![0.0; n],
            count: 0,
        }
    }

    /// Square root of a symmetric positive semidefinite `X`.
    pub fn from_density_matrix(x: &Mat<f64>) -> Result<Self> {
        let (values, vectors) = dense_eigh(x)?;
        Ok(Self::new(spectral_function(&values, &vectors, |p| p.max(0.0).sqrt())))
    }

    pub fn from_scf(result: &ScfResult, beta: f64) -> Self {
        Self::new(result.sqrt_x_star(beta))
    }

    /// Adds the `n_samples` vectors of iteration `iteration`.
    pub fn push_iteration(&mut self, seed: u64, iteration: u64, n_samples: usize) {
        let n = self.sum.len();
        let zs: Vec<Vec<f64>> = (0..n_samples)
            .map(|j| gaussian_vector(seed, iteration, j as u64, n))
            .collect();
        let z = Mat::from_fn(n, n_samples, |i, j| zs[j][i]);
        let y = &self.sqrt_x * &z;
        for j in 0..n_samples {
            for (i, s) in self.sum.iter_mut().enumerate() {
                *s += y[(i, j)].powi(2);
            }
        }
        self.count += n_samples;
    }

    pub fn density(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::NoSamplesYet);
        }
        Ok(self.sum.iter().map(|s| s / self.count as f64).collect())
    }
}

/// Gold-standard density after `t` iterations of `n_samples` vectors each.
pub fn gold_standard_density(x_star: &Mat<f64>, seed: u64, n_samples: usize, t: usize) -> Result<Vec<f64>> {
    let mut gold = GoldStandard::from_density_matrix(x_star)?;
    for s in 0..t {
        gold.push_iteration(seed, s as u64, n_samples);
    }
    gold.density()
}

/// `Tr[f_β(H)]` for a dense symmetric `H`.
pub fn dense_electron_count(h: &Mat<f64>, beta: f64) -> Result<f64> {
    let (values, _) = dense_eigh(h)?;
    Ok(values.iter().map(|&x| fermi::fermi(x, beta)).sum())
}
