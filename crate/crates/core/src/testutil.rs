//! Deterministic random generators for validation suites.
//!
//! Every generator is a pure function of its seed, built on [`SplitMix64`],
//! so the property suites and acceptance runs are reproducible bit for bit.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bounds::PartitionedHamiltonian;
use crate::gibbs::DensityMatrix;
use crate::operator::{kron_embed, HermitianOperator, SiteLayout};
use crate::rng::SplitMix64;

/// Dense Hermitian matrix with entries uniform in `[-1, 1]` (real diagonal,
/// complex off-diagonal).
pub fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    let mut g = SplitMix64::new(seed);
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        mat[(i, i)] = Complex64::new(g.next_range(-1.0, 1.0), 0.0);
        for j in (i + 1)..dim {
            let v = Complex64::new(g.next_range(-1.0, 1.0), g.next_range(-1.0, 1.0));
            mat[(i, j)] = v;
            mat[(j, i)] = v.conj();
        }
    }
    HermitianOperator::new(mat).expect("construction is Hermitian by symmetry")
}

/// Random unitary: the eigenvector matrix of a random Hermitian operator.
pub fn random_unitary(dim: usize, seed: u64) -> DMatrix<Complex64> {
    random_hermitian(dim, seed)
        .eig()
        .expect("random Hermitian matrices diagonalize")
        .eigenvectors()
        .clone()
}

/// Full-support density matrix with weights bounded away from zero, in a
/// random eigenbasis.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    let mut g = SplitMix64::new(seed);
    let mut w: Vec<f64> = (0..dim).map(|_| g.next_range(0.05, 1.0)).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    let basis = random_unitary(dim, seed.wrapping_add(0x5EED));
    DensityMatrix::from_weights_and_basis(w, basis).expect("weights form a distribution")
}

/// Random partitioned instance: a small lattice of qubit/qutrit sites split
/// into contiguous blocks, `H0` a sum of random Hermitian block terms, `U` a
/// random Hermitian coupling over the full space scaled by
/// `coupling_scale`.
///
/// Dimensions stay in `4..=64`, so spectra keep `β·spread` well inside the
/// exactly-representable range even at `β = 10`.
pub fn random_partitioned(seed: u64) -> PartitionedHamiltonian {
    let mut g = SplitMix64::new(seed);
    // Site count and local dimensions keeping the total in 4..=64.
    let n_sites = 2 + (g.next_u64() % 4) as usize; // 2..=5 sites
    let mut site_dims = Vec::with_capacity(n_sites);
    let mut total = 1usize;
    for k in 0..n_sites {
        let remaining = n_sites - k - 1;
        let max_here = (64 / (total * 2usize.pow(remaining as u32))).max(2).min(4);
        let d = 2 + (g.next_u64() as usize % (max_here - 1).max(1));
        site_dims.push(d);
        total *= d;
    }
    let n_blocks = 1 + (g.next_u64() as usize % n_sites.min(3));
    let base = n_sites / n_blocks;
    let extra = n_sites % n_blocks;
    let mut block_of_site = Vec::with_capacity(n_sites);
    for b in 0..n_blocks {
        let len = base + usize::from(b < extra);
        block_of_site.extend(std::iter::repeat(b).take(len));
    }
    let layout = SiteLayout::new(site_dims, block_of_site).expect("valid by construction");

    // H0: one random Hermitian term per block, embedded on its sites.
    let mut h0 = HermitianOperator::zeros(layout.total_dim());
    for b in 0..layout.n_blocks() {
        let sites: Vec<usize> = (0..layout.n_sites())
            .filter(|&s| layout.block_of_site(s) == b)
            .collect();
        let block_dim: usize = sites.iter().map(|&s| layout.site_dims()[s]).product();
        let term = random_hermitian(block_dim, g.next_u64());
        let embedded = kron_embed(&term, &layout, &sites).expect("dims match by construction");
        h0 = h0.add(&embedded).expect("same dim");
    }

    let coupling_scale = g.next_range(0.1, 1.0);
    let u = random_hermitian(layout.total_dim(), g.next_u64()).scaled(coupling_scale);

    PartitionedHamiltonian::new(layout, h0, u).expect("dims match by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_partitioned_dims_in_range() {
        for seed in 0..50 {
            let p = random_partitioned(seed);
            let dim = p.dim();
            assert!((4..=64).contains(&dim), "seed {seed}: dim {dim}");
        }
    }

    #[test]
    fn random_partitioned_is_deterministic() {
        let a = random_partitioned(123);
        let b = random_partitioned(123);
        assert_eq!(a.h().matrix(), b.h().matrix());
    }
}
