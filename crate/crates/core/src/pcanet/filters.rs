use super::eigen::symmetric_eigen;
use super::patches::Patch;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Learned PCA filters with their covariance eigenvalues.
#[derive(Debug, Clone)]
pub struct FilterBank<T> {
    pub filters: Vec<Patch<T>>,
    pub eigenvalues: Vec<T>,
}

/// `sum_s p̄_s p̄_sᵀ` over patches vectorized row-major, each with its own
/// mean removed.
pub fn patch_scatter<T: Real>(patches: &[Patch<T>]) -> Vec<T> {
    let dim = patches[0].data().len();
    let mut scatter = vec![T::zero(); dim * dim];
    let mut centered = vec![T::zero(); dim];
    for p in patches {
        let mean = p.data().iter().copied().sum::<T>() / T::from_usize_lossy(dim);
        for (c, &v) in centered.iter_mut().zip(p.data()) {
            *c = v - mean;
        }
        for i in 0..dim {
            let ci = centered[i];
            if ci == T::zero() {
                continue;
            }
            let row = &mut scatter[i * dim..(i + 1) * dim];
            // upper triangle only; mirrored below
            for j in i..dim {
                row[j] += ci * centered[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            scatter[i * dim + j] = scatter[j * dim + i];
        }
    }
    scatter
}

/// Top-`count` eigenvectors of the patch scatter matrix, reshaped to the
/// patch shape. Each filter is sign-normalized so its largest-magnitude
/// entry is positive.
pub fn learn_filter_bank<T: Real>(patches: &[Patch<T>], count: usize) -> Result<FilterBank<T>> {
    let first = patches.first().ok_or_else(|| Error::param("no patches to learn filters from"))?;
    let (rows, cols) = (first.rows(), first.cols());
    let dim = rows * cols;
    if patches.iter().any(|p| !p.same_shape(first)) {
        return Err(Error::param("patches differ in shape"));
    }
    if count == 0 || count > dim {
        return Err(Error::param(format!("filter count {count} must be in 1..={dim}")));
    }
    if patches.len() < count {
        return Err(Error::param(format!("{} patches cannot yield {count} filters", patches.len())));
    }
    let scatter = patch_scatter(patches);
    let (values, vectors) = symmetric_eigen(&scatter, dim);
    let mut filters = Vec::with_capacity(count);
    for k in 0..count {
        let mut v: Vec<T> = (0..dim).map(|i| vectors[i * dim + k]).collect();
        let pivot = v.iter().copied().fold(T::zero(), |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        filters.push(Patch::new(rows, cols, v)?);
    }
    Ok(FilterBank { filters, eigenvalues: values[..count].to_vec() })
}

pub fn learn_pca_filters<T: Real>(patches: &[Patch<T>], count: usize) -> Result<Vec<Patch<T>>> {
    Ok(learn_filter_bank(patches, count)?.filters)
}
