use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Real;

/// Small dense row-major matrix; PCANet patches, filters and stage
/// responses all share the `2λ x λ` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Patch<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Length { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn scaled(&self, a: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * a).collect() }
    }
}

/// One `2λ x λ` patch per pixel, in row-major pixel order: the `λ x λ`
/// neighborhood in the first pooled image stacked above the same
/// neighborhood in the second.
#[derive(Debug, Clone)]
pub struct PatchSet<T> {
    lambda: usize,
    patches: Vec<Patch<T>>,
}

impl<T: Real> PatchSet<T> {
    #[inline]
    pub fn lambda(&self) -> usize {
        self.lambda
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    #[inline]
    pub fn get(&self, pixel: usize) -> &Patch<T> {
        &self.patches[pixel]
    }

    pub fn patches(&self) -> &[Patch<T>] {
        &self.patches
    }
}

pub fn extract_patches<T: Real>(i1p: &Raster<T>, i2p: &Raster<T>, lambda: usize) -> Result<PatchSet<T>> {
    if !i1p.same_shape(i2p) {
        return Err(Error::param("pooled images differ in size"));
    }
    if lambda == 0 || lambda % 2 == 0 {
        return Err(Error::param(format!("patch size must be odd, got {lambda}")));
    }
    if lambda > i1p.width().min(i1p.height()) {
        return Err(Error::param(format!("patch size {lambda} exceeds image")));
    }
    let half = (lambda / 2) as isize;
    let mut patches = Vec::with_capacity(i1p.len());
    for r in 0..i1p.height() as isize {
        for c in 0..i1p.width() as isize {
            let mut data = Vec::with_capacity(2 * lambda * lambda);
            for src in [i1p, i2p] {
                for dr in -half..=half {
                    for dc in -half..=half {
                        data.push(src.get_clamped(r + dr, c + dc));
                    }
                }
            }
            patches.push(Patch { rows: 2 * lambda, cols: lambda, data });
        }
    }
    Ok(PatchSet { lambda, patches })
}
