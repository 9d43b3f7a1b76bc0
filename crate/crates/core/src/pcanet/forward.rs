use super::patches::Patch;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported bit depth of the hashing stage.
pub const MAX_L2: usize = 31;

/// Same-size 2-D correlation of `input` with every filter, zero padded,
/// with each filter anchored at `(rows/2, cols/2)`.
pub fn stage_forward<T: Real>(input: &Patch<T>, filters: &[Patch<T>]) -> Result<Vec<Patch<T>>> {
    filters.iter().map(|f| correlate_same(input, f)).collect()
}

pub(crate) fn correlate_same<T: Real>(input: &Patch<T>, filter: &Patch<T>) -> Result<Patch<T>> {
    let (h, w) = (input.rows(), input.cols());
    let (fh, fw) = (filter.rows(), filter.cols());
    if fh > 2 * h || fw > 2 * w {
        return Err(Error::param("filter larger than input"));
    }
    let (ar, ac) = ((fh / 2) as isize, (fw / 2) as isize);
    let mut out = Patch::zeros(h, w);
    let src = input.data();
    let ker = filter.data();
    let dst = out.data_mut();
    for r in 0..h as isize {
        // filter rows whose source row lands inside the input
        let i_lo = (ar - r).max(0) as usize;
        let i_hi = ((h as isize - r + ar).min(fh as isize)).max(0) as usize;
        for c in 0..w as isize {
            let j_lo = (ac - c).max(0) as usize;
            let j_hi = ((w as isize - c + ac).min(fw as isize)).max(0) as usize;
            let mut acc = T::zero();
            for i in i_lo..i_hi {
                let sr = (r + i as isize - ar) as usize;
                let srow = &src[sr * w..(sr + 1) * w];
                let krow = &ker[i * fw..(i + 1) * fw];
                for j in j_lo..j_hi {
                    acc += krow[j] * srow[(c + j as isize - ac) as usize];
                }
            }
            dst[r as usize * w + c as usize] = acc;
        }
    }
    Ok(out)
}

/// Packs the strict-positivity pattern of `L2` maps into integers:
/// `sum_l 2^(l-1) H(Z_l)` with `H(0) = 0`.
pub fn binarize_encode<T: Real>(maps: &[Patch<T>]) -> Result<Vec<u32>> {
    let first = maps.first().ok_or_else(|| Error::param("no maps to encode"))?;
    if maps.len() > MAX_L2 {
        return Err(Error::param(format!("at most {MAX_L2} maps can be encoded, got {}", maps.len())));
    }
    if maps.iter().any(|m| !m.same_shape(first)) {
        return Err(Error::param("maps differ in shape"));
    }
    let mut codes = vec![0u32; first.data().len()];
    for (bit, map) in maps.iter().enumerate() {
        for (code, &v) in codes.iter_mut().zip(map.data()) {
            if v > T::zero() {
                *code |= 1 << bit;
            }
        }
    }
    Ok(codes)
}

/// Fixed-length histogram feature: one `2^L2`-bin block per integer map.
#[derive(Debug, Clone, PartialEq)]
pub struct PcanetFeature<T> {
    pub values: Vec<T>,
}

pub fn histogram_feature<T: Real>(int_maps: &[Vec<u32>], l2: usize) -> Result<PcanetFeature<T>> {
    if l2 > MAX_L2 {
        return Err(Error::param(format!("L2 = {l2} exceeds {MAX_L2}")));
    }
    let bins = 1usize << l2;
    let mut counts = vec![0u32; bins * int_maps.len()];
    for (block, map) in int_maps.iter().enumerate() {
        let hist = &mut counts[block * bins..(block + 1) * bins];
        for &code in map {
            let slot = hist.get_mut(code as usize).ok_or_else(|| {
                Error::param(format!("code {code} outside [0, {}]; hashing invariant broken", bins - 1))
            })?;
            *slot += 1;
        }
    }
    Ok(PcanetFeature { values: counts.into_iter().map(|c| T::lit(c as f64)).collect() })
}
