use alloc::vec;

use crate::error::{Error, Result};
use crate::mask::Mask;

fn check_kernel(kernel: usize) -> Result<()> {
    if kernel == 0 || kernel.is_multiple_of(2) {
        return Err(Error::InvalidParameter(alloc::format!(
            "kernel must be odd and ≥ 1, got {kernel}"
        )));
    }
    Ok(())
}

// Square structuring elements are separable: run a 1-D window along rows,
// then along columns. Out-of-image pixels are skipped, which reads them as
// false for dilation (OR) and true for erosion (AND).
fn separable(mask: &Mask, radius: usize, dilation: bool) -> Mask {
    let (w, h) = mask.dims();
    let src = mask.bits();
    let mut tmp = vec![false; w * h];
    for row in 0..h {
        for col in 0..w {
            let lo = col.saturating_sub(radius);
            let hi = (col + radius).min(w - 1);
            let window = &src[row * w + lo..=row * w + hi];
            tmp[row * w + col] = if dilation {
                window.iter().any(|&b| b)
            } else {
                window.iter().all(|&b| b)
            };
        }
    }
    let mut out = vec![false; w * h];
    for row in 0..h {
        let lo = row.saturating_sub(radius);
        let hi = (row + radius).min(h - 1);
        for col in 0..w {
            let mut acc = !dilation;
            for r in lo..=hi {
                let v = tmp[r * w + col];
                if dilation {
                    acc |= v;
                } else {
                    acc &= v;
                }
            }
            out[row * w + col] = acc;
        }
    }
    Mask::from_bits(w, h, out).expect("dimensions preserved")
}

/// Dilation by a `kernel × kernel` square.
pub fn dilate(mask: &Mask, kernel: usize) -> Result<Mask> {
    check_kernel(kernel)?;
    Ok(separable(mask, kernel / 2, true))
}

/// Erosion by a `kernel × kernel` square; the outside of the image counts as set.
pub fn erode(mask: &Mask, kernel: usize) -> Result<Mask> {
    check_kernel(kernel)?;
    Ok(separable(mask, kernel / 2, false))
}

/// Closing (dilation then erosion) by a `kernel × kernel` square.
///
/// With the border conventions of [`dilate`] and [`erode`] the pair forms an
/// adjunction on subsets of the image, so the closing is extensive and
/// idempotent.
pub fn morph_close(mask: &Mask, kernel: usize) -> Result<Mask> {
    erode(&dilate(mask, kernel)?, kernel)
}
