use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Binary foreground grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlobMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

/// Axis-aligned pixel rectangle; `(x, y)` is the top-left corner and may lie
/// outside the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x: i64,
    pub y: i64,
    pub w: usize,
    pub h: usize,
}

impl BoundingBox {
    /// # Panics
    /// If `w` or `h` is zero.
    pub fn new(x: i64, y: i64, w: usize, h: usize) -> Self {
        assert!(w >= 1 && h >= 1, "bounding box must be at least 1x1");
        Self { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn right(&self) -> i64 {
        self.x + self.w as i64
    }

    pub fn bottom(&self) -> i64 {
        self.y + self.h as i64
    }

    /// Area of the intersection with `other`, in pixels.
    pub fn intersection_area(&self, other: &BoundingBox) -> usize {
        let w = (self.right().min(other.right()) - self.x.max(other.x)).max(0);
        let h = (self.bottom().min(other.bottom()) - self.y.max(other.y)).max(0);
        (w * h) as usize
    }

    /// Intersection rectangle as half-open `(x0, y0, x1, y1)`, if non-empty.
    pub fn intersection(&self, other: &BoundingBox) -> Option<(i64, i64, i64, i64)> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then_some((x0, y0, x1, y1))
    }
}

impl BlobMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::shape("mask dimensions must be positive"));
        }
        if bits.len() != width * height {
            return Err(Error::shape(format!(
                "mask {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Pixelwise OR.
    pub fn union(&self, other: &BlobMask) -> Result<BlobMask> {
        if self.dims() != other.dims() {
            return Err(Error::shape("mask dimensions differ"));
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        BlobMask::new(self.width, self.height, bits)
    }

    /// Euclidean dilation: a pixel is set when some foreground pixel lies within `radius`.
    pub fn dilated(&self, radius: f64) -> BlobMask {
        let r = radius.floor() as i64;
        let r2 = radius * radius;
        let mut out = vec![false; self.bits.len()];
        for y in 0..self.height as i64 {
            for x in 0..self.width as i64 {
                if !self.get(x as usize, y as usize) {
                    continue;
                }
                for dy in -r..=r {
                    for dx in -r..=r {
                        if (dx * dx + dy * dy) as f64 > r2 {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                            out[ny as usize * self.width + nx as usize] = true;
                        }
                    }
                }
            }
        }
        BlobMask {
            width: self.width,
            height: self.height,
            bits: out,
        }
    }

    /// Intensity view with foreground at 255, for PGM output.
    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }
}

/// Zeroes every 4-connected foreground component smaller than `min_area` pixels.
pub fn clean_mask(mask: &BlobMask, min_area: usize) -> BlobMask {
    let (w, h) = mask.dims();
    let mut out = mask.clone();
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    let mut component = Vec::new();
    for start in 0..w * h {
        if seen[start] || !mask.bits[start] {
            continue;
        }
        component.clear();
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            component.push(i);
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if !seen[j] && mask.bits[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if component.len() < min_area {
            for &i in &component {
                out.bits[i] = false;
            }
        }
    }
    out
}

/// Fraction of `bbox` covered by foreground. Pixels outside the image count as
/// background, and the denominator is always the full box area.
pub fn overlap_ratio(mask: &BlobMask, bbox: &BoundingBox) -> f64 {
    let mut count = 0usize;
    for y in bbox.y.max(0)..bbox.bottom().min(mask.height as i64) {
        for x in bbox.x.max(0)..bbox.right().min(mask.width as i64) {
            if mask.get(x as usize, y as usize) {
                count += 1;
            }
        }
    }
    count as f64 / bbox.area() as f64
}

/// Summed-area table over a mask for O(1) foreground counts in rectangles.
#[derive(Debug, Clone)]
pub struct MaskIntegral {
    width: usize,
    height: usize,
    // (width + 1) x (height + 1), row-major, zero first row and column.
    sums: Vec<u32>,
}

impl MaskIntegral {
    pub fn new(mask: &BlobMask) -> Self {
        let (w, h) = mask.dims();
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += mask.get(x, y) as u32;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self {
            width: w,
            height: h,
            sums,
        }
    }

    /// Foreground pixels in the half-open rectangle `[x0, x1) × [y0, y1)`,
    /// clipped to the image.
    pub fn count(&self, x0: i64, y0: i64, x1: i64, y1: i64) -> u32 {
        let cx0 = x0.clamp(0, self.width as i64) as usize;
        let cx1 = x1.clamp(0, self.width as i64) as usize;
        let cy0 = y0.clamp(0, self.height as i64) as usize;
        let cy1 = y1.clamp(0, self.height as i64) as usize;
        if cx1 <= cx0 || cy1 <= cy0 {
            return 0;
        }
        let s = self.width + 1;
        self.sums[cy1 * s + cx1] + self.sums[cy0 * s + cx0]
            - self.sums[cy0 * s + cx1]
            - self.sums[cy1 * s + cx0]
    }

    pub fn count_box(&self, bbox: &BoundingBox) -> u32 {
        self.count(bbox.x, bbox.y, bbox.right(), bbox.bottom())
    }

    /// Same value as [`overlap_ratio`], computed from the table.
    pub fn overlap_ratio(&self, bbox: &BoundingBox) -> f64 {
        self.count_box(bbox) as f64 / bbox.area() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_from_rows(rows: &[&str]) -> BlobMask {
        let h = rows.len();
        let w = rows[0].len();
        BlobMask::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    /// Independent oracle: recursive flood fill labelling.
    fn component_sizes(mask: &BlobMask) -> Vec<usize> {
        fn fill(mask: &BlobMask, seen: &mut [bool], x: i64, y: i64) -> usize {
            if !mask.get_signed(x, y) || seen[y as usize * mask.width() + x as usize] {
                return 0;
            }
            seen[y as usize * mask.width() + x as usize] = true;
            1 + fill(mask, seen, x + 1, y)
                + fill(mask, seen, x - 1, y)
                + fill(mask, seen, x, y + 1)
                + fill(mask, seen, x, y - 1)
        }
        let mut seen = vec![false; mask.width() * mask.height()];
        let mut sizes = Vec::new();
        for y in 0..mask.height() as i64 {
            for x in 0..mask.width() as i64 {
                let n = fill(mask, &mut seen, x, y);
                if n > 0 {
                    sizes.push(n);
                }
            }
        }
        sizes
    }

    #[test]
    fn small_component_is_removed() {
        let mask = mask_from_rows(&["....", ".##.", ".#..", "...."]);
        assert!(clean_mask(&mask, 4).is_empty());
    }

    #[test]
    fn large_component_survives() {
        let mask = BlobMask::from_fn(20, 20, |x, y| (5..15).contains(&x) && (5..15).contains(&y));
        assert_eq!(mask.count(), 100);
        assert_eq!(clean_mask(&mask, 4), mask);
    }

    #[test]
    fn only_the_large_component_remains() {
        // A 2-pixel component and a 50-pixel component.
        let mask = BlobMask::from_fn(20, 12, |x, y| {
            (x <= 1 && y == 0) || ((8..18).contains(&x) && (4..9).contains(&y))
        });
        let mut sizes = component_sizes(&mask);
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 50]);
        let cleaned = clean_mask(&mask, 10);
        assert_eq!(component_sizes(&cleaned), vec![50]);
        assert!(!cleaned.get(0, 0));
        assert!(cleaned.get(8, 4));
    }

    #[test]
    fn diagonal_pixels_are_not_connected() {
        let mask = mask_from_rows(&["#.", ".#"]);
        assert_eq!(clean_mask(&mask, 2).count(), 0);
    }

    #[test]
    fn overlap_examples() {
        let ones = BlobMask::filled(16, 16, true);
        assert_eq!(overlap_ratio(&ones, &BoundingBox::new(2, 3, 5, 5)), 1.0);
        let zeros = BlobMask::filled(16, 16, false);
        assert_eq!(overlap_ratio(&zeros, &BoundingBox::new(2, 3, 5, 5)), 0.0);
        // Left half of a 4x4 box is foreground: 8 of 16 pixels.
        let half = BlobMask::from_fn(16, 16, |x, _| x < 6);
        let bbox = BoundingBox::new(4, 4, 4, 4);
        let oracle = (4..8)
            .flat_map(|y| (4..8).map(move |x| (x, y)))
            .filter(|&(x, y)| half.get(x, y))
            .count();
        assert_eq!(oracle, 8);
        assert_eq!(overlap_ratio(&half, &bbox), 0.5);
    }

    #[test]
    fn out_of_bounds_counts_as_background() {
        let ones = BlobMask::filled(8, 8, true);
        assert_eq!(overlap_ratio(&ones, &BoundingBox::new(-2, 0, 4, 4)), 0.5);
        assert_eq!(overlap_ratio(&ones, &BoundingBox::new(100, 100, 4, 4)), 0.0);
        assert_eq!(overlap_ratio(&ones, &BoundingBox::new(-10, -10, 4, 4)), 0.0);
    }

    #[test]
    fn dilation_grows_by_radius() {
        let mut mask = BlobMask::filled(21, 21, false);
        mask.set(10, 10, true);
        let d = mask.dilated(3.0);
        assert!(d.get(13, 10) && d.get(10, 7));
        assert!(!d.get(14, 10) && !d.get(13, 13));
    }

    proptest! {
        #[test]
        fn integral_matches_direct_count(
            bits in proptest::collection::vec(any::<bool>(), 12 * 9),
            x in -4i64..14, y in -4i64..11, w in 1usize..8, h in 1usize..8,
        ) {
            let mask = BlobMask::new(12, 9, bits).unwrap();
            let bbox = BoundingBox::new(x, y, w, h);
            let integral = MaskIntegral::new(&mask);
            prop_assert_eq!(integral.overlap_ratio(&bbox), overlap_ratio(&mask, &bbox));
        }

        #[test]
        fn overlap_is_monotone_in_foreground(
            bits in proptest::collection::vec(any::<bool>(), 10 * 10),
            extra in proptest::collection::vec(any::<bool>(), 10 * 10),
            x in -3i64..10, y in -3i64..10, w in 1usize..7, h in 1usize..7,
        ) {
            let small = BlobMask::new(10, 10, bits).unwrap();
            let grown = small.union(&BlobMask::new(10, 10, extra).unwrap()).unwrap();
            let bbox = BoundingBox::new(x, y, w, h);
            let r0 = overlap_ratio(&small, &bbox);
            let r1 = overlap_ratio(&grown, &bbox);
            prop_assert!((0.0..=1.0).contains(&r0));
            prop_assert!(r1 >= r0);
        }
    }
}
