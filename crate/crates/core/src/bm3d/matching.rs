use crate::image::Image;

/// Search settings for one block-matching pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchParams {
    pub block_size: usize,
    pub search_radius: usize,
    /// Maximum per-pixel mean squared difference for a candidate to join.
    pub threshold: f64,
    /// Largest group size; groups are cut to a power of two no larger.
    pub max_group: usize,
}

/// Stack of matched blocks, reference first, ascending by distance.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGroup {
    pub block_size: usize,
    pub coords: Vec<(usize, usize)>,
    pub distances: Vec<f64>,
}

impl BlockGroup {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Copies the grouped blocks out of `img` back to back.
    pub fn stack(&self, img: &Image) -> Vec<f64> {
        let n = self.block_size;
        let mut out = Vec::with_capacity(self.len() * n * n);
        for &(r, c) in &self.coords {
            for dr in 0..n {
                out.extend_from_slice(&img.row(r + dr)[c..c + n]);
            }
        }
        out
    }
}

/// Largest power of two not exceeding `n` (`n ≥ 1`).
pub fn floor_pow2(n: usize) -> usize {
    debug_assert!(n >= 1);
    1 << (usize::BITS - 1 - n.leading_zeros())
}

/// Mean squared difference between two blocks.
pub fn block_distance(img: &Image, a: (usize, usize), b: (usize, usize), n: usize) -> f64 {
    let mut sum = 0.0;
    for dr in 0..n {
        let ra = &img.row(a.0 + dr)[a.1..a.1 + n];
        let rb = &img.row(b.0 + dr)[b.1..b.1 + n];
        for (x, y) in ra.iter().zip(rb) {
            sum += (x - y) * (x - y);
        }
    }
    sum / (n * n) as f64
}

/// Collects blocks similar to the one at `reference` from the step-1 grid of
/// the surrounding search window.
///
/// Candidates are kept when their distance is at most `threshold`, sorted by
/// distance with row-major coordinate tie-breaks (the reference always leads),
/// and truncated to the largest power of two `≤ min(count, max_group)`.
pub fn block_match(img: &Image, reference: (usize, usize), params: &MatchParams) -> BlockGroup {
    let n = params.block_size;
    let (w, h) = img.dims();
    assert!(reference.0 + n <= h && reference.1 + n <= w, "reference block outside image");
    let r0 = reference.0.saturating_sub(params.search_radius);
    let r1 = (reference.0 + params.search_radius).min(h - n);
    let c0 = reference.1.saturating_sub(params.search_radius);
    let c1 = (reference.1 + params.search_radius).min(w - n);
    // partial sums only grow, so a candidate can bail out once clearly past
    // the threshold; the final decision uses the exact mean
    let limit = params.threshold * (n * n) as f64 * (1.0 + 1e-9);

    let mut found: Vec<(f64, usize, usize)> = Vec::new();
    for r in r0..=r1 {
        for c in c0..=c1 {
            if (r, c) == reference {
                continue;
            }
            let mut sum = 0.0;
            let mut rejected = false;
            for dr in 0..n {
                let ra = &img.row(reference.0 + dr)[reference.1..reference.1 + n];
                let rb = &img.row(r + dr)[c..c + n];
                for (x, y) in ra.iter().zip(rb) {
                    sum += (x - y) * (x - y);
                }
                if sum > limit {
                    rejected = true;
                    break;
                }
            }
            let d = sum / (n * n) as f64;
            if !rejected && d <= params.threshold {
                found.push((d, r, c));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let keep = floor_pow2((found.len() + 1).min(params.max_group.max(1)));
    let mut coords = Vec::with_capacity(keep);
    let mut distances = Vec::with_capacity(keep);
    coords.push(reference);
    distances.push(0.0);
    for &(d, r, c) in found.iter().take(keep - 1) {
        coords.push((r, c));
        distances.push(d);
    }
    BlockGroup {
        block_size: n,
        coords,
        distances,
    }
}
