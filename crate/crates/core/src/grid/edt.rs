//! Exact squared Euclidean distance transform.
//!
//! Two separable passes of the lower-envelope-of-parabolas transform
//! (Felzenszwalb & Huttenlocher): columns first, then rows. All distances are
//! integers in cell units, so the result is exact.

const INF: i64 = i64::MAX / 4;

/// Squared distance (in cells) from every cell to the nearest `site` cell.
///
/// Returns `None` when there are no sites.
pub fn squared_edt(width: usize, height: usize, sites: &[bool]) -> Option<Vec<i64>> {
    assert_eq!(sites.len(), width * height);
    if !sites.iter().any(|&s| s) {
        return None;
    }

    let n = width.max(height);
    let mut f = vec![0i64; n];
    let mut d = vec![0i64; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];

    let mut out: Vec<i64> = sites.iter().map(|&s| if s { 0 } else { INF }).collect();

    for x in 0..width {
        for y in 0..height {
            f[y] = out[y * width + x];
        }
        transform_1d(&f[..height], &mut d[..height], &mut v, &mut z);
        for y in 0..height {
            out[y * width + x] = d[y];
        }
    }

    for y in 0..height {
        let row = &mut out[y * width..(y + 1) * width];
        f[..width].copy_from_slice(row);
        transform_1d(&f[..width], &mut d[..width], &mut v, &mut z);
        row.copy_from_slice(&d[..width]);
    }

    Some(out)
}

/// `d[q] = min_p (q - p)^2 + f[p]`, skipping infinite samples.
///
/// Intersections are ratios of small integers; correctly rounded division
/// preserves their ordering (and their ties), so comparisons stay exact.
fn transform_1d(f: &[i64], d: &mut [i64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k: usize = 0;
    let mut have_any = false;

    for q in 0..n {
        if f[q] >= INF {
            continue;
        }
        if !have_any {
            have_any = true;
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            continue;
        }
        let fq = f[q] + (q * q) as i64;
        loop {
            let p = v[k];
            let num = fq - (f[p] + (p * p) as i64);
            let den = 2 * (q - p) as i64;
            let s = num as f64 / den as f64;
            // z[0] is -inf, so this never pops past the first parabola.
            if s <= z[k] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }

    if !have_any {
        d.fill(INF);
        return;
    }

    let mut k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dx = q as i64 - p as i64;
        *dq = dx * dx + f[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(width: usize, height: usize, sites: &[bool]) -> Vec<i64> {
        let pts: Vec<(i64, i64)> = (0..width * height)
            .filter(|&i| sites[i])
            .map(|i| ((i % width) as i64, (i / width) as i64))
            .collect();
        (0..width * height)
            .map(|i| {
                let (x, y) = ((i % width) as i64, (i / width) as i64);
                pts.iter()
                    .map(|&(px, py)| (px - x).pow(2) + (py - y).pow(2))
                    .min()
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn no_sites_is_none() {
        assert!(squared_edt(3, 2, &[false; 6]).is_none());
    }

    #[test]
    fn single_site() {
        let mut sites = vec![false; 9];
        sites[4] = true;
        assert_eq!(squared_edt(3, 3, &sites).unwrap(), vec![2, 1, 2, 1, 0, 1, 2, 1, 2]);
    }

    #[test]
    fn degenerate_shapes() {
        assert_eq!(squared_edt(1, 1, &[true]).unwrap(), vec![0]);
        assert_eq!(
            squared_edt(5, 1, &[false, false, false, false, true]).unwrap(),
            vec![16, 9, 4, 1, 0]
        );
        assert_eq!(
            squared_edt(1, 4, &[true, false, false, true]).unwrap(),
            vec![0, 1, 1, 0]
        );
    }

    #[test]
    fn matches_brute_force_on_random_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let w = rng.random_range(1..40);
            let h = rng.random_range(1..40);
            let density = rng.random_range(0.0..0.3);
            let mut sites: Vec<bool> = (0..w * h).map(|_| rng.random_bool(density)).collect();
            if !sites.iter().any(|&s| s) {
                sites[rng.random_range(0..w * h)] = true;
            }
            assert_eq!(squared_edt(w, h, &sites).unwrap(), brute(w, h, &sites), "{w}x{h}");
        }
    }
}
