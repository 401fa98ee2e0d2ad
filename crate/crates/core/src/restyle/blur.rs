/// Separable box blur of a `w x h` plane with window `2 * radius + 1`.
/// Samples outside the plane repeat the nearest edge value.
pub fn box_blur(plane: &[f64], w: usize, h: usize, radius: usize) -> Vec<f64> {
    assert_eq!(plane.len(), w * h);
    let mut tmp = vec![0.0; plane.len()];
    for y in 0..h {
        blur_line(&plane[y * w..(y + 1) * w], &mut tmp[y * w..(y + 1) * w], radius);
    }
    let mut out = vec![0.0; plane.len()];
    let mut col = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = tmp[y * w + x];
        }
        blur_line(&col, &mut col_out, radius);
        for y in 0..h {
            out[y * w + x] = col_out[y];
        }
    }
    out
}

fn blur_line(src: &[f64], dst: &mut [f64], radius: usize) {
    let n = src.len() as isize;
    let r = radius as isize;
    let at = |i: isize| src[i.clamp(0, n - 1) as usize];
    let window = (2 * r + 1) as f64;
    // direct sums keep results independent of line position
    for (i, d) in dst.iter_mut().enumerate() {
        let i = i as isize;
        let s: f64 = (i - r..=i + r).map(at).sum();
        *d = s / window;
    }
}
