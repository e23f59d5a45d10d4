//! Non-iterative upsampling baselines.

use crate::imagecore::{HiResImage, Image, SensorImage};

/// Pixel enlargement: every sensor value is copied to its 2x2 group.
pub fn pixel_enlargement(sensor: &SensorImage) -> HiResImage {
    let (w, h) = sensor.fine_dims();
    let img = Image::from_fn(w, h, |x, y| sensor.get(x / 2, y / 2));
    HiResImage::new(img).expect("doubled dimensions are even")
}

/// Keys cubic convolution kernel with `a = -0.5`.
fn cubic(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// Source taps and kernel weights for each output position along one axis.
fn taps(out_len: usize, in_len: usize) -> Vec<[(usize, f64); 4]> {
    (0..out_len)
        .map(|x| {
            let u = (x as f64 + 0.5) / 2.0 - 0.5;
            let base = u.floor();
            let frac = u - base;
            std::array::from_fn(|i| {
                let src = (base as isize + i as isize - 1).clamp(0, in_len as isize - 1) as usize;
                (src, cubic(frac - (i as f64 - 1.0)))
            })
        })
        .collect()
}

/// Separable bicubic upsampling by two. Sensor pixel centres sit at the
/// centres of their 2x2 groups; borders replicate the edge samples.
pub fn bicubic_x2(sensor: &SensorImage) -> HiResImage {
    let (sw, sh) = (sensor.width(), sensor.height());
    let (fw, fh) = sensor.fine_dims();
    let tx = taps(fw, sw);
    let ty = taps(fh, sh);
    let rows: Vec<Vec<f64>> = (0..sh)
        .map(|y| tx.iter().map(|t| t.iter().map(|&(s, k)| k * sensor.get(s, y)).sum()).collect())
        .collect();
    let img = Image::from_fn(fw, fh, |x, y| {
        ty[y].iter().map(|&(s, k)| k * rows[s][x]).sum::<f64>().clamp(0.0, 1.0)
    });
    HiResImage::new(img).expect("doubled dimensions are even")
}
