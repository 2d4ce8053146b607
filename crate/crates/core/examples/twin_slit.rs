//! Two point apertures in free space. The fringe spacing on a distant screen
//! approaches lambda L / d.

use std::f64::consts::PI;

use qsource::interference::{count_maxima, twin_slit_pattern, SlitConfig};

fn main() -> qsource::Result<()> {
    let (m, k) = (1.0, 2.0 * PI);
    let (d, l) = (10.0, 500.0);
    let cfg = SlitConfig::new([0.0, 0.0, -40.0], [[-0.5 * d, 0.0, 0.0], [0.5 * d, 0.0, 0.0]], m);
    let xs: Vec<f64> = (0..=2400).map(|i| -120.0 + 0.1 * i as f64).collect();
    let pts: Vec<[f64; 3]> = xs.iter().map(|&x| [x, 0.0, l]).collect();
    let p = twin_slit_pattern(&cfg, 0.5 * k * k / m, &pts)?;
    let peaks: Vec<f64> = (1..p.len() - 1)
        .filter(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1])
        .map(|i| xs[i])
        .collect();
    println!("{} maxima on the screen, at {:?}", count_maxima(&p), peaks);
    let gaps: Vec<String> = peaks.windows(2).map(|w| format!("{:.2}", w[1] - w[0])).collect();
    println!("spacings {} (lambda L / d = {:.2})", gaps.join(" "), 2.0 * PI / k * l / d);
    Ok(())
}
