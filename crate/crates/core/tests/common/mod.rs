//! Independent reference sums used by the integration and acceptance tests.
//!
//! Nothing here calls the library's summation code; coefficients come from
//! tables of log-Pochhammer values built by plain accumulation.

#![allow(dead_code)]

/// Log-magnitude and sign of `(a)_k` for `k = 0..=n`.
pub fn lpoch_table(a: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n + 1);
    let (mut ln, mut sign) = (0.0f64, 1.0f64);
    out.push((ln, sign));
    for k in 0..n {
        let f = a + k as f64;
        if f == 0.0 {
            sign = 0.0;
        } else {
            ln += f.abs().ln();
            if f < 0.0 {
                sign = -sign;
            }
        }
        out.push((ln, sign));
    }
    out
}

/// Plain product `(a)_n`.
pub fn poch(a: f64, n: u64) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (a + j as f64))
}

/// `x(x-1)...(x-k+1)`.
pub fn falling(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (x - j as f64))
}

/// Kahan-compensated accumulator.
#[derive(Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Direct double sum of a KdF series, or of its `(dx, dy)` partial derivative,
/// over all `r + s ≤ n`, differentiating term by term.
pub struct BruteKdf {
    pub upper_joint: Vec<f64>,
    pub upper_x: Vec<f64>,
    pub upper_y: Vec<f64>,
    pub lower_joint: Vec<f64>,
    pub lower_x: Vec<f64>,
    pub lower_y: Vec<f64>,
}

impl BruteKdf {
    pub fn eval(&self, x: f64, y: f64, dx: u32, dy: u32, n: usize) -> f64 {
        let tab = |v: &[f64]| v.iter().map(|&a| lpoch_table(a, n)).collect::<Vec<_>>();
        let (uj, ux, uy) = (tab(&self.upper_joint), tab(&self.upper_x), tab(&self.upper_y));
        let (lj, lx, ly) = (tab(&self.lower_joint), tab(&self.lower_x), tab(&self.lower_y));
        let fact = lpoch_table(1.0, n);
        let mut acc = Kahan::default();
        for r in 0..=n {
            for s in 0..=(n - r) {
                let (fr, fs) = (falling(r as f64, dx), falling(s as f64, dy));
                if fr == 0.0 || fs == 0.0 {
                    continue;
                }
                let (mut ln, mut sign) = (0.0, fr * fs);
                let mut take = |t: &[Vec<(f64, f64)>], k: usize, up: bool| {
                    for row in t {
                        let (l, sg) = row[k];
                        ln += if up { l } else { -l };
                        sign *= sg;
                    }
                };
                take(&uj, r + s, true);
                take(&ux, r, true);
                take(&uy, s, true);
                take(&lj, r + s, false);
                take(&lx, r, false);
                take(&ly, s, false);
                if sign == 0.0 {
                    continue;
                }
                ln -= fact[r].0 + fact[s].0;
                let px = r as i32 - dx as i32;
                let py = s as i32 - dy as i32;
                let mut term = sign * ln.exp();
                term *= x.powi(px) * y.powi(py);
                acc.add(term);
            }
        }
        acc.value()
    }
}

/// Gauss `₂F₁(a, b; c; x)` by its own term recurrence.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> f64 {
    pfq(&[a, b], &[c], x)
}

/// One-variable `pFq` by term recurrence.
pub fn pfq(upper: &[f64], lower: &[f64], x: f64) -> f64 {
    let mut acc = Kahan::default();
    let mut term = 1.0;
    for k in 0..100_000 {
        acc.add(term);
        let kf = k as f64;
        let num: f64 = upper.iter().map(|a| a + kf).product();
        let den: f64 = lower.iter().map(|b| b + kf).product::<f64>() * (kf + 1.0);
        term *= num / den * x;
        if term == 0.0 || (k > 10 && term.abs() < 1e-19 * acc.value().abs()) {
            break;
        }
    }
    acc.value()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}
