//! Small floating-point helpers shared by the evaluators.

/// Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `∫₀ᵗ e^{rate·σ} dσ`, stable for small and large `|rate·t|`.
pub fn exp_integral(rate: f64, t: f64) -> f64 {
    let x = rate * t;
    if x.abs() < 1e-12 {
        // t·(1 + x/2 + x²/6)
        t * (1.0 + x / 2.0 + x * x / 6.0)
    } else {
        x.exp_m1() / rate
    }
}

/// `ln n!` by direct summation; exact enough for the orders used here.
pub fn ln_factorial(n: usize) -> f64 {
    compensated_sum((2..=n).map(|k| (k as f64).ln()))
}

pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        end
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Shortest text that parses back to the same `f64`, in exponent form for very small
/// or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
