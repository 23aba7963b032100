//! Deterministic numerics shared by the engines and the verifiers.
//!
//! The central object is the pure-birth chain whose state is the number of
//! arrivals of one colour in the exponential embedding of the urn: from
//! tally `t` the next arrival comes at rate `t^α`. Its transient law gives the
//! exact CDF of every partial sum `Σ η_j / j^α` (a hypoexponential variable)
//! without the cancellation that plagues the partial-fraction formula.

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Hurwitz zeta `Σ_{j≥0} (a + j)^{-s}` for `s > 1`, `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1 and a > 0");
    const SHIFT: f64 = 24.0;
    let mut sum = 0.0;
    let mut x = a;
    while x < SHIFT {
        sum += x.powf(-s);
        x += 1.0;
    }
    // Euler-Maclaurin tail from x.
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // B_2k / (2k)! coefficients.
    const B: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1_209_600.0];
    let mut rising = s; // s (s+1) ... (s+2k-2)
    let mut pow = x.powf(-s - 1.0);
    for (k, b) in B.iter().enumerate() {
        tail += b * rising * pow;
        let k = k as f64;
        rising *= (s + 2.0 * k + 1.0) * (s + 2.0 * k + 2.0);
        pow /= x * x;
    }
    sum + tail
}

/// `Σ_{j>J} j^{-α}`.
pub fn power_tail(alpha: f64, last: u64) -> f64 {
    hurwitz_zeta(alpha, last as f64 + 1.0)
}

/// Pure-birth chain counting arrivals: from `i` arrivals the next comes at rate
/// `(start + i)^α`; state `cap` is absorbing ("at least `cap` arrivals").
#[derive(Clone, Debug)]
pub struct BirthChain {
    rates: Vec<f64>,
}

impl BirthChain {
    pub fn new(alpha: f64, start: u64, cap: usize) -> Self {
        assert!(start >= 1);
        let rates = (0..cap).map(|i| ((start + i as u64) as f64).powf(alpha)).collect();
        Self { rates }
    }

    pub fn cap(&self) -> usize {
        self.rates.len()
    }

    /// Law of the arrival count at time `t`: entry `i < cap` is `P(N_t = i)`,
    /// entry `cap` is `P(N_t ≥ cap)`.
    pub fn distribution(&self, t: f64) -> Vec<f64> {
        let cap = self.rates.len();
        let mut out = vec![0.0; cap + 1];
        if cap == 0 {
            out[0] = 1.0;
            return out;
        }
        if t <= 0.0 {
            out[0] = 1.0;
            return out;
        }
        let lambda = self.rates.iter().cloned().fold(0.0f64, f64::max);
        let step: Vec<f64> = self.rates.iter().map(|r| r / lambda).collect();
        let mu = lambda * t;
        let ln_mu = mu.ln();

        let mut v = vec![0.0; cap + 1];
        v[0] = 1.0;
        let mut log_w = -mu;
        let mut k: u64 = 0;
        let hard_cap = (mu + 60.0 * mu.sqrt() + 400.0 + 4.0 * cap as f64) as u64;
        loop {
            let w = log_w.exp();
            if w > 0.0 {
                for (o, x) in out.iter_mut().zip(&v) {
                    *o += w * x;
                }
            }
            if k as f64 > mu {
                // Remaining Poisson mass is at most w * (k+1)/(k+1-mu).
                let tail = w * (k as f64 + 1.0) / (k as f64 + 1.0 - mu);
                let floor = out.iter().cloned().filter(|&x| x > 1e-280).fold(f64::INFINITY, f64::min);
                if tail <= 1e-15 * floor || k >= hard_cap {
                    break;
                }
            }
            // v <- v P, processed top-down so each entry uses the old value below it.
            v[cap] += v[cap - 1] * step[cap - 1];
            for i in (1..cap).rev() {
                v[i] = v[i] * (1.0 - step[i]) + v[i - 1] * step[i - 1];
            }
            v[0] *= 1.0 - step[0];
            k += 1;
            log_w += ln_mu - (k as f64).ln();
        }
        out
    }
}

/// `P(Σ_{j=first}^{last} η_j / j^α < x)` for i.i.d. standard exponentials.
pub fn hypoexp_cdf(alpha: f64, first: u64, last: u64, x: f64) -> f64 {
    if last < first {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let cap = (last - first + 1) as usize;
    BirthChain::new(alpha, first, cap).distribution(x)[cap]
}

/// CDF of `Z^{(r)} = Σ_{j=1}^r η_j / j^α`.
pub fn partial_sum_cdf(alpha: f64, r: u64, x: f64) -> f64 {
    hypoexp_cdf(alpha, 1, r, x)
}

/// Closed-form CDF of `η₁ + η₂ / 2^α`.
pub fn two_term_cdf(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let b = 2f64.powf(alpha);
    // 1 - (b e^{-x} - e^{-b x}) / (b - 1), written with expm1.
    (-b * (-x).exp_m1() + (-b * x).exp_m1()) / (b - 1.0)
}

/// Density of `η₁ + η₂ / 2^α`.
pub fn two_term_density(alpha: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let b = 2f64.powf(alpha);
    b / (b - 1.0) * ((-t).exp() - (-b * t).exp())
}

pub fn factorial(p: u64) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

/// Bounds on `P(Z^{(p)} < x)` obtained from the volume of the simplex and the
/// extremes of the product density: `(p!)^{α-1} x^p e^{-p^α x}` and
/// `(p!)^{α-1} x^p`.
pub fn simplex_bounds(alpha: f64, p: u64, x: f64) -> (f64, f64) {
    let c = factorial(p).powf(alpha - 1.0);
    let upper = c * x.powi(p as i32);
    let lower = upper * (-(p as f64).powf(alpha) * x).exp();
    (lower, upper)
}

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Largest root of `g` on `[lo, hi]` by bisection, assuming `g(lo) < 0 < g(hi)`.
pub fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_matches_direct_sums() {
        // ζ(2) = π²/6.
        let z2 = hurwitz_zeta(2.0, 1.0);
        assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
        // Σ_{j≥10} j^-2 = π²/6 − Σ_{j<10} j^-2.
        let direct: f64 = (1..10).map(|j| 1.0 / (j * j) as f64).sum();
        let want = std::f64::consts::PI.powi(2) / 6.0 - direct;
        assert!((power_tail(2.0, 9) - want).abs() < 1e-13);
        assert!((want - 0.105166).abs() < 1e-6);
        // α = 1.5 against a long brute-force sum plus integral tail.
        let n = 2_000_000u64;
        let brute: f64 = (5..=n).map(|j| (j as f64).powf(-1.5)).sum::<f64>() + 2.0 / (n as f64 + 0.5).sqrt();
        assert!((power_tail(1.5, 4) - brute).abs() < 1e-9);
    }

    #[test]
    fn single_phase_is_exponential() {
        for &x in &[0.001, 0.3, 2.0, 9.0] {
            let f = hypoexp_cdf(2.0, 1, 1, x);
            assert!((f - (-(-x).exp_m1())).abs() < 1e-14 * f.max(1e-300) + 1e-16);
        }
    }

    #[test]
    fn two_phase_matches_closed_form() {
        for &alpha in &[1.5, 2.0, 3.0] {
            for &x in &[1e-3, 0.01, 0.1, 0.4621, 1.0, 5.0] {
                let a = partial_sum_cdf(alpha, 2, x);
                let b = two_term_cdf(alpha, x);
                assert!((a - b).abs() <= 1e-12 * b, "alpha {alpha} x {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn distribution_sums_to_one() {
        let chain = BirthChain::new(2.0, 1, 12);
        for &t in &[0.0, 0.01, 0.2, 1.5] {
            let d = chain.distribution(t);
            let total: f64 = d.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "t {t}: total {total}");
        }
    }

    #[test]
    fn wilson_degenerate_cases() {
        let (lo, hi) = wilson_interval(400, 400, Z95);
        assert!(lo > 0.99 && hi == 1.0);
        let (lo, hi) = wilson_interval(0, 400, Z95);
        assert!(lo == 0.0 && hi < 0.01);
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
    }
}
