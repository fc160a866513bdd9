//! Exponential polynomials, the building blocks `(e^{αz}−1)²/z²`, and their
//! closed-form algebra: evaluation, translation, modulation, Taylor
//! coefficients, frequency hulls and growth estimation along rays.

use crate::geometry::{hull, ConvexCompact, IndicatorSample};
use crate::{C, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Switch to the series branch of a block when `|α(z−s)| < 1/2`; the 30-term
/// tail is below 1e-16 there.
pub const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 30;
/// exp() overflows past this real part.
const EXP_LIMIT: f64 = 709.0;

fn checked_exp(w: C) -> Result<C> {
    if w.re > EXP_LIMIT {
        return Err(Error::Overflow(w.re));
    }
    Ok(w.exp())
}

/// Maclaurin coefficients of `g(w) = (e^w − 1)²/w² = Σ (2^{m+2}−2)/(m+2)! w^m`.
fn g_coeffs() -> [f64; SERIES_TERMS] {
    let mut c = [0.0; SERIES_TERMS];
    let mut pow2 = 4.0; // 2^{m+2}
    let mut fact = 2.0; // (m+2)!
    for (m, cm) in c.iter_mut().enumerate() {
        *cm = (pow2 - 2.0) / fact;
        pow2 *= 2.0;
        fact *= (m + 3) as f64;
    }
    c
}

/// `g(w)` and `g′(w)` by the truncated Maclaurin series (use for `|w| < 1/2`).
fn g_series(w: C) -> (C, C) {
    let coef = g_coeffs();
    let mut val = C::new(0.0, 0.0);
    let mut der = C::new(0.0, 0.0);
    let mut wp = C::new(1.0, 0.0);
    for m in 0..SERIES_TERMS {
        val += coef[m] * wp;
        if m + 1 < SERIES_TERMS {
            der += coef[m + 1] * ((m + 1) as f64) * wp;
        }
        wp *= w;
    }
    (val, der)
}

/// One exponential-polynomial term `P(z)·e^{αz}` with `P` stored by ascending
/// coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyTerm {
    #[serde(with = "crate::cjson::vec")]
    pub poly: Vec<C>,
    #[serde(with = "crate::cjson")]
    pub freq: C,
}

impl ExpPolyTerm {
    fn is_zero(&self) -> bool {
        self.poly.iter().all(|c| c.norm() == 0.0)
    }

    fn degree(&self) -> usize {
        self.poly
            .iter()
            .rposition(|c| c.norm() != 0.0)
            .unwrap_or(0)
    }
}

/// Finite sum of exponential-polynomial terms with pairwise distinct
/// frequencies (equal frequencies are merged on construction).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpPolyFunction {
    pub terms: Vec<ExpPolyTerm>,
}

impl ExpPolyFunction {
    pub fn new(terms: Vec<ExpPolyTerm>) -> Self {
        let mut out: Vec<ExpPolyTerm> = Vec::new();
        for t in terms {
            if t.is_zero() {
                continue;
            }
            match out.iter_mut().find(|o| (o.freq - t.freq).norm() == 0.0) {
                Some(o) => {
                    if o.poly.len() < t.poly.len() {
                        o.poly.resize(t.poly.len(), C::new(0.0, 0.0));
                    }
                    for (a, b) in o.poly.iter_mut().zip(t.poly.iter()) {
                        *a += b;
                    }
                }
                None => out.push(t),
            }
        }
        for t in &mut out {
            while t.poly.len() > 1 && t.poly.last().unwrap().norm() == 0.0 {
                t.poly.pop();
            }
        }
        out.retain(|t| !t.is_zero());
        ExpPolyFunction { terms: out }
    }
}

/// The translated, modulated building block
/// `z ↦ (e^{α(z−s)}−1)²/(z−s)² · e^{βz}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildingBlock {
    #[serde(with = "crate::cjson")]
    pub alpha: C,
    pub shift: f64,
    #[serde(rename = "beta", with = "crate::cjson")]
    pub modulation: C,
}

/// A building block with its scalar coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTerm {
    #[serde(with = "crate::cjson")]
    pub coef: C,
    #[serde(flatten)]
    pub block: BuildingBlock,
}

/// Finite linear combination of building blocks plus an exponential
/// polynomial. The working representation of every function in the lab.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FunctionExpr {
    pub blocks: Vec<BlockTerm>,
    pub exppoly: ExpPolyFunction,
}

fn poly_eval(poly: &[C], z: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for c in poly.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn poly_deriv(poly: &[C]) -> Vec<C> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * (k as f64))
        .collect()
}

/// Coefficients of `P(z+k)` by binomial re-expansion.
fn poly_shift(poly: &[C], k: C) -> Vec<C> {
    let n = poly.len();
    let mut out = vec![C::new(0.0, 0.0); n];
    for (m, &cm) in poly.iter().enumerate() {
        // c_m (z+k)^m = c_m Σ_j C(m,j) k^{m-j} z^j
        let mut binom = 1.0;
        let mut kp = C::new(1.0, 0.0); // k^{m-j} built from j=m down
        let mut row = vec![C::new(0.0, 0.0); m + 1];
        for j in (0..=m).rev() {
            row[j] = cm * binom * kp;
            if j > 0 {
                binom *= j as f64 / ((m - j + 1) as f64);
                kp *= k;
            }
        }
        for (j, v) in row.into_iter().enumerate() {
            out[j] += v;
        }
    }
    out
}

impl FunctionExpr {
    pub fn zero() -> Self {
        FunctionExpr::default()
    }

    /// The constant-coefficient exponential `c·e^{αz}`.
    pub fn exponential(c: C, alpha: C) -> Self {
        FunctionExpr {
            blocks: vec![],
            exppoly: ExpPolyFunction::new(vec![ExpPolyTerm {
                poly: vec![c],
                freq: alpha,
            }]),
        }
    }

    /// The building block `f_α(z) = (e^{αz}−1)²/z²`.
    pub fn building_block(alpha: C) -> Self {
        FunctionExpr {
            blocks: vec![BlockTerm {
                coef: C::new(1.0, 0.0),
                block: BuildingBlock {
                    alpha,
                    shift: 0.0,
                    modulation: C::new(0.0, 0.0),
                },
            }],
            exppoly: ExpPolyFunction::default(),
        }
    }

    pub fn from_exppoly(p: ExpPolyFunction) -> Self {
        FunctionExpr {
            blocks: vec![],
            exppoly: p,
        }
    }

    /// `sin(πz)` written as `(e^{iπz} − e^{−iπz})/(2i)`.
    pub fn sin_pi() -> Self {
        let half_over_i = C::new(0.0, -0.5); // 1/(2i)
        FunctionExpr::from_exppoly(ExpPolyFunction::new(vec![
            ExpPolyTerm {
                poly: vec![half_over_i],
                freq: C::new(0.0, PI),
            },
            ExpPolyTerm {
                poly: vec![-half_over_i],
                freq: C::new(0.0, -PI),
            },
        ]))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.coef.norm() == 0.0) && self.exppoly.terms.is_empty()
    }

    pub fn add(&self, other: &FunctionExpr) -> FunctionExpr {
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        blocks.retain(|b| b.coef.norm() != 0.0);
        let mut terms = self.exppoly.terms.clone();
        terms.extend_from_slice(&other.exppoly.terms);
        FunctionExpr {
            blocks,
            exppoly: ExpPolyFunction::new(terms),
        }
    }

    pub fn scale(&self, c: C) -> FunctionExpr {
        let blocks = self
            .blocks
            .iter()
            .map(|b| BlockTerm {
                coef: b.coef * c,
                block: b.block,
            })
            .collect();
        let terms = self
            .exppoly
            .terms
            .iter()
            .map(|t| ExpPolyTerm {
                poly: t.poly.iter().map(|p| p * c).collect(),
                freq: t.freq,
            })
            .collect();
        FunctionExpr {
            blocks,
            exppoly: ExpPolyFunction::new(terms),
        }
    }

    /// Value at `z`. Blocks switch to the series branch of
    /// `(e^w−1)²/w²` inside the radius [`SERIES_RADIUS`].
    pub fn evaluate(&self, z: C) -> Result<C> {
        Ok(self.eval_d1(z)?.0)
    }

    /// Value and first derivative at `z`, both closed-form.
    pub fn eval_d1(&self, z: C) -> Result<(C, C)> {
        let mut val = C::new(0.0, 0.0);
        let mut der = C::new(0.0, 0.0);
        for b in &self.blocks {
            let BuildingBlock {
                alpha,
                shift,
                modulation,
            } = b.block;
            let u = z - shift;
            let w = alpha * u;
            let (f, fp) = if w.norm() < SERIES_RADIUS {
                let (g, gp) = g_series(w);
                (alpha * alpha * g, alpha * alpha * alpha * gp)
            } else {
                let e = checked_exp(w)?;
                let em1 = e - 1.0;
                let f = em1 * em1 / (u * u);
                let fp = 2.0 * alpha * e * em1 / (u * u) - 2.0 * em1 * em1 / (u * u * u);
                (f, fp)
            };
            let m = checked_exp(modulation * z)?;
            val += b.coef * m * f;
            der += b.coef * m * (modulation * f + fp);
        }
        for t in &self.exppoly.terms {
            let e = checked_exp(t.freq * z)?;
            let p = poly_eval(&t.poly, z);
            let pp = poly_eval(&poly_deriv(&t.poly), z);
            val += p * e;
            der += (pp + t.freq * p) * e;
        }
        Ok((val, der))
    }

    /// Closed-form shift: `translate(f, k)(z) = f(z + k)` exactly.
    pub fn translate(&self, k: f64) -> FunctionExpr {
        let blocks = self
            .blocks
            .iter()
            .map(|b| BlockTerm {
                coef: b.coef * (b.block.modulation * k).exp(),
                block: BuildingBlock {
                    alpha: b.block.alpha,
                    shift: b.block.shift - k,
                    modulation: b.block.modulation,
                },
            })
            .collect();
        let kc = C::new(k, 0.0);
        let terms = self
            .exppoly
            .terms
            .iter()
            .map(|t| {
                let mult = (t.freq * kc).exp();
                let mut poly = poly_shift(&t.poly, kc);
                for c in &mut poly {
                    *c *= mult;
                }
                ExpPolyTerm { poly, freq: t.freq }
            })
            .collect();
        FunctionExpr {
            blocks,
            exppoly: ExpPolyFunction::new(terms),
        }
    }

    /// Multiply by `e^{βz}`; shifts the frequency hull by `β`.
    pub fn modulate(&self, beta: C) -> FunctionExpr {
        let blocks = self
            .blocks
            .iter()
            .map(|b| BlockTerm {
                coef: b.coef,
                block: BuildingBlock {
                    alpha: b.block.alpha,
                    shift: b.block.shift,
                    modulation: b.block.modulation + beta,
                },
            })
            .collect();
        let terms = self
            .exppoly
            .terms
            .iter()
            .map(|t| ExpPolyTerm {
                poly: t.poly.clone(),
                freq: t.freq + beta,
            })
            .collect();
        FunctionExpr {
            blocks,
            exppoly: ExpPolyFunction::new(terms),
        }
    }

    /// First `count` Maclaurin coefficients `f^{(n)}(0)/n!`.
    pub fn taylor_coefficients(&self, count: usize) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); count];
        for t in &self.exppoly.terms {
            // z^k e^{αz}: coefficient of z^n is Σ_k c_k α^{n−k}/(n−k)!
            for (k, &ck) in t.poly.iter().enumerate() {
                let mut apow = C::new(1.0, 0.0);
                let mut fact = 1.0;
                for (n, o) in out.iter_mut().enumerate().skip(k) {
                    *o += ck * apow / fact;
                    apow *= t.freq;
                    fact *= (n - k + 1) as f64;
                }
            }
        }
        for b in &self.blocks {
            let base = block_taylor(b.block.alpha, b.block.shift, count);
            // multiply by coef·e^{βz}: convolve with β^j/j!
            let beta = b.block.modulation;
            let mut bpow = vec![C::new(0.0, 0.0); count];
            let mut p = C::new(1.0, 0.0);
            let mut fact = 1.0;
            for (j, bp) in bpow.iter_mut().enumerate() {
                *bp = p / fact;
                p *= beta;
                fact *= (j + 1) as f64;
            }
            for (n, o) in out.iter_mut().enumerate() {
                let mut acc = C::new(0.0, 0.0);
                for j in 0..=n {
                    acc += bpow[j] * base[n - j];
                }
                *o += b.coef * acc;
            }
        }
        out
    }

    /// Convex hull of the frequencies occurring in the expression. Blocks
    /// contribute `β, β+α, β+2α` from the expansion
    /// `(e^{αz}−1)² = e^{2αz} − 2e^{αz} + 1`.
    pub fn frequency_hull(&self) -> Result<ConvexCompact> {
        let mut freqs: Vec<C> = Vec::new();
        for b in &self.blocks {
            if b.coef.norm() == 0.0 || b.block.alpha.norm() == 0.0 {
                continue;
            }
            let beta = b.block.modulation;
            freqs.push(beta);
            freqs.push(beta + b.block.alpha);
            freqs.push(beta + 2.0 * b.block.alpha);
        }
        for t in &self.exppoly.terms {
            if !t.is_zero() {
                freqs.push(t.freq);
            }
        }
        if freqs.is_empty() {
            return Err(Error::ZeroFunction);
        }
        hull(&freqs)
    }

    /// `max_{|z|=r} |f(z)|` by equispaced sampling plus golden-section
    /// refinement around the best sample.
    pub fn max_modulus(&self, r: f64, samples: usize) -> Result<f64> {
        assert!(samples >= 8, "need at least 8 circle samples");
        let mut best = f64::NEG_INFINITY;
        let mut best_theta = 0.0;
        for j in 0..samples {
            let theta = 2.0 * PI * j as f64 / samples as f64 - PI;
            let v = self.evaluate(C::from_polar(r, theta))?.norm();
            if v > best {
                best = v;
                best_theta = theta;
            }
        }
        let delta = 2.0 * PI / samples as f64;
        let refined = self.golden_max(r, best_theta - delta, best_theta + delta)?;
        Ok(best.max(refined))
    }

    fn golden_max(&self, r: f64, mut a: f64, mut b: f64) -> Result<f64> {
        let phi = (5_f64.sqrt() - 1.0) / 2.0;
        let eval = |t: f64| -> Result<f64> { Ok(self.evaluate(C::from_polar(r, t))?.norm()) };
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        for _ in 0..60 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = eval(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = eval(x1)?;
            }
        }
        Ok(f1.max(f2))
    }

    /// Per-window upper envelope of `log|f(re^{iΘ})|/r` over geometric
    /// windows of `[r_min, r_max]`. Returns `(r_at_max, max)` per window.
    pub fn indicator_windows(
        &self,
        theta: f64,
        r_min: f64,
        r_max: f64,
        windows: usize,
    ) -> Result<Vec<(f64, f64)>> {
        assert!(r_min > 0.0 && r_min < r_max && windows >= 4);
        let dir = C::from_polar(1.0, theta);
        let ratio = (r_max / r_min).powf(1.0 / windows as f64);
        let per_window = 128;
        let mut maxima = Vec::with_capacity(windows);
        for w in 0..windows {
            let lo = r_min * ratio.powi(w as i32);
            let hi = lo * ratio;
            let mut m = f64::NEG_INFINITY;
            let mut at = hi;
            for j in 0..per_window {
                let r = lo + (hi - lo) * j as f64 / (per_window - 1) as f64;
                let v = self.evaluate(r * dir)?.norm();
                if v > 0.0 && v.ln() / r > m {
                    m = v.ln() / r;
                    at = r;
                }
            }
            maxima.push((at, m));
        }
        Ok(maxima)
    }

    /// Indicator limsup surrogate from the windowed upper envelope.
    /// All-underflow rays report the `-inf` sentinel.
    pub fn indicator_estimate(
        &self,
        theta: f64,
        r_min: f64,
        r_max: f64,
        windows: usize,
    ) -> Result<IndicatorSample> {
        let maxima = self.indicator_windows(theta, r_min, r_max, windows)?;
        let value = envelope_limit(&maxima).0;
        Ok(IndicatorSample { theta, value })
    }

    /// Like [`indicator_estimate`](Self::indicator_estimate) but also reports
    /// whether the envelope has stabilized over the trailing windows.
    pub fn indicator_estimate_checked(
        &self,
        theta: f64,
        r_min: f64,
        r_max: f64,
        windows: usize,
    ) -> Result<(IndicatorSample, bool)> {
        let maxima = self.indicator_windows(theta, r_min, r_max, windows)?;
        let (value, stable) = envelope_limit(&maxima);
        Ok((IndicatorSample { theta, value }, stable))
    }

    /// Exponential-type surrogate: upper envelope of `log M_f(r)/r` over
    /// geometric windows up to `r_max`.
    pub fn type_estimate(&self, r_max: f64) -> Result<f64> {
        assert!(r_max >= 10.0);
        let windows = 10;
        let r_min = 1.0;
        let ratio = (r_max / r_min).powf(1.0 / windows as f64);
        let mut maxima = Vec::with_capacity(windows);
        for w in 0..windows {
            let lo = r_min * ratio.powi(w as i32);
            let hi = lo * ratio;
            let mut m = f64::NEG_INFINITY;
            let mut at = hi;
            for j in 0..16 {
                let r = lo + (hi - lo) * j as f64 / 15.0;
                let mf = self.max_modulus(r, 256)?;
                if mf > 0.0 && mf.ln() / r > m {
                    m = mf.ln() / r;
                    at = r;
                }
            }
            maxima.push((at, m));
        }
        Ok(envelope_limit(&maxima).0.max(0.0))
    }

    /// Per-term modulus envelopes `amp·|z|^deg·e^{Re(ν z)}`, used for the
    /// norm tail certificates. Block terms are enveloped by their three
    /// expansion frequencies with the `1/|z−s|²` factor bounded by 1
    /// (valid for `|z| ≥ |s| + 1`).
    pub(crate) fn envelope_terms(&self) -> Vec<EnvelopeTerm> {
        let mut out = Vec::new();
        for b in &self.blocks {
            if b.coef.norm() == 0.0 {
                continue;
            }
            let a = b.block.alpha;
            let s = b.block.shift;
            let beta = b.block.modulation;
            let c = b.coef.norm();
            // (e^{α(z−s)}−1)² = e^{−2αs}e^{2αz} − 2e^{−αs}e^{αz} + 1
            out.push(EnvelopeTerm {
                amp: c * (-2.0 * a * s).exp().norm(),
                freq: beta + 2.0 * a,
                degree: 0,
                safe_radius: s.abs() + 1.0,
            });
            out.push(EnvelopeTerm {
                amp: 2.0 * c * (-a * s).exp().norm(),
                freq: beta + a,
                degree: 0,
                safe_radius: s.abs() + 1.0,
            });
            out.push(EnvelopeTerm {
                amp: c,
                freq: beta,
                degree: 0,
                safe_radius: s.abs() + 1.0,
            });
        }
        for t in &self.exppoly.terms {
            out.push(EnvelopeTerm {
                amp: t.poly.iter().map(|c| c.norm()).sum(),
                freq: t.freq,
                degree: t.degree(),
                safe_radius: 1.0,
            });
        }
        out
    }
}

/// Extrapolated limit of a windowed envelope of `log|f|/r` samples.
///
/// Plain tail maxima undershoot by exactly `d·ln r/r` for functions with a
/// polynomial factor `r^d`, so the tail is fitted by `m(r) = h − a·ln r/r`
/// (least squares, last half of the windows) and `h` is reported whenever the
/// fit honestly improves on the raw maximum (`a ≥ 0`, small residual,
/// bounded correction). Also returns a stabilization flag.
fn envelope_limit(maxima: &[(f64, f64)]) -> (f64, bool) {
    let windows = maxima.len();
    let tail_q = &maxima[windows - (windows / 4).max(1)..];
    let plain = tail_q
        .iter()
        .map(|&(_, m)| m)
        .fold(f64::NEG_INFINITY, f64::max);
    if !plain.is_finite() {
        return (f64::NEG_INFINITY, false);
    }
    let fit: Vec<(f64, f64)> = maxima[windows / 2..]
        .iter()
        .copied()
        .filter(|&(_, m)| m.is_finite())
        .collect();
    if fit.len() < 3 {
        return (plain, false);
    }
    // least squares for m = h − a·g with g = ln r / r
    let n = fit.len() as f64;
    let (mut sg, mut sm, mut sgg, mut sgm) = (0.0, 0.0, 0.0, 0.0);
    for &(r, m) in &fit {
        let g = r.ln() / r;
        sg += g;
        sm += m;
        sgg += g * g;
        sgm += g * m;
    }
    let det = n * sgg - sg * sg;
    if det.abs() < 1e-30 {
        return (plain, false);
    }
    let a = -(n * sgm - sg * sm) / det;
    let h = (sm + a * sg) / n;
    let rms = (fit
        .iter()
        .map(|&(r, m)| {
            let e = m - (h - a * r.ln() / r);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let spread = tail_q
        .iter()
        .map(|&(_, m)| m)
        .fold(f64::INFINITY, f64::min);
    let spread = plain - spread;
    if a >= 0.0 && rms < 0.02 && h - plain < 0.3 && h >= plain - 1e-9 {
        (h, rms < 0.01 && spread < 0.1)
    } else {
        (plain, spread < 0.02)
    }
}

/// Modulus envelope `amp·|z|^degree·e^{Re(freq·z)}` valid for
/// `|z| ≥ safe_radius`.
pub(crate) struct EnvelopeTerm {
    pub amp: f64,
    pub freq: C,
    pub degree: usize,
    pub safe_radius: f64,
}

/// Maclaurin coefficients of `f_α(z − s)` at the origin.
fn block_taylor(alpha: C, shift: f64, count: usize) -> Vec<C> {
    if alpha.norm() == 0.0 {
        return vec![C::new(0.0, 0.0); count];
    }
    let s = shift;
    if s.abs() < 0.25 {
        // re-expand the Maclaurin series of f_α around the shifted origin
        let m_terms = count + 60;
        let mut a = vec![C::new(0.0, 0.0); m_terms];
        let g = g_coeffs();
        let mut apow = alpha * alpha;
        for (m, am) in a.iter_mut().enumerate() {
            if m < SERIES_TERMS + count + 30 {
                let gm = ext_g_coeff(m, &g);
                *am = gm * apow;
            }
            apow *= alpha;
        }
        let mut out = vec![C::new(0.0, 0.0); count];
        let ms = C::new(-s, 0.0);
        for (n, o) in out.iter_mut().enumerate() {
            // b_n = Σ_{m≥n} a_m C(m,n) (−s)^{m−n}
            let mut binom = 1.0;
            let mut sp = C::new(1.0, 0.0);
            let mut acc = C::new(0.0, 0.0);
            for (m, am) in a.iter().enumerate().take(m_terms).skip(n) {
                acc += am * binom * sp;
                binom *= (m + 1) as f64 / ((m + 1 - n) as f64);
                sp *= ms;
            }
            *o = acc;
        }
        out
    } else {
        // Leibniz on u^{−2}·E(u) at u0 = −s, normalized to avoid factorials:
        // b_n = Σ_k [E^{(k)}(u0)/k!] (−1)^{n−k} (n−k+1) u0^{−(n−k+2)}
        let u0 = C::new(-s, 0.0);
        let e2 = (2.0 * alpha * u0).exp();
        let e1 = (alpha * u0).exp();
        let mut ek = Vec::with_capacity(count); // E^{(k)}(u0)/k!
        let mut p2 = C::new(1.0, 0.0);
        let mut p1 = C::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..count {
            let v = if k == 0 {
                e2 - 2.0 * e1 + 1.0
            } else {
                (p2 * e2 - 2.0 * p1 * e1) / fact
            };
            ek.push(v);
            p2 *= 2.0 * alpha;
            p1 *= alpha;
            fact *= (k + 1) as f64;
        }
        let mut out = vec![C::new(0.0, 0.0); count];
        for (n, o) in out.iter_mut().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            for (k, &ekk) in ek.iter().enumerate().take(n + 1) {
                let j = n - k;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += ekk * sign * ((j + 1) as f64) * u0.powi(-(j as i32) - 2);
            }
            *o = acc;
        }
        out
    }
}

/// `g` coefficient with index possibly beyond the precomputed table.
fn ext_g_coeff(m: usize, table: &[f64; SERIES_TERMS]) -> f64 {
    if m < SERIES_TERMS {
        table[m]
    } else {
        // (2^{m+2} − 2)/(m+2)!; negligible at these indices but kept exact
        let mut fact = 1.0_f64;
        for i in 1..=(m + 2) {
            fact *= i as f64;
            if fact.is_infinite() {
                return 0.0;
            }
        }
        (2f64.powi(m as i32 + 2) - 2.0) / fact
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn block_value_at_origin() {
        // f_α(0) = α²: Taylor oracle (e^{αz}−1)² = α²z² + α³z³ + ...
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let v = f.evaluate(c(0.0, 0.0)).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn block_value_at_pi() {
        // (e^{iπ}−1)² = 4, so f_i(π) = 4/π²
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let v = f.evaluate(c(PI, 0.0)).unwrap();
        assert!((v - c(4.0 / (PI * PI), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn constant_one() {
        let f = FunctionExpr::exponential(c(1.0, 0.0), c(0.0, 0.0));
        assert!((f.evaluate(c(3.7, -2.2)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn block_branches_agree_across_switch() {
        // series vs quotient branch consistency near |w| = 1/2
        let alpha = c(0.3, 0.8);
        for t in [0.95, 0.99, 1.01, 1.05] {
            let z = c(t * SERIES_RADIUS / alpha.norm(), 0.0);
            let w = alpha * z;
            let (g, _) = g_series(w);
            let series = alpha * alpha * g;
            let e = w.exp() - 1.0;
            let quotient = e * e / (z * z);
            assert!(
                (series - quotient).norm() <= 1e-9 * quotient.norm(),
                "branch mismatch at t={t}"
            );
        }
    }

    #[test]
    fn overflow_reported() {
        let f = FunctionExpr::exponential(c(1.0, 0.0), c(10.0, 0.0));
        assert!(matches!(
            f.evaluate(c(100.0, 0.0)),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn translate_exponential() {
        // translate(e_α, k) = e^{αk}·e_α; α = iπ, k = 2 gives multiplier 1
        let f = FunctionExpr::exponential(c(1.0, 0.0), c(0.0, PI));
        let t = f.translate(2.0);
        assert_eq!(t.exppoly.terms.len(), 1);
        assert!((t.exppoly.terms[0].poly[0] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn translate_zero_is_identity() {
        let f = FunctionExpr::building_block(c(0.0, 0.5));
        let t = f.translate(0.0);
        let z = c(1.3, -0.4);
        assert!((t.evaluate(z).unwrap() - f.evaluate(z).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn translate_monomial() {
        // translate(z·e_0, 1) = (z+1)·e_0
        let f = FunctionExpr::from_exppoly(ExpPolyFunction::new(vec![ExpPolyTerm {
            poly: vec![c(0.0, 0.0), c(1.0, 0.0)],
            freq: c(0.0, 0.0),
        }]));
        let t = f.translate(1.0);
        assert_eq!(t.exppoly.terms[0].poly.len(), 2);
        assert!((t.exppoly.terms[0].poly[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((t.exppoly.terms[0].poly[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn translate_identity_random() {
        let f = FunctionExpr::building_block(c(0.0, 0.7)).add(&FunctionExpr::exponential(
            c(0.5, 0.25),
            c(0.0, -0.3),
        ));
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let k = (next() - 0.5) * 100.0;
            let z = c((next() - 0.5) * 4.0, (next() - 0.5) * 4.0);
            let lhs = f.translate(k).evaluate(z).unwrap();
            let rhs = f.evaluate(z + k).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn modulate_examples() {
        let f = FunctionExpr::exponential(c(1.0, 0.0), c(0.0, 0.0));
        let m = f.modulate(c(0.0, 1.0));
        assert!((m.exppoly.terms[0].freq - c(0.0, 1.0)).norm() < 1e-15);

        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let m = f.modulate(c(0.0, 0.0));
        assert_eq!(m, f);
    }

    #[test]
    fn modulation_hull_commutes() {
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let beta = c(0.4, -0.9);
        let lhs = f.modulate(beta).frequency_hull().unwrap();
        let rhs = f.frequency_hull().unwrap().translate(beta);
        assert_eq!(lhs.vertices.len(), rhs.vertices.len());
        for (a, b) in lhs.vertices.iter().zip(rhs.vertices.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn taylor_exponential() {
        let f = FunctionExpr::exponential(c(1.0, 0.0), c(1.0, 0.0));
        let t = f.taylor_coefficients(5);
        assert!((t[3] - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn taylor_block() {
        // f_i: [−1, −i, 7/12, ...] from (e^w−1)²/w² series with w = iz
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let t = f.taylor_coefficients(3);
        assert!((t[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((t[1] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((t[2] - c(7.0 / 12.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn taylor_monomial() {
        let f = FunctionExpr::from_exppoly(ExpPolyFunction::new(vec![ExpPolyTerm {
            poly: vec![c(0.0, 0.0), c(1.0, 0.0)],
            freq: c(0.0, 0.0),
        }]));
        let t = f.taylor_coefficients(4);
        assert_eq!(t[1], c(1.0, 0.0));
        assert_eq!(t[0], c(0.0, 0.0));
        assert_eq!(t[2], c(0.0, 0.0));
        assert_eq!(t[3], c(0.0, 0.0));
    }

    #[test]
    fn taylor_shifted_block_matches_series_branch() {
        // the two shift branches must agree where they overlap in validity
        let alpha = c(0.0, 0.6);
        for s in [0.2, 0.3, 1.5] {
            let f = FunctionExpr {
                blocks: vec![BlockTerm {
                    coef: c(1.0, 0.0),
                    block: BuildingBlock {
                        alpha,
                        shift: s,
                        modulation: c(0.0, 0.0),
                    },
                }],
                exppoly: ExpPolyFunction::default(),
            };
            let t = f.taylor_coefficients(8);
            // oracle: evaluate the Taylor polynomial near 0 and compare
            let z = c(0.05, 0.02);
            let mut acc = c(0.0, 0.0);
            let mut zp = c(1.0, 0.0);
            for coef in &t {
                acc += coef * zp;
                zp *= z;
            }
            let direct = f.evaluate(z).unwrap();
            assert!(
                (acc - direct).norm() < 1e-10 * (1.0 + direct.norm()),
                "shift {s}: {acc} vs {direct}"
            );
        }
    }

    #[test]
    fn taylor_block_nonzero_first_50() {
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        for coef in f.taylor_coefficients(50) {
            assert!(coef.norm() > 0.0);
        }
    }

    #[test]
    fn frequency_hull_examples() {
        // P·e_α → {α}
        let f = FunctionExpr::from_exppoly(ExpPolyFunction::new(vec![ExpPolyTerm {
            poly: vec![c(1.0, 0.0), c(2.0, 0.0)],
            freq: c(0.3, 0.4),
        }]));
        let h = f.frequency_hull().unwrap();
        assert_eq!(h.vertices.len(), 1);
        assert!((h.vertices[0] - c(0.3, 0.4)).norm() < 1e-15);

        // f_i block → [0, 2i]
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let h = f.frequency_hull().unwrap();
        assert_eq!(h.vertices.len(), 2);

        // e_1 + e_{−1} → [−1, 1]
        let f = FunctionExpr::exponential(c(1.0, 0.0), c(1.0, 0.0))
            .add(&FunctionExpr::exponential(c(1.0, 0.0), c(-1.0, 0.0)));
        let h = f.frequency_hull().unwrap();
        assert_eq!(h.vertices.len(), 2);
        assert_eq!(h.vertical_extent(), 0.0);

        assert!(FunctionExpr::zero().frequency_hull().is_err());
    }

    #[test]
    fn max_modulus_examples() {
        let e1 = FunctionExpr::exponential(c(1.0, 0.0), c(1.0, 0.0));
        let m = e1.max_modulus(1.0, 64).unwrap();
        assert!((m - std::f64::consts::E).abs() < 1e-9);

        let one = FunctionExpr::exponential(c(1.0, 0.0), c(0.0, 0.0));
        assert!((one.max_modulus(5.0, 64).unwrap() - 1.0).abs() < 1e-12);

        let cosh2 = FunctionExpr::exponential(c(1.0, 0.0), c(1.0, 0.0))
            .add(&FunctionExpr::exponential(c(1.0, 0.0), c(-1.0, 0.0)));
        let m = cosh2.max_modulus(2.0, 256).unwrap();
        assert!((m - 2.0 * 2f64.cosh()).abs() < 1e-8);
    }

    #[test]
    fn indicator_exponential() {
        let e1 = FunctionExpr::exponential(c(1.0, 0.0), c(1.0, 0.0));
        let s = e1.indicator_estimate(0.0, 1.0, 100.0, 8).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn indicator_block_down_ray() {
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let s = f
            .indicator_estimate(-std::f64::consts::FRAC_PI_2, 1.0, 200.0, 8)
            .unwrap();
        assert!((s.value - 2.0).abs() < 0.05, "got {}", s.value);
    }

    #[test]
    fn indicator_block_real_axis() {
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let s = f.indicator_estimate(0.0, 1.0, 200.0, 8).unwrap();
        assert!(s.value.abs() < 0.05, "got {}", s.value);
    }

    #[test]
    fn type_estimates() {
        let e1 = FunctionExpr::exponential(c(1.0, 0.0), c(1.0, 0.0));
        assert!((e1.type_estimate(100.0).unwrap() - 1.0).abs() < 1e-3);

        let f = FunctionExpr::building_block(c(0.0, 1.0));
        assert!((f.type_estimate(200.0).unwrap() - 2.0).abs() < 0.05);

        let one = FunctionExpr::exponential(c(1.0, 0.0), c(0.0, 0.0));
        assert!(one.type_estimate(100.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn json_format() {
        let f = FunctionExpr::building_block(c(0.0, 1.0));
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"blocks\""));
        assert!(s.contains("\"alpha\":[0.0,1.0]"));
        assert!(s.contains("\"beta\""));
        let back: FunctionExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
