//! Certified positive zeros of `J_α`.
//!
//! Zeros are found in increasing order by scanning for sign changes with a
//! step well below the minimal zero spacing, then refined by a bracketed
//! Newton/bisection hybrid started from McMahon's estimate
//! `(k + α/2 − 1/4) π` when it falls inside the bracket. A zero is accepted
//! only together with a bracket `[a, b]`, `b − a ≤ 2 tol`, across which the
//! evaluated `J_α` changes sign.

use super::bessel::{check_order, j_derivative_unchecked, j_scaled, j_unchecked, MAX_ARGUMENT};
use super::BesselParams;
use crate::csvfmt::fmt17;
use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

const SCAN_STEP: f64 = 0.25;

/// Heuristic tripwire on consecutive zero spacing; not a theorem for every order.
pub const SPACING_GUARD: (f64, f64) = (0.5 * PI, 2.0 * PI);

/// First `len()` positive zeros of `J_α` with sign-change certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTable {
    alpha: f64,
    zeros: Vec<f64>,
    brackets: Vec<(f64, f64)>,
    tol: f64,
}

/// Computes the first `count` zeros of `J_α` to absolute accuracy `tol`.
pub fn compute_zeros(alpha: f64, count: usize, tol: f64) -> Result<ZeroTable> {
    ZeroTable::compute(alpha, count, tol)
}

impl ZeroTable {
    pub fn compute(alpha: f64, count: usize, tol: f64) -> Result<Self> {
        check_order(alpha)?;
        if count == 0 {
            return Err(domain("count", 0.0, "at least one zero must be requested"));
        }
        if !(tol > 0.0) {
            return Err(domain("tol", tol, "tolerance must be positive"));
        }
        let mut finder = ZeroFinder::new(alpha, tol);
        let mut table = ZeroTable {
            alpha,
            zeros: Vec::with_capacity(count),
            brackets: Vec::with_capacity(count),
            tol,
        };
        for _ in 0..count {
            let (z, br) = finder.next_zero()?;
            table.zeros.push(z);
            table.brackets.push(br);
        }
        Ok(table)
    }

    /// Appends zeros until the table holds `count` entries.
    pub fn extend_to(&mut self, count: usize) -> Result<()> {
        if count <= self.zeros.len() {
            return Ok(());
        }
        let mut finder = ZeroFinder::new(self.alpha, self.tol);
        if let (Some(&last), Some(&(_, hi))) = (self.zeros.last(), self.brackets.last()) {
            finder.resume_after(last, hi, self.zeros.len());
        }
        while self.zeros.len() < count {
            let (z, br) = finder.next_zero()?;
            self.zeros.push(z);
            self.brackets.push(br);
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn brackets(&self) -> &[(f64, f64)] {
        &self.brackets
    }

    /// The `i`-th zero, 1-based.
    pub fn zero(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.zeros[i - 1])
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.zeros.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.zeros.len(),
            });
        }
        Ok(())
    }

    /// Re-evaluates every certificate: ordering, containment, width and sign change.
    pub fn certify(&self) -> Result<()> {
        for (k, (&z, &(a, b))) in self.zeros.iter().zip(&self.brackets).enumerate() {
            let fail = |reason: String| Error::Bracket {
                index: k + 1,
                alpha: self.alpha,
                reason,
            };
            if !(a <= z && z <= b) {
                return Err(fail(format!("zero {z} outside bracket [{a}, {b}]")));
            }
            if b - a > 2.0 * self.tol * (1.0 + 1e-12) {
                return Err(fail(format!("bracket width {} exceeds 2 tol", b - a)));
            }
            let (fa, fb) = (j_unchecked(self.alpha, a), j_unchecked(self.alpha, b));
            if fa * fb > 0.0 {
                return Err(fail(format!("no sign change: J({a}) = {fa}, J({b}) = {fb}")));
            }
            if k > 0 && z <= self.zeros[k - 1] {
                return Err(fail("zeros are not strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// `h_i(x) = x^{-α} J_α(j_i x)` on `[0, 1]`; `h_i(1) = 0` exactly.
    pub fn eigenfunction(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(domain("x", x, "eigenfunctions live on [0, 1]"));
        }
        if x == 1.0 {
            return Ok(0.0);
        }
        let j = self.zeros[i - 1];
        Ok(eigen_value(self.alpha, j, x))
    }

    /// `J_{α+1}(j_i)² / 2 = ∫₀¹ J_α(j_i x)² x dx`.
    pub fn norm_sq(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let jp = j_unchecked(self.alpha + 1.0, self.zeros[i - 1]);
        Ok(0.5 * jp * jp)
    }

    /// CSV with header `k,j_k,bracket_lo,bracket_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,j_k,bracket_lo,bracket_hi\n");
        for (k, (&z, &(a, b))) in self.zeros.iter().zip(&self.brackets).enumerate() {
            out.push_str(&format!("{},{},{},{}\n", k + 1, fmt17(z), fmt17(a), fmt17(b)));
        }
        out
    }

    /// Parses the format written by [`ZeroTable::to_csv`]. The tolerance is
    /// recovered as the largest bracket half-width.
    pub fn from_csv(alpha: f64, text: &str) -> Result<Self> {
        check_order(alpha)?;
        let mut zeros = Vec::new();
        let mut brackets = Vec::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == "k,j_k,bracket_lo,bracket_hi" => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "expected header `k,j_k,bracket_lo,bracket_hi`".into(),
                })
            }
        }
        for (n, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse_err = |message: String| Error::Parse {
                line: n + 1,
                message,
            };
            if fields.len() != 4 {
                return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
            }
            let k: usize = fields[0]
                .parse()
                .map_err(|e| parse_err(format!("bad index: {e}")))?;
            if k != zeros.len() + 1 {
                return Err(parse_err(format!("index {k} out of sequence")));
            }
            let mut nums = [0.0; 3];
            for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
                *slot = f
                    .parse()
                    .map_err(|e| parse_err(format!("bad number `{f}`: {e}")))?;
            }
            zeros.push(nums[0]);
            brackets.push((nums[1], nums[2]));
        }
        let tol = brackets
            .iter()
            .zip(&zeros)
            .map(|(&(a, b), &z): (&(f64, f64), &f64)| (z - a).max(b - z).max(0.5 * (b - a)))
            .fold(0.0_f64, f64::max);
        let table = ZeroTable {
            alpha,
            zeros,
            brackets,
            tol: if tol > 0.0 { tol } else { f64::MIN_POSITIVE },
        };
        for (k, (&z, &(a, b))) in table.zeros.iter().zip(&table.brackets).enumerate() {
            if !(a <= z && z <= b) || (k > 0 && z <= table.zeros[k - 1]) {
                return Err(Error::Parse {
                    line: k + 2,
                    message: "zero outside its bracket or out of order".into(),
                });
            }
        }
        Ok(table)
    }
}

/// `h(x) = x^{-α} J_α(j x)` through the entire scaled function, so `x = 0` is regular.
pub(crate) fn eigen_value(alpha: f64, j: f64, x: f64) -> f64 {
    (0.5 * j).powf(alpha) * j_scaled(alpha, j * x)
}

/// `h_i(x)` for the `i`-th zero (1-based) of `table`.
pub fn eigenfunction_h(i: usize, x: f64, params: &BesselParams, table: &ZeroTable) -> Result<f64> {
    if params.alpha() != table.alpha() {
        return Err(Error::OrderMismatch {
            table: table.alpha(),
            params: params.alpha(),
        });
    }
    table.eigenfunction(i, x)
}

/// `J_{α+1}(j_i)² / 2`.
pub fn eigenfunction_norm_sq(i: usize, table: &ZeroTable) -> Result<f64> {
    table.norm_sq(i)
}

struct ZeroFinder {
    alpha: f64,
    tol: f64,
    cursor: f64,
    cursor_value: f64,
    found: usize,
    last: Option<f64>,
}

impl ZeroFinder {
    fn new(alpha: f64, tol: f64) -> Self {
        // j_{1,α} > sqrt(α(α+2)); J_α is positive on (0, j_{1,α})
        let start = (alpha * (alpha + 2.0)).sqrt().max(1e-3);
        ZeroFinder {
            alpha,
            tol,
            cursor: start,
            cursor_value: j_unchecked(alpha, start),
            found: 0,
            last: None,
        }
    }

    fn resume_after(&mut self, last: f64, bracket_hi: f64, found: usize) {
        self.cursor = bracket_hi;
        self.cursor_value = j_unchecked(self.alpha, bracket_hi);
        self.found = found;
        self.last = Some(last);
    }

    fn fail(&self, reason: String) -> Error {
        Error::Bracket {
            index: self.found + 1,
            alpha: self.alpha,
            reason,
        }
    }

    fn next_zero(&mut self) -> Result<(f64, (f64, f64))> {
        let alpha = self.alpha;
        let mut lo = self.cursor;
        let mut flo = self.cursor_value;
        let limit = self.cursor + 4.0 * PI;
        let (mut hi, mut fhi);
        loop {
            hi = lo + SCAN_STEP;
            if hi > limit || hi > MAX_ARGUMENT {
                return Err(self.fail(format!("no sign change found in [{}, {limit}]", self.cursor)));
            }
            fhi = j_unchecked(alpha, hi);
            if flo == 0.0 || flo * fhi < 0.0 || fhi == 0.0 {
                break;
            }
            lo = hi;
            flo = fhi;
        }
        let k = (self.found + 1) as f64;
        let mcmahon = (k + 0.5 * alpha - 0.25) * PI;
        let (zero, bracket) = self.refine(lo, flo, hi, fhi, mcmahon)?;

        if let Some(prev) = self.last {
            let gap = zero - prev;
            if !(gap > SPACING_GUARD.0 && gap < SPACING_GUARD.1) {
                return Err(self.fail(format!("spacing guard tripped: gap {gap} after {prev}")));
            }
        }
        self.found += 1;
        self.last = Some(zero);
        self.cursor = bracket.1;
        self.cursor_value = j_unchecked(alpha, bracket.1);
        if self.cursor_value == 0.0 {
            self.cursor += SCAN_STEP * 1e-3;
            self.cursor_value = j_unchecked(alpha, self.cursor);
        }
        Ok((zero, bracket))
    }

    fn refine(
        &self,
        mut lo: f64,
        mut flo: f64,
        mut hi: f64,
        fhi: f64,
        guess: f64,
    ) -> Result<(f64, (f64, f64))> {
        let alpha = self.alpha;
        let tol = self.tol;
        if flo == 0.0 {
            return Ok((lo, (lo, lo)));
        }
        if fhi == 0.0 {
            return Ok((hi, (hi, hi)));
        }
        let mut x = if guess > lo && guess < hi {
            guess
        } else {
            0.5 * (lo + hi)
        };
        let mut newton_root = None;
        for _ in 0..200 {
            let fx = j_unchecked(alpha, x);
            if fx == 0.0 {
                return Ok((x, (x, x)));
            }
            if fx.signum() == flo.signum() {
                lo = x;
                flo = fx;
            } else {
                hi = x;
            }
            let dfx = j_derivative_unchecked(alpha, x).unwrap_or(f64::NAN);
            let candidate = x - fx / dfx;
            let step = (candidate - x).abs();
            if candidate > lo && candidate < hi && step.is_finite() {
                if step <= 4.0 * f64::EPSILON * x {
                    newton_root = Some(candidate);
                    break;
                }
                x = candidate;
            } else {
                x = 0.5 * (lo + hi);
            }
            if hi - lo <= 4.0 * f64::EPSILON * x {
                break;
            }
        }

        if let Some(r) = newton_root {
            for w in [0.5 * tol, tol] {
                let (a, b) = (r - w, r + w);
                let (fa, fb) = (j_unchecked(alpha, a), j_unchecked(alpha, b));
                if fa * fb < 0.0 {
                    return Ok((r, (a, b)));
                }
            }
        }

        // plain bisection keeps the certificate by construction
        while hi - lo > 2.0 * tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Err(self.fail(format!(
                    "bracket [{lo}, {hi}] cannot be narrowed to width {}",
                    2.0 * tol
                )));
            }
            let fm = j_unchecked(alpha, mid);
            if fm == 0.0 {
                return Ok((mid, (mid, mid)));
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi), (lo, hi)))
    }
}
