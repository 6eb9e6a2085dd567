//! Truncated Taylor series ("jets") for exact high-order derivatives of
//! closed-form expressions.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order carried.
pub const ORDER: usize = 12;

/// Coefficients `c[k] = f^(k)(x0) / k!` of a function around a fixed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; ORDER + 1],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; ORDER + 1];
        c[0] = v;
        Self { c }
    }

    /// The independent variable expanded around `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut j = Self::constant(x0);
        j.c[1] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= ORDER, "jet carries derivatives up to order {ORDER}");
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k] * fact
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in &mut self.c {
            *v *= s;
        }
        self
    }

    pub fn offset(mut self, s: f64) -> Self {
        self.c[0] += s;
        self
    }

    pub fn exp(&self) -> Self {
        // f' = f g'  =>  k f_k = sum_{j=1..k} j g_j f_{k-j}
        let mut r = [0.0; ORDER + 1];
        r[0] = self.c[0].exp();
        for k in 1..=ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * r[k - j];
            }
            r[k] = s / k as f64;
        }
        Self { c: r }
    }

    /// `self^p` for a real exponent; the constant term must be positive.
    pub fn powf(&self, p: f64) -> Self {
        // g f' = p f g'  =>  g_0 k f_k = sum_{j=1..k} (p j - (k - j)) g_j f_{k-j}
        let mut r = [0.0; ORDER + 1];
        let g0 = self.c[0];
        r[0] = g0.powf(p);
        for k in 1..=ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += (p * j as f64 - (k - j) as f64) * self.c[j] * r[k - j];
            }
            r[k] = s / (k as f64 * g0);
        }
        Self { c: r }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut r = Self::constant(1.0);
        for _ in 0..n {
            r = r * *self;
        }
        r
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut r = [0.0; ORDER + 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().take(ORDER + 1 - i).enumerate() {
                r[i + j] += a * b;
            }
        }
        Jet { c: r }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut r = [0.0; ORDER + 1];
        for k in 0..=ORDER {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * r[k - j];
            }
            r[k] = s / o.c[0];
        }
        Jet { c: r }
    }
}
