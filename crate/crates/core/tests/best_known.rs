//! Grid-search oracle for the best-known objective values of the 2-D problems.
//!
//! Objectives and constraints are written out again here so the oracle does
//! not share code with the problem registry. A coarse grid over the box finds
//! the best feasible cell, then repeated zooming grids refine it.

use std::f64::consts::PI;

use chtbench::problem;

struct Oracle2 {
    lower: [f64; 2],
    upper: [f64; 2],
    f: fn(f64, f64) -> f64,
    feasible: fn(f64, f64) -> bool,
}

impl Oracle2 {
    fn scan(&self, lo: [f64; 2], hi: [f64; 2], n: usize) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for i in 0..=n {
            let a = lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64;
            for j in 0..=n {
                let b = lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64;
                if !(self.feasible)(a, b) {
                    continue;
                }
                let v = (self.f)(a, b);
                if best.map_or(true, |(_, _, bv)| v < bv) {
                    best = Some((a, b, v));
                }
            }
        }
        best
    }

    fn minimize(&self, coarse: usize) -> f64 {
        let (mut a, mut b, mut v) = self.scan(self.lower, self.upper, coarse).expect("feasible cell");
        let mut half = [
            2.0 * (self.upper[0] - self.lower[0]) / coarse as f64,
            2.0 * (self.upper[1] - self.lower[1]) / coarse as f64,
        ];
        while half[0].max(half[1]) > 1e-12 {
            let lo = [
                (a - half[0]).max(self.lower[0]),
                (b - half[1]).max(self.lower[1]),
            ];
            let hi = [
                (a + half[0]).min(self.upper[0]),
                (b + half[1]).min(self.upper[1]),
            ];
            // slide the window while it keeps improving, shrink once it stalls
            match self.scan(lo, hi, 64) {
                Some((na, nb, nv)) if nv < v => (a, b, v) = (na, nb, nv),
                _ => half = [half[0] / 2.0, half[1] / 2.0],
            }
        }
        v
    }
}

fn g24_oracle() -> Oracle2 {
    Oracle2 {
        lower: [0.0, 0.0],
        upper: [3.0, 4.0],
        f: |a, b| -a - b,
        feasible: |a, b| {
            let g1 = -2.0 * a.powi(4) + 8.0 * a.powi(3) - 8.0 * a * a + b - 2.0;
            let g2 = -4.0 * a.powi(4) + 32.0 * a.powi(3) - 88.0 * a * a + 96.0 * a + b - 36.0;
            g1 <= 0.0 && g2 <= 0.0
        },
    }
}

fn g06_oracle() -> Oracle2 {
    Oracle2 {
        lower: [13.0, 0.0],
        upper: [100.0, 100.0],
        f: |a, b| (a - 10.0).powi(3) + (b - 20.0).powi(3),
        feasible: |a, b| {
            -(a - 5.0).powi(2) - (b - 5.0).powi(2) + 100.0 <= 0.0
                && (a - 6.0).powi(2) + (b - 5.0).powi(2) - 82.81 <= 0.0
        },
    }
}

fn g08_oracle() -> Oracle2 {
    Oracle2 {
        lower: [1e-6, 0.0],
        upper: [10.0, 10.0],
        f: |a, b| -((2.0 * PI * a).sin().powi(3) * (2.0 * PI * b).sin()) / (a.powi(3) * (a + b)),
        feasible: |a, b| a * a - b + 1.0 <= 0.0 && 1.0 - a + (b - 4.0).powi(2) <= 0.0,
    }
}

fn manifest_best(name: &str) -> f64 {
    problem::find(name).unwrap().best_known_f().unwrap()
}

#[test]
fn g24_best_known_matches_grid_oracle() {
    let v = g24_oracle().minimize(1500);
    println!("g24 oracle: {v:.12}");
    assert!((v - manifest_best("g24")).abs() < 1e-8, "oracle {v}");
}

#[test]
fn g06_best_known_matches_grid_oracle() {
    let v = g06_oracle().minimize(3000);
    println!("g06 oracle: {v:.12}");
    assert!((v - manifest_best("g06")).abs() < 1e-6, "oracle {v}");
}

#[test]
fn g08_best_known_matches_grid_oracle() {
    let v = g08_oracle().minimize(1500);
    println!("g08 oracle: {v:.12}");
    assert!((v - manifest_best("g08")).abs() < 1e-8, "oracle {v}");
}

#[test]
fn g11_best_known_by_substitution() {
    // On the curve x2 = x1^2 the objective is u^2 - u + 1 with u = x1^2 in [0, 1].
    let v = (0..=100_000)
        .map(|i| {
            let u = i as f64 / 100_000.0;
            u * u - u + 1.0
        })
        .fold(f64::INFINITY, f64::min);
    assert!((v - manifest_best("g11")).abs() < 1e-9);
}

#[test]
fn ring_best_known_is_minus_sqrt_dim() {
    for d in [2usize, 5, 10] {
        let want = -(d as f64).sqrt();
        assert!((manifest_best(&format!("ring{d}")) - want).abs() < 1e-15);
        // the Lagrange point is feasible and attains it
        let x = vec![-1.0 / (d as f64).sqrt(); d];
        let e = problem::ring(d).evaluate(&x).unwrap();
        assert!(e.viol <= 1e-15 && (e.f - want).abs() < 1e-12);
    }
}
