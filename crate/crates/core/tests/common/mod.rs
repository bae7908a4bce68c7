//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use mtqo::{AnsatzSpec, Entangler, QuantumState};
use num_complex::Complex64;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn pauli_x() -> Matrix {
    vec![
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
    ]
}

pub fn pauli_y() -> Matrix {
    vec![
        vec![c(0.0, 0.0), c(0.0, -1.0)],
        vec![c(0.0, 1.0), c(0.0, 0.0)],
    ]
}

pub fn pauli_z() -> Matrix {
    vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(-1.0, 0.0)],
    ]
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

fn scale(a: &Matrix, s: Complex64) -> Matrix {
    a.iter()
        .map(|r| r.iter().map(|x| x * s).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![c(0.0, 0.0); m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let aik = a[i][k];
            for j in 0..m {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `exp(-i angle/2 P)` for a Pauli matrix `P`.
pub fn rotation(pauli: &Matrix, angle: f64) -> Matrix {
    let (s, co) = (angle / 2.0).sin_cos();
    add(&scale(&identity(2), c(co, 0.0)), &scale(pauli, c(0.0, -s)))
}

/// Embeds a single-qubit operator at `qubit` (qubit 0 is the leftmost factor).
pub fn embed(op: &Matrix, qubit: usize, n: usize) -> Matrix {
    let mut full = vec![vec![c(1.0, 0.0)]];
    for q in 0..n {
        full = if q == qubit {
            kron(&full, op)
        } else {
            kron(&full, &identity(2))
        };
    }
    full
}

/// `|0><0|_c (x) I + |1><1|_c (x) RY_t(angle)`.
pub fn controlled_ry(control: usize, target: usize, angle: f64, n: usize) -> Matrix {
    let p0 = vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0)],
    ];
    let p1 = vec![
        vec![c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
    ];
    let ry = rotation(&pauli_y(), angle);
    let mut off = vec![vec![c(1.0, 0.0)]];
    let mut on = vec![vec![c(1.0, 0.0)]];
    for q in 0..n {
        let (a, b) = if q == control {
            (p0.clone(), p1.clone())
        } else if q == target {
            (identity(2), ry.clone())
        } else {
            (identity(2), identity(2))
        };
        off = kron(&off, &a);
        on = kron(&on, &b);
    }
    add(&off, &on)
}

/// Dense unitary of the CRY-chain + ZXZ ansatz, assembled gate by gate.
pub fn ansatz_unitary(n: usize, layers: usize, entangler: Entangler, theta: &[f64]) -> Matrix {
    let mut u = identity(1 << n);
    let mut j = 0;
    let mut next = || {
        j += 1;
        theta[j - 1]
    };
    for _ in 0..layers {
        for i in 0..n {
            let angle = match entangler {
                Entangler::Fixed(a) => a,
                Entangler::Trainable => next(),
            };
            u = matmul(&controlled_ry(i, (i + 1) % n, angle, n), &u);
        }
        for q in 0..n {
            for pauli in [pauli_z(), pauli_x(), pauli_z()] {
                u = matmul(&embed(&rotation(&pauli, next()), q, n), &u);
            }
        }
    }
    u
}

pub fn matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Neumaier-compensated `<a|b>`.
pub fn compensated_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    fn sum(xs: impl Iterator<Item = f64>) -> f64 {
        let (mut s, mut comp) = (0.0f64, 0.0f64);
        for x in xs {
            let t = s + x;
            comp += if s.abs() >= x.abs() {
                (s - t) + x
            } else {
                (x - t) + s
            };
            s = t;
        }
        s + comp
    }
    let re = sum(a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im));
    let im = sum(a.iter().zip(b).map(|(x, y)| x.re * y.im - x.im * y.re));
    c(re, im)
}

/// `1 - |<x| U(theta) |0>|^2` through the dense unitary.
pub fn dense_cost(spec: &AnsatzSpec, theta: &[f64], target: &QuantumState) -> f64 {
    let u = ansatz_unitary(
        spec.num_qubits(),
        spec.num_layers(),
        spec.entangler(),
        theta,
    );
    let psi: Vec<Complex64> = u.iter().map(|row| row[0]).collect();
    1.0 - compensated_inner(target.amplitudes(), &psi).norm_sqr()
}

/// Central difference `(C(theta + h e_j) - C(theta - h e_j)) / 2h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, theta: &[f64], j: usize, h: f64) -> f64 {
    let mut t = theta.to_vec();
    t[j] = theta[j] + h;
    let plus = f(&t);
    t[j] = theta[j] - h;
    let minus = f(&t);
    (plus - minus) / (2.0 * h)
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
