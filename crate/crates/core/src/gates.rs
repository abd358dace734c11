//! Elementary Clifford gates and their action on dense state vectors.

use num_complex::Complex64;

/// Single- and two-qubit Clifford generators. Qubit indices follow the
/// big-endian convention used everywhere else in this crate.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn inverse(self) -> Gate {
        match self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            other => other,
        }
    }

    /// Applies the gate in place to a length 2^n amplitude vector.
    pub fn apply_to_vec(self, psi: &mut [Complex64], n: usize) {
        let d = psi.len();
        debug_assert_eq!(d, 1 << n);
        let stride = |q: usize| 1usize << (n - 1 - q);
        match self {
            Gate::H(q) => {
                let s = stride(q);
                let f = std::f64::consts::FRAC_1_SQRT_2;
                for base in (0..d).step_by(2 * s) {
                    for i0 in base..base + s {
                        let a = psi[i0];
                        let b = psi[i0 + s];
                        psi[i0] = (a + b) * f;
                        psi[i0 + s] = (a - b) * f;
                    }
                }
            }
            Gate::S(q) => {
                let s = stride(q);
                let ph = Complex64::new(0.0, 1.0);
                for base in (0..d).step_by(2 * s) {
                    for i in base + s..base + 2 * s {
                        psi[i] *= ph;
                    }
                }
            }
            Gate::Sdg(q) => {
                let s = stride(q);
                let ph = Complex64::new(0.0, -1.0);
                for base in (0..d).step_by(2 * s) {
                    for i in base + s..base + 2 * s {
                        psi[i] *= ph;
                    }
                }
            }
            Gate::X(q) => {
                let s = stride(q);
                for base in (0..d).step_by(2 * s) {
                    for i0 in base..base + s {
                        psi.swap(i0, i0 + s);
                    }
                }
            }
            Gate::Y(q) => {
                let s = stride(q);
                let i_pos = Complex64::new(0.0, 1.0);
                let i_neg = Complex64::new(0.0, -1.0);
                for base in (0..d).step_by(2 * s) {
                    for i0 in base..base + s {
                        let a = psi[i0];
                        let b = psi[i0 + s];
                        psi[i0] = i_neg * b;
                        psi[i0 + s] = i_pos * a;
                    }
                }
            }
            Gate::Z(q) => {
                let s = stride(q);
                for base in (0..d).step_by(2 * s) {
                    for i in base + s..base + 2 * s {
                        psi[i] = -psi[i];
                    }
                }
            }
            Gate::Cnot(c, t) => {
                let sc = stride(c);
                let st = stride(t);
                for i in 0..d {
                    if i & sc != 0 && i & st == 0 {
                        psi.swap(i, i | st);
                    }
                }
            }
            Gate::Swap(a, b) => {
                let sa = stride(a);
                let sb = stride(b);
                for i in 0..d {
                    if i & sa != 0 && i & sb == 0 {
                        psi.swap(i, (i & !sa) | sb);
                    }
                }
            }
        }
    }
}

pub fn apply_gates_to_vec(gates: &[Gate], psi: &mut [Complex64], n: usize) {
    for &g in gates {
        g.apply_to_vec(psi, n);
    }
}
