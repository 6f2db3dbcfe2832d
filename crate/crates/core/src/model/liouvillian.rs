use super::pulse::PulseEnvelope;
use super::system::{Rate, SourceSystem};
use crate::linalg::{self, CMatrix, C64, ONE, ZERO};

/// Dense generator acting on column-stacked density matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian {
    pub dim: usize,
    pub matrix: CMatrix,
}

impl Liouvillian {
    /// Row of the trace functional, `Tr X = r · vec(X)`.
    pub fn trace_row(&self) -> Vec<C64> {
        linalg::trace_weights(&CMatrix::identity(self.dim, self.dim))
    }

    /// Largest entry of `r · L`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let r = self.trace_row();
        let n = self.dim * self.dim;
        (0..n).map(|col| (0..n).map(|row| r[row] * self.matrix[(row, col)]).sum::<C64>().norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let v = CMatrix::from_column_slice(self.dim * self.dim, 1, &linalg::vectorize(rho));
        let out = &self.matrix * v;
        linalg::unvectorize(out.as_slice(), self.dim)
    }
}

#[derive(Clone, Debug)]
enum Coefficient {
    Drive,
    Rate(Rate),
}

/// The Liouvillian split into a static part and time-dependent pieces,
/// stored row-major for fast repeated application.
#[derive(Clone, Debug)]
pub struct Generator {
    dim: usize,
    n: usize,
    base: Vec<C64>,
    parts: Vec<(Coefficient, Vec<C64>)>,
    pulse: PulseEnvelope,
    windows: Vec<(f64, f64, f64)>,
}

impl Generator {
    pub fn new(s: &SourceSystem) -> Self {
        let d = s.dim();
        let n = d * d;
        let mut base = linalg::commutator_generator(s.h_static().matrix());
        let mut parts = Vec::new();
        if s.h_drive().matrix().iter().any(|z| z.norm() > 0.0) {
            let drive = linalg::commutator_generator(&s.h_drive().matrix().scale(0.5));
            parts.push((Coefficient::Drive, linalg::row_major(&drive)));
        }
        for c in s.channels() {
            let d_super = linalg::dissipator(c.operator.matrix());
            match &c.rate {
                Rate::Constant { value } => base += d_super.scale(*value),
                other => parts.push((Coefficient::Rate(other.clone()), linalg::row_major(&d_super))),
            }
        }
        Self { dim: d, n, base: linalg::row_major(&base), parts, pulse: s.pulse().clone(), windows: s.active_windows() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Length of the vectorized state.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn coefficient(&self, c: &Coefficient, t: f64) -> f64 {
        match c {
            Coefficient::Drive => self.pulse.value(t),
            Coefficient::Rate(r) => r.at(&self.pulse, t),
        }
    }

    pub fn apply(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        dy.iter_mut().for_each(|z| *z = ZERO);
        linalg::gemv_acc(&self.base, self.n, y, ONE, dy);
        for (c, m) in &self.parts {
            let k = self.coefficient(c, t);
            if k != 0.0 {
                linalg::gemv_acc(m, self.n, y, C64::new(k, 0.0), dy);
            }
        }
    }

    pub fn matrix_at(&self, t: f64) -> CMatrix {
        let mut m = CMatrix::from_row_slice(self.n, self.n, &self.base);
        for (c, part) in &self.parts {
            let k = self.coefficient(c, t);
            if k != 0.0 {
                m += CMatrix::from_row_slice(self.n, self.n, part).scale(k);
            }
        }
        m
    }

    /// Generator valid wherever no time-dependent term is active.
    pub fn static_matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(self.n, self.n, &self.base)
    }

    pub fn windows(&self) -> &[(f64, f64, f64)] {
        &self.windows
    }

    /// True when `[a, b]` does not touch any active window.
    pub fn is_static_on(&self, a: f64, b: f64) -> bool {
        self.parts.is_empty() || self.windows.iter().all(|&(lo, hi, _)| b <= lo || a >= hi)
    }
}

/// `L(t)` in dense vectorized form.
pub fn liouvillian_at(s: &SourceSystem, t: f64) -> Liouvillian {
    Liouvillian { dim: s.dim(), matrix: Generator::new(s).matrix_at(t) }
}
