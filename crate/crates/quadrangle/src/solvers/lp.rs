//! Dense two-phase simplex with Bland's anti-cycling rule.

use serde::Serialize;

const PIVOT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    maximize: bool,
    rows: Vec<(Vec<f64>, Relation, f64)>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    /// `n` variables, all non-negative by default, minimizing zero.
    pub fn new(n: usize) -> Self {
        LinearProgram { n, objective: vec![0.0; n], maximize: false, rows: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn minimize(&mut self, c: Vec<f64>) -> &mut Self {
        assert_eq!(c.len(), self.n);
        self.objective = c;
        self.maximize = false;
        self
    }

    pub fn maximize(&mut self, c: Vec<f64>) -> &mut Self {
        assert_eq!(c.len(), self.n);
        self.objective = c;
        self.maximize = true;
        self
    }

    pub fn constraint(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.n);
        self.rows.push((coeffs, rel, rhs));
        self
    }

    /// Sparse variant: `(index, coefficient)` pairs.
    pub fn constraint_sparse(&mut self, terms: &[(usize, f64)], rel: Relation, rhs: f64) -> &mut Self {
        let mut row = vec![0.0; self.n];
        for &(j, a) in terms {
            row[j] += a;
        }
        self.rows.push((row, rel, rhs));
        self
    }

    pub fn bounds(&mut self, j: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[j] = (lo, hi);
        self
    }

    pub fn free(&mut self, j: usize) -> &mut Self {
        self.bounds(j, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn solve(&self) -> LpSolution {
        solve_lp(self)
    }
}

/// How an original variable is expressed through non-negative columns.
#[derive(Clone, Copy)]
enum VarMap {
    Shift { col: usize, lo: f64 },
    Flip { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    let n = lp.n;
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = lp.bounds[j];
        if lo > hi {
            return LpSolution { status: LpStatus::Infeasible, x: vec![f64::NAN; n], objective: f64::NAN, pivots: 0 };
        }
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ncols, lo });
            if hi.is_finite() {
                extra_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Flip { col: ncols, hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    // rows over structural columns: (coeffs, relation, rhs)
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(lp.rows.len() + extra_rows.len());
    for (coeffs, rel, rhs) in &lp.rows {
        let mut r = vec![0.0; ncols];
        let mut b = *rhs;
        for (j, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    r[col] += a;
                    b -= a * lo;
                }
                VarMap::Flip { col, hi } => {
                    r[col] -= a;
                    b -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    r[pos] += a;
                    r[neg] -= a;
                }
            }
        }
        rows.push((r, *rel, b));
    }
    for &(col, width) in &extra_rows {
        let mut r = vec![0.0; ncols];
        r[col] = 1.0;
        rows.push((r, Relation::Le, width));
    }

    let mut cost = vec![0.0; ncols];
    let sign = if lp.maximize { -1.0 } else { 1.0 };
    for j in 0..n {
        let c = sign * lp.objective[j];
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Flip { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let result = simplex_standard(&rows, &cost);
    let (status, y, pivots) = match result {
        Ok((y, p)) => (LpStatus::Optimal, y, p),
        Err((s, p)) => {
            return LpSolution { status: s, x: vec![f64::NAN; n], objective: f64::NAN, pivots: p };
        }
    };
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + y[col],
            VarMap::Flip { col, hi } => hi - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpSolution { status, x, objective, pivots }
}

struct Tableau {
    a: Vec<Vec<f64>>, // m rows, ncols + 1 (last is rhs)
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let w = self.width;
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for k in 0..=w {
                    row[k] -= f * pivot_row[k];
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for k in 0..=w {
                obj[k] -= f * pivot_row[k];
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule iterations on the reduced-cost row `obj` (minimization).
    /// `allowed[j]` false keeps column `j` out of the basis.
    fn run(&mut self, obj: &mut [f64], allowed: &[bool], pivots: &mut usize) -> Result<(), LpStatus> {
        let w = self.width;
        loop {
            if *pivots >= MAX_PIVOTS {
                return Err(LpStatus::IterationLimit);
            }
            let entering = (0..w).find(|&j| allowed[j] && obj[j] < -PIVOT_TOL);
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if row[c] > PIVOT_TOL {
                    let ratio = row[w] / row[c];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Err(LpStatus::Unbounded) };
            self.pivot(r, c, obj);
            *pivots += 1;
        }
    }
}

/// Minimize `cost . y` subject to `rows`, `y >= 0`. Returns the optimal `y`.
fn simplex_standard(rows: &[(Vec<f64>, Relation, f64)], cost: &[f64]) -> Result<(Vec<f64>, usize), (LpStatus, usize)> {
    let ncols = cost.len();
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    // columns: structural | slacks | artificials
    let slack0 = ncols;
    let art0 = ncols + n_slack;
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut need_art: Vec<usize> = Vec::new();
    let mut s = 0;
    let mut slack_of_row = vec![None; m];
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        let mut row = vec![0.0; art0];
        row[..ncols].copy_from_slice(coeffs);
        let mut b = *rhs;
        match rel {
            Relation::Le => {
                row[slack0 + s] = 1.0;
                slack_of_row[i] = Some(slack0 + s);
                s += 1;
            }
            Relation::Ge => {
                row[slack0 + s] = -1.0;
                slack_of_row[i] = Some(slack0 + s);
                s += 1;
            }
            Relation::Eq => {}
        }
        if b < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            b = -b;
        }
        row.push(b);
        match slack_of_row[i] {
            Some(sc) if row[sc] > 0.0 => basis.push(sc),
            _ => {
                basis.push(usize::MAX);
                need_art.push(i);
            }
        }
        a.push(row);
    }
    let n_art = need_art.len();
    let width = art0 + n_art;
    for row in a.iter_mut() {
        let b = row.pop().unwrap();
        row.resize(width, 0.0);
        row.push(b);
    }
    for (k, &i) in need_art.iter().enumerate() {
        a[i][art0 + k] = 1.0;
        basis[i] = art0 + k;
    }
    let mut t = Tableau { a, basis, width };
    let mut pivots = 0;

    if n_art > 0 {
        // phase one: minimize the sum of artificials
        let mut obj = vec![0.0; width + 1];
        for j in art0..width {
            obj[j] = 1.0;
        }
        for &i in &need_art {
            for k in 0..=width {
                obj[k] -= t.a[i][k];
            }
        }
        let allowed = vec![true; width];
        if let Err(st) = t.run(&mut obj, &allowed, &mut pivots) {
            let st = if st == LpStatus::Unbounded { LpStatus::Infeasible } else { st };
            return Err((st, pivots));
        }
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if -obj[width] > FEAS_TOL * scale {
            return Err((LpStatus::Infeasible, pivots));
        }
        // drive artificials out of the basis; drop redundant rows
        let mut i = 0;
        while i < t.a.len() {
            if t.basis[i] >= art0 {
                let col = (0..art0).find(|&j| t.a[i][j].abs() > PIVOT_TOL);
                match col {
                    Some(c) => {
                        let mut dummy = vec![0.0; width + 1];
                        t.pivot(i, c, &mut dummy);
                        pivots += 1;
                        i += 1;
                    }
                    None => {
                        t.a.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut obj = vec![0.0; width + 1];
    obj[..ncols].copy_from_slice(cost);
    for i in 0..t.a.len() {
        let bj = t.basis[i];
        let f = obj[bj];
        if f != 0.0 {
            for k in 0..=width {
                obj[k] -= f * t.a[i][k];
            }
        }
    }
    let allowed: Vec<bool> = (0..width).map(|j| j < art0).collect();
    if let Err(st) = t.run(&mut obj, &allowed, &mut pivots) {
        return Err((st, pivots));
    }
    let mut y = vec![0.0; ncols];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < ncols {
            y[bj] = t.a[i][width].max(0.0);
        }
    }
    Ok((y, pivots))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![3.0, 5.0]);
        lp.constraint(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.constraint(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.constraint(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.minimize(vec![1.0]);
        lp.constraint(vec![1.0], Relation::Ge, 2.0);
        lp.constraint(vec![1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(1);
        lp.maximize(vec![1.0]);
        lp.constraint(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_bounded_variables() {
        // min |x - 3| written with a free x and epigraph t
        let mut lp = LinearProgram::new(2);
        lp.free(0);
        lp.minimize(vec![0.0, 1.0]);
        lp.constraint(vec![-1.0, 1.0], Relation::Ge, -3.0);
        lp.constraint(vec![1.0, 1.0], Relation::Ge, 3.0);
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective.abs() < 1e-12 && (s.x[0] - 3.0).abs() < 1e-9);

        let mut lp = LinearProgram::new(1);
        lp.bounds(0, -2.0, -1.0).minimize(vec![-1.0]);
        let s = lp.solve();
        assert!((s.x[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling example under the largest-coefficient rule
        let mut lp = LinearProgram::new(4);
        lp.minimize(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![1.0, 2.0]);
        lp.constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }
}
