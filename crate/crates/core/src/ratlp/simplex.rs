//! Two-phase primal simplex on a sparse tableau with exact rationals.
//!
//! Entering columns are chosen by largest reduced cost. Leaving rows are
//! chosen by minimum ratio with ties broken lexicographically on the columns
//! of the starting basis, which rules out cycling.

use num_traits::{One, Signed, Zero};

use super::{LinearProgram, LpOutcome, LpStatus, Rel};
use crate::potential::Rat;

type SRow = Vec<(u32, Rat)>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub rows: usize,
    pub columns: usize,
    pub pivots: usize,
}

fn entry(row: &SRow, c: u32) -> Option<&Rat> {
    row.binary_search_by_key(&c, |(j, _)| *j).ok().map(|k| &row[k].1)
}

/// `row - f * piv`, both sorted by column.
fn sub_scaled(row: &SRow, f: &Rat, piv: &SRow) -> SRow {
    let mut out = Vec::with_capacity(row.len() + piv.len());
    let (mut i, mut k) = (0, 0);
    while i < row.len() || k < piv.len() {
        let take_row = k == piv.len() || (i < row.len() && row[i].0 < piv[k].0);
        let take_piv = i == row.len() || (k < piv.len() && piv[k].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_piv {
            out.push((piv[k].0, -(f * &piv[k].1)));
            k += 1;
        } else {
            let v = &row[i].1 - f * &piv[k].1;
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            k += 1;
        }
    }
    out
}

struct Objective {
    d: Vec<Rat>,
    d0: Rat,
}

struct Tableau {
    rows: Vec<SRow>,
    rhs: Vec<Rat>,
    basis: Vec<u32>,
    ncols: usize,
    objs: Vec<Objective>,
    pivots: usize,
    // Position of each starting basic column, for the lexicographic rule.
    lex: Vec<Option<u32>>,
}

/// Compare sparse vectors (sorted by position, zeros implicit).
fn lex_cmp(x: &[(u32, Rat)], y: &[(u32, Rat)]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let zero = Rat::zero();
    let (mut i, mut k) = (0, 0);
    loop {
        let (p, a, b) = match (x.get(i), y.get(k)) {
            (None, None) => return Ordering::Equal,
            (Some((p, a)), None) => (*p, a, &zero),
            (None, Some((q, b))) => (*q, &zero, b),
            (Some((p, a)), Some((q, b))) => {
                if p < q {
                    (*p, a, &zero)
                } else if q < p {
                    (*q, &zero, b)
                } else {
                    (*p, a, b)
                }
            }
        };
        if x.get(i).is_some_and(|(j, _)| *j == p) {
            i += 1;
        }
        if y.get(k).is_some_and(|(j, _)| *j == p) {
            k += 1;
        }
        match a.cmp(b) {
            Ordering::Equal => {}
            o => return o,
        }
    }
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: u32) {
        self.pivots += 1;
        let p = entry(&self.rows[r], c).expect("pivot entry").clone();
        if !p.is_one() {
            let inv = p.recip();
            for (_, v) in self.rows[r].iter_mut() {
                *v *= &inv;
            }
            self.rhs[r] *= &inv;
        }
        let piv = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = entry(&self.rows[i], c).cloned() {
                self.rows[i] = sub_scaled(&self.rows[i], &f, &piv);
                self.rhs[i] -= &f * &prhs;
            }
        }
        for o in &mut self.objs {
            let f = o.d[c as usize].clone();
            if !f.is_zero() {
                for (j, v) in &piv {
                    o.d[*j as usize] -= &f * v;
                }
                o.d0 -= &f * &prhs;
            }
        }
        self.rows[r] = piv;
        self.basis[r] = c;
    }

    /// Leaving row for entering column `c`, or `None` if unbounded.
    fn ratio_test(&self, c: u32) -> Option<usize> {
        let mut best: Option<Rat> = None;
        let mut ties: Vec<usize> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let Some(a) = entry(row, c) else { continue };
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / a;
            match &best {
                Some(b) if ratio > *b => {}
                Some(b) if ratio == *b => ties.push(i),
                _ => {
                    best = Some(ratio);
                    ties = vec![i];
                }
            }
        }
        if ties.len() <= 1 {
            return ties.first().copied();
        }
        let key = |i: usize| {
            let a = entry(&self.rows[i], c).unwrap();
            let mut v: Vec<(u32, Rat)> =
                self.rows[i].iter().filter_map(|(j, x)| self.lex[*j as usize].map(|k| (k, x / a))).collect();
            v.sort_by_key(|(k, _)| *k);
            v
        };
        let mut keys: Vec<(usize, Vec<(u32, Rat)>)> = ties.into_iter().map(|i| (i, key(i))).collect();
        keys.sort_by(|(_, x), (_, y)| lex_cmp(x, y));
        Some(keys[0].0)
    }

    /// Minimise objective `k` keeping objectives `< k` at their optimum.
    /// Columns `>= limit` never enter. Returns false if unbounded.
    fn optimise(&mut self, k: usize, limit: usize) -> bool {
        loop {
            let allowed = |j: usize, objs: &[Objective]| objs[..k].iter().all(|o| o.d[j].is_zero());
            let d = &self.objs[k].d;
            let mut enter: Option<usize> = None;
            for j in 0..limit {
                if d[j].is_negative() && allowed(j, &self.objs) && enter.is_none_or(|e| d[j] < d[e]) {
                    enter = Some(j);
                }
            }
            let Some(c) = enter else { return true };
            let Some(r) = self.ratio_test(c as u32) else { return false };
            self.pivot(r, c as u32);
        }
    }
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    // Columns: structural (free variables split in two), then slacks, then
    // artificials.
    let mut pos_col = Vec::with_capacity(lp.num_vars());
    let mut neg_col = Vec::with_capacity(lp.num_vars());
    let mut ncols = 0u32;
    for x in 0..lp.num_vars() {
        pos_col.push(ncols);
        ncols += 1;
        if lp.is_nonneg(x) {
            neg_col.push(None);
        } else {
            neg_col.push(Some(ncols));
            ncols += 1;
        }
    }
    let nstruct = ncols as usize;
    let mut rows: Vec<SRow> = Vec::with_capacity(lp.rows().len());
    let mut rhs = Vec::with_capacity(lp.rows().len());
    let mut rels = Vec::with_capacity(lp.rows().len());
    let mut flipped = Vec::with_capacity(lp.rows().len());
    for r in lp.rows() {
        let flip = r.rhs.is_negative();
        let mut row: SRow = Vec::with_capacity(r.coeffs.len() + 2);
        for (x, c) in &r.coeffs {
            let c = if flip { -c } else { c.clone() };
            if let Some(n) = neg_col[*x] {
                row.push((n, -c.clone()));
            }
            row.push((pos_col[*x], c));
        }
        row.sort_by_key(|(j, _)| *j);
        let rel = match (r.rel, flip) {
            (Rel::Le, true) => Rel::Ge,
            (Rel::Ge, true) => Rel::Le,
            (rel, _) => rel,
        };
        rows.push(row);
        rhs.push(r.rhs.abs());
        rels.push(rel);
        flipped.push(flip);
    }
    let m = rows.len();
    let mut slack_of = vec![None; m];
    for i in 0..m {
        if rels[i] != Rel::Eq {
            let v = if rels[i] == Rel::Le { Rat::one() } else { -Rat::one() };
            rows[i].push((ncols, v));
            slack_of[i] = Some(ncols);
            ncols += 1;
        }
    }
    let art_start = ncols as usize;
    let mut art_of = vec![None; m];
    let mut basis = vec![0u32; m];
    for i in 0..m {
        if rels[i] == Rel::Le {
            basis[i] = slack_of[i].unwrap();
        } else {
            rows[i].push((ncols, Rat::one()));
            art_of[i] = Some(ncols);
            basis[i] = ncols;
            ncols += 1;
        }
    }
    let ncols = ncols as usize;
    let mut stats = SolveStats { rows: m, columns: ncols, pivots: 0 };

    // Phase one: minimise the sum of artificials.
    let mut d = vec![Rat::zero(); ncols];
    let mut d0 = Rat::zero();
    for j in art_start..ncols {
        d[j] = Rat::one();
    }
    for i in 0..m {
        if art_of[i].is_some() {
            for (j, a) in &rows[i] {
                d[*j as usize] -= a;
            }
            d0 -= &rhs[i];
        }
    }
    let mut lex = vec![None; ncols];
    for (i, &c) in basis.iter().enumerate() {
        lex[c as usize] = Some(i as u32);
    }
    let mut t = Tableau { rows, rhs, basis, ncols, objs: vec![Objective { d, d0 }], pivots: 0, lex };
    t.optimise(0, art_start);
    let infeasibility = -t.objs[0].d0.clone();
    if infeasibility.is_positive() {
        let d = &t.objs[0].d;
        let ray = (0..m)
            .map(|i| {
                let y = match art_of[i] {
                    Some(a) => Rat::one() - &d[a as usize],
                    None => -d[slack_of[i].unwrap() as usize].clone(),
                };
                if flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        stats.pivots = t.pivots;
        return LpOutcome {
            status: LpStatus::Infeasible,
            assignment: Vec::new(),
            objective: Vec::new(),
            farkas_ray: Some(ray),
            stats,
        };
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // redundant.
    let mut i = 0;
    while i < t.rows.len() {
        if (t.basis[i] as usize) < art_start {
            i += 1;
            continue;
        }
        let c = t.rows[i].iter().find(|(j, _)| (*j as usize) < art_start).map(|(j, _)| *j);
        match c {
            Some(c) => {
                t.pivot(i, c);
                i += 1;
            }
            None => {
                t.rows.swap_remove(i);
                t.rhs.swap_remove(i);
                t.basis.swap_remove(i);
            }
        }
    }
    // Artificial columns stay in the rows (they never enter again) so the
    // lexicographic rule keeps a full view of the basis inverse.

    // Phase two, one objective after another.
    t.objs.clear();
    for obj in lp.objectives() {
        let mut c = vec![Rat::zero(); t.ncols];
        for (x, w) in obj {
            c[pos_col[*x] as usize] += w;
            if let Some(n) = neg_col[*x] {
                c[n as usize] -= w;
            }
        }
        let mut d = c.clone();
        let mut d0 = Rat::zero();
        for (i, row) in t.rows.iter().enumerate() {
            let cb = &c[t.basis[i] as usize];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in row {
                d[*j as usize] -= cb * a;
            }
            d0 -= cb * &t.rhs[i];
        }
        t.objs.push(Objective { d, d0 });
    }
    for k in 0..t.objs.len() {
        if !t.optimise(k, art_start) {
            stats.pivots = t.pivots;
            return LpOutcome {
                status: LpStatus::Unbounded,
                assignment: Vec::new(),
                objective: Vec::new(),
                farkas_ray: None,
                stats,
            };
        }
    }
    stats.pivots = t.pivots;

    let mut colval = vec![Rat::zero(); nstruct];
    for (i, &b) in t.basis.iter().enumerate() {
        if (b as usize) < nstruct {
            colval[b as usize] = t.rhs[i].clone();
        }
    }
    let assignment: Vec<Rat> = (0..lp.num_vars())
        .map(|x| {
            let p = colval[pos_col[x] as usize].clone();
            match neg_col[x] {
                Some(n) => p - &colval[n as usize],
                None => p,
            }
        })
        .collect();
    let objective = lp.objectives().iter().map(|o| super::eval_terms(o, &assignment)).collect();
    LpOutcome { status: LpStatus::Optimal, assignment, objective, farkas_ray: None, stats }
}
