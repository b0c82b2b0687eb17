use logpot::potential::{rat, ratio, Rat};
use logpot::ratlp::*;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn trivial_feasibility() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    lp.add_row([(x, rat(1))], Rel::Le, rat(3));
    let out = solve(&lp);
    assert!(out.is_optimal());
    assert!(lp.check_assignment(&out.assignment).unwrap());
}

#[test]
fn two_variable_minimum() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    let y = lp.add_var("y", true);
    lp.add_row([(x, rat(1)), (y, rat(2))], Rel::Ge, rat(4));
    lp.set_objective([(x, rat(1)), (y, rat(1))]);
    let out = solve(&lp);
    assert_eq!(out.status, LpStatus::Optimal);
    assert_eq!(out.objective, [rat(2)]);
    assert_eq!(out.assignment, [rat(0), rat(2)]);
    assert!(lp.check_assignment(&out.assignment).unwrap());
    assert!(!lp.check_assignment(&[rat(0), ratio(19, 10)]).unwrap());
    assert!(lp.check_assignment(&[rat(0)]).is_err());
}

#[test]
fn contradictory_bounds_are_infeasible_with_ray() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", false);
    lp.add_row([(x, rat(1))], Rel::Le, rat(1));
    lp.add_row([(x, rat(1))], Rel::Ge, rat(2));
    let out = solve(&lp);
    assert_eq!(out.status, LpStatus::Infeasible);
    assert!(check_farkas_ray(&lp, out.farkas_ray.as_ref().unwrap()));
}

#[test]
fn unbounded_is_reported() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    lp.add_row([(x, rat(1))], Rel::Ge, rat(1));
    lp.set_objective([(x, rat(-1))]);
    assert_eq!(solve(&lp).status, LpStatus::Unbounded);
}

#[test]
fn free_variables_and_negative_rhs() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", false);
    let y = lp.add_var("y", true);
    lp.add_row([(x, rat(1)), (y, rat(1))], Rel::Eq, rat(-3));
    lp.add_row([(y, rat(1))], Rel::Ge, rat(1));
    lp.set_objective([(y, rat(1))]);
    let out = solve(&lp);
    assert_eq!(out.assignment, [rat(-4), rat(1)]);
}

#[test]
fn lexicographic_objectives() {
    // min x + y, then among optima min -x: picks x = 2, y = 0.
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    let y = lp.add_var("y", true);
    lp.add_row([(x, rat(1)), (y, rat(1))], Rel::Ge, rat(2));
    lp.add_row([(x, rat(1))], Rel::Le, rat(5));
    lp.set_objective([(x, rat(1)), (y, rat(1))]);
    lp.push_objective([(y, rat(1))]);
    let out = solve(&lp);
    assert_eq!(out.objective, [rat(2), rat(0)]);
    assert_eq!(out.assignment, [rat(2), rat(0)]);
}

#[test]
fn dump_lists_rows() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    let y = lp.add_var("y", false);
    lp.add_labeled_row([(x, ratio(1, 2)), (y, rat(1))], Rel::Ge, rat(4), Some("c".into()));
    lp.set_objective([(x, rat(1))]);
    assert_eq!(lp.dump(), "min0: 1 x\nc: 1/2 x + 1 y >= 4\nfree: y\n");
}

fn random_lp(rng: &mut impl Rng) -> (LinearProgram, Vec<Vec<Rat>>, Vec<Rat>, Vec<Rat>) {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=8);
    let x0: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(0..4))).collect();
    let a: Vec<Vec<Rat>> = (0..m).map(|_| (0..n).map(|_| rat(rng.gen_range(-3..=5))).collect()).collect();
    let b: Vec<Rat> = a
        .iter()
        .map(|row| row.iter().zip(&x0).map(|(p, q)| p * q).sum::<Rat>() - rat(rng.gen_range(0..3)))
        .collect();
    let c: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(0..6))).collect();
    let mut lp = LinearProgram::new();
    let xs: Vec<VarId> = (0..n).map(|i| lp.add_var(format!("x{i}"), true)).collect();
    for (row, bi) in a.iter().zip(&b) {
        lp.add_row(xs.iter().copied().zip(row.iter().cloned()), Rel::Ge, bi.clone());
    }
    lp.set_objective(xs.iter().copied().zip(c.iter().cloned()));
    (lp, a, b, c)
}

#[test]
fn primal_and_dual_optima_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let (lp, a, b, c) = random_lp(&mut rng);
        let primal = solve(&lp);
        assert!(primal.is_optimal());
        assert!(lp.check_assignment(&primal.assignment).unwrap());
        // max b.y s.t. A^T y <= c, y >= 0
        let mut dual = LinearProgram::new();
        let ys: Vec<VarId> = (0..a.len()).map(|i| dual.add_var(format!("y{i}"), true)).collect();
        for j in 0..c.len() {
            dual.add_row(ys.iter().map(|&i| (i, a[i][j].clone())), Rel::Le, c[j].clone());
        }
        dual.set_objective(ys.iter().map(|&i| (i, -b[i].clone())));
        let d = solve(&dual);
        assert!(d.is_optimal());
        assert_eq!(primal.objective[0], -d.objective[0].clone());
        assert_eq!(solve(&lp), primal, "solving is deterministic");
    }
}

#[test]
fn random_infeasible_programs_expose_rays() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen = 0;
    for _ in 0..300 {
        let n = rng.gen_range(1..5);
        let mut lp = LinearProgram::new();
        let xs: Vec<VarId> = (0..n).map(|i| lp.add_var(format!("x{i}"), rng.gen_bool(0.7))).collect();
        for _ in 0..rng.gen_range(2..7) {
            let rel = [Rel::Le, Rel::Eq, Rel::Ge][rng.gen_range(0..3)];
            let row: Vec<(VarId, Rat)> = xs.iter().map(|&x| (x, rat(rng.gen_range(-3..4)))).collect();
            lp.add_row(row, rel, rat(rng.gen_range(-5..6)));
        }
        let out = solve(&lp);
        match out.status {
            LpStatus::Infeasible => {
                seen += 1;
                assert!(check_farkas_ray(&lp, out.farkas_ray.as_ref().unwrap()), "{}", lp.dump());
            }
            _ => assert!(lp.check_assignment(&out.assignment).unwrap()),
        }
    }
    assert!(seen > 10);
}

#[test]
fn zero_row_is_fine() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    lp.add_row([(x, rat(0))], Rel::Eq, Rat::zero());
    lp.add_row([(x, rat(1))], Rel::Eq, rat(2));
    lp.add_row([(x, rat(2))], Rel::Eq, rat(4));
    let out = solve(&lp);
    assert_eq!(out.assignment, [rat(2)]);
}
