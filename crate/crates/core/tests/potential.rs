use logpot::lang::{parse_value, Value};
use logpot::potential::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(s: &str) -> Value {
    parse_value(s).unwrap()
}

/// q_* = 1, q_(1,0) = 3, q_(0,2) = 1.
fn splay_q() -> Annotation {
    Annotation::zero(1).with_rank(0, rat(1)).with_log(&[1], 0, rat(3)).with_log(&[0], 2, rat(1))
}

fn random_tree(rng: &mut impl Rng, leaves: u64) -> Value {
    if leaves <= 1 {
        return Value::Leaf;
    }
    let k = rng.gen_range(1..leaves);
    Value::node(random_tree(rng, k), rng.gen_range(0..100), random_tree(rng, leaves - k))
}

fn tree_upto(rng: &mut impl Rng, max: u64) -> Value {
    let n = rng.gen_range(1..max);
    random_tree(rng, n)
}

fn random_annotation(rng: &mut impl Rng, arity: usize) -> Annotation {
    let mut q = Annotation::zero(arity);
    for i in 0..arity {
        q.rank[i] = ratio(rng.gen_range(0..8), rng.gen_range(1..4));
    }
    for idx in IndexTemplate::new(vec![0, 1, 2], vec![0, 1, 2, 3]).unwrap().indices(arity) {
        if rng.gen_bool(0.3) {
            q.set_log(idx, ratio(rng.gen_range(0..10), rng.gen_range(1..5)));
        }
    }
    q
}

#[test]
fn rank_examples() {
    assert_eq!(rank(&Value::Leaf), 0.0);
    assert_eq!(rank(&v("(nil, 1, nil)")), 0.0);
    assert_eq!(rank(&v("((nil, 1, nil), 2, nil)")), 1.0);
}

#[test]
fn potential_examples() {
    let q = splay_q();
    let t = v("((nil, 1, nil), 2, nil)");
    let expected = 1.0 + 3.0 * 3f64.log2() + 1.0;
    assert!((q.potential(&[&t]).unwrap() - expected).abs() < 1e-12);
    assert!((expected - 6.7549).abs() < 1e-4);
    let rank_only = Annotation::zero(1).with_rank(0, rat(1));
    assert_eq!(rank_only.potential(&[&Value::Leaf]).unwrap(), 0.0);
    assert!(q.potential(&[]).is_err());
    let consts = Annotation::zero(0).with_log(&[], 2, rat(1)).with_log(&[], 1, rat(5));
    assert_eq!(consts.potential(&[]).unwrap(), 1.0);
}

#[test]
fn left_spine_rank() {
    let mut t = Value::Leaf;
    for n in 2..=64u32 {
        t = Value::node(t, n, Value::Leaf);
        let expected: f64 = (1..n).map(|i| (i as f64).log2()).sum();
        assert!((rank(&t) - expected).abs() < 1e-9, "n = {n}");
    }
}

#[test]
fn add_constant_examples() {
    let k = Annotation::zero(0).add_constant(&rat(1));
    assert_eq!(k.log_coeff(&LogIndex::constant(0, 2)), rat(1));
    assert_eq!(k.potential(&[]).unwrap(), 1.0);
    assert_eq!(splay_q().add_constant(&rat(0)), splay_q());
    let q3 = splay_q().add_constant(&rat(2));
    assert_eq!(q3.log_coeff(&LogIndex::new(vec![0], 2)), rat(3));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let t = tree_upto(&mut rng, 40);
        let d = q3.potential(&[&t]).unwrap() - splay_q().potential(&[&t]).unwrap();
        assert!((d - 2.0).abs() < 1e-9);
    }
}

#[test]
fn share_examples() {
    let q = Annotation::zero(2).with_rank(0, rat(1)).with_rank(1, rat(1));
    let s = q.share(0, 1).unwrap();
    assert_eq!(s, Annotation::zero(1).with_rank(0, rat(2)));
    let q = Annotation::zero(2).with_log(&[1, 0], 0, rat(1)).with_log(&[0, 1], 0, rat(1));
    assert_eq!(q.share(0, 1).unwrap(), Annotation::zero(1).with_log(&[1], 0, rat(2)));
    assert!(q.share(0, 0).is_err());
    assert!(q.share(0, 2).is_err());
}

#[test]
fn sharing_preserves_potential() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let arity = rng.gen_range(2..4);
        let q = random_annotation(&mut rng, arity);
        let trees: Vec<Value> = (0..arity).map(|_| tree_upto(&mut rng, 30)).collect();
        let (i, j) = (0, arity - 1);
        let mut dup: Vec<&Value> = trees.iter().collect();
        dup[j] = dup[i];
        let mut merged = dup.clone();
        merged.remove(j);
        let lhs = q.potential(&dup).unwrap();
        let rhs = q.share(i, j).unwrap().potential(&merged).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9, "{q}");
    }
}

#[test]
fn log_sum_inequality_on_grid() {
    for x in 1..=1000u32 {
        for y in 1..=1000u32 {
            let (x, y) = (x as f64, y as f64);
            assert!(2.0 + x.log2() + y.log2() <= 2.0 * (x + y).log2() + 1e-12);
        }
    }
}

#[test]
fn annotation_text_round_trip() {
    let q = parse_annotation("rank: [1]; log: {(1|0): 3, (0|2): 1}").unwrap();
    assert_eq!(q, splay_q());
    assert_eq!(parse_annotation(&q.to_string()).unwrap(), q);
    assert_eq!(parse_annotation("rank:[]").unwrap(), Annotation::zero(0));
    assert_eq!(parse_annotation("rank: [1/2, 0]; log: {(1,1|0): 2/4}").unwrap().log_coeff(&LogIndex::new(vec![1, 1], 0)), ratio(1, 2));
    for bad in ["rank: [1]; log: {(1,1|0): 1}", "rank: [-1]", "rank: [1/0]", "rank: [1]; log: {(1|0): 1, (1|0): 2}", "rank: [1] x"] {
        assert!(parse_annotation(bad).is_err(), "{bad}");
    }
}

#[test]
fn signature_file_round_trip() {
    let src = "-- splay\nfn splay : B * T -> T | costed { rank:[1]; log:{(1|0):3,(0|2):1} } -> { rank:[1] } | costfree { rank:[0]; log:{(1|0):1} } -> { rank:[0]; log:{(1|0):1} }\nfn id : T -> T";
    let sigs = parse_signatures(src).unwrap();
    assert_eq!(sigs.len(), 2);
    assert_eq!(sigs[0].costed[0].0, splay_q());
    assert_eq!(sigs[0].cost_free.len(), 1);
    assert_eq!(sigs[0].ty.to_string(), "B * T -> T");
    assert_eq!(parse_signatures(&print_signatures(&sigs)).unwrap(), sigs);
    assert!(parse_signatures("fn f : T -> T | costed { rank:[1,1] } -> { rank:[1] }").is_err());
    assert!(parse_signatures("fn f : T -> T\nfn f : T -> T").is_err());
}

#[test]
fn template_parsing() {
    let t = IndexTemplate::parse("a=0..1,b=0..2").unwrap();
    assert_eq!(t, IndexTemplate::default());
    assert_eq!(t.indices(2).len(), 12);
    assert!(IndexTemplate::parse("b=0..1").is_err());
    assert_eq!(IndexTemplate::parse("a=0..2").unwrap().a_values, [0, 1, 2]);
}

proptest! {
    #[test]
    fn potential_is_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_annotation(&mut rng, 2);
        let a = tree_upto(&mut rng, 50);
        let b = tree_upto(&mut rng, 50);
        prop_assert!(q.potential(&[&a, &b]).unwrap() >= 0.0);
    }
}
