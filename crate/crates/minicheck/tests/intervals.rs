mod common;

use common::oracles::{binary_operators, interval_containment, BOUND as R};
use minicheck::Interval;

fn all() -> Vec<(i128, i128)> {
    let mut v = Vec::new();
    for lo in -R..=R {
        for hi in lo..=R {
            v.push((lo, hi));
        }
    }
    v
}

#[test]
fn binary_operators_contain_concrete_results() {
    for (name, op, concrete) in binary_operators() {
        let pairs = interval_containment(name, op, concrete).unwrap_or_else(|e| panic!("{e}"));
        assert!(pairs > 0, "{name}");
    }
}

#[test]
fn lattice_operations() {
    let ivs = all();
    for &(al, ah) in &ivs {
        let a = Interval::new(al, ah);
        let n = a.neg();
        assert!((al..=ah).all(|x| n.contains(-x)));
        for &(bl, bh) in &ivs {
            let b = Interval::new(bl, bh);
            let (j, m) = (a.join(&b), a.meet(&b));
            for x in -R..=R {
                let (ia, ib) = (a.contains(x), b.contains(x));
                assert!(!(ia || ib) || j.contains(x));
                assert_eq!(ia && ib, m.contains(x));
            }
        }
    }
}

#[test]
fn division_by_exact_zero_is_bottom() {
    assert!(Interval::new(1, 5).div(&Interval::singleton(0)).is_bottom());
    assert_eq!(Interval::new(-4, 4).div(&Interval::new(0, 2)), Interval::new(-4, 4));
}
