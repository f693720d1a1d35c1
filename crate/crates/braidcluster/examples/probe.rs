use braidcluster::braid::{compute_pds, DoubleBraidWord};
use braidcluster::minors::{build_chart, LaurentPolynomial};
use braidcluster::moves::{apply, enumerate_applicable, transport_parameters, MoveKind};
use braidcluster::perm::Permutation;

fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![1]];
    }
    let mut out = Vec::new();
    for p in perms(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n);
            out.push(q);
        }
    }
    out
}

fn words(n: usize, len: usize) -> Vec<Vec<i32>> {
    let letters: Vec<i32> = (1..n as i32).flat_map(|i| [i, -i]).collect();
    let mut out: Vec<Vec<i32>> = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                letters.iter().map(move |&l| {
                    let mut w2 = w.clone();
                    w2.push(l);
                    w2
                })
            })
            .collect();
    }
    out
}

fn main() {
    let mut short_eq = 0usize;
    let mut short_neg = 0usize;
    let mut short_other = 0usize;
    let mut m1_stats = std::collections::BTreeMap::<String, usize>::new();
    let mut m2_stats = std::collections::BTreeMap::<String, usize>::new();
    let mut m1_seen = 0;
    let mut m2_seen = 0;
    for n in 2..=3usize {
        for len in 1..=5usize {
            for word in words(n, len) {
                let w = DoubleBraidWord::new(n, word.clone()).unwrap();
                for u in perms(n) {
                    let up = Permutation::from_one_line(u.clone()).unwrap();
                    let Ok(rec) = compute_pds(&up, &w) else { continue };
                    let chart = build_chart(&rec);
                    // Short relations at every slice.
                    for c in 0..=rec.m() {
                        let uc = rec.u_at(c);
                        for a in 1..=n {
                            let b = -(uc.apply(a) as i32);
                            let lhs = chart
                                .grid_minor(c, a as i32)
                                .mul(&chart.grid_minor(c, b + 1));
                            let rhs = chart
                                .grid_minor(c, b)
                                .mul(&chart.grid_minor(c, a as i32 - 1));
                            if lhs == rhs {
                                short_eq += 1;
                            } else if lhs == rhs.neg() {
                                short_neg += 1;
                            } else {
                                short_other += 1;
                                if short_other < 4 {
                                    println!(
                                        "short mismatch u={u:?} w={word:?} c={c} a={a} b={b}"
                                    );
                                }
                            }
                        }
                    }
                    // Mutation-move identities.
                    for mv in enumerate_applicable(&rec) {
                        if !mv.mutation {
                            continue;
                        }
                        let d = mv.d;
                        let out = apply(&rec, &mv).unwrap();
                        let tp = transport_parameters(&rec, &mv).unwrap();
                        if !tp.exact {
                            println!("INEXACT transport on mutation move {mv:?}");
                            continue;
                        }
                        let new_chart = build_chart(&out.record);
                        match mv.kind {
                            MoveKind::OppositeSwap => {
                                if m1_seen >= 200 {
                                    continue;
                                }
                                m1_seen += 1;
                                let j = rec.word().letter(d - 1);
                                let raw = new_chart.grid_minor(d - 1, j);
                                let (num, den) = raw.substitute(&tp.images);
                                assert!(den.is_one(), "denominator not one");
                                let lhs = chart.grid_minor(d - 1, j).mul(&num);
                                let r1 = chart
                                    .grid_minor(d, j)
                                    .mul(&chart.grid_minor(d - 2, j));
                                let r2 = chart
                                    .grid_minor(d - 1, j - 1)
                                    .mul(&chart.grid_minor(d - 1, j + 1));
                                let key = classify(&lhs, &r1, &r2);
                                *m1_stats.entry(key).or_default() += 1;
                            }
                            MoveKind::BraidTriple => {
                                if m2_seen >= 200 {
                                    continue;
                                }
                                m2_seen += 1;
                                let i = rec.word().letter(d);
                                let j = rec.word().letter(d - 1);
                                let raw = new_chart.grid_minor(d - 1, j);
                                let (num, den) = raw.substitute(&tp.images);
                                assert!(den.is_one(), "denominator not one");
                                let lhs = chart.grid_minor(d - 1, i).mul(&num);
                                let r1 = chart
                                    .grid_minor(d, i)
                                    .mul(&chart.grid_minor(d - 3, j));
                                let r2 = chart
                                    .grid_minor(d, j)
                                    .mul(&chart.grid_minor(d - 3, i));
                                let key = classify(&lhs, &r1, &r2);
                                *m2_stats.entry(key).or_default() += 1;
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    println!("short: eq={short_eq} neg={short_neg} other={short_other}");
    println!("m1 ({m1_seen} windows): {m1_stats:?}");
    println!("m2 ({m2_seen} windows): {m2_stats:?}");
}

fn classify(
    lhs: &LaurentPolynomial,
    r1: &LaurentPolynomial,
    r2: &LaurentPolynomial,
) -> String {
    for (s1, n1) in [(1, "+r1"), (-1, "-r1")] {
        for (s2, n2) in [(1, "+r2"), (-1, "-r2")] {
            let rhs = r1.scale(s1).add(&r2.scale(s2));
            if *lhs == rhs {
                return format!("lhs={n1}{n2}");
            }
            if lhs.neg() == rhs {
                return format!("-lhs={n1}{n2}");
            }
        }
    }
    "UNMATCHED".to_string()
}
