use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use courant::capacity::capacity;
use courant::counting::{count_numeric, NumericSpectrum, Spectrum};
use courant::exact_spectra::{enumerate, RectSpec, Scale};
use courant::grid::{components, rasterize, star_interior, BBox, GridGeometry, Shape, SubdomainFamily};
use courant::lattice::{count_full, count_positive, EllipseCount};
use courant::partition_check::check_main;
use courant::rational::ratio;

fn small_ratio() -> impl Strategy<Value = BigRational> {
    (1i64..=6, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

/// Every `p1 m² + p2 n² ≤ q_max` by brute force.
fn brute_modes(p1: &BigRational, p2: &BigRational, q_max: &BigRational) -> Vec<BigRational> {
    let mut out = Vec::new();
    for m in 1i64.. {
        let mm = BigRational::from_integer(BigInt::from(m * m));
        if p1 * &mm + p2 > *q_max {
            break;
        }
        for n in 1i64.. {
            let q = p1 * &mm + p2 * BigRational::from_integer(BigInt::from(n * n));
            if q > *q_max {
                break;
            }
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn counting_sandwich(p1 in small_ratio(), p2 in small_ratio(), qn in 1i64..=120, qd in 1i64..=4) {
        let q_max = BigRational::from_integer(BigInt::from(40));
        let s = enumerate(&RectSpec::new(p1.clone(), p2.clone(), Scale::Unit).unwrap(), &q_max).unwrap();
        let q = ratio(qn, qd).min(q_max.clone());
        let all = brute_modes(&p1, &p2, &q_max);
        let below = all.iter().filter(|v| **v < q).count();
        let upto = all.iter().filter(|v| **v <= q).count();
        let t = s.triple(&q).unwrap();
        prop_assert_eq!(t.n_lower, below);
        prop_assert_eq!(t.n_upper, upto);
        prop_assert!(t.n_lower <= t.n_mid && t.n_mid <= t.n_upper);
        if upto == below {
            prop_assert!(!t.is_eigenvalue);
            prop_assert_eq!(t.n_mid, t.n_lower);
        } else {
            prop_assert_eq!(t.n_mid, below + 1);
        }

        // the same query on the floating-point copy, which only answers below its top cluster
        let values: Vec<f64> = all.iter().map(courant::rational::to_f64).collect();
        let top = values.iter().cloned().fold(f64::MIN, f64::max);
        let numeric = NumericSpectrum::new(values, 1e-9).unwrap();
        let qf = courant::rational::to_f64(&q);
        if qf < top - 1e-6 {
            let tn = count_numeric(&numeric, qf).unwrap();
            prop_assert_eq!(tn, t);
        }
    }
}

/// Widths of a random cut of a side into pieces, in units of π.
fn cuts() -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((1i64..=4, 1i64..=3).prop_map(|(n, d)| ratio(n, d)), 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn main_inequality_on_rectangle_partitions(xs in cuts(), ys in cuts()) {
        let cutoff = BigRational::from_integer(BigInt::from(12));
        let sum = |v: &[BigRational]| v.iter().fold(BigRational::zero(), |acc, x| acc + x);
        let (a, b) = (sum(&xs), sum(&ys));
        let spec0 = enumerate(&RectSpec::from_pi_multiples(&a, &b).unwrap(), &cutoff).unwrap();
        let mut subs = Vec::new();
        for w in &xs {
            for h in &ys {
                subs.push(enumerate(&RectSpec::from_pi_multiples(w, h).unwrap(), &cutoff).unwrap());
            }
        }
        for e in spec0.entries() {
            let r = check_main(&spec0, &subs, &e.q).unwrap();
            prop_assert!(r.holds, "{:?} x {:?} at {}: {} > {}", xs, ys, e.q, r.lhs, r.rhs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lattice_identity(an in 1i64..=30, ad in 1i64..=10, bn in 1i64..=30, bd in 1i64..=10, ln in 0i64..=2000, ld in 1i64..=7) {
        let (a, b, l) = (ratio(an, ad), ratio(bn, bd), ratio(ln, ld));
        let full = count_full(&a, &b, &l);
        prop_assert_eq!(&full, &EllipseCount::identity_rhs(&a, &b, &l));

        // brute force over the bounding box
        let mut brute = 0i64;
        let mut brute_pos = 0i64;
        for m in -60i64..=60 {
            for n in -60i64..=60 {
                // a m² + b n² ≤ λ with denominators cleared
                if an * bd * ld * m * m + bn * ad * ld * n * n <= ln * ad * bd {
                    brute += 1;
                    if m > 0 && n > 0 {
                        brute_pos += 1;
                    }
                }
            }
        }
        // the box holds every point when both semi-axes are below 60
        if l.clone() / &a < BigRational::from_integer(BigInt::from(3600)) && l.clone() / &b < BigRational::from_integer(BigInt::from(3600)) {
            prop_assert_eq!(full, BigInt::from(brute));
            prop_assert_eq!(count_positive(&a, &b, &l), BigInt::from(brute_pos));
        }
    }
}

fn disk_grid(r: f64, h: f64) -> GridGeometry {
    rasterize(&Shape::disk(0.0, 0.0, r), BBox { x0: -r - h, y0: -r - h, x1: r + h, y1: r + h }, h).unwrap()
}

/// Nodes of `g` within distance `r` of `(cx, cy)`.
fn ball(g: &GridGeometry, cx: f64, cy: f64, r: f64) -> Vec<bool> {
    (0..g.len())
        .map(|i| {
            let (x, y) = g.xy(i);
            g.mask()[i] && (x - cx).hypot(y - cy) <= r
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn capacity_monotone(r1 in 0.05f64..0.2, dr in 0.02f64..0.2, cx in -0.1f64..0.1, cy in -0.1f64..0.1, shrink in 0.55f64..0.9) {
        let h = 1.0 / 24.0;
        let u = disk_grid(1.0, h);
        let small_set = ball(&u, cx, cy, r1);
        let big_set = ball(&u, cx, cy, r1 + dr);
        let c_small = capacity(&u, &small_set, 1e-10).unwrap().capacity;
        let c_big = capacity(&u, &big_set, 1e-10).unwrap().capacity;
        prop_assert!(c_small <= c_big * (1.0 + 1e-8), "A ⊆ B: {c_small} > {c_big}");

        // a smaller container on the same array
        let v = u.with_mask(ball(&u, 0.0, 0.0, shrink)).unwrap();
        let c_v = capacity(&v, &small_set, 1e-10).unwrap().capacity;
        prop_assert!(c_v >= c_small * (1.0 - 1e-8), "U ⊆ V: {c_v} < {c_small}");
    }
}

fn random_mask(nx: usize, ny: usize, bits: &[bool]) -> GridGeometry {
    let mut mask = vec![false; nx * ny];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            mask[j * nx + i] = bits[(j - 1) * (nx - 2) + (i - 1)];
        }
    }
    if !mask.iter().any(|&b| b) {
        mask[nx + 1] = true;
    }
    GridGeometry::from_mask(nx, ny, 0.1, (0.0, 0.0), mask).unwrap()
}

proptest! {
    #[test]
    fn components_partition_the_mask(bits in prop::collection::vec(any::<bool>(), 8 * 8)) {
        let g = random_mask(10, 10, &bits);
        let comps = components(&g, g.mask());
        let mut owner = vec![None; g.len()];
        for (c, nodes) in comps.iter().enumerate() {
            prop_assert!(!nodes.is_empty());
            for &n in nodes {
                prop_assert!(g.mask()[n]);
                prop_assert!(owner[n].is_none());
                owner[n] = Some(c);
            }
        }
        for i in 0..g.len() {
            prop_assert_eq!(owner[i].is_some(), g.mask()[i]);
            if let Some(c) = owner[i] {
                for w in g.neighbors(i) {
                    if g.mask()[w] {
                        prop_assert_eq!(owner[w], Some(c));
                    }
                }
            }
        }
    }

    #[test]
    fn star_interior_is_monotone(labels in prop::collection::vec(0usize..4, 12 * 12)) {
        let g = GridGeometry::rectangle(10, 10, 0.1, (0.0, 0.0)).unwrap();
        // members are label classes; label 3 is left out of every member
        let masks: Vec<Vec<bool>> = (0..3)
            .map(|l| (0..g.len()).map(|i| g.mask()[i] && labels[i] == l).collect())
            .collect();
        let family = SubdomainFamily::new(g.clone(), masks).unwrap();
        let s0 = star_interior(&family, &[0]).unwrap();
        let s01 = star_interior(&family, &[0, 1]).unwrap();
        let s012 = star_interior(&family, &[0, 1, 2]).unwrap();
        for i in 0..g.len() {
            prop_assert!(!s0[i] || s01[i]);
            prop_assert!(!s01[i] || s012[i]);
            prop_assert!(!s012[i] || g.mask()[i]);
            // a member node whose neighbours all lie in the same member stays in
            if family.masks()[0][i] && g.neighbors(i).all(|w| !g.mask()[w] || family.masks()[0][w]) {
                prop_assert!(s0[i]);
            }
        }
    }
}
