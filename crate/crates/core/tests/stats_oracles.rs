use ghcf_core::rng::RngStream;
use ghcf_core::stats::{chi_square_sf, friedman, hypervolume, nemenyi, rank_block, RankTable};
use proptest::prelude::*;

// Γ(a) for integer and half-integer a, exactly as a product.
fn gamma_half_integer(a: f64) -> f64 {
    let mut g = if a.fract() == 0.0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut t = if a.fract() == 0.0 { 1.0 } else { 0.5 };
    while t < a {
        g *= t;
        t += 1.0;
    }
    g
}

// Q(a, x) = 1 − x^a e^{−x} / Γ(a) · Σ x^n / (a (a+1) … (a+n)).
fn series_sf(x: f64, df: usize) -> f64 {
    let a = df as f64 / 2.0;
    let z = x / 2.0;
    if z == 0.0 {
        return 1.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while term > sum * 1e-18 {
        term *= z / (a + n);
        sum += term;
        n += 1.0;
    }
    let lower = (a * z.ln() - z).exp() / gamma_half_integer(a) * sum;
    1.0 - lower
}

#[test]
fn chi_square_matches_series_oracle() {
    let mut worst = 0.0f64;
    for df in 1..=20 {
        for step in 0..=200 {
            let x = step as f64 * 0.5;
            let err = (chi_square_sf(x, df as f64) - series_sf(x, df)).abs();
            worst = worst.max(err);
        }
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn hypervolume_matches_monte_carlo() {
    let mut rng = RngStream::new(2024, 1);
    for case in 0..6 {
        let n = 1 + case % 5;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.uniform_range(0.05, 1.0)).collect())
            .collect();
        let bounds: Vec<f64> = (0..3).map(|j| pts.iter().map(|p| p[j]).fold(0.0, f64::max)).collect();
        let box_vol: f64 = bounds.iter().product();
        let samples = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..samples {
            let s: Vec<f64> = bounds.iter().map(|b| rng.uniform() * b).collect();
            if pts.iter().any(|p| p.iter().zip(&s).all(|(a, b)| b <= a)) {
                hits += 1;
            }
        }
        let mc = box_vol * hits as f64 / samples as f64;
        let hv = hypervolume(&pts, &[0.0; 3]).unwrap();
        assert!((hv - mc).abs() / hv < 0.01, "case {case}: {hv} vs {mc}");
    }
}

#[test]
fn hypervolume_is_monotone() {
    let mut rng = RngStream::new(3, 1);
    for _ in 0..50 {
        let mut pts: Vec<Vec<f64>> = Vec::new();
        let mut prev = 0.0;
        for _ in 0..8 {
            pts.push((0..3).map(|_| rng.uniform()).collect());
            let hv = hypervolume(&pts, &[0.0; 3]).unwrap();
            assert!(hv >= prev - 1e-15);
            prev = hv;
        }
        let dominated: Vec<f64> = pts[0].iter().map(|v| v * 0.5).collect();
        let mut with = pts.clone();
        with.push(dominated);
        assert!((hypervolume(&with, &[0.0; 3]).unwrap() - prev).abs() < 1e-12);
    }
    // Above the inclusion–exclusion limit the slicing path is used.
    let many: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.uniform()).collect()).collect();
    let small = hypervolume(&many[..20], &[0.0; 3]).unwrap();
    assert!(hypervolume(&many, &[0.0; 3]).unwrap() >= small);
}

fn random_table(rng: &mut RngStream, n: usize, k: usize) -> RankTable {
    let ranks = (0..n)
        .map(|_| rank_block(&(0..k).map(|_| rng.uniform()).collect::<Vec<_>>()).unwrap())
        .collect();
    RankTable {
        models: (0..k).map(|j| format!("m{j}")).collect(),
        blocks: (0..n).map(|b| format!("b{b}")).collect(),
        ranks,
    }
}

#[test]
fn friedman_null_rejection_rate() {
    let mut rng = RngStream::new(11, 1);
    let reps = 1000;
    let rejected = (0..reps)
        .filter(|_| friedman(&random_table(&mut rng, 10, 4)).unwrap().p_value < 0.05)
        .count();
    let rate = rejected as f64 / reps as f64;
    assert!((0.03..=0.08).contains(&rate), "{rate}");
}

#[test]
fn friedman_identical_rankings_give_two_n() {
    for n in 2..10 {
        let t = RankTable {
            models: vec!["a".into(), "b".into(), "c".into()],
            blocks: (0..n).map(|b| b.to_string()).collect(),
            ranks: vec![vec![1.0, 2.0, 3.0]; n],
        };
        assert_eq!(friedman(&t).unwrap().statistic, 2.0 * n as f64);
    }
}

#[test]
fn nemenyi_cd_for_nine_models_fifteen_blocks() {
    let t = RankTable {
        models: (0..9).map(|j| format!("m{j}")).collect(),
        blocks: (0..15).map(|b| b.to_string()).collect(),
        ranks: vec![(1..=9).map(|r| r as f64).collect(); 15],
    };
    let r = nemenyi(&t, 0.05).unwrap();
    assert_eq!(r.critical_difference, r.q_alpha);
    assert!((r.q_alpha - 3.102).abs() < 1e-3);
}

proptest! {
    #[test]
    fn rank_rows_sum_to_triangular_number(scores in prop::collection::vec(0u8..5, 2..12)) {
        let s: Vec<f64> = scores.iter().map(|&v| v as f64 / 4.0).collect();
        let r = rank_block(&s).unwrap();
        let k = s.len() as f64;
        prop_assert_eq!(r.iter().sum::<f64>(), k * (k + 1.0) / 2.0);
    }

    #[test]
    fn ranks_invariant_under_monotone_transform(scores in prop::collection::vec(-5.0f64..5.0, 2..10)) {
        let t: Vec<f64> = scores.iter().map(|v| (2.0 * v).exp() + 3.0).collect();
        prop_assert_eq!(rank_block(&scores).unwrap(), rank_block(&t).unwrap());
    }

    #[test]
    fn friedman_ignores_block_order(seed in 0u64..1000) {
        let mut rng = RngStream::new(seed, 4);
        let t = random_table(&mut rng, 6, 4);
        let mut shuffled = t.clone();
        shuffled.ranks.reverse();
        shuffled.blocks.reverse();
        let a = friedman(&t).unwrap();
        let b = friedman(&shuffled).unwrap();
        prop_assert!((a.statistic - b.statistic).abs() < 1e-12);
        prop_assert!(a.p_value >= 0.0 && a.p_value <= 1.0);
    }
}
