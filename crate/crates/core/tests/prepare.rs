use num_rational::BigRational;
use padicell::cells::CellIndex;
use padicell::lang::Term;
use padicell::oracle::TruncatedSample;
use padicell::padic::PadicConfig;
use padicell::prepare::{prepare_param, prepare_poly, verify_unit_residual, verify_unit_residual_at, Rooted};
use padicell::scalar::Scalar;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn factored() -> impl Strategy<Value = Term> {
    let factor = (-30i64..30, prop::sample::select(vec![-2i32, -1, 1, 2, 3]));
    (1i64..40, prop::collection::vec(factor, 1..4)).prop_map(|(c, fs)| {
        let fs: Vec<(BigRational, i32)> = fs.into_iter().map(|(a, e)| (BigRational::from_integer(a.into()), e)).collect();
        Term::factored(1, BigRational::from_integer(c.into()), &fs)
    })
}

fn polynomial() -> impl Strategy<Value = Term> {
    (1i64..10, prop::collection::vec(-20i64..20, 1..4)).prop_map(|(c, roots)| {
        let fs: Vec<(BigRational, i32)> = roots.into_iter().map(|a| (BigRational::from_integer(a.into()), 1)).collect();
        Term::factored(1, BigRational::from_integer(c.into()), &fs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residuals_are_units(
        term in factored(),
        (prime, e) in prop::sample::select(vec![(5u32, 1u32), (5, 2), (7, 3), (3, 2), (5, 3)]),
        n in 1u32..3,
        seed in any::<u64>(),
    ) {
        let cfg = PadicConfig::new(prime, 24).unwrap();
        let theta = Rooted::new(term, e).unwrap();
        let pieces = match prepare_param(&theta, n, cfg) {
            Ok(p) => p,
            Err(padicell::Error::RootExtraction(_)) => return Ok(()),
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for pc in &pieces {
            prop_assert_eq!(pc.e, e);
            let pts: Vec<Scalar> = pc.cell.sample(cfg, 4, 15, &mut rng).unwrap().into_iter().map(|mut v| v.pop().unwrap()).collect();
            let rep = verify_unit_residual_at(pc, &theta, &pts, cfg);
            prop_assert!(rep.ok(), "{:?} {:?}", pc.to_json(), rep.failures.first());
        }
    }

    #[test]
    fn integral_pieces_partition_the_line(term in polynomial(), n in 1u32..3) {
        let cfg = PadicConfig::new(3, 20).unwrap();
        let pieces = prepare_poly(&term, n, cfg).unwrap();
        let cells: Vec<_> = pieces.iter().map(|p| p.cell.clone()).collect();
        let index = CellIndex::new(&cells, cfg).unwrap();
        let sample = TruncatedSample::new(cfg, 4, 4).unwrap();
        for pt in sample.points() {
            let hits = index.containing(&pt).unwrap();
            prop_assert_eq!(hits.len(), 1, "{}", pt.display(3));
        }
    }
}

#[test]
fn finer_levels_keep_the_root_index() {
    let cfg = PadicConfig::new(5, 20).unwrap();
    let theta = Rooted::new(Term::factored(1, BigRational::from_integer(1.into()), &[(BigRational::from_integer(0.into()), 1)]), 2).unwrap();
    for n in 1..=3 {
        let pieces = prepare_param(&theta, n, cfg).unwrap();
        assert!(pieces.iter().all(|p| p.e == 2 && p.n == n));
    }
}

#[test]
fn residuals_over_the_truncated_sample() {
    let cfg = PadicConfig::new(5, 16).unwrap();
    let f = Term::factored(1, BigRational::from_integer(1.into()), &[(BigRational::from_integer(1.into()), 1), (BigRational::from_integer((-1).into()), 1)]);
    let sample = TruncatedSample::new(cfg, 3, 3).unwrap();
    for pc in prepare_poly(&f, 1, cfg).unwrap() {
        let rep = verify_unit_residual(&pc, &Rooted::plain(f.clone()), &sample).unwrap();
        assert!(rep.ok() && rep.imprecise.is_empty(), "{rep:?}");
    }
}
