use padicell::cells::{check_partition, decompose1, untwist, CellIndex, PresentedCell};
use padicell::lang::random::{random_formula, FormulaShape};
use padicell::lang::{normalize, parse_formula, Vars};
use padicell::oracle::TruncatedSample;
use padicell::padic::PadicConfig;
use padicell::scalar::Scalar;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn decomposes_cleanly(prime: u32, seed: u64) -> Result<(), TestCaseError> {
    let cfg = PadicConfig::new(prime, 24).unwrap();
    let sample = TruncatedSample::new(cfg, 5, if prime >= 5 { 3 } else { 5 }).unwrap();
    let vars = Vars::univariate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_formula(&mut rng, prime, &FormulaShape::default());
    let Ok(nf) = normalize(&f, &vars, cfg) else { return Ok(()) };
    let cells = match decompose1(&nf, cfg) {
        Ok(c) => c,
        Err(e) if e.is_unsupported() => return Ok(()),
        Err(e) => return Err(TestCaseError::fail(format!("{}: {e}", f.display(&vars)))),
    };
    let rep = check_partition(&cells, &nf, &sample).unwrap();
    prop_assert!(rep.ok(), "{}: {:?}", f.display(&vars), rep);
    for c in &cells.cells {
        prop_assert_eq!(c.is_type_zero(), c.lambda.is_zero());
        let (std, map) = untwist(c);
        prop_assert!(untwist(&std).1.is_identity());
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for pt in std.sample(cfg, 4, 5, &mut r).unwrap_or_default() {
            prop_assert!(c.contains(&map.apply(&pt, cfg).unwrap(), cfg).unwrap());
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_formulas_decompose_into_partitions(prime in prop::sample::select(vec![2u32, 3, 5, 7]), seed in any::<u64>()) {
        decomposes_cleanly(prime, seed)?;
    }
}

#[test]
fn type_zero_cells_are_singletons() {
    let cfg = PadicConfig::new(5, 16).unwrap();
    let nf = normalize(&parse_formula("t^2 - 1 = 0", &Vars::univariate()).unwrap(), &Vars::univariate(), cfg).unwrap();
    let cells = decompose1(&nf, cfg).unwrap();
    assert_eq!(cells.len(), 2);
    for c in &cells.cells {
        assert!(c.is_type_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(c.sample(cfg, 3, 10, &mut rng).unwrap().len(), 1);
    }
}

#[test]
fn cell_json_round_trips() {
    let cfg = PadicConfig::new(5, 16).unwrap();
    let nf = normalize(&parse_formula("(t^2 - 1) in P_2 && |t - 1| <= |25|", &Vars::univariate()).unwrap(), &Vars::univariate(), cfg).unwrap();
    let cells = decompose1(&nf, cfg).unwrap();
    let back: Vec<PresentedCell> = cells.cells.iter().map(|c| PresentedCell::from_json(&c.to_json(), cfg).unwrap()).collect();
    assert_eq!(back, cells.cells);
    let idx = CellIndex::new(&back, cfg).unwrap();
    assert!(!idx.is_empty());
    assert!(cells.cells.iter().all(|c| c.center_const() == Some(&Scalar::int(1)) || c.is_type_zero()));
}
