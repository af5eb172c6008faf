use codp_core::dp::{self, DesignProblem};
use codp_core::{Element, Poset};
use codp_testkit::{random_mdpi, random_poset, rng, Case, Composition, Relation};
use proptest::prelude::*;

fn check(op: Composition, seed: u64) -> Result<(), TestCaseError> {
    let case = Case::random(op, seed, 6);
    let got = Relation::of(&case.composite());
    let want = case.expected();
    prop_assert_eq!(&got.pairs, &want.pairs, "{:?} seed {}", op, seed);
    prop_assert!(got.is_upper_set());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_matches_oracle(seed: u64) { check(Composition::Series, seed)?; }

    #[test]
    fn parallel_matches_oracle(seed: u64) { check(Composition::Parallel, seed)?; }

    #[test]
    fn trace_matches_oracle(seed: u64) { check(Composition::Trace, seed)?; }

    #[test]
    fn union_matches_oracle(seed: u64) { check(Composition::Union, seed)?; }

    #[test]
    fn intersection_matches_oracle(seed: u64) { check(Composition::Intersection, seed)?; }

    #[test]
    fn queries_are_monotone(seed: u64) {
        let mut r = rng(seed);
        let (f, s) = (random_poset(&mut r, "f", 6), random_poset(&mut r, "r", 6));
        let d = random_mdpi(&mut r, &f, &s, 6);
        for a in f.enumerate().unwrap() {
            for b in f.enumerate().unwrap() {
                if f.leq(&a, &b).unwrap() {
                    prop_assert!(d.query(&b).unwrap().is_upper_subset_of(&d.query(&a).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn series_and_parallel_associate(seed: u64) {
        let mut r = rng(seed);
        let ps: Vec<Poset> = (0..4).map(|i| random_poset(&mut r, &format!("p{i}"), 4)).collect();
        let (a, b, c) = (
            random_mdpi(&mut r, &ps[0], &ps[1], 4),
            random_mdpi(&mut r, &ps[1], &ps[2], 4),
            random_mdpi(&mut r, &ps[2], &ps[3], 4),
        );
        let left = dp::series(&dp::series(&a, &b).unwrap(), &c).unwrap();
        let right = dp::series(&a, &dp::series(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(Relation::of(&left).pairs, Relation::of(&right).pairs);

        let small: Vec<Poset> = (0..6).map(|i| random_poset(&mut r, &format!("s{i}"), 2)).collect();
        let (x, y, z) = (
            random_mdpi(&mut r, &small[0], &small[1], 2),
            random_mdpi(&mut r, &small[2], &small[3], 2),
            random_mdpi(&mut r, &small[4], &small[5], 2),
        );
        let lp = dp::parallel(&dp::parallel(&x, &y).unwrap(), &z).unwrap();
        let rp = dp::parallel(&x, &dp::parallel(&y, &z).unwrap()).unwrap();
        let flat = |e: &Element, left: bool| -> Element {
            let c = e.components().unwrap();
            let (a, b) = if left { (c[0].components().unwrap().to_vec(), vec![c[1].clone()]) }
                         else { (vec![c[0].clone()], c[1].components().unwrap().to_vec()) };
            Element::tuple(a.into_iter().chain(b))
        };
        let lset: std::collections::BTreeSet<_> =
            Relation::of(&lp).pairs.iter().map(|(f, r)| (flat(f, true), flat(r, true))).collect();
        let rset: std::collections::BTreeSet<_> =
            Relation::of(&rp).pairs.iter().map(|(f, r)| (flat(f, false), flat(r, false))).collect();
        prop_assert_eq!(lset, rset);
    }

    #[test]
    fn union_and_intersection_laws(seed: u64) {
        let mut r = rng(seed);
        let (f, s) = (random_poset(&mut r, "f", 5), random_poset(&mut r, "r", 5));
        let ds: Vec<DesignProblem> = (0..3).map(|_| random_mdpi(&mut r, &f, &s, 4)).collect();
        for op in [dp::union, dp::intersection] {
            let rel = |d: DesignProblem| Relation::of(&d).pairs;
            prop_assert_eq!(rel(op(&ds[0], &ds[1]).unwrap()), rel(op(&ds[1], &ds[0]).unwrap()));
            prop_assert_eq!(rel(op(&ds[0], &ds[0]).unwrap()), rel(ds[0].clone()));
            prop_assert_eq!(
                rel(op(&op(&ds[0], &ds[1]).unwrap(), &ds[2]).unwrap()),
                rel(op(&ds[0], &op(&ds[1], &ds[2]).unwrap()).unwrap())
            );
        }
    }

    #[test]
    fn mdpi_feasibility_is_existential(seed: u64) {
        let mut r = rng(seed);
        let (f, s) = (random_poset(&mut r, "f", 6), random_poset(&mut r, "r", 6));
        let fs = f.enumerate().unwrap();
        let rs = s.enumerate().unwrap();
        let impls: Vec<codp_core::dp::Implementation> = (0..4)
            .map(|i| codp_core::dp::Implementation {
                id: format!("i{i}"),
                prov: fs[(seed as usize + i) % fs.len()].clone(),
                reqs: rs[(seed as usize / 7 + 3 * i) % rs.len()].clone(),
            })
            .collect();
        let set = codp_core::dp::ImplementationSet::new(f.clone(), s.clone(), impls.clone()).unwrap();
        let d = DesignProblem::from_mdpi(set);
        for x in &fs {
            for y in &rs {
                let want = impls.iter().any(|i| f.leq(x, &i.prov).unwrap() && s.leq(&i.reqs, y).unwrap());
                prop_assert_eq!(d.feasible(x, y).unwrap(), want);
            }
        }
    }

    #[test]
    fn dual_query_matches_oracle(seed: u64) {
        let mut r = rng(seed);
        let (f, s) = (random_poset(&mut r, "f", 6), random_poset(&mut r, "r", 6));
        let d = random_mdpi(&mut r, &f, &s, 5);
        let rel = Relation::of(&d);
        let grid = f.enumerate().unwrap();
        for y in s.enumerate().unwrap() {
            let got: std::collections::BTreeSet<Element> =
                d.query_fix_res_max_fun(&y, &grid).unwrap().into_elements().into_iter().collect();
            prop_assert_eq!(got, rel.max_fun(&y, &grid));
        }
    }
}

#[test]
fn dual_query_rejects_empty_grid() {
    let d = DesignProblem::identity(Poset::nonneg_real(""));
    assert!(d.query_fix_res_max_fun(&Element::real(1.0), &[]).is_err());
}
