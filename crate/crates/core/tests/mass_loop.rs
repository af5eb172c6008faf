use codp_core::dp::{trace, DpError};
use codp_core::Element;
use codp_testkit::mass_loop;

#[test]
fn converges_to_closed_form() {
    let m0 = 100.0;
    for k in [0.1, 0.5, 0.9] {
        let d = trace(&mass_loop(k)).unwrap();
        let front = d.query(&Element::real(m0)).unwrap();
        let got = front.elements()[0].as_real().unwrap();
        let want = m0 / (1.0 - k);
        assert!(((got - want) / want).abs() < 1e-6, "k={k}: {got} vs {want}");
    }
}

#[test]
fn reports_divergence_at_or_above_one() {
    for k in [1.0, 1.5, 2.0] {
        let d = trace(&mass_loop(k)).unwrap();
        match d.query(&Element::real(100.0)) {
            Err(DpError::Divergence { .. }) => {}
            other => panic!("k={k}: expected divergence, got {other:?}"),
        }
    }
}

#[test]
fn zero_payload_needs_nothing() {
    let d = trace(&mass_loop(0.5)).unwrap();
    assert_eq!(d.query(&Element::real(0.0)).unwrap().elements(), &[Element::real(0.0)]);
}

fn priced_loop(k: f64, price: f64) -> codp_core::DesignProblem {
    let g = codp_core::Poset::nonneg_real("g");
    let usd = codp_core::Poset::nonneg_real("USD");
    codp_core::DesignProblem::from_monotone_map(
        codp_core::Poset::pair(g.clone(), g.clone()),
        codp_core::Poset::pair(usd, g),
        move |f| {
            let c = f.components().unwrap();
            let m = c[0].as_real().unwrap() + k * c[1].as_real().unwrap();
            Element::pair(Element::real(price), Element::real(m))
        },
    )
}

#[test]
fn choice_inside_the_loop_keeps_the_converging_branch() {
    let both = codp_core::dp::union(&priced_loop(0.5, 1000.0), &priced_loop(2.0, 0.0)).unwrap();
    let d = trace(&both).unwrap();
    let q = d.query_fix_fun_min_res(&Element::real(100.0)).unwrap();
    assert_eq!(q.minimal_resources.elements(), &[Element::real(1000.0)]);
    assert_eq!(q.divergent_branches, 1);
    let cheap_only = trace(&priced_loop(2.0, 0.0)).unwrap();
    assert!(matches!(cheap_only.query(&Element::real(100.0)), Err(DpError::Divergence { .. })));
}
