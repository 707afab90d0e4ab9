use proptest::prelude::*;

use ovalforge::collineation::{mat_inv, Collineation};
use ovalforge::flocks::{herd_from_clan, named_clan};
use ovalforge::magic::{magic_apply, MagicElement};
use ovalforge::ovals::{named_opoly, Family, OPoly, Oval};
use ovalforge::projspace::{ProjPoint, P2};
use ovalforge::serial::{from_json, to_json, OPolyRecord, OvalRecord};
use ovalforge::{Fe, Field};

/// Shift-and-add product reduced by the modulus, bit by bit.
fn slow_mul(a: u32, b: u32, h: u32, modulus: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    for i in 0..h {
        if b >> i & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        if a >> h & 1 == 1 {
            a ^= modulus;
        }
    }
    acc
}

fn field_and_pair() -> impl Strategy<Value = (u32, u32, u32)> {
    (1u32..=8).prop_flat_map(|h| (Just(h), 0..1u32 << h, 0..1u32 << h))
}

proptest! {
    #[test]
    fn multiplication_matches_shift_and_add((h, a, b) in field_and_pair()) {
        let f = Field::standard(h).unwrap();
        let got = f.mul(Fe(a as u8), Fe(b as u8)).0 as u32;
        prop_assert_eq!(got, slow_mul(a, b, h, f.modulus()));
    }

    #[test]
    fn field_identities((h, a, b) in field_and_pair()) {
        let f = Field::standard(h).unwrap();
        let (a, b) = (Fe(a as u8), Fe(b as u8));
        prop_assert_eq!(f.square(f.sqrt(a)), a);
        prop_assert_eq!(f.trace(a + b), f.trace(a) ^ f.trace(b));
        prop_assert_eq!(f.frob(a, h), a);
        prop_assert_eq!(f.mul(a + b, a + b), f.square(a) + f.square(b));
        if !b.is_zero() {
            prop_assert_eq!(f.mul(f.div(a, b), b), a);
            prop_assert_eq!(f.powi(b, -1).unwrap(), f.inv(b));
        }
    }
}

fn matrix3(q: usize) -> impl Strategy<Value = [[u8; 3]; 3]> {
    let e = 0..q as u8;
    [[e.clone(), e.clone(), e.clone()], [e.clone(), e.clone(), e.clone()], [e.clone(), e.clone(), e]]
}

fn coll(f: &Field, m: [[u8; 3]; 3], k: u32) -> Option<Collineation<3>> {
    let m = m.map(|r| r.map(Fe));
    mat_inv(f, &m)?;
    Collineation::new(f, m, k).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn collineation_composition_and_inverse(m1 in matrix3(16), m2 in matrix3(16), k1 in 0u32..4, k2 in 0u32..4, p in 0usize..273) {
        let f = Field::of_order(16).unwrap();
        let (Some(g1), Some(g2)) = (coll(f, m1, k1), coll(f, m2, k2)) else {
            return Err(TestCaseError::reject("singular"));
        };
        let p = ProjPoint::<3>::from_index(16, p);
        prop_assert_eq!(g1.compose(f, &g2).apply(f, &p), g1.apply(f, &g2.apply(f, &p)));
        prop_assert_eq!(g1.inverse(f).apply(f, &g1.apply(f, &p)), p);
    }

    #[test]
    fn collineations_map_ovals_to_ovals(m in matrix3(32), k in 0u32..5, fam in 0usize..3) {
        let f = Field::of_order(32).unwrap();
        let Some(g) = coll(f, m, k) else {
            return Err(TestCaseError::reject("singular"));
        };
        let family = [Family::Conic, Family::Pointed, Family::Translation(2)][fam];
        let o = Oval::d_form(&named_opoly(f, family).unwrap()).unwrap();
        let image: Vec<P2> = o.points().iter().map(|p| g.apply(f, p)).collect();
        let mapped = Oval::from_points(f, &image).unwrap();
        prop_assert_eq!(mapped.nucleus(), g.apply(f, &o.nucleus()));
        prop_assert_eq!(mapped.is_conic(), o.is_conic());
    }

    #[test]
    fn d_form_at_is_projectively_equivalent(idx in 0usize..17, fam in 0usize..3) {
        let f = Field::of_order(16).unwrap();
        let family = [Family::SubiacoI, Family::Pointed, Family::Translation(3)][fam];
        let o = Oval::d_form(&named_opoly(f, family).unwrap()).unwrap();
        let p = o.points()[idx];
        let (g, map) = o.d_form_at(&p).unwrap();
        let target = Oval::d_form(&g).unwrap();
        prop_assert_eq!(map.apply(f, &p), P2::from_coords([Fe::ZERO, Fe::ZERO, Fe::ONE]));
        for x in o.points() {
            prop_assert!(target.contains(&map.apply(f, x)));
        }
    }

    #[test]
    fn swapping_the_nucleus_twice_restores_the_oval(idx in 0usize..33) {
        let f = Field::of_order(32).unwrap();
        let o = Oval::d_form(&named_opoly(f, Family::Translation(2)).unwrap()).unwrap();
        let p = o.points()[idx];
        let swapped = o.swap_nucleus(&p).unwrap();
        prop_assert_eq!(swapped.nucleus(), p);
        prop_assert_eq!(swapped.swap_nucleus(&o.nucleus()).unwrap(), o.clone());
        prop_assert_eq!(swapped.hyperoval().points().to_vec(), o.hyperoval().points().to_vec());
    }

    #[test]
    fn magic_action_preserves_opermutations(a in 0u8..32, b in 0u8..32, c in 0u8..32, d in 0u8..32, gamma in 0u32..5, fam in 0usize..3) {
        let f = Field::of_order(32).unwrap();
        let Ok(psi) = MagicElement::new(f, Fe(a), Fe(b), Fe(c), Fe(d), gamma) else {
            return Err(TestCaseError::reject("singular"));
        };
        let g = magic_apply(&psi, &OPoly::monomial(f, [2, 4, 6][fam])).unwrap();
        prop_assert!(g.is_opermutation());
        prop_assert_eq!(g.eval(Fe::ZERO), Fe::ZERO);
    }

    #[test]
    fn opoly_record_round_trip(coeffs in proptest::collection::vec(0u8..64, 1..64)) {
        let f = Field::of_order(64).unwrap();
        let g = OPoly::from_coeffs(f, &coeffs.iter().map(|&c| Fe(c)).collect::<Vec<_>>()).unwrap();
        let rec = OPolyRecord::new(&g, ovalforge::ovals::Convention::D);
        let back: OPolyRecord = from_json(&to_json(&rec)).unwrap();
        prop_assert_eq!(back.to_opoly().unwrap(), g);
    }
}

#[test]
fn herd_members_are_opermutations() {
    for q in [8, 16, 32] {
        let f = Field::of_order(q).unwrap();
        for name in ["classical", "subiaco"] {
            let c = named_clan(f, name).unwrap();
            let herd = herd_from_clan(&c, c.kappa()).unwrap();
            herd.check().unwrap();
            let (members, _) = herd.polynomial_sets().unwrap();
            assert!(members.iter().all(OPoly::is_opermutation), "{name} at q = {q}");
        }
    }
}

#[test]
fn flock_swap_is_an_involution() {
    for q in [8, 16] {
        let f = Field::of_order(q).unwrap();
        for name in ["classical", "subiaco"] {
            let fl = named_clan(f, name).unwrap().to_flock();
            assert!(fl.is_valid());
            let sw = fl.swap();
            assert!(sw.is_valid());
            assert_eq!(sw.swap(), fl);
        }
    }
}

#[test]
fn oval_record_round_trip() {
    let f = Field::of_order(16).unwrap();
    let o = Oval::d_form(&named_opoly(f, Family::SubiacoI).unwrap()).unwrap();
    let rec = OvalRecord::new(&o);
    let back: OvalRecord = from_json(&to_json(&rec)).unwrap();
    assert_eq!(back.to_oval().unwrap(), o);
}

#[test]
fn removing_a_hyperoval_point_gives_an_oval_with_that_nucleus() {
    let f = Field::of_order(16).unwrap();
    let h = Oval::d_form(&named_opoly(f, Family::SubiacoII).unwrap()).unwrap().hyperoval();
    for p in h.points() {
        let o = h.remove(p).unwrap();
        assert_eq!(o.nucleus(), *p);
        assert_eq!(o.points().len(), 17);
    }
}
