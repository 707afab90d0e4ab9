//! Acceptance criteria. Each test prints one line:
//! `criterion N <name>: PASS|FAIL (<detail>; <secs>s, limit <secs>s)`.
//! Criteria 7 and 8 run at q = 64 and are ignored by default:
//! `cargo test --release --test acceptance -- --ignored --nocapture`.

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use ovalforge::classify::{
    classify_spreads, generator_orbits, oval_census, oval_stabilizer, screen_fan_candidates, seeded_herds,
    verify_orbit_transport,
};
use ovalforge::collineation::find_set_map;
use ovalforge::ext2::{Ext2, Fe2};
use ovalforge::fans::{fan_from_flock, off_points, pairs_for_points, pairs_match, pairs_match_brute, GeneralizedFan};
use ovalforge::flocks::{anisotropic, classical_clan, herd_from_clan, named_clan, QClan};
use ovalforge::magic::{magic_apply, magic_equivalent, pgl2_elements, MagicElement};
use ovalforge::ovals::{adelaide_m, adelaide_with, least_trace_one, named_opoly, unit_circle, Family, OPoly, Oval};
use ovalforge::projspace::ProjPoint;
use ovalforge::titsgq::{enumerate_spreads, fan_from_spread, spread_classes, spread_from_fan, TitsGQ};
use ovalforge::{Fe, Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, name: &str, ok: bool, detail: String, start: Instant, limit_secs: u64) {
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(limit_secs);
    let pass = ok && in_time;
    println!(
        "criterion {n} {name}: {} ({detail}; {:.1}s, limit {limit_secs}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok, "criterion {n} {name}: {detail}");
    assert!(in_time, "criterion {n} {name} exceeded {limit_secs}s");
}

fn gf(q: usize) -> &'static Field {
    Field::of_order(q).unwrap()
}

fn top() -> ProjPoint<3> {
    ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE])
}

#[test]
fn criterion_1_oval_census() {
    let start = Instant::now();
    let c4 = oval_census(4).unwrap();
    let c8 = oval_census(8).unwrap();
    let conics8 = c8.report.classes.iter().filter(|c| c.is_conic).count();
    let pointed8 = c8
        .ovals
        .iter()
        .filter(|o| !o.is_conic() && o.points().iter().any(|p| ovalforge::classify::is_conic_but(o, p)))
        .count();
    let ok = c4.report.classes.len() == 1 && c8.report.classes.len() == 2 && conics8 == 1 && pointed8 == 1;
    let detail = format!(
        "q=4: {} class, q=8: {} classes ({conics8} conic, {pointed8} pointed conic)",
        c4.report.classes.len(),
        c8.report.classes.len()
    );
    report(1, "oval census", ok, detail, start, 60);
}

/// Fans built from the flock and from the normalized swapped flock of a
/// q-clan.
fn clan_fans(c: &QClan) -> Vec<GeneralizedFan> {
    let f = c.field();
    let h = f.h();
    let fl = c.to_flock();
    let (a, b) = fl.outer();
    let mut fans = vec![fan_from_flock(&a, &b, h - 1).unwrap()];
    let half = fl.swap().normalize().unwrap().flock;
    let (fh, gh) = half.outer();
    fans.push(fan_from_flock(&fh, &gh, 1).unwrap());
    fans
}

#[test]
fn criterion_2_fan_spread_round_trips() {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = 0;
    // every spread of T2(C) at q = 4 through the point (0,0,1)
    let f4 = gf(4);
    let t4 = TitsGQ::new(Oval::d_form(&OPoly::monomial(f4, 2)).unwrap());
    let spreads = enumerate_spreads(&t4, &top(), None).unwrap();
    for s in &spreads {
        let fan = fan_from_spread(&t4, s).unwrap();
        let (t, back) = spread_from_fan(&fan).unwrap();
        checked += 1;
        if t.oval() != t4.oval() || &back != s || !fan.is_valid() {
            failures += 1;
        }
    }
    let n4 = spreads.len();
    // constructed fans at q = 8, 16
    let mut clans = Vec::new();
    for q in [8, 16] {
        let f = gf(q);
        clans.push(classical_clan(f, least_trace_one(f)));
        if let Ok(c) = named_clan(f, "subiaco") {
            clans.push(c);
        }
    }
    for c in &clans {
        for fan in clan_fans(c) {
            checked += 2;
            let (t, s) = spread_from_fan(&fan).unwrap();
            let back = fan_from_spread(&t, &s).unwrap();
            if back != fan {
                failures += 1;
            }
            let (t2, s2) = spread_from_fan(&back).unwrap();
            if t2.oval() != t.oval() || s2 != s {
                failures += 1;
            }
        }
    }
    let ok = failures == 0 && n4 == 24;
    let detail =
        format!("{checked} round trips ({n4} spreads at q=4, {} clans at q=8,16), {failures} failures", clans.len());
    report(2, "fan-spread round trips", ok, detail, start, 600);
}

#[test]
fn criterion_3_spread_enumeration() {
    let start = Instant::now();
    let mut counts = Vec::new();
    for q in [4, 8] {
        let f = gf(q);
        let t = TitsGQ::new(Oval::d_form(&OPoly::monomial(f, 2)).unwrap());
        let spreads = enumerate_spreads(&t, &top(), None).unwrap();
        let classes = spread_classes(&t, &spreads).unwrap();
        counts.push((q, spreads.len(), classes.len()));
    }
    let ok = counts[0].2 == 1 && counts[1].2 >= 2;
    let detail =
        counts.iter().map(|(q, s, c)| format!("q={q}: {s} spreads, {c} class(es)")).collect::<Vec<_>>().join(", ");
    report(3, "exhaustive spread enumeration", ok, detail, start, 1800);
}

#[test]
fn criterion_4_matching_oracle() {
    let start = Instant::now();
    let f = gf(8);
    let ovals = [Oval::d_form(&OPoly::monomial(f, 2)).unwrap(), Oval::d_form(&OPoly::monomial(f, 4)).unwrap()];
    let pairs: Vec<_> = ovals.iter().flat_map(|o| pairs_for_points(o, &off_points(o)).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut disagreements = 0;
    let mut matches = 0;
    for _ in 0..200 {
        let a = &pairs[rng.gen_range(0..pairs.len())];
        let b = &pairs[rng.gen_range(0..pairs.len())];
        let fast = pairs_match(a, b);
        if fast != pairs_match_brute(a, b) {
            disagreements += 1;
        }
        matches += usize::from(fast);
    }
    let detail = format!("200 pair-pairs, {matches} matching, {disagreements} disagreements");
    report(4, "matching oracle", disagreements == 0 && matches > 0, detail, start, 300);
}

fn herd_ok(c: &QClan) -> bool {
    let k = c.kappa();
    herd_from_clan(c, k).is_ok_and(|h| h.check().is_ok())
}

fn brute_anisotropic(f: &Field, a: Fe, b: Fe, c: Fe) -> bool {
    f.elements().all(|x| {
        f.elements().all(|y| {
            (x.is_zero() && y.is_zero())
                || !(f.mul(a, f.square(x)) + f.mul(b, f.mul(x, y)) + f.mul(c, f.square(y))).is_zero()
        })
    })
}

#[test]
fn criterion_5_clan_flock_herd_coherence() {
    let start = Instant::now();
    let mut cases = 0;
    let mut failures = Vec::new();
    let mut valid = 0;
    for q in [8, 16] {
        let f = gf(q);
        let k = least_trace_one(f);
        let mut clans: Vec<QClan> = f.nonzero().map(|kappa| classical_clan(f, kappa)).collect();
        if let Ok(c) = named_clan(f, "subiaco") {
            clans.push(c);
        }
        // clans (f0, k finf) over pairs of monomial o-polynomials
        let monos: Vec<OPoly> = (1..q as u64).map(|e| OPoly::monomial(f, e)).filter(|m| m.is_opermutation()).collect();
        for a in &monos {
            for b in &monos {
                let bv = b.values().iter().map(|&x| f.mul(k, x)).collect();
                clans.push(QClan::new(f, a.values().to_vec(), bv).unwrap());
            }
        }
        for c in &clans {
            cases += 1;
            let cv = c.is_valid();
            let fl = c.to_flock();
            let fv = fl.is_valid();
            let hv = herd_ok(c);
            let sv = fl.swap().is_valid();
            valid += usize::from(cv);
            if !(cv == fv && fv == hv && fv == sv) {
                failures.push(format!("q={q} clan={cv} flock={fv} herd={hv} swap={sv}"));
            }
        }
    }
    let f = gf(64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut aniso_fail = 0;
    let mut aniso_true = 0;
    for _ in 0..1000 {
        let [a, b, c] = [0; 3].map(|_| Fe(rng.gen_range(0..64)));
        let fast = anisotropic(f, a, b, c);
        aniso_true += usize::from(fast);
        if fast != brute_anisotropic(f, a, b, c) {
            aniso_fail += 1;
        }
    }
    let ok = failures.is_empty() && aniso_fail == 0 && valid > 0 && valid < cases;
    let detail = format!(
        "{cases} clans ({valid} valid), {} mismatches; 1000 matrices ({aniso_true} anisotropic), {aniso_fail} mismatches{}",
        failures.len(),
        failures.first().map(|f| format!(" (first: {f:?})")).unwrap_or_default()
    );
    report(5, "clan/flock/herd coherence", ok, detail, start, 600);
}

/// All o-permutations of GF(q) with `f(1) = 1`.
fn all_opermutations(f: &'static Field) -> Vec<OPoly> {
    let q = f.q();
    let mut out = Vec::new();
    let mut rest: Vec<u8> = (2..q as u8).collect();
    permute(&mut rest, 0, &mut |p| {
        let mut vals = vec![Fe::ZERO, Fe::ONE];
        vals.extend(p.iter().map(|&x| Fe(x)));
        let g = OPoly::from_values(f, vals).unwrap();
        if g.is_opermutation() {
            out.push(g);
        }
    });
    out
}

fn permute(v: &mut Vec<u8>, k: usize, visit: &mut dyn FnMut(&[u8])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

fn random_psi(f: &Field, rng: &mut ChaCha8Rng) -> MagicElement {
    loop {
        let [a, b, c, d] = [0; 4].map(|_| Fe(rng.gen_range(0..f.q()) as u8));
        if let Ok(m) = MagicElement::new(f, a, b, c, d, rng.gen_range(0..f.h())) {
            return m;
        }
    }
}

#[test]
fn criterion_6_magic_action() {
    let start = Instant::now();
    let mut checks = 0usize;
    let mut failures = 0usize;
    for q in [4, 8, 16] {
        let f = gf(q);
        let pool: Vec<OPoly> = if q <= 8 {
            all_opermutations(f)
        } else {
            let mut p: Vec<OPoly> =
                (1..q as u64).map(|e| OPoly::monomial(f, e)).filter(|m| m.is_opermutation()).collect();
            p.push(named_opoly(f, Family::SubiacoI).unwrap_or_else(|_| OPoly::monomial(f, 2)));
            p
        };
        let elems = pgl2_elements(f);
        let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
        for g in &pool {
            let sample: Vec<MagicElement> =
                if q == 4 { elems.clone() } else { (0..60).map(|_| random_psi(f, &mut rng)).collect() };
            for psi in &sample {
                let img = magic_apply(psi, g).unwrap();
                let other = sample[rng.gen_range(0..sample.len())];
                let law = magic_apply(&other, &img).unwrap() == magic_apply(&other.compose(f, psi), g).unwrap();
                checks += 1;
                if !img.is_opermutation() || !law {
                    failures += 1;
                }
            }
        }
    }
    // magic equivalence against projective equivalence of O(f), O(g)
    let f = gf(8);
    let pool = all_opermutations(f);
    let mut geo_fail = 0;
    let mut equivalent = 0;
    for x in &pool {
        for y in &pool {
            let magic = magic_equivalent(x, y).is_some();
            let ox = Oval::o_form(x).unwrap();
            let oy = Oval::o_form(y).unwrap();
            let geo = find_set_map(f, ox.points(), oy.points(), Some((ox.nucleus(), oy.nucleus()))).unwrap().is_some();
            equivalent += usize::from(magic);
            if magic != geo {
                geo_fail += 1;
            }
        }
    }
    let n = pool.len();
    let detail = format!(
        "{checks} action checks, {failures} failures; {n}x{n} o-permutation pairs at q=8 ({equivalent} equivalent), {geo_fail} disagreements"
    );
    report(6, "magic action", failures == 0 && geo_fail == 0, detail, start, 900);
}

#[test]
#[ignore = "q = 64, several minutes"]
fn criterion_7_census_q64() {
    let start = Instant::now();
    let f = gf(64);
    let census = oval_census(64).unwrap();
    let classes = census.report.classes.len();
    let mut problems = Vec::new();
    if classes != 19 {
        problems.push(format!("{classes} classes"));
    }
    let top_orbit = |fp: &OPoly| {
        let d = Oval::d_form(fp).unwrap();
        let (_, o) = oval_stabilizer(&d).unwrap();
        let mut l = o.lengths();
        l.sort();
        let tl = o.orbits[o.orbit_of(&top()).unwrap()].len();
        (l, tl)
    };
    let expect: [(Family, Vec<usize>, Option<usize>); 3] = [
        (Family::SubiacoI, vec![5, 60], Some(60)),
        (Family::SubiacoII, vec![5, 15, 15, 15, 15], Some(15)),
        (Family::Adelaide { minus: false }, vec![1, 4, 12, 12, 12, 12, 12], None),
    ];
    let mut orbit_text = Vec::new();
    for (fam, lengths, top_len) in expect {
        let g = named_opoly(f, fam).unwrap().inverse().unwrap();
        let (l, tl) = top_orbit(&g);
        orbit_text.push(format!("{l:?} with (0,0,1) in {tl}"));
        if l != lengths || top_len.is_some_and(|t| t != tl) {
            problems.push(format!("{fam:?}^-1 orbits {l:?}, (0,0,1) in orbit of {tl}"));
        }
    }
    // where (0,0,1) lands in D(f_A^-1) depends on beta; order 5 puts it in the orbit of length 4
    let e = Ext2::new(f);
    let beta = unit_circle(&e).into_iter().find(|&b| b != Fe2::ONE && e.pow(b, 5) == Fe2::ONE).unwrap();
    let fa = adelaide_with(f, beta, adelaide_m(f, false).unwrap()).inverse().unwrap();
    let (l, tl) = top_orbit(&fa);
    orbit_text.push(format!("(beta of order 5: {l:?} with (0,0,1) in {tl})"));
    if tl != 4 {
        problems.push(format!("beta of order 5: (0,0,1) in orbit of {tl}"));
    }
    let screen = screen_fan_candidates(&census).unwrap();
    if screen.stored_pairs != 45107 {
        problems.push(format!("{} stored pairs", screen.stored_pairs));
    }
    let survivors: Vec<String> = screen
        .survivors
        .iter()
        .map(|(c, p)| {
            let cl = &census.report.classes[*c];
            let odd = screen.classes[*c].anchors.iter().any(|a| a.anchor == *p && a.conic_but_anchor);
            format!(
                "{}{}",
                if cl.is_conic { "conic" } else { "pointed conic" },
                if odd { " at its odd point" } else { "" }
            )
        })
        .collect();
    let want: BTreeSet<String> = ["conic".to_string(), "pointed conic at its odd point".to_string()].into();
    if survivors.iter().cloned().collect::<BTreeSet<_>>() != want || survivors.len() != 2 {
        problems.push(format!("survivors {survivors:?}"));
    }
    let transport = verify_orbit_transport().unwrap();
    if !transport.holds {
        problems.push("orbit transport fails".into());
    }
    let detail = format!(
        "{classes} classes; inverse-herd orbits {}; {} stored pairs; survivors {survivors:?}; transport {}/{}{}",
        orbit_text.join(" "),
        screen.stored_pairs,
        transport.cases.iter().filter(|c| c.pool_index.is_some()).count(),
        transport.cases.len(),
        if problems.is_empty() { String::new() } else { format!("; problems {problems:?}") }
    );
    report(7, "q=64 census and orbits", problems.is_empty(), detail, start, 4 * 3600);
}

#[test]
#[ignore = "q = 64, several minutes"]
fn criterion_8_generators_and_spreads_q64() {
    let start = Instant::now();
    let f = gf(64);
    let mut problems = Vec::new();
    let mut gen_text = Vec::new();
    for (name, _, flock) in seeded_herds(f).unwrap() {
        let l = generator_orbits(&flock).unwrap().lengths();
        let want = if name == "linear" { vec![65] } else { vec![1, 4, 12, 12, 12, 12, 12] };
        gen_text.push(format!("{name} {l:?}"));
        if l != want {
            problems.push(format!("{name} generator orbits {l:?}"));
        }
    }
    let report_ = classify_spreads(64, None).unwrap();
    problems.extend(report_.conflicts.iter().cloned());
    let mut tally = std::collections::BTreeMap::new();
    for o in &report_.ovals {
        let kind = if o.is_conic {
            "conic"
        } else if report_.herd_matches.iter().any(|m| m.class == o.class && m.kind == "inverse") {
            "inverse herd"
        } else {
            "herd"
        };
        let counts: Vec<usize> = o.anchors.iter().map(|a| a.classes).collect();
        let ok = match kind {
            "conic" => counts.iter().all(|&c| c == 1),
            "inverse herd" => counts.iter().all(|&c| c == 7),
            _ => {
                let marked: HashSet<usize> = report_
                    .herd_matches
                    .iter()
                    .filter(|m| m.class == o.class && m.kind == "herd")
                    .map(|m| m.anchor_orbit)
                    .collect();
                marked.len() == 1 && counts.iter().enumerate().all(|(k, &c)| c == usize::from(marked.contains(&k)))
            }
        };
        if !ok {
            problems.push(format!("class {} ({kind}) counts {counts:?}", o.class));
        }
        *tally.entry(kind).or_insert(0) += 1;
    }
    let detail = format!(
        "generator orbits {}; classes by kind {tally:?}{}",
        gen_text.join(", "),
        if problems.is_empty() { String::new() } else { format!("; problems {problems:?}") }
    );
    report(8, "q=64 generator orbits and spread counts", problems.is_empty(), detail, start, 4 * 3600);
}
