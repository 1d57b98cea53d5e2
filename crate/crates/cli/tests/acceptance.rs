//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the report is always printed; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ksphere::atlas::{self, mask_to_chars, DISCREPANCY_FLAG};
use ksphere::charclass::{self, Lambda2Class, Monomial, TruncPoly};
use ksphere::gf2::{self, F2Vec};
use ksphere::laws;
use ksphere::twist::{self, Twist};
use ksphere::{parse_rep, CanonicalRep, KResult, Oracle, RepMultiset};
use ksphere_cli::{run_with, Settings};

const SEED: u64 = 0x6b73_7068;
const PROPERTY_CASES: usize = 1000;
const SAMPLED_CASES: usize = 10_000;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn within(limit: Duration, start: Instant, detail: String) -> Check {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{detail}; {took:.2?} (limit {limit:?})"))
    } else {
        Err(format!("{detail}; took {took:.2?}, over the {limit:?} limit"))
    }
}

fn hard_case() -> Check {
    let start = Instant::now();
    let out = run_with(
        ["ksphere", "compute", "-n", "2", "-V", "a+b+ab", "--method", "both"],
        Settings::default(),
    );
    if out.code != 0 {
        return Err(format!("exit {}: {}{}", out.code, out.stdout, out.stderr));
    }
    if !out.stdout.contains("K^0 = 0, K^1 = Z^1 (m=0, eps=1)") || !out.stdout.contains("engines agree") {
        return Err(format!("unexpected output: {}", out.stdout));
    }
    within(Duration::from_secs(1), start, "m=0, eps=1, engines agree".into())
}

fn published_cases() -> Check {
    let start = Instant::now();
    let mut oracle = Oracle::new();
    let report = atlas::published_case_report(&mut oracle).map_err(|e| e.to_string())?;
    let rows = atlas::enumerate(3, atlas::Mode::Exhaustive).map_err(|e| e.to_string())?;
    for case in &report {
        if case.oracle != case.reducer {
            return Err(format!("{}: engines disagree", case.name));
        }
        let flagged = case.flags.iter().any(|f| f == DISCREPANCY_FLAG);
        let chars = parse_rep(case.expr, 3).map_err(|e| e.to_string())?.summands();
        let row_flagged = rows
            .iter()
            .find(|r| r.chars == chars)
            .is_some_and(|r| r.flags.iter().any(|f| f == DISCREPANCY_FLAG));
        if case.name == "ee1" {
            let expected = oracle
                .k_groups(&parse_rep(case.expr, 3).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            if case.oracle.epsilon != case.published.epsilon || case.oracle != expected || !flagged || !row_flagged {
                return Err(format!("ee1: got {}, flags {:?}", case.oracle, case.flags));
            }
        } else if case.oracle != case.published || flagged || row_flagged {
            return Err(format!(
                "{}: got {}, published {:?}",
                case.name, case.oracle, case.published
            ));
        }
    }
    let ee1 = &report[0];
    within(
        Duration::from_secs(1),
        start,
        format!(
            "ee2..ee6 match; ee1 computed (m={}, eps={}) vs published (m={}, eps={}), flagged",
            ee1.oracle.m, ee1.oracle.epsilon, ee1.published.m, ee1.published.epsilon
        ),
    )
}

fn exhaustive_equivalence() -> Check {
    let start = Instant::now();
    let mut oracle = Oracle::new();
    let mut counts = Vec::new();
    for n in 1..=3 {
        let sets = atlas::all_sets(n).map_err(|e| e.to_string())?;
        counts.push(sets.len());
        for chars in &sets {
            if let Some(f) = atlas::verify_set(n, chars, &mut oracle) {
                return Err(format!("n={n}: {f:?}"));
            }
        }
    }
    if counts != [2, 8, 128] {
        return Err(format!("set counts {counts:?}"));
    }
    within(
        Duration::from_secs(10),
        start,
        "2 + 8 + 128 sets agree and every trace replays".into(),
    )
}

fn power_of_two_rank_four() -> Check {
    let start = Instant::now();
    let mut oracle = Oracle::new();
    let mut total = 0;
    for mask in 0..1u64 << 15 {
        let chars = mask_to_chars(mask);
        let chi = oracle.chi_set(4, &chars).map_err(|e| e.to_string())?.0;
        if chi == 0 || !chi.unsigned_abs().is_power_of_two() || chi.unsigned_abs() > 16 {
            return Err(format!("S={chars:?}: chi = {chi}"));
        }
        total += 1;
    }
    within(
        Duration::from_secs(120),
        start,
        format!("{total} sets, all |chi| in {{1, 2, 4, 8, 16}}"),
    )
}

/// Runs `law` on `cases` seeded inputs, stopping at the first failure.
fn sampled<F>(name: &str, cases: usize, rng: &mut ChaCha8Rng, mut law: F) -> Result<(), String>
where
    F: FnMut(&mut ChaCha8Rng) -> laws::LawResult,
{
    for i in 0..cases {
        law(rng).map_err(|e| format!("{name} case {i}: {e}"))?;
    }
    Ok(())
}

fn property_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut oracle = Oracle::new();
    let o = &mut oracle;
    let cases = PROPERTY_CASES;
    sampled("P1", cases, &mut rng, |r| {
        let n = r.gen_range(1..=5);
        let rep = laws::random_rep(r, n, 12);
        laws::check_suspension(o, &rep)
    })?;
    sampled("P2", cases, &mut rng, |r| {
        let n = r.gen_range(1..=5);
        let rep = laws::random_rep(r, n, 7);
        let pair = laws::random_char(r, n);
        laws::check_complex_pair(&rep, pair)
    })?;
    sampled("P3", cases, &mut rng, |r| {
        let n = r.gen_range(1..=5);
        let rep = laws::random_rep(r, n, 12);
        let a = laws::random_gl(r, n);
        laws::check_gl_invariance(o, &rep, &a)
    })?;
    sampled("P4", cases, &mut rng, |r| {
        let n = r.gen_range(3..=5);
        let set = laws::random_set(r, n);
        let triple = laws::random_independent_triple(r, n);
        laws::check_toggle(o, n, &set, triple)
    })?;
    sampled("P5", cases, &mut rng, |r| {
        let n = r.gen_range(1..=5);
        let (s1, s2) = laws::random_split_sets(r, n);
        laws::check_kunneth(o, n, &s1, &s2)
    })?;
    sampled("P7", cases, &mut rng, |r| {
        let n = r.gen_range(1..=5);
        let rep = laws::random_rep(r, n, 7);
        let orders = laws::shuffled_orders(r, &rep, 4);
        laws::check_order_independence(&rep, 24, &orders)
    })?;
    Ok(format!(
        "P1, P2, P3, P4, P5, P7: {cases} cases each at n <= 5, seed {SEED:#x}, no failures"
    ))
}

fn characteristic_classes() -> Check {
    let mut triples = 0;
    for n in 3..=4 {
        let nonzero: Vec<F2Vec> = (1..1u16 << n).map(F2Vec).collect();
        for (i, &a) in nonzero.iter().enumerate() {
            for (j, &b) in nonzero.iter().enumerate().skip(i + 1) {
                for &c in &nonzero[j + 1..] {
                    if !gf2::is_independent(&[a, b, c]) {
                        continue;
                    }
                    let octet = charclass::spin_octet(n, a, b, c);
                    let w1 = charclass::w_k(&octet, 1).map_err(|e| e.to_string())?;
                    let w2 = charclass::w_k(&octet, 2).map_err(|e| e.to_string())?;
                    if !w1.is_zero() || !w2.is_zero() {
                        return Err(format!("octet on {a:?},{b:?},{c:?}: w1 = {w1}, w2 = {w2}"));
                    }
                    triples += 1;
                }
            }
        }
    }
    let mut quartets = 0;
    let n = 4;
    for i in 1..=n {
        for j in i + 1..=n {
            let q = charclass::twisting_quartet(n, i, j);
            let (xi, xj) = ((i - 1) as u8, (j - 1) as u8);
            let expected = TruncPoly::from_monomials(
                n,
                [
                    Monomial::new(vec![xi, xi]),
                    Monomial::new(vec![xj, xj]),
                    Monomial::new(vec![xi, xj]),
                ],
            );
            let w2 = charclass::w_k(&q, 2).map_err(|e| e.to_string())?;
            if w2 != expected {
                return Err(format!("quartet {i}-{j}: w2 = {w2}"));
            }
            let beta = charclass::bockstein_w2(&q);
            if beta != Lambda2Class::single(i, j) {
                return Err(format!("quartet {i}-{j}: beta w2 = {beta}"));
            }
            quartets += 1;
        }
    }
    Ok(format!(
        "octet w1 = w2 = 0 on {triples} unordered independent triples at n = 3, 4; {quartets} quartets match"
    ))
}

fn twisted_layer() -> Check {
    let n = 3;
    let mut oracle = Oracle::new();
    let reps: Vec<RepMultiset> = (0..1u64 << 7)
        .map(mask_to_chars)
        .filter(|c| c.len() <= 4)
        .map(|c| CanonicalRep::from_set(n, c).expect("fits").to_multiset())
        .collect();
    let twists: Vec<Twist> = (0..8u32)
        .map(|bits| {
            let s: Vec<&str> = ["1-2", "1-3", "2-3"]
                .iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .map(|(_, p)| *p)
                .collect();
            Twist::parse(&s.join(","), n).expect("valid twist")
        })
        .collect();
    let identity = Twist::untwisted(n);
    for v in &reps {
        let plain = oracle.k_groups(v).map_err(|e| e.to_string())?;
        let id = twist::twisted_k_groups_verified(v, &identity, &mut oracle).map_err(|e| e.to_string())?;
        if id != plain {
            return Err(format!("V = {v}: untwisted {plain}, empty twist {id}"));
        }
        for tau in &twists {
            let once = twist::shift_rep(v, tau).map_err(|e| e.to_string())?;
            let twice = twist::twisted_k_groups_verified(&once, tau, &mut oracle).map_err(|e| e.to_string())?;
            if twice != plain {
                return Err(format!(
                    "V = {v}, tau = {tau}: twice twisted {twice}, untwisted {plain}"
                ));
            }
        }
    }
    let zero = RepMultiset::new(2).map_err(|e| e.to_string())?;
    let tau = Twist::parse("1-2", 2).map_err(|e| e.to_string())?;
    let worked = twist::twisted_k_groups_verified(&zero, &tau, &mut oracle).map_err(|e| e.to_string())?;
    let independent = Oracle::literal()
        .k_groups(&parse_rep("1+a+b+ab", 2).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    if worked != KResult::new(0, 0) || worked != independent {
        return Err(format!("worked value {worked}, shifted oracle {independent}"));
    }
    Ok(format!(
        "{} reps x {} twists: identity and double twist hold; V=0, tau=1-2 gives (0,0)",
        reps.len(),
        twists.len()
    ))
}

fn sampled_ranks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut oracle = Oracle::new();
    for n in [5, 6] {
        let sets = atlas::sample_sets(n, SAMPLED_CASES, SEED + n as u64);
        let failures = atlas::verify_sets(n, sets.clone());
        if let Some(f) = failures.first() {
            return Err(format!("n={n}: {} engine failures, first {f:?}", failures.len()));
        }
        for (i, set) in sets.iter().enumerate() {
            let rep = CanonicalRep::from_set(n, set.iter().copied())
                .expect("fits")
                .to_multiset();
            let tag = |e: String| format!("n={n} sample {i}: {e}");
            laws::check_power_of_two(&mut oracle, n, set).map_err(tag)?;
            laws::check_suspension(&mut oracle, &rep).map_err(tag)?;
            let a = laws::random_gl(&mut rng, n);
            laws::check_gl_invariance(&mut oracle, &rep, &a).map_err(tag)?;
            let triple = laws::random_independent_triple(&mut rng, n);
            laws::check_toggle(&mut oracle, n, set, triple).map_err(tag)?;
        }
        // Identities whose check cost grows with the summand count run on
        // short representations.
        let o = &mut oracle;
        sampled("P2", SAMPLED_CASES, &mut rng, |r| {
            let rep = laws::random_rep(r, n, 6);
            let pair = laws::random_char(r, n);
            laws::check_complex_pair(&rep, pair)
        })?;
        sampled("P5", SAMPLED_CASES, &mut rng, |r| {
            let (s1, s2) = laws::random_split_sets(r, n);
            laws::check_kunneth(o, n, &s1, &s2)
        })?;
        sampled("P7", SAMPLED_CASES, &mut rng, |r| {
            let rep = laws::random_rep(r, n, 6);
            let orders = laws::shuffled_orders(r, &rep, 2);
            laws::check_order_independence(&rep, 6, &orders)
        })?;
    }
    Ok(format!(
        "n = 5, 6: {SAMPLED_CASES} sampled sets each, engines agree, power of two, P1-P5 and P7 hold"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("C1 hard case", hard_case),
        ("C2 rank-three cases", published_cases),
        ("C3 exhaustive engine equivalence", exhaustive_equivalence),
        ("C4 power of two at n = 4", power_of_two_rank_four),
        ("C5 property suite", property_suite),
        ("C6 characteristic classes", characteristic_classes),
        ("C7 twisted layer", twisted_layer),
        ("C8 sampled n = 5, 6", sampled_ranks),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
