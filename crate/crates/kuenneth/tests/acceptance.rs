//! End-to-end acceptance suite. Each criterion prints a single PASS/FAIL
//! line; the test fails if any criterion fails. Run with `--nocapture` to see
//! the lines on success.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kuenneth::algebra::{
    AlgebraElement, AlgebraPresentation, CoefficientMode, GeneratorSpec, Monomial, Parity,
};
use kuenneth::comparison::{
    homotopy_between, lift_map, random_exact_resolution, verify_chain_map, verify_homotopy,
    ChainMapLift, FpResolution,
};
use kuenneth::descriptor::builtin;
use kuenneth::fp::FpMatrix;
use kuenneth::pipeline::{
    audit_degree_additivity, check_realizability, compute_dl_action, compute_smash_homotopy,
    tor_computation, Provenance, Verdict,
};
use kuenneth::steenrod::{
    cartan_expand, conjugate, conjugate_compositions, conjugate_tau, conjugate_xi, DLOperation,
    DualSteenrodElement, QValue,
};

type CriterionResult = Result<(), String>;

fn fail(msg: impl Into<String>) -> CriterionResult {
    Err(msg.into())
}

fn within(start: Instant, budget: Duration, what: &str) -> CriterionResult {
    let elapsed = start.elapsed();
    if elapsed > budget {
        return fail(format!("{what} took {elapsed:?}, budget {budget:?}"));
    }
    Ok(())
}

// -- 1: ku at p = 2, exact class list through the CLI ------------------------

fn criterion_1() -> CriterionResult {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_kuenneth"))
        .args(["tor", "--ring", "ku", "--prime", "2", "--max-degree", "8"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return fail(format!("tor exited with {:?}", out.status.code()));
    }
    let table: serde_json::Value =
        serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let classes = table["classes"]
        .as_array()
        .ok_or("no classes array")?
        .iter()
        .map(|c| {
            (
                c["label"].as_str().unwrap_or("").to_string(),
                c["s"].as_u64().unwrap_or(99),
                c["total"].as_u64().unwrap_or(99),
            )
        })
        .collect::<Vec<_>>();
    let expected = [
        ("1".to_string(), 0, 0),
        ("2b".to_string(), 1, 1),
        ("vb".to_string(), 1, 3),
        ("2b*vb".to_string(), 2, 4),
    ];
    if classes.len() != 4 || expected.iter().any(|e| !classes.contains(e)) {
        return fail(format!("class list mismatch: {classes:?}"));
    }
    within(start, Duration::from_secs(1), "ku tor")
}

// -- 2: ku Dyer-Lashof tables at p = 2 and p = 3 -----------------------------

fn criterion_2() -> CriterionResult {
    let ku2 = builtin("ku", 2, Some(8)).map_err(|e| e.to_string())?;
    let t2 = compute_dl_action(&ku2, 8).map_err(|e| e.to_string())?;
    let nz = t2.nonzero_entries();
    if nz.len() != 1 {
        return fail(format!("ku p=2: expected one nonzero entry, got {}", nz.len()));
    }
    let e = nz[0];
    if e.op != DLOperation::q(2) || e.source != "2b" || e.target.as_deref() != Some("vb") {
        return fail(format!("ku p=2: unexpected entry {e:?}"));
    }

    let ku3 = builtin("ku", 3, Some(8)).map_err(|e| e.to_string())?;
    let t3 = compute_dl_action(&ku3, 8).map_err(|e| e.to_string())?;
    if !t3.nonzero_entries().is_empty() {
        return fail("ku p=3: expected an empty table".to_string());
    }
    if !t3.notes.iter().any(|n| n.contains("degree reasons")) {
        return fail(format!("ku p=3: missing degree-reasons note; notes = {:?}", t3.notes));
    }
    Ok(())
}

// -- 3: BP<2> at p = 2: classes, four operations, Cartan consistency ---------

fn criterion_3() -> CriterionResult {
    let start = Instant::now();
    let desc = builtin("BP2", 2, Some(12)).map_err(|e| e.to_string())?;
    let smash = compute_smash_homotopy(&desc, 12).map_err(|e| e.to_string())?;
    let mut totals: Vec<u32> = smash.classes.iter().map(|c| c.total).collect();
    totals.sort_unstable();
    if totals != vec![0, 1, 3, 4, 7, 8, 10, 11] {
        return fail(format!("BP<2> totals: {totals:?}"));
    }

    let table = compute_dl_action(&desc, 12).map_err(|e| e.to_string())?;
    let nz = table.nonzero_entries();
    let got: Vec<(String, String, Option<String>)> = nz
        .iter()
        .map(|e| (e.op.display(), e.source.clone(), e.target.clone()))
        .collect();
    let expected = vec![
        ("Q^2".to_string(), "2b".to_string(), Some("v1b".to_string())),
        ("Q^6".to_string(), "2b".to_string(), Some("v2b".to_string())),
        ("Q^4".to_string(), "v1b".to_string(), Some("v2b".to_string())),
        ("Q^6".to_string(), "2b*v1b".to_string(), Some("v1b*v2b".to_string())),
    ];
    if got != expected {
        return fail(format!("BP<2> operations: {got:?}"));
    }
    if nz[3].provenance != Provenance::Cartan {
        return fail("BP<2>: Q^6(2b*v1b) should be a Cartan entry".to_string());
    }

    // Independent re-derivation of Q^6(2b*v1b) by Cartan expansion seeded
    // only with the three generator-level operations.
    let pres = AlgebraPresentation::new(
        2,
        CoefficientMode::Fp,
        vec![
            GeneratorSpec::exterior("2b", 1, Parity::Odd),
            GeneratorSpec::exterior("v1b", 3, Parity::Odd),
            GeneratorSpec::exterior("v2b", 7, Parity::Odd),
        ],
        12,
    )
    .map_err(|e| e.to_string())?;
    let monomial = |exps: [u32; 3]| {
        AlgebraElement::from_terms(&pres, vec![(Monomial { exps: exps.to_vec() }, 1)])
    };
    let lookup = |s: u32, idx: usize| -> QValue {
        QValue::Known(match (idx, s) {
            (0, 2) => monomial([0, 1, 0]),
            (0, 6) | (1, 4) => monomial([0, 0, 1]),
            _ => pres.zero(),
        })
    };
    let x = monomial([1, 1, 0]);
    let q6 = cartan_expand(&pres, 6, &x, &lookup).map_err(|e| e.to_string())?;
    let expected_elt = monomial([0, 1, 1]);
    if q6 != expected_elt {
        return fail(format!("Cartan re-derivation gave {}", q6.display()));
    }
    within(start, Duration::from_secs(1), "BP<2> suite")
}

// -- 4: truncated MU at p = 2 ------------------------------------------------

fn criterion_4() -> CriterionResult {
    let start = Instant::now();
    let desc = builtin("MU", 2, Some(16)).map_err(|e| e.to_string())?;
    let smash = compute_smash_homotopy(&desc, 16).map_err(|e| e.to_string())?;
    let mut gens: Vec<(String, u32)> = smash
        .generators
        .iter()
        .map(|g| (g.label.clone(), g.total_degree))
        .collect();
    gens.sort();
    let mut expected: Vec<(String, u32)> =
        (1..=8).map(|n| (format!("x{n}b"), 2 * n + 1)).collect();
    expected.push(("2b".to_string(), 1));
    expected.sort();
    if gens != expected {
        return fail(format!("MU exterior generators: {gens:?}"));
    }

    let table = compute_dl_action(&desc, 16).map_err(|e| e.to_string())?;
    let wanted = [
        (DLOperation::q(2), "2b", "x1b"),
        (DLOperation::q(6), "2b", "x3b"),
        (DLOperation::q(4), "x1b", "x3b"),
        (DLOperation::q(8), "x3b", "x7b"),
    ];
    for (op, src, tgt) in wanted {
        match table.lookup(op, src) {
            Some(e) if e.target.as_deref() == Some(tgt) => {}
            other => {
                return fail(format!("MU: {}({src}) -> {other:?}, wanted {tgt}", op.display()))
            }
        }
    }
    within(start, Duration::from_secs(10), "MU suite")
}

// -- 5: MU with the Hurewicz module vs the generating-function oracle --------

/// Counting oracle: dims of P ⊗ E where P is polynomial on even classes of
/// degree 2(2^k - 1) and E is exterior on one class in bidegree (1, 0) and
/// one in (1, 2(2^k - 1)) per k, all truncated at internal degree `t_max`.
fn hurewicz_oracle(t_max: u32) -> BTreeMap<(usize, u32), usize> {
    let mut poly_degrees = Vec::new();
    let mut k = 1u32;
    loop {
        let d = 2 * (2u32.pow(k) - 1);
        if d > t_max {
            break;
        }
        poly_degrees.push(d);
        k += 1;
    }
    // multiset count per degree
    let mut poly = vec![0usize; (t_max + 1) as usize];
    poly[0] = 1;
    for &d in &poly_degrees {
        for t in d..=t_max {
            poly[t as usize] += poly[(t - d) as usize];
        }
    }
    let mut ext_degrees = vec![0u32];
    ext_degrees.extend(poly_degrees.iter().copied().filter(|&d| d <= t_max));
    let mut dims = BTreeMap::new();
    let n = ext_degrees.len();
    for mask in 0u32..(1 << n) {
        let s = mask.count_ones() as usize;
        let t_ext: u32 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ext_degrees[i]).sum();
        if t_ext > t_max {
            continue;
        }
        for t_poly in 0..=(t_max - t_ext) {
            let c = poly[t_poly as usize];
            if c > 0 {
                *dims.entry((s, t_ext + t_poly)).or_insert(0) += c;
            }
        }
    }
    dims
}

fn criterion_5() -> CriterionResult {
    let mut desc = builtin("MU", 2, Some(12)).map_err(|e| e.to_string())?;
    desc.module = desc.hurewicz_module().map_err(|e| e.to_string())?;
    let comp = tor_computation(&desc, 12).map_err(|e| e.to_string())?;
    let oracle = hurewicz_oracle(12);
    if comp.table.dims != oracle {
        return fail(format!(
            "dims mismatch: computed {:?}, oracle {:?}",
            comp.table.dims, oracle
        ));
    }
    Ok(())
}

// -- 6: conjugation identities -----------------------------------------------

fn antipode_identity(p: u32, n: u32) -> Result<bool, String> {
    // sum_{i=0..n} xi_{n-i}^{p^i} chi(xi_i), with xi_0 = 1 and chi(xi_0) = 1
    let mut acc = DualSteenrodElement::zero(p);
    for i in 0..=n {
        let left = if n == i {
            DualSteenrodElement::one(p)
        } else {
            DualSteenrodElement::xi(p, n - i).pow(p.pow(i)).map_err(|e| e.to_string())?
        };
        let right = if i == 0 {
            DualSteenrodElement::one(p)
        } else {
            conjugate_xi(p, i).map_err(|e| e.to_string())?
        };
        let term = left.multiply(&right).map_err(|e| e.to_string())?;
        acc = acc.add(&term).map_err(|e| e.to_string())?;
    }
    Ok(acc.is_zero())
}

fn criterion_6() -> CriterionResult {
    let start = Instant::now();
    let chi2 = conjugate_xi(2, 2).map_err(|e| e.to_string())?;
    let expected = DualSteenrodElement::xi(2, 2)
        .add(&DualSteenrodElement::xi(2, 1).pow(3).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    if chi2 != expected {
        return fail(format!("chi(xi_2) = {}", chi2.display()));
    }
    for p in [2, 3] {
        for i in 1..=5 {
            let a = conjugate_xi(p, i).map_err(|e| e.to_string())?;
            let b = conjugate_compositions(p, i).map_err(|e| e.to_string())?;
            if a != b {
                return fail(format!("p={p}: recursive and compositions differ at xi_{i}"));
            }
        }
    }
    for p in [2u32, 3, 5] {
        for i in 1..=5 {
            let chi = conjugate_xi(p, i).map_err(|e| e.to_string())?;
            let back = conjugate(&chi).map_err(|e| e.to_string())?;
            if back != DualSteenrodElement::xi(p, i) {
                return fail(format!("p={p}: chi(chi(xi_{i})) != xi_{i}"));
            }
        }
        if p != 2 {
            for j in 1..=3 {
                let chi = conjugate_tau(p, j).map_err(|e| e.to_string())?;
                let back = conjugate(&chi).map_err(|e| e.to_string())?;
                if back != DualSteenrodElement::tau(p, j).map_err(|e| e.to_string())? {
                    return fail(format!("p={p}: chi(chi(tau_{j})) != tau_{j}"));
                }
            }
        }
        for n in 1..=5 {
            if !antipode_identity(p, n)? {
                return fail(format!("p={p}: antipode identity fails at n={n}"));
            }
        }
    }
    within(start, Duration::from_secs(5), "conjugation suite")
}

// -- 7: realizability verdicts ----------------------------------------------

fn criterion_7() -> CriterionResult {
    let ideal = |gens: &[&str]| gens.iter().map(|s| s.to_string()).collect::<Vec<_>>();

    let report = check_realizability(&ideal(&["2", "x1"]), 2, false).map_err(|e| e.to_string())?;
    if report.verdict != Verdict::Obstructed {
        return fail(format!("(2, x1): verdict {:?}", report.verdict));
    }
    let w = report.witness.clone().ok_or("(2, x1): no witness")?;
    if w.in_ideal != "x1" || w.operation != DLOperation::q(4) || w.escapes != "x3" {
        return fail(format!("(2, x1): witness {w:?}"));
    }

    let report2 = check_realizability(&ideal(&["x2"]), 2, false).map_err(|e| e.to_string())?;
    if report2.verdict != Verdict::ConditionNotMet {
        return fail(format!("(x2): verdict {:?}", report2.verdict));
    }

    let perm = check_realizability(&ideal(&["x1", "2"]), 2, false).map_err(|e| e.to_string())?;
    if perm != report {
        return fail("(x1, 2): report differs from (2, x1)".to_string());
    }
    let a = check_realizability(&ideal(&["2", "x1", "x3", "x7"]), 2, false)
        .map_err(|e| e.to_string())?;
    let b = check_realizability(&ideal(&["x7", "x3", "2", "x1"]), 2, false)
        .map_err(|e| e.to_string())?;
    if a != b {
        return fail("verdict not invariant under generator permutation".to_string());
    }
    Ok(())
}

// -- 8: randomized comparison-engine suite -----------------------------------

fn random_matrix(p: u32, rows: usize, cols: usize, rng: &mut dyn FnMut() -> u32) -> FpMatrix {
    let data: Vec<Vec<u32>> = (0..rows).map(|_| (0..cols).map(|_| rng() % p).collect()).collect();
    FpMatrix::from_dense(p, &data)
}

/// A second lift of the same map: f' = f + d_G r + r d_F for random r.
fn perturbed_lift(
    lift: &ChainMapLift,
    f: &FpResolution,
    g: &FpResolution,
    rng: &mut dyn FnMut() -> u32,
) -> Result<ChainMapLift, String> {
    let p = f.p;
    let levels = lift.maps.len();
    let r: Vec<FpMatrix> = (0..levels)
        .map(|i| {
            random_matrix(
                p,
                g.dims.get(i + 1).copied().unwrap_or(0),
                f.dims.get(i).copied().unwrap_or(0),
                rng,
            )
        })
        .collect();
    let mut maps = Vec::with_capacity(levels);
    for i in 0..levels {
        let mut m = lift.maps[i].clone();
        if i < g.diffs.len() {
            m = m.add(&g.diffs[i].mul(&r[i]).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        }
        if i > 0 && i - 1 < f.diffs.len() {
            m = m.add(&r[i - 1].mul(&f.diffs[i - 1]).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        }
        maps.push(m);
    }
    Ok(ChainMapLift { maps, certified: false })
}

fn criterion_8() -> CriterionResult {
    let start = Instant::now();
    let mut chacha = ChaCha8Rng::seed_from_u64(0x6b75_656e);
    let mut rng = move || chacha.next_u32();
    for trial in 0..200 {
        let levels = 1 + (rng() as usize) % 3;
        let f = random_exact_resolution(2, levels, 4, &mut rng);
        let g = random_exact_resolution(2, levels, 4, &mut rng);
        f.validate().map_err(|e| format!("trial {trial}: source not exact: {e}"))?;
        g.validate().map_err(|e| format!("trial {trial}: target not exact: {e}"))?;
        let phi = random_matrix(2, g.aug.rows, f.aug.rows, &mut rng);
        let lift = lift_map(&phi, &f, &g).map_err(|e| format!("trial {trial}: {e}"))?;
        let (ok, level) =
            verify_chain_map(&lift, &phi, &f, &g).map_err(|e| format!("trial {trial}: {e}"))?;
        if !ok {
            return fail(format!("trial {trial}: lift fails at level {level:?}"));
        }
        let other = perturbed_lift(&lift, &f, &g, &mut rng)?;
        let (ok2, level2) =
            verify_chain_map(&other, &phi, &f, &g).map_err(|e| format!("trial {trial}: {e}"))?;
        if !ok2 {
            return fail(format!("trial {trial}: perturbed lift fails at level {level2:?}"));
        }
        let h = homotopy_between(&lift, &other, &f, &g)
            .map_err(|e| format!("trial {trial}: homotopy: {e}"))?;
        if !verify_homotopy(&h, &lift, &other, &f, &g).map_err(|e| format!("trial {trial}: {e}"))? {
            return fail(format!("trial {trial}: homotopy does not verify"));
        }
    }
    within(start, Duration::from_secs(30), "200 randomized lifts")
}

// -- 9: the odd-primary Adams summand at p = 3 -------------------------------

fn criterion_9() -> CriterionResult {
    let desc = builtin("ell", 3, Some(8)).map_err(|e| e.to_string())?;
    let smash = compute_smash_homotopy(&desc, 8).map_err(|e| e.to_string())?;
    let gens: Vec<(String, u32)> = smash
        .generators
        .iter()
        .map(|g| (g.label.clone(), g.total_degree))
        .collect();
    if gens != vec![("3b".to_string(), 1), ("v1b".to_string(), 5)] {
        return fail(format!("ell generators: {gens:?}"));
    }
    let table = compute_dl_action(&desc, 8).map_err(|e| e.to_string())?;
    let nz = table.nonzero_entries();
    if nz.len() != 1 {
        return fail(format!("ell: expected one nonzero entry, got {}", nz.len()));
    }
    let e = nz[0];
    if e.op != DLOperation::q(1) || e.source != "3b" || e.target.as_deref() != Some("v1b") {
        return fail(format!("ell: unexpected entry {e:?}"));
    }
    if e.sign_known {
        return fail("ell: the sign of Q^1(3b) should be declared unknown".to_string());
    }
    Ok(())
}

// -- 10: degree-additivity audit across all builtins -------------------------

fn criterion_10() -> CriterionResult {
    let cases = [
        ("ku", 2u32),
        ("ku", 3),
        ("ell", 3),
        ("ell", 5),
        ("BP2", 2),
        ("BP2", 3),
        ("MU", 2),
        ("MU", 3),
    ];
    for (name, p) in cases {
        let desc = builtin(name, p, Some(12)).map_err(|e| e.to_string())?;
        let table = compute_dl_action(&desc, 12).map_err(|e| e.to_string())?;
        let violations = audit_degree_additivity(&table);
        if !violations.is_empty() {
            return fail(format!("{name} at p={p}: {violations:?}"));
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> CriterionResult)> = vec![
        ("ku p=2 Tor classes", criterion_1),
        ("ku Dyer-Lashof tables", criterion_2),
        ("BP<2> classes and operations", criterion_3),
        ("truncated MU operations", criterion_4),
        ("MU Hurewicz-module dims vs oracle", criterion_5),
        ("conjugation identities", criterion_6),
        ("realizability verdicts", criterion_7),
        ("randomized lift/homotopy suite", criterion_8),
        ("Adams summand at p=3", criterion_9),
        ("degree-additivity audit", criterion_10),
    ];
    let mut failures = Vec::new();
    for (i, (label, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(()) => println!("criterion {:2} ({label}): PASS", i + 1),
            Err(msg) => {
                println!("criterion {:2} ({label}): FAIL - {msg}", i + 1);
                failures.push(format!("criterion {} ({label}): {msg}", i + 1));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
