//! Batch verification suites with seeded, replayable instances and
//! deterministic JSON reports.
//!
//! Every suite runner *generates* a list of instance descriptions (plain
//! JSON values) and feeds each one to [`check_instance`]; `verify` replays
//! a single serialized instance through the very same checker, so any
//! reported failure reproduces bit-exactly.

use std::collections::{BTreeMap, HashSet};

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::affine::{
    build_affine_roots, f_orbits_and_order, howe_support, jumps, parse_rat, sign_change_sequence,
    AffineFrobenius, AffineRoot, ApartmentPoint, HoweDatum, Rat,
};
use crate::convexity::{
    all_levi_subsystems, convex_elements_of_class, delta_set, find_standard_convex,
    order_lemma_check, subadditive_check, LeviSubsystem,
};
use crate::error::{Error, Result};
use crate::gf::{Field, Fq};
use crate::group::{build_model, cross_section_group_check, enumerate_dl_sets};
use crate::ha::{
    enumerate_v, invert_steinberg, lang_orbit_sample, lang_orbit_values, solve_uniformization,
    steinberg_linear_map, HASetup, HAVector,
};
use crate::root::{build_root_system, CartanDatum, RootSystem};
use crate::twisted::{
    enumerate_twisted_classes, is_elliptic, DiagramAut, TwistedElement, DEFAULT_WEYL_CAP,
};

/// The recognized suite names.
pub const SUITES: [&str; 8] = [
    "convexity",
    "standard",
    "uniformization",
    "steinberg",
    "group",
    "affine",
    "howe",
    "lang_orbit",
];

/// Budget for solver/oracle instances: `|A|·m·log2(q)` bits.
pub const UNIFORMIZATION_BITS_CAP: f64 = 18.0;

/// Parsed scan configuration.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub seed: u64,
    pub suites: Vec<String>,
    pub types: Vec<String>,
    pub fields: Vec<(u64, usize)>,
    pub instances: usize,
    pub round_trips: usize,
    pub samples: usize,
    pub out: Option<String>,
    /// Echo of the raw configuration for the report.
    pub raw: Value,
}

impl ScanConfig {
    pub fn from_value(v: &Value) -> Result<ScanConfig> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let seed = obj
            .get("seed")
            .and_then(|s| s.as_u64())
            .ok_or_else(|| Error::Config("\"seed\" (64-bit integer) is mandatory".into()))?;
        let suites: Vec<String> = match obj.get("suites") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|s| {
                    s.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| Error::Config("\"suites\" entries must be strings".into()))
                })
                .collect::<Result<_>>()?,
            None => SUITES.iter().map(|s| s.to_string()).collect(),
            _ => return Err(Error::Config("\"suites\" must be an array".into())),
        };
        for s in &suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(Error::Config(format!(
                    "unknown suite \"{s}\"; known: {}",
                    SUITES.join(", ")
                )));
            }
        }
        let types: Vec<String> = match obj.get("types") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|s| {
                    s.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| Error::Config("\"types\" entries must be strings".into()))
                })
                .collect::<Result<_>>()?,
            None => ["A1", "A2", "A3", "B2"].iter().map(|s| s.to_string()).collect(),
            _ => return Err(Error::Config("\"types\" must be an array".into())),
        };
        for t in &types {
            CartanDatum::from_code(t)?;
        }
        let fields: Vec<(u64, usize)> = match obj.get("fields") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|pair| {
                    let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                        Error::Config("\"fields\" entries must be [q, m] pairs".into())
                    })?;
                    let q = p[0]
                        .as_u64()
                        .ok_or_else(|| Error::Config("\"fields\": q must be an integer".into()))?;
                    let m = p[1]
                        .as_u64()
                        .ok_or_else(|| Error::Config("\"fields\": m must be an integer".into()))?
                        as usize;
                    Field::new(q, m)?; // validate early
                    Ok((q, m))
                })
                .collect::<Result<_>>()?,
            None => vec![(2, 1), (2, 2), (3, 1)],
            _ => return Err(Error::Config("\"fields\" must be an array".into())),
        };
        let get_pos = |key: &str, default: usize| -> Result<usize> {
            match obj.get(key) {
                None => Ok(default),
                Some(v) => v
                    .as_u64()
                    .filter(|&n| n > 0)
                    .map(|n| n as usize)
                    .ok_or_else(|| Error::Config(format!("\"{key}\" must be a positive integer"))),
            }
        };
        Ok(ScanConfig {
            seed,
            suites,
            types,
            fields,
            instances: get_pos("instances", 50)?,
            round_trips: get_pos("round_trips", 100)?,
            samples: get_pos("samples", 1000)?,
            out: obj.get("out").and_then(|s| s.as_str()).map(str::to_owned),
            raw: v.clone(),
        })
    }
}

/// Stable per-suite/per-index sub-seed (FNV-1a over the suite name folded
/// with the master seed and index).
pub fn sub_seed(master: u64, suite: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in suite.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^= master;
    h = h.wrapping_mul(0x100000001b3);
    h ^= index;
    h.wrapping_mul(0x100000001b3)
}

/// Result of re-running one instance.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceResult {
    pub pass: bool,
    pub expected: Value,
    pub actual: Value,
}

/// Per-suite tallies and replayable payloads.
#[derive(Clone, Debug, Serialize, Default)]
pub struct SuiteReport {
    pub pass_count: u64,
    pub fail_count: u64,
    /// Instances refused for budget reasons (recorded, not fatal).
    pub budget_refusals: Vec<String>,
    /// Failing instances, verbatim (replayable via `verify`).
    pub counterexamples: Vec<Value>,
    /// A few passing instances for spot replay.
    pub samples: Vec<Value>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.fail_count == 0
    }
}

/// Full scan report. Timing lives only under `timing`, so reports are
/// byte-identical across runs modulo that one key.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: Value,
    pub versions: BTreeMap<String, String>,
    pub suites: BTreeMap<String, SuiteReport>,
    pub pass: bool,
    pub timing: BTreeMap<String, f64>,
}

// ---- shared reconstruction helpers ----

fn rs_of(inst: &Value) -> Result<RootSystem> {
    let code = inst
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| Error::Config("instance needs \"type\" (path: /type)".into()))?;
    build_root_system(CartanDatum::from_code(code)?)
}

fn usize_list(inst: &Value, key: &str) -> Result<Vec<usize>> {
    inst.get(key)
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Config(format!("instance needs \"{key}\" array (path: /{key})")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| Error::Config(format!("\"{key}\" entries must be integers")))
        })
        .collect()
}

fn fq_list(inst: &Value, key: &str) -> Result<Vec<Fq>> {
    Ok(usize_list(inst, key)?.into_iter().map(|u| Fq(u as u8)).collect())
}

fn u64_field(inst: &Value, key: &str) -> Result<u64> {
    inst.get(key)
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Config(format!("instance needs integer \"{key}\" (path: /{key})")))
}

fn element_from(inst: &Value, rs: &RootSystem, key: &str) -> Result<TwistedElement> {
    let action = usize_list(inst, key)?;
    if action.len() != rs.num_roots() {
        return Err(Error::Config(format!(
            "\"{key}\" must be a permutation of {} root indices",
            rs.num_roots()
        )));
    }
    let sigma_power = inst.get("sigma_power").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
    Ok(TwistedElement {
        action,
        sigma_power,
    })
}

fn sigma_from(inst: &Value, rs: &RootSystem) -> Result<DiagramAut> {
    match inst.get("sigma") {
        None => Ok(DiagramAut::identity(rs.rank())),
        Some(Value::Array(a)) => {
            let perm = a
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| Error::Config("\"sigma\" entries must be integers".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            DiagramAut::new(rs, perm)
        }
        Some(Value::String(s)) if s == "id" => Ok(DiagramAut::identity(rs.rank())),
        _ => Err(Error::Config(
            "\"sigma\" must be \"id\" or a 0-based permutation array (path: /sigma)".into(),
        )),
    }
}

fn ha_setup_from<'a>(inst: &Value, rs: &'a RootSystem, sigma: &DiagramAut) -> Result<HASetup<'a>> {
    let x = element_from(inst, rs, "x_action")?;
    let field = Field::new(u64_field(inst, "q")?, u64_field(inst, "m")? as usize)?;
    HASetup::new(
        rs,
        sigma,
        x,
        (0..rs.num_roots()).collect(),
        usize_list(inst, "b_list")?,
        fq_list(inst, "coeffs")?,
        Default::default(),
        field,
    )
}

// ---- the single instance checker ----

/// Re-run one serialized instance; the scan path and the `verify` command
/// both go through here.
pub fn check_instance(inst: &Value) -> Result<InstanceResult> {
    let suite = inst
        .get("suite")
        .and_then(|s| s.as_str())
        .ok_or_else(|| Error::Config("instance needs \"suite\" (path: /suite)".into()))?;
    match suite {
        "convexity" => check_convexity(inst),
        "standard" => check_standard(inst),
        "uniformization" => check_uniformization(inst),
        "steinberg" => check_steinberg(inst),
        "group" => check_group(inst),
        "affine" => check_affine(inst),
        "howe" => check_howe(inst),
        "lang_orbit" => check_lang_orbit(inst),
        other => Err(Error::Config(format!("unknown suite \"{other}\""))),
    }
}

fn check_convexity(inst: &Value) -> Result<InstanceResult> {
    let rs = rs_of(inst)?;
    let sigma = sigma_from(inst, &rs)?;
    let rep = element_from(inst, &rs, "rep")?;
    let classes = enumerate_twisted_classes(&rs, &sigma, DEFAULT_WEYL_CAP)?;
    let cls = classes
        .iter()
        .find(|c| c.members.iter().any(|m| m.action == rep.action))
        .ok_or_else(|| Error::Config("\"rep\" does not lie in the coset".into()))?;
    let convex = convex_elements_of_class(&rs, &sigma, cls);
    let pass = !cls.elliptic || !convex.is_empty();
    Ok(InstanceResult {
        pass,
        expected: json!({"convex_nonempty_if_elliptic": true}),
        actual: json!({
            "elliptic": cls.elliptic,
            "class_size": cls.members.len(),
            "convex_count": convex.len(),
        }),
    })
}

fn check_standard(inst: &Value) -> Result<InstanceResult> {
    let rs = rs_of(inst)?;
    let sigma = sigma_from(inst, &rs)?;
    let x0 = element_from(inst, &rs, "rep")?;
    let gens = usize_list(inst, "levi")?;
    let levi = LeviSubsystem::generate(&rs, gens);
    let res = find_standard_convex(&rs, &sigma, &levi, &x0)?;
    Ok(InstanceResult {
        pass: res.levi_is_standard && res.x_convex,
        expected: json!({"levi_is_standard": true, "x_convex": true}),
        actual: json!({
            "levi_is_standard": res.levi_is_standard,
            "x_convex": res.x_convex,
        }),
    })
}

fn check_uniformization(inst: &Value) -> Result<InstanceResult> {
    let rs = rs_of(inst)?;
    let sigma = sigma_from(inst, &rs)?;
    let setup = ha_setup_from(inst, &rs, &sigma)?;
    let z = HAVector {
        entries: fq_list(inst, "z")?,
    };
    if z.entries.len() != setup.dim() {
        return Err(Error::Config(format!(
            "\"z\" must have {} entries (path: /z)",
            setup.dim()
        )));
    }
    let points = enumerate_v(&setup, &z)?;
    let f = &setup.field;
    let expected_count = (f.size as u64).pow(setup.a_cap_delta().len() as u32);
    let mut projections = HashSet::new();
    let mut solver_matches = true;
    for p in &points {
        let mut boundary = HAVector::zero(setup.dim());
        for &d in &setup.a_cap_delta() {
            let i = setup.pos_of(d).unwrap();
            boundary.entries[i] = p.entries[i];
        }
        projections.insert(boundary.entries.clone());
        if solve_uniformization(&setup, &z, &boundary)? != *p {
            solver_matches = false;
        }
    }
    // Optional recorded solution: re-solve the stored boundary section and
    // point at any coordinate that differs.
    let mut recorded_ok = true;
    let mut diff_positions: Vec<usize> = Vec::new();
    if inst.get("expect_w").is_some() {
        let boundary = HAVector {
            entries: fq_list(inst, "boundary")?,
        };
        let expect = fq_list(inst, "expect_w")?;
        let w = solve_uniformization(&setup, &z, &boundary)?;
        for (i, (&got, &want)) in w.entries.iter().zip(&expect).enumerate() {
            if got != want {
                diff_positions.push(i);
            }
        }
        recorded_ok = diff_positions.is_empty();
    }
    let pass = points.len() as u64 == expected_count
        && projections.len() == points.len()
        && solver_matches
        && recorded_ok;
    Ok(InstanceResult {
        pass,
        expected: json!({
            "fiber_count": expected_count,
            "projection_bijective": true,
            "solver_matches_oracle": true,
            "recorded_solution_matches": true,
        }),
        actual: json!({
            "fiber_count": points.len(),
            "projection_bijective": projections.len() == points.len(),
            "solver_matches_oracle": solver_matches,
            "recorded_solution_matches": recorded_ok,
            "recorded_solution_diff_positions": diff_positions,
        }),
    })
}

fn check_steinberg(inst: &Value) -> Result<InstanceResult> {
    let rs = rs_of(inst)?;
    let sigma = sigma_from(inst, &rs)?;
    let setup = ha_setup_from(inst, &rs, &sigma)?;
    let f = setup.field.clone();
    let z_set = setup.steinberg_z_set();
    let y_set = setup.a_cap_neg_delta();
    let t_set = setup.steinberg_t_set();
    let exhaustive = inst
        .get("exhaustive")
        .and_then(|v| v.as_bool())
        .unwrap_or(false);
    let mut bijective = true;
    if exhaustive {
        let size = f.size;
        let dims = z_set.len() + y_set.len();
        if (dims as f64) * (size as f64).log2() > 20.0 {
            return Err(Error::Budget(format!(
                "exhaustive Steinberg domain of {dims} coordinates over {size} elements"
            )));
        }
        let mut images = HashSet::new();
        for idx in 0..size.pow(dims as u32) {
            let mut rem = idx;
            let mut z = HAVector::zero(setup.dim());
            let mut y = HAVector::zero(setup.dim());
            for &r in &z_set {
                z.entries[setup.pos_of(r).unwrap()] = Fq((rem % size) as u8);
                rem /= size;
            }
            for &r in &y_set {
                y.entries[setup.pos_of(r).unwrap()] = Fq((rem % size) as u8);
                rem /= size;
            }
            let out = steinberg_linear_map(&setup, &z, &y)?;
            if !images.insert(out.entries.clone()) {
                bijective = false;
            }
        }
        // The codomain H_T has the same dimension, so injectivity on the
        // full domain is bijectivity.
        if images.len() as u64 != (f.size as u64).pow(t_set.len() as u32) {
            bijective = false;
        }
    }
    let trips = u64_field(inst, "round_trips")?;
    let mut rng = ChaCha8Rng::seed_from_u64(u64_field(inst, "trip_seed")?);
    let mut round_trips_ok = true;
    for _ in 0..trips {
        let mut target = HAVector::zero(setup.dim());
        for &r in &t_set {
            target.entries[setup.pos_of(r).unwrap()] = f.random(&mut rng);
        }
        let inv = invert_steinberg(&setup, &target)?;
        if steinberg_linear_map(&setup, &inv.z, &inv.y)? != target {
            round_trips_ok = false;
        }
    }
    Ok(InstanceResult {
        pass: bijective && round_trips_ok,
        expected: json!({"bijective": true, "round_trips_ok": true}),
        actual: json!({
            "exhaustive_checked": exhaustive,
            "bijective": bijective,
            "round_trips": trips,
            "round_trips_ok": round_trips_ok,
        }),
    })
}

fn check_group(inst: &Value) -> Result<InstanceResult> {
    let kind = inst
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::Config("group instance needs \"kind\" (path: /kind)".into()))?;
    let n = u64_field(inst, "n")? as usize;
    let q = u64_field(inst, "q")?;
    let m = u64_field(inst, "m")? as usize;
    let word = usize_list(inst, "word")?;
    match kind {
        "identities" => {
            let r = u64_field(inst, "r")? as usize;
            let model = build_model(n, q, m, r, &word)?;
            let datum = HoweDatum::from_config(
                &model.rs,
                &json!({"chain": inst["chain"], "depths": inst["depths"]}),
                Some(&model.x),
            )?;
            let report = enumerate_dl_sets(&model, &datum)?;
            Ok(InstanceResult {
                pass: report.all_pass(),
                expected: json!({"all_identities_pass": true}),
                actual: serde_json::to_value(&report)?,
            })
        }
        "cross_section" => {
            let model = build_model(n, q, m, 0, &word)?;
            let x_word = usize_list(inst, "x_word")?;
            let sigma = DiagramAut::identity(model.rs.rank());
            let x = TwistedElement::from_word(&model.rs, &x_word, &sigma, 0)?;
            let psi = fq_list(inst, "psi")?;
            let report = cross_section_group_check(&model, &x, &psi)?;
            Ok(InstanceResult {
                pass: report.psi_is_homomorphism && report.injective && report.surjective,
                expected: json!({
                    "psi_is_homomorphism": true,
                    "injective": true,
                    "surjective": true,
                }),
                actual: serde_json::to_value(&report)?,
            })
        }
        other => Err(Error::Config(format!(
            "unknown group instance kind \"{other}\" (path: /kind)"
        ))),
    }
}

fn check_affine(inst: &Value) -> Result<InstanceResult> {
    let rs = rs_of(inst)?;
    let x = element_from(inst, &rs, "x_action")?;
    let pt = ApartmentPoint::from_config(&inst["point"], rs.rank())?;
    let bound = parse_rat(&inst["bound"])?;
    let elliptic = is_elliptic(&rs, &x);
    let delta = delta_set(&rs, &x);
    let frob = AffineFrobenius::new(&rs, x, pt.clone())?;
    let roots = build_affine_roots(&rs, &pt, bound);
    let mut window_ok = true;
    for f in &roots {
        let v = crate::affine::eval_affine(&rs, f, &pt);
        if v.is_negative() || v > bound {
            window_ok = false;
        }
    }
    let orbits = f_orbits_and_order(&frob, &roots, &delta, elliptic)?;
    // Orbits cover the window, are F-closed, slices are singletons, and the
    // listing is sorted by (level, slices first).
    let mut covered: HashSet<AffineRoot> = HashSet::new();
    let mut closed = true;
    let mut slices_singletons = true;
    for o in &orbits {
        for mem in &o.members {
            covered.insert(mem.clone());
            let img = frob.apply(mem);
            if !o.members.contains(&img) {
                closed = false;
            }
        }
        if o.is_slice && o.members.len() != 1 {
            slices_singletons = false;
        }
    }
    let covers = roots.iter().all(|f| covered.contains(f));
    let sorted = orbits
        .windows(2)
        .all(|w| (w[0].level, !w[0].is_slice) <= (w[1].level, !w[1].is_slice));
    // Jump set sanity: r_plus/r_minus are mutually inverse above the
    // minimum, and r_minus of the minimum is absent.
    let j = jumps(&rs, &pt);
    let mut jumps_ok = j.r_minus(Rat::from_integer(0)).is_none();
    let mut r = Rat::from_integer(0);
    for _ in 0..12 {
        let up = j.r_plus(r);
        if !(up > r) || j.r_minus(up) != Some(r) {
            jumps_ok = false;
        }
        r = up;
    }
    let pass = window_ok && closed && covers && slices_singletons && sorted && jumps_ok;
    Ok(InstanceResult {
        pass,
        expected: json!({
            "window_ok": true, "orbits_closed": true, "orbits_cover": true,
            "slices_singletons": true, "sorted": true, "jumps_ok": true,
        }),
        actual: json!({
            "window_ok": window_ok, "orbits_closed": closed, "orbits_cover": covers,
            "slices_singletons": slices_singletons, "sorted": sorted, "jumps_ok": jumps_ok,
            "window_size": roots.len(), "orbit_count": orbits.len(),
        }),
    })
}

fn check_howe(inst: &Value) -> Result<InstanceResult> {
    let rs = rs_of(inst)?;
    let x = match inst.get("x_action") {
        Some(_) => Some(element_from(inst, &rs, "x_action")?),
        None => None,
    };
    let datum = HoweDatum::from_config(
        &rs,
        &json!({"chain": inst["chain"], "depths": inst["depths"]}),
        x.as_ref(),
    )?;
    // Support-flag monotonicity in the level, per vector root.
    let origin = ApartmentPoint::origin(rs.rank());
    let mut monotone = true;
    for root in 0..rs.num_roots() {
        let mut prev = (false, false, false, false);
        for level in 0..=6i64 {
            let fl = howe_support(&rs, &datum, &AffineRoot::Vector { root, level }, &origin);
            let cur = (fl.in_k, fl.in_k_plus, fl.in_h, fl.in_e);
            if (prev.0 && !cur.0)
                || (prev.1 && !cur.1)
                || (prev.2 && !cur.2)
                || (prev.3 && !cur.3)
            {
                monotone = false;
            }
            prev = cur;
        }
    }
    // Level labels (symmetry, partition, involution are verified inside
    // howe_levels and surface as errors; a clean return is the check).
    let mut labels = json!(null);
    let mut labels_ok = true;
    if let Some(rv) = inst.get("r") {
        let r = parse_rat(rv)?;
        let x = x.ok_or_else(|| {
            Error::Config("howe instances with \"r\" need \"x_action\" (path: /x_action)".into())
        })?;
        let frob = AffineFrobenius::new(&rs, x, origin.clone())?;
        match crate::affine::howe_levels(&datum, r, &frob) {
            Ok(ll) => {
                let m_idx = ll.s_values.len() - 1;
                let symmetric = (0..ll.s_values.len())
                    .all(|i| ll.s_values[i] + ll.s_values[m_idx - i] == r);
                let total: usize = ll.partition.iter().map(|c| c.len()).sum();
                labels = json!({
                    "s_count": ll.s_values.len(),
                    "symmetric": symmetric,
                    "partition_total": total,
                    "orbit_pairs": ll.orbit_pairs.len(),
                });
                labels_ok = symmetric;
            }
            Err(Error::Internal(msg)) => {
                labels = json!({"internal_failure": msg});
                labels_ok = false;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(InstanceResult {
        pass: monotone && labels_ok,
        expected: json!({"support_monotone": true, "labels_ok": true}),
        actual: json!({
            "support_monotone": monotone,
            "labels_ok": labels_ok,
            "labels": labels,
        }),
    })
}

fn check_lang_orbit(inst: &Value) -> Result<InstanceResult> {
    let rs = rs_of(inst)?;
    let x = element_from(inst, &rs, "x_action")?;
    if !is_elliptic(&rs, &x) {
        return Err(Error::Precondition(
            "lang_orbit instances require an elliptic element".into(),
        ));
    }
    let field = Field::new(u64_field(inst, "q")?, u64_field(inst, "m")? as usize)?;
    let bound = parse_rat(&inst["bound"])?;
    let samples = u64_field(inst, "samples")?;
    let mut rng = ChaCha8Rng::seed_from_u64(u64_field(inst, "sample_seed")?);
    let delta = delta_set(&rs, &x);
    let neg_delta: HashSet<usize> = delta.iter().map(|&d| rs.negate(d)).collect();
    let origin = ApartmentPoint::origin(rs.rank());
    let frob = AffineFrobenius::new(&rs, x, origin.clone())?;
    let roots = build_affine_roots(&rs, &origin, bound);
    let orbits = f_orbits_and_order(&frob, &roots, &delta, true)?;
    let mut profiles = 0u64;
    let mut failures = 0u64;
    for o in &orbits {
        if o.is_slice {
            continue;
        }
        // Base the profile at a member of −Δ̃⁺, if the orbit has one.
        let base = o
            .members
            .iter()
            .filter(|m| m.vector_part().is_some_and(|a| neg_delta.contains(&a)))
            .min();
        let Some(base) = base else { continue };
        let profile = sign_change_sequence(&rs, &delta, o, base)?;
        profiles += 1;
        let len = o.members.len();
        for _ in 0..samples {
            let v = lang_orbit_sample(&profile.a_sequence, len, &field, &mut rng);
            let report = lang_orbit_values(&profile.a_sequence, len, &field, &v)?;
            failures += report.failures.len() as u64;
        }
    }
    Ok(InstanceResult {
        pass: profiles > 0 && failures == 0,
        expected: json!({"profiles_checked_nonzero": true, "failures": 0}),
        actual: json!({"profiles_checked": profiles, "failures": failures}),
    })
}

// ---- suite generators ----

fn gen_convexity(cfg: &ScanConfig) -> Result<(Vec<Value>, Vec<String>)> {
    let mut out = Vec::new();
    let mut refusals = Vec::new();
    for t in &cfg.types {
        let rs = build_root_system(CartanDatum::from_code(t)?)?;
        for sigma in DiagramAut::all(&rs) {
            match enumerate_twisted_classes(&rs, &sigma, DEFAULT_WEYL_CAP) {
                Ok(classes) => {
                    for cls in classes {
                        out.push(json!({
                            "suite": "convexity",
                            "type": t,
                            "sigma": sigma.perm,
                            "rep": cls.members[0].action,
                            "sigma_power": cls.members[0].sigma_power,
                        }));
                    }
                }
                Err(Error::Budget(msg)) => refusals.push(format!("{t}: {msg}")),
                Err(e) => return Err(e),
            }
        }
    }
    Ok((out, refusals))
}

fn gen_standard(cfg: &ScanConfig) -> Result<(Vec<Value>, Vec<String>)> {
    let mut out = Vec::new();
    let mut refusals = Vec::new();
    for t in &cfg.types {
        let rs = build_root_system(CartanDatum::from_code(t)?)?;
        if rs.rank() > 3 {
            refusals.push(format!("{t}: standard-convex scan capped at rank 3"));
            continue;
        }
        let levis = all_levi_subsystems(&rs);
        for sigma in DiagramAut::all(&rs) {
            let classes = enumerate_twisted_classes(&rs, &sigma, DEFAULT_WEYL_CAP)?;
            for cls in classes.iter().filter(|c| c.elliptic) {
                let x0 = &cls.members[0];
                for levi in levis.iter().filter(|l| l.stable_under(x0)) {
                    out.push(json!({
                        "suite": "standard",
                        "type": t,
                        "sigma": sigma.perm,
                        "rep": x0.action,
                        "sigma_power": x0.sigma_power,
                        "levi": levi.generators,
                    }));
                }
            }
        }
    }
    Ok((out, refusals))
}

/// Convex elements (one per elliptic class) for the inner-twist coset of a
/// type, used to seed solver instances.
fn convex_pool(rs: &RootSystem) -> Result<Vec<TwistedElement>> {
    let sigma = DiagramAut::identity(rs.rank());
    let mut pool = Vec::new();
    for cls in enumerate_twisted_classes(rs, &sigma, DEFAULT_WEYL_CAP)? {
        if !cls.elliptic {
            continue;
        }
        if let Some(x) = convex_elements_of_class(rs, &sigma, &cls).into_iter().next() {
            pool.push(x);
        }
    }
    Ok(pool)
}

fn gen_solver_like(cfg: &ScanConfig, suite: &str) -> Result<(Vec<Value>, Vec<String>)> {
    let allowed = ["A2", "A3", "B2"];
    let types: Vec<&String> = cfg.types.iter().filter(|t| allowed.contains(&t.as_str())).collect();
    let mut refusals = Vec::new();
    if types.is_empty() {
        refusals.push("no configured type in {A2, A3, B2}".into());
        return Ok((Vec::new(), refusals));
    }
    // Precompute per-type data once.
    let mut data = Vec::new();
    for t in &types {
        let rs = build_root_system(CartanDatum::from_code(t)?)?;
        let pool = convex_pool(&rs)?;
        data.push((t.to_string(), rs, pool));
    }
    let mut out = Vec::new();
    let mut produced = 0usize;
    let mut attempt = 0u64;
    let attempt_cap = (cfg.instances * data.len() * cfg.fields.len() * 4 + 64) as u64;
    while produced < cfg.instances {
        if attempt >= attempt_cap {
            refusals.push("every type/field combination exceeds the solver budget".into());
            break;
        }
        let (t, rs, pool) = &data[attempt as usize % data.len()];
        let (q, m) = cfg.fields[(attempt / data.len() as u64) as usize % cfg.fields.len()];
        attempt += 1;
        let bits = rs.num_roots() as f64 * m as f64 * (q as f64).log2();
        if bits > UNIFORMIZATION_BITS_CAP {
            let msg = format!("{t} over q={q}, m={m}: {bits:.1} bits exceeds the solver budget");
            if !refusals.contains(&msg) {
                refusals.push(msg);
            }
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, suite, produced as u64));
        let field = Field::new(q, m)?;
        let x = &pool[rng.gen_range(0..pool.len())];
        let b_list: Vec<usize> = delta_set(rs, x).iter().map(|&d| rs.negate(d)).collect();
        let coeffs: Vec<u64> = b_list
            .iter()
            .map(|_| field.random_nonzero(&mut rng).0 as u64)
            .collect();
        let mut inst = json!({
            "suite": suite,
            "type": t,
            "q": q,
            "m": m,
            "x_action": x.action,
            "sigma_power": 0,
            "b_list": b_list,
            "coeffs": coeffs,
        });
        if suite == "uniformization" {
            let z: Vec<u64> = (0..rs.num_roots())
                .map(|_| field.random(&mut rng).0 as u64)
                .collect();
            inst["z"] = json!(z);
            // Record one solved point so a perturbed replay fails with a
            // pointed diff: a random boundary section and its solution.
            let setup = ha_setup_from(&inst, rs, &DiagramAut::identity(rs.rank()))?;
            let zv = HAVector {
                entries: z.iter().map(|&u| Fq(u as u8)).collect(),
            };
            let mut boundary = HAVector::zero(setup.dim());
            for &d in &setup.a_cap_delta() {
                boundary.entries[setup.pos_of(d).unwrap()] = field.random(&mut rng);
            }
            let w = solve_uniformization(&setup, &zv, &boundary)?;
            inst["boundary"] = json!(boundary.entries.iter().map(|c| c.0 as u64).collect::<Vec<_>>());
            inst["expect_w"] = json!(w.entries.iter().map(|c| c.0 as u64).collect::<Vec<_>>());
        } else {
            let t_dim = rs.positive_indices().count();
            let exhaustive = (m as f64 * (q as f64).log2() * t_dim as f64) <= 18.0;
            inst["exhaustive"] = json!(exhaustive);
            inst["round_trips"] = json!(cfg.round_trips);
            inst["trip_seed"] = json!(rng.gen::<u64>());
        }
        out.push(inst);
        produced += 1;
    }
    Ok((out, refusals))
}

fn gen_group(cfg: &ScanConfig) -> Result<(Vec<Value>, Vec<String>)> {
    let mut out = Vec::new();
    let primes: Vec<u64> = {
        let mut p: Vec<u64> = cfg.fields.iter().map(|&(q, _)| q).filter(|&q| q <= 3).collect();
        p.sort_unstable();
        p.dedup();
        if p.is_empty() {
            vec![2, 3]
        } else {
            p
        }
    };
    // SL_2 nonsplit point-count identities; coefficients 𝔽_{q²} so the
    // twisted torus has its q+1 fixed points.
    for &q in &primes {
        for r in 0..=1usize {
            let (chain, depths) = if r == 0 {
                (json!([[0]]), json!(["0"]))
            } else {
                (json!([[], [0]]), json!(["1", "1"]))
            };
            out.push(json!({
                "suite": "group",
                "kind": "identities",
                "n": 2, "q": q, "m": 2, "r": r,
                "word": [0],
                "chain": chain,
                "depths": depths,
            }));
        }
    }
    // SL_3 split cross-sections for both Coxeter rotations, with several
    // Ψ-scalar choices over the m = 2 coefficient field.
    for &q in &primes {
        for word in [[0usize, 1], [1, 0]] {
            for m in [1usize, 2] {
                let field = Field::new(q, m)?;
                let scalar_count = if m == 2 { 3.min(field.size - 1) } else { 1 };
                for s in 1..=scalar_count {
                    out.push(json!({
                        "suite": "group",
                        "kind": "cross_section",
                        "n": 3, "q": q, "m": m,
                        "word": word,
                        "x_word": word,
                        "psi": [s],
                    }));
                }
            }
        }
    }
    Ok((out, Vec::new()))
}

fn gen_affine(cfg: &ScanConfig) -> Result<(Vec<Value>, Vec<String>)> {
    let mut out = Vec::new();
    for t in &cfg.types {
        let rs = build_root_system(CartanDatum::from_code(t)?)?;
        let sigma = DiagramAut::identity(rs.rank());
        let coxeter: Vec<usize> = (0..rs.rank()).collect();
        let x = TwistedElement::from_word(&rs, &coxeter, &sigma, 0)?;
        let mut points = vec![json!(vec!["0"; rs.rank()])];
        if rs.rank() == 1 {
            points.push(json!(["1/2"]));
        }
        for point in points {
            out.push(json!({
                "suite": "affine",
                "type": t,
                "x_action": x.action,
                "sigma_power": 0,
                "point": point,
                "bound": "2",
            }));
        }
    }
    Ok((out, Vec::new()))
}

fn gen_howe(cfg: &ScanConfig) -> Result<(Vec<Value>, Vec<String>)> {
    // Chain templates over A1/A2 with an element stabilizing every stratum.
    // (The acting element need not be elliptic; level labels only need the
    // F-action on affine roots.)
    struct Template {
        code: &'static str,
        chain: Value,
        x_word: &'static [usize],
        d: usize,
    }
    let templates = [
        Template { code: "A1", chain: json!([[0]]), x_word: &[0], d: 0 },
        Template { code: "A1", chain: json!([[], [0]]), x_word: &[0], d: 1 },
        Template { code: "A2", chain: json!([[0, 1]]), x_word: &[0, 1], d: 0 },
        Template { code: "A2", chain: json!([[], [0, 1]]), x_word: &[0, 1], d: 1 },
        Template { code: "A2", chain: json!([[0], [0, 1]]), x_word: &[0], d: 1 },
        Template { code: "A2", chain: json!([[], [0], [0, 1]]), x_word: &[0], d: 2 },
    ];
    let mut out = Vec::new();
    let mut draw = 0u64;
    while out.len() < cfg.instances && draw < 8 * cfg.instances as u64 {
        let i = draw;
        draw += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, "howe", i));
        let tpl = &templates[rng.gen_range(0..templates.len())];
        let rs = build_root_system(CartanDatum::from_code(tpl.code)?)?;
        let sigma = DiagramAut::identity(rs.rank());
        let x = TwistedElement::from_word(&rs, tpl.x_word, &sigma, 0)?;
        // Random strictly increasing depths in (0, r] from the half-integer
        // grid, ending at an integer r ≥ 1 so level labels apply.
        let r = rng.gen_range(1..=3i64);
        let mut depths: Vec<i64> = Vec::new();
        for _ in 0..tpl.d {
            let lo = depths.last().copied().map_or(1, |d| d + 1);
            let candidates: Vec<i64> = (lo..=2 * r).collect();
            if candidates.is_empty() {
                break;
            }
            depths.push(candidates[rng.gen_range(0..candidates.len())]);
        }
        if depths.len() < tpl.d {
            continue; // ran out of grid room; skip this draw
        }
        let mut depth_strs: Vec<String> = depths.iter().map(|d| format!("{d}/2")).collect();
        depth_strs.push(r.to_string());
        let mut inst = json!({
            "suite": "howe",
            "type": tpl.code,
            "chain": tpl.chain,
            "depths": depth_strs,
            "x_action": x.action,
            "sigma_power": 0,
        });
        if tpl.d >= 1 {
            inst["r"] = json!(r.to_string());
        }
        out.push(inst);
    }
    Ok((out, Vec::new()))
}

fn gen_lang_orbit(cfg: &ScanConfig) -> Result<(Vec<Value>, Vec<String>)> {
    // Fixed scan set: split Coxeter elements for the configured types plus
    // the flip-coset elliptic classes where a nontrivial diagram
    // automorphism exists.
    let mut out = Vec::new();
    for (idx, t) in cfg.types.iter().enumerate() {
        let rs = build_root_system(CartanDatum::from_code(t)?)?;
        let mut elements: Vec<TwistedElement> = Vec::new();
        for sigma in DiagramAut::all(&rs) {
            let classes = enumerate_twisted_classes(&rs, &sigma, DEFAULT_WEYL_CAP)?;
            if let Some(cls) = classes.iter().find(|c| c.elliptic) {
                elements.push(cls.members[0].clone());
            }
        }
        for (j, x) in elements.iter().enumerate() {
            for &(q, m) in &cfg.fields {
                out.push(json!({
                    "suite": "lang_orbit",
                    "type": t,
                    "x_action": x.action,
                    "sigma_power": x.sigma_power,
                    "q": q,
                    "m": m,
                    "bound": "2",
                    "samples": cfg.samples,
                    "sample_seed": sub_seed(cfg.seed, "lang_orbit", (idx * 64 + j) as u64),
                }));
            }
        }
    }
    Ok((out, Vec::new()))
}

/// Generate the instance list for one suite.
pub fn generate_suite(name: &str, cfg: &ScanConfig) -> Result<(Vec<Value>, Vec<String>)> {
    match name {
        "convexity" => gen_convexity(cfg),
        "standard" => gen_standard(cfg),
        "uniformization" => gen_solver_like(cfg, "uniformization"),
        "steinberg" => gen_solver_like(cfg, "steinberg"),
        "group" => gen_group(cfg),
        "affine" => gen_affine(cfg),
        "howe" => gen_howe(cfg),
        "lang_orbit" => gen_lang_orbit(cfg),
        other => Err(Error::Config(format!("unknown suite \"{other}\""))),
    }
}

/// Run one suite end to end.
pub fn run_suite(name: &str, cfg: &ScanConfig) -> Result<SuiteReport> {
    let (instances, mut refusals) = generate_suite(name, cfg)?;
    let mut report = SuiteReport::default();
    for inst in instances {
        match check_instance(&inst) {
            Ok(res) if res.pass => {
                report.pass_count += 1;
                if report.samples.len() < 3 {
                    report.samples.push(inst);
                }
            }
            Ok(_) => {
                report.fail_count += 1;
                report.counterexamples.push(inst);
            }
            Err(Error::Budget(msg)) => refusals.push(msg),
            Err(e) => return Err(e),
        }
    }
    report.budget_refusals = refusals;
    Ok(report)
}

/// Extra convexity-adjacent harnesses used by the acceptance gate:
/// subadditivity and the ordering lemma over every convex element of every
/// elliptic class of the given type/σ.
pub fn convexity_harness_violations(rs: &RootSystem, sigma: &DiagramAut) -> Result<u64> {
    let mut violations = 0u64;
    for cls in enumerate_twisted_classes(rs, sigma, DEFAULT_WEYL_CAP)? {
        if !cls.elliptic {
            continue;
        }
        for x in convex_elements_of_class(rs, sigma, &cls) {
            violations += subadditive_check(rs, &x)?.len() as u64;
            violations += order_lemma_check(rs, sigma, &x)?.len() as u64;
        }
    }
    Ok(violations)
}

/// Execute a scan: run the configured suites, assemble the report, write it
/// atomically, and return it with the overall pass bit.
pub fn cmd_scan(cfg: &ScanConfig, out_override: Option<&str>) -> Result<RunReport> {
    let mut suites = BTreeMap::new();
    let mut timing = BTreeMap::new();
    let mut pass = true;
    for name in &cfg.suites {
        let started = std::time::Instant::now();
        let suite_report = run_suite(name, cfg)?;
        timing.insert(name.clone(), started.elapsed().as_secs_f64());
        pass &= suite_report.all_pass();
        suites.insert(name.clone(), suite_report);
    }
    let mut versions = BTreeMap::new();
    versions.insert("convex-weyl".to_string(), env!("CARGO_PKG_VERSION").to_string());
    let report = RunReport {
        config: cfg.raw.clone(),
        versions,
        suites,
        pass,
        timing,
    };
    let out_path = out_override
        .map(str::to_owned)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| "report.json".to_string());
    write_atomic(&out_path, &serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}

fn write_atomic(path: &str, bytes: &[u8]) -> Result<()> {
    let tmp = format!("{path}.tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(suites: &[&str]) -> ScanConfig {
        ScanConfig::from_value(&json!({
            "seed": 42,
            "suites": suites,
            "types": ["A1", "A2"],
            "fields": [[2, 1]],
            "instances": 4,
            "round_trips": 5,
            "samples": 20,
        }))
        .unwrap()
    }

    #[test]
    fn config_requires_seed() {
        let err = ScanConfig::from_value(&json!({"suites": ["convexity"]}));
        assert!(matches!(err, Err(Error::Config(m)) if m.contains("seed")));
        let err = ScanConfig::from_value(&json!({"seed": 1, "suites": ["nope"]}));
        assert!(matches!(err, Err(Error::Config(m)) if m.contains("nope")));
    }

    #[test]
    fn convexity_suite_a1_two_classes() {
        let cfg = ScanConfig::from_value(&json!({
            "seed": 7, "suites": ["convexity"], "types": ["A1"],
        }))
        .unwrap();
        let (instances, _) = generate_suite("convexity", &cfg).unwrap();
        assert_eq!(instances.len(), 2); // the two W-classes of A1
        let rep = run_suite("convexity", &cfg).unwrap();
        assert_eq!(rep.pass_count, 2);
        assert_eq!(rep.fail_count, 0);
    }

    #[test]
    fn solver_suites_pass_and_replay() {
        let cfg = small_config(&["uniformization", "steinberg"]);
        for suite in ["uniformization", "steinberg"] {
            let (instances, _) = generate_suite(suite, &cfg).unwrap();
            assert_eq!(instances.len(), 4);
            for inst in &instances {
                let res = check_instance(inst).unwrap();
                assert!(res.pass, "{suite}: {inst}");
                // Replay through a serialization round trip.
                let reparsed: Value =
                    serde_json::from_str(&serde_json::to_string(inst).unwrap()).unwrap();
                assert!(check_instance(&reparsed).unwrap().pass);
            }
        }
    }

    #[test]
    fn perturbed_instance_fails_with_pointed_diff() {
        let cfg = small_config(&["uniformization"]);
        let (instances, _) = generate_suite("uniformization", &cfg).unwrap();
        // Tamper with the recorded solution: the replay no longer matches
        // and the diff points at the changed coordinate.
        let mut inst = instances[0].clone();
        let old = inst["expect_w"][0].as_u64().unwrap();
        inst["expect_w"][0] = json!(old ^ 1);
        let res = check_instance(&inst).unwrap();
        assert!(!res.pass);
        assert!(!res.actual["recorded_solution_diff_positions"]
            .as_array()
            .unwrap()
            .is_empty());
        // Schema violations are errors, not failures.
        let mut broken = instances[0].clone();
        broken["x_action"] = json!([0, 1]);
        assert!(check_instance(&broken).is_err());
    }

    #[test]
    fn sub_seed_is_stable() {
        assert_eq!(sub_seed(1, "howe", 0), sub_seed(1, "howe", 0));
        assert_ne!(sub_seed(1, "howe", 0), sub_seed(1, "howe", 1));
        assert_ne!(sub_seed(1, "howe", 0), sub_seed(2, "howe", 0));
        assert_ne!(sub_seed(1, "howe", 0), sub_seed(1, "affine", 0));
    }

    #[test]
    fn affine_and_howe_suites_pass() {
        let cfg = small_config(&["affine", "howe"]);
        for suite in ["affine", "howe"] {
            let rep = run_suite(suite, &cfg).unwrap();
            assert!(rep.fail_count == 0, "{suite}: {:?}", rep.counterexamples);
            assert!(rep.pass_count > 0);
        }
    }

    #[test]
    fn lang_orbit_suite_passes() {
        let cfg = small_config(&["lang_orbit"]);
        let rep = run_suite("lang_orbit", &cfg).unwrap();
        assert!(rep.fail_count == 0, "{:?}", rep.counterexamples);
        assert!(rep.pass_count > 0);
    }

    #[test]
    fn scan_writes_deterministic_report() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let mut cfg = small_config(&["convexity", "affine"]);
        cfg.out = Some(path.to_str().unwrap().to_string());
        let rep1 = cmd_scan(&cfg, None).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let rep2 = cmd_scan(&cfg, None).unwrap();
        let bytes2 = std::fs::read(&path).unwrap();
        assert!(rep1.pass && rep2.pass);
        // Byte-identical modulo the segregated timing key.
        let strip = |b: &[u8]| {
            let mut v: Value = serde_json::from_slice(b).unwrap();
            v.as_object_mut().unwrap().remove("timing");
            serde_json::to_string(&v).unwrap()
        };
        assert_eq!(strip(&bytes1), strip(&bytes2));
    }
}
