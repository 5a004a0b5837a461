//! The pipeline: hypotheses, quaternion data, Gross points, theta tower, stabilization,
//! Bertolini-Darmon elements, character tables and CRT gluing.

use std::collections::BTreeMap;
use std::time::Instant;

use anticyclo_core::arith::cyclotomic::{factor_cyclotomic, format_poly};
use anticyclo_core::arith::residue::{factorize, is_prime, ResidueRing};
use anticyclo_core::curve::{admissible_sieve, check_hypotheses, HypothesisReport, Status};
use anticyclo_core::group_ring::{cyclotomic_at_generator, vanishing_order, Character, GroupRingElement};
use anticyclo_core::quadratic::gamma::m0_of;
use anticyclo_core::quadratic::{GammaQuotient, QuadForm};
use anticyclo_core::quaternion::eigenform::{apply, is_eigenvector};
use anticyclo_core::quaternion::{
    brandt_matrix, eichler_mass, eigenform_mod, integral_eigenvector, pairing_rational, ClassSet, EichlerOrder,
    GrossPointFamily, QuaternionAlgebra,
};
use anticyclo_core::theta::{
    bd_element, compatible_quotients, e_p_multiplier, glue_crt, stabilization_multiple, stabilized_tower,
    theta_from_family, tower_walk, Provenance, ThetaElement,
};
use anticyclo_core::Error;
use rayon::prelude::*;

use crate::cache::Cache;
use crate::config::{JobConfig, Task};
use crate::report::*;
use crate::CliError;

/// Options that do not change the report.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub require_hypotheses: bool,
}

/// Class set, Brandt matrices and the cuspidal eigenvector.
struct QuaternionData {
    cs: ClassSet,
    brandt: BTreeMap<u64, Vec<Vec<i64>>>,
    /// Eigenvalues fed to the eigenvector solve.
    inputs: BTreeMap<u64, i64>,
    eigenvector: Vec<i64>,
}

struct Ctx<'a> {
    cfg: &'a JobConfig,
    cache: &'a Cache,
    timing: BTreeMap<String, String>,
}

impl Ctx<'_> {
    fn timed<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T, CliError>) -> Result<T, CliError> {
        let t = Instant::now();
        let out = f(self);
        self.timing.insert(name.into(), s(t.elapsed().as_millis()));
        out
    }
}

pub fn run_job(cfg: &JobConfig, cache: &Cache, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut report =
        RunReport { schema_version: REPORT_SCHEMA.into(), config_digest: cfg.digest(), ..Default::default() };
    if cfg.tasks.is_empty() {
        return Ok(report);
    }
    let mut ctx = Ctx { cfg, cache, timing: BTreeMap::new() };

    let hyp = ctx.timed("hypotheses", |c| {
        Ok(check_hypotheses(&c.cfg.curve, c.cfg.d_k, c.cfg.p, c.cfg.m_prime, c.cfg.flags.big_image)?)
    })?;
    report.hypotheses = Some(
        hyp.verdicts
            .iter()
            .map(|(k, v)| (k.clone(), VerdictJson { status: status_name(v.status), witness: v.witness.clone() }))
            .collect(),
    );
    if opts.require_hypotheses && !hyp.all_pass() {
        report.timing = ctx.timing;
        return Err(CliError::Hypotheses(hyp.failures().iter().map(|s| s.to_string()).collect(), Box::new(report)));
    }

    if cfg.has(Task::Sieve) {
        let sieve = ctx.timed("sieve", |c| {
            Ok(admissible_sieve(&c.cfg.curve, c.cfg.d_k, c.cfg.p, c.cfg.n, c.cfg.sieve_bound)?)
        })?;
        report.sieve = Some(
            sieve
                .iter()
                .map(|a| SievePrimeJson { ell: s(a.ell), a_ell: s(a.a_ell), signs: strs(&a.signs) })
                .collect(),
        );
    }

    let needs_quaternions = [Task::Brandt, Task::Theta, Task::Stabilize, Task::Glue].iter().any(|&t| cfg.has(t));
    if !needs_quaternions {
        report.timing = ctx.timing;
        return Ok(report);
    }
    let qd = ctx.timed("quaternions", quaternion_data)?;
    if cfg.has(Task::Brandt) {
        report.brandt = Some(ctx.timed("brandt_report", |c| brandt_report(c.cfg, &qd))?);
    }
    if cfg.has(Task::Theta) || cfg.has(Task::Stabilize) {
        let (levels, tower) = ctx.timed("theta", |c| theta_levels(c, &qd))?;
        if cfg.has(Task::Theta) {
            report.theta = Some(levels);
        }
        if cfg.has(Task::Stabilize) {
            report.stabilize = Some(ctx.timed("stabilize", |c| stabilize(c.cfg, &hyp, &tower))?);
        }
    }
    if cfg.has(Task::Glue) {
        report.glue = Some(ctx.timed("glue", |c| glue(c, &qd))?);
    }
    report.timing = ctx.timing;
    Ok(report)
}

fn status_name(s: Status) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn quaternion_data(c: &mut Ctx) -> Result<QuaternionData, CliError> {
    let cfg = c.cfg;
    let (nm, np) = (cfg.n_minus, cfg.n_plus);
    let cs: ClassSet = c.cache.get_or_compute(&format!("classset-{nm}-{np}"), || -> Result<_, CliError> {
        let alg = QuaternionAlgebra::new(nm)?;
        Ok(ClassSet::new(EichlerOrder::new(alg, np)?))
    })?;
    let level = nm * np;
    let qs: Vec<u64> = (2..=cfg.hecke_bound.max(2)).filter(|&q| is_prime(q) && level % q != 0).collect();
    let mats: Vec<Vec<Vec<i64>>> = qs
        .par_iter()
        .map(|&q| {
            c.cache.get_or_compute(&format!("brandt-{nm}-{np}-{q}"), || -> Result<_, CliError> {
                Ok(brandt_matrix(&cs, q)?)
            })
        })
        .collect::<Result<_, _>>()?;
    let brandt: BTreeMap<u64, Vec<Vec<i64>>> = qs.iter().copied().zip(mats).collect();
    // add eigenvalues a_q in increasing q until the eigenspace is a line
    let mut inputs = BTreeMap::new();
    let mut eigenvector = None;
    for &q in &qs {
        inputs.insert(q, cfg.curve.a_ell(q)?);
        match integral_eigenvector(&brandt, &inputs) {
            Ok(f) => {
                eigenvector = Some(f.values);
                break;
            }
            Err(Error::Ambiguous(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let eigenvector = eigenvector.ok_or(CliError::Compute(Error::Ambiguous(cs.len())))?;
    Ok(QuaternionData { cs, brandt, inputs, eigenvector })
}

fn brandt_report(cfg: &JobConfig, qd: &QuaternionData) -> Result<BrandtJson, CliError> {
    let cs = &qd.cs;
    let v = &qd.eigenvector;
    let mut eigenvalues = Vec::new();
    for (&q, t) in &qd.brandt {
        let tv = apply(t, v);
        let i = v.iter().position(|&x| x != 0).expect("nonzero eigenvector");
        let lambda = tv[i] / v[i];
        let exact = is_eigenvector(t, v, lambda);
        let a = cfg.curve.a_ell(q)?;
        eigenvalues.push(EigenvalueJson {
            q: s(q),
            brandt: if exact { s(lambda) } else { "none".into() },
            point_count: s(a),
            used_as_input: qd.inputs.contains_key(&q),
            matches: exact && lambda == a,
        });
    }
    Ok(BrandtJson {
        n_minus: s(cfg.n_minus),
        n_plus: s(cfg.n_plus),
        class_count: s(cs.len()),
        weights: strs(cs.weights()),
        mass: s(cs.mass()),
        mass_formula: s(eichler_mass(cfg.n_minus, cfg.n_plus)),
        matrices: qd.brandt.iter().map(|(q, t)| (s(q), t.iter().map(|r| strs(r)).collect())).collect(),
        eigenvector: strs(v),
        eigenvalues,
        commute: hecke_commute(&qd.brandt),
        self_adjoint: qd.brandt.values().all(|t| self_adjoint(cs, t)),
    })
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter().map(|r| (0..n).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect()).collect()
}

pub fn hecke_commute(brandt: &BTreeMap<u64, Vec<Vec<i64>>>) -> bool {
    let ts: Vec<&Vec<Vec<i64>>> = brandt.values().collect();
    ts.iter().enumerate().all(|(i, a)| ts[i + 1..].iter().all(|b| mat_mul(a, b) == mat_mul(b, a)))
}

/// ⟨T e_a, e_b⟩ = ⟨e_a, T e_b⟩ for the pairing Σ f(x) g(x) / w_x.
pub fn self_adjoint(cs: &ClassSet, t: &[Vec<i64>]) -> bool {
    let h = cs.len();
    let id: Vec<usize> = (0..h).collect();
    let e = |i: usize| (0..h).map(|j| i64::from(i == j)).collect::<Vec<i64>>();
    (0..h).all(|a| {
        (0..h).all(|b| {
            pairing_rational(&apply(t, &e(a)), &e(b), cs, &id) == pairing_rational(&e(a), &apply(t, &e(b)), cs, &id)
        })
    })
}

fn family(c: &Ctx, cs: &ClassSet, walk: &[u64]) -> Result<GrossPointFamily, CliError> {
    let cfg = c.cfg;
    let w: Vec<String> = walk.iter().map(|x| x.to_string()).collect();
    let key = format!("gross-{}-{}-{}-w{}", cfg.n_minus, cfg.n_plus, -cfg.d_k, w.join("_"));
    c.cache.get_or_compute(&key, || -> Result<_, CliError> { Ok(GrossPointFamily::with_walk(cs, cfg.d_k, walk)?) })
}

/// Eigenform values and whether they are the shared integral normalization.
fn eigen_values(cfg: &JobConfig, qd: &QuaternionData, p: u64, n: u32) -> Result<(Vec<i64>, bool), CliError> {
    if cfg.flags.shared_normalization {
        return Ok((qd.eigenvector.clone(), true));
    }
    let f = eigenform_mod(&qd.cs, &qd.brandt, &qd.inputs, p, n)?;
    Ok((f.values, false))
}

fn provenance(cfg: &JobConfig, p: u64, n: u32, pinned: bool) -> Provenance {
    Provenance {
        curve: cfg.label.clone(),
        d_k: cfg.d_k,
        p,
        n,
        conductor: 0,
        walk: Vec::new(),
        generator: QuadForm::principal(cfg.d_k),
        eigenform: Vec::new(),
        pinned,
    }
}

fn character_table(l: &GroupRingElement, m_prime: u64) -> Result<Vec<CharacterJson>, CliError> {
    let base = *l.ring().base();
    let factors = factor_cyclotomic(m_prime, base.p(), base.n())?;
    factors
        .into_par_iter()
        .enumerate()
        .map(|(i, f)| {
            let name = format_poly(f.modulus_poly());
            let chi = Character::from_factor(l.order(), f, 1)?;
            let value = chi.eval(l)?;
            let vo = vanishing_order(l, &chi)?;
            Ok(CharacterJson {
                index: s(i),
                factor: name,
                valuation: s(chi.target().valuation(&value)),
                value: strs(&value),
                vanishing_order: vo.map_or("inf".into(), s),
            })
        })
        .collect()
}

fn level_json(t: &ThetaElement, m_prime: u64) -> Result<LevelJson, CliError> {
    let g = s(t.provenance.generator);
    let bd = bd_element(&t.element)?;
    Ok(LevelJson {
        level: s(t.level),
        theta: ElementJson::new(&t.element, &g),
        bd: ElementJson::new(&bd.element, &g),
        characters: character_table(&bd.element, m_prime)?,
        provenance: (&t.provenance).into(),
    })
}

fn theta_levels(c: &mut Ctx, qd: &QuaternionData) -> Result<(Vec<LevelJson>, Vec<ThetaElement>), CliError> {
    let cfg = c.cfg;
    let (values, pinned) = eigen_values(cfg, qd, cfg.p, cfg.n)?;
    let quotients = compatible_quotients(cfg.d_k, cfg.m_prime, cfg.p, cfg.r)?;
    let mut tower = Vec::new();
    for (r, q) in quotients.iter().enumerate() {
        let walk = tower_walk(cfg.m_prime, cfg.p, r as u32);
        let gp = family(c, &qd.cs, &walk)?;
        tower.push(theta_from_family(&gp, &values, q, &walk, provenance(cfg, cfg.p, cfg.n, pinned))?);
    }
    let levels = tower.iter().map(|t| level_json(t, cfg.m_prime)).collect::<Result<_, _>>()?;
    Ok((levels, tower))
}

fn stabilize(cfg: &JobConfig, hyp: &HypothesisReport, tower: &[ThetaElement]) -> Result<StabilizeJson, CliError> {
    let p = cfg.p;
    let ring = ResidueRing::new(p, cfg.n)?;
    let alpha = cfg.curve.unit_root(p, cfg.n)?;
    let a_p = ring.reduce(cfg.curve.a_ell(p)? as i128);
    let st = stabilized_tower(tower, alpha)?;
    let mut checks = Vec::new();
    for r in 1..tower.len() {
        let lvl = tower[r].level as usize;
        let below = &tower[r - 1].element;
        let phi = cyclotomic_at_generator(tower[r].element.ring())?;
        let offsets: Vec<usize> = (0..below.order()).map(|i| i % p as usize).collect();
        let via_phi = phi.mul(&below.lift(lvl, &offsets)?)?;
        checks.push(CheckJson { name: "cores_is_phi_multiple".into(), level: s(lvl), pass: via_phi == below.cores(lvl)? });
        if r >= 2 {
            let lhs = tower[r].element.project(lvl / p as usize)?;
            let rhs = below.scale(&[a_p]).sub(&tower[r - 2].element.cores(below.order())?)?;
            checks.push(CheckJson { name: "hecke_relation".into(), level: s(lvl), pass: lhs == rhs });
            let proj = st[r - 1].element.project(lvl / p as usize)?;
            checks.push(CheckJson { name: "norm_compatibility".into(), level: s(lvl), pass: proj == st[r - 2].element });
        }
    }
    let ep = e_p_multiplier(&cfg.curve, cfg.d_k, p, cfg.n, cfg.m_prime)?;
    let gen0 = s(tower[0].provenance.generator);
    let mut multiples = Vec::new();
    for (r, sr) in st.iter().enumerate() {
        let top = &tower[r + 1];
        let lvl = s(top.level);
        if r == 0 && !ep.invertible {
            multiples.push(MultipleJson {
                level: lvl,
                c: None,
                kernel_log_size: None,
                residual_zero: false,
                error: Some("e_p is not a unit; base case not validated".into()),
            });
            continue;
        }
        let g = s(top.provenance.generator);
        multiples.push(match stabilization_multiple(&top.element, &sr.element) {
            Ok(m) => {
                let residual_zero = top.element.sub(&m.c.mul(&sr.element)?)?.is_zero();
                MultipleJson {
                    level: lvl,
                    c: Some(ElementJson::new(&m.c, &g)),
                    kernel_log_size: Some(s(m.kernel_log_size)),
                    residual_zero,
                    error: None,
                }
            }
            Err(e) => MultipleJson { level: lvl, c: None, kernel_log_size: None, residual_zero: false, error: Some(e.to_string()) },
        });
    }
    Ok(StabilizeJson {
        alpha: s(alpha),
        e_p: ElementJson::new(&ep.element, &gen0),
        e_p_split: ep.split,
        e_p_invertible: ep.invertible,
        po_verdict: status_name(hyp.get("po").status),
        base_case_validated: ep.invertible,
        stabilized: st.iter().map(|t| level_json(t, cfg.m_prime)).collect::<Result<_, _>>()?,
        checks,
        multiples,
        tower_depth: s(tower.len()),
    })
}

fn glue(c: &mut Ctx, qd: &QuaternionData) -> Result<GlueJson, CliError> {
    let cfg = c.cfg;
    let spec = cfg.glue.as_ref().ok_or(CliError::Config("no glue section".into()))?;
    let gamma = GammaQuotient::new(cfg.d_k, spec.m)?;
    let mut walk = Vec::new();
    for (l, e) in factorize(m0_of(spec.m)) {
        walk.extend(std::iter::repeat(l).take(e as usize));
    }
    let gp = family(c, &qd.cs, &walk)?;
    let mut inputs = Vec::new();
    let mut parts = Vec::new();
    for &(q, k) in &spec.primes {
        let (values, pinned) = eigen_values(cfg, qd, q, k)?;
        let t = theta_from_family(&gp, &values, &gamma, &walk, provenance(cfg, q, k, pinned))?;
        let bd = bd_element(&t.element)?;
        inputs.push(GlueInputJson {
            prime: s(q),
            exponent: s(k),
            bd: ElementJson::new(&bd.element, &s(t.provenance.generator)),
            provenance: (&t.provenance).into(),
        });
        parts.push((bd.element, t.provenance));
    }
    let glued = glue_crt(&parts)?;
    let reductions_match = parts
        .iter()
        .all(|(el, pr)| glued.reduce(pr.p).map(|v| v == el.flat()).unwrap_or(false));
    Ok(GlueJson {
        level: s(spec.m),
        inputs,
        modulus: s(glued.modulus),
        coefficients: strs(&glued.coeffs),
        reductions_match,
    })
}
