//! Real resonances of the perturbed box: roots of `D(E) = 1 - G₀(0,0,E) Q₁(E)`
//! with the closed forms of both factors.

use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;

use super::container::{ContainerIntegrals, ContainerSpec, IntegralMode};
use crate::error::{Error, Result};
use crate::potential::ActivationSpec;
use crate::roots::bisect_then_secant;

/// Residual `|D|` a reported root must reach.
pub const ROOT_RESIDUAL: f64 = 1e-10;

/// Samples per analytic subinterval used to bracket sign changes.
const SAMPLES_PER_INTERVAL: usize = 64;

const SECANT_STEPS: usize = 5;

/// Scan settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Bisection stops once the bracket is narrower than this.
    pub bisection_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { bisection_tol: 1e-12 }
    }
}

/// A verified root of the resonance denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleRoot {
    pub energy: f64,
    pub residual: f64,
    pub bracket_width: f64,
}

/// Parameters that fully determine the denominator, kept with the report so
/// it can be checked after a round trip through text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanParameters {
    pub box_length: f64,
    pub hbar: f64,
    pub p_ref: f64,
    pub strength: f64,
    pub e_lo: f64,
    pub e_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleReport {
    pub params: ScanParameters,
    pub roots: Vec<PoleRoot>,
    /// Box eigenenergies inside the window (singular points of the closed forms).
    pub excluded: Vec<f64>,
    /// `E_{2⌊a/π⌋}`; `None` when `⌊a/π⌋ = 0`.
    pub flagged_extra_pole: Option<f64>,
}

/// The resonance denominator with the removable singularities of the closed
/// forms cancelled analytically.
#[derive(Debug, Clone)]
pub struct Denominator {
    spec: ContainerSpec,
    coupling_sq: f64,
    band_index: usize,
}

impl Denominator {
    pub fn new(spec: &ContainerSpec, act: &ActivationSpec) -> Result<Self> {
        // validates the band split and the missing UV cutoff
        let ints = ContainerIntegrals::new(&spec.with_series_terms(32)?, act, IntegralMode::Approx)?;
        let coupling = 0.5 * act.strength();
        Ok(Denominator {
            spec: *spec,
            coupling_sq: coupling * coupling,
            band_index: ints.band_index(),
        })
    }

    /// `D(E)` for `E > 0`.
    ///
    /// `G₀(0,0)Q₁ = (u²/2L)[tan z/(2Eħ√2E) - L/(4ħ²E) - tan z/(ħ√2E (E_{2k}-E))]`,
    /// using `tan z cot z = 1`; the last ratio is finite at `E_{2k}`.
    pub fn eval(&self, energy: f64) -> f64 {
        let l = self.spec.box_length();
        let hbar = self.spec.hbar();
        let root = (2.0 * energy).sqrt();
        let z = l * root / (2.0 * hbar);
        let t = z.tan();
        let mut bracket = t / (2.0 * energy * hbar * root) - l / (4.0 * hbar * hbar * energy);
        if self.band_index >= 1 {
            let ek = self.spec.energy(2 * self.band_index);
            let dz = z - self.band_index as f64 * PI;
            // tan z / (E_{2k} - E) = (tan δz / δz) · δz / (E_{2k} - E)
            let tan_ratio = if dz == 0.0 { 1.0 } else { dz.tan() / dz };
            let dz_ratio = -l / (hbar * (root + (2.0 * ek).sqrt()));
            bracket -= tan_ratio * dz_ratio / (hbar * root);
        }
        1.0 - self.coupling_sq / (2.0 * l) * bracket
    }
}

fn scan_interval(d: &Denominator, lo: f64, hi: f64, opts: &ScanOptions) -> Vec<PoleRoot> {
    let width = hi - lo;
    // stay clear of the singular endpoints
    let pad = width * 1e-9;
    let (a, b) = (lo + pad, hi - pad);
    let step = (b - a) / SAMPLES_PER_INTERVAL as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = d.eval(x0);
    for i in 1..=SAMPLES_PER_INTERVAL {
        let x1 = if i == SAMPLES_PER_INTERVAL { b } else { a + i as f64 * step };
        let f1 = d.eval(x1);
        if f0.is_finite() && f1.is_finite() && f0.signum() != f1.signum() {
            if let Some(root) = polish(d, x0, x1, opts) {
                roots.push(root);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn polish(d: &Denominator, lo: f64, hi: f64, opts: &ScanOptions) -> Option<PoleRoot> {
    let f = |e: f64| d.eval(e);
    let mut found = bisect_then_secant(f, lo, hi, opts.bisection_tol, SECANT_STEPS)?;
    let mut residual = d.eval(found.root).abs();
    if residual >= ROOT_RESIDUAL {
        // steep crossings: bisect down to adjacent floats
        found = bisect_then_secant(f, lo, hi, 0.0, SECANT_STEPS)?;
        residual = d.eval(found.root).abs();
    }
    // a crossing through a divergence is not a root
    (residual < ROOT_RESIDUAL).then_some(PoleRoot {
        energy: found.root,
        residual,
        bracket_width: found.bracket_width,
    })
}

/// Bracket and polish every real root of `D(E)` in `[e_lo, e_hi]`.
pub fn demon_pole_scan(
    e_lo: f64,
    e_hi: f64,
    spec: &ContainerSpec,
    act: &ActivationSpec,
    opts: &ScanOptions,
) -> Result<PoleReport> {
    if !(e_lo > 0.0 && e_hi > e_lo && e_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "pole scan window must satisfy 0 < E_lo < E_hi, got [{e_lo}, {e_hi}]"
        )));
    }
    let d = Denominator::new(spec, act)?;
    let flagged_extra_pole = (d.band_index >= 1).then(|| spec.energy(2 * d.band_index));

    let mut excluded = Vec::new();
    let mut n = 1usize;
    while spec.energy(n) < e_hi {
        let en = spec.energy(n);
        if en > e_lo {
            excluded.push(en);
        }
        n += 1;
    }
    for (label, e) in [("E_lo", e_lo), ("E_hi", e_hi)] {
        if let Some(hit) = nearest_level(spec, e) {
            return Err(Error::InvalidParameter(format!(
                "{label} = {e} sits on the singular level E_{hit}"
            )));
        }
    }

    let mut cuts = vec![e_lo];
    cuts.extend(excluded.iter().copied().filter(|&e| Some(e) != flagged_extra_pole));
    if let Some(ek) = flagged_extra_pole {
        if ek > e_lo && ek < e_hi {
            cuts.push(ek);
        }
    }
    cuts.push(e_hi);
    cuts.sort_by(f64::total_cmp);

    let mut roots: Vec<PoleRoot> = cuts
        .par_windows(2)
        .flat_map_iter(|w| scan_interval(&d, w[0], w[1], opts))
        .collect();
    roots.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    if let Some(ek) = flagged_extra_pole {
        roots.retain(|r| (r.energy - ek).abs() > 1e-9 * ek.max(1.0));
    }

    let params = ScanParameters {
        box_length: spec.box_length(),
        hbar: spec.hbar(),
        p_ref: act.p_ref(),
        strength: act.strength(),
        e_lo,
        e_hi,
    };
    Ok(PoleReport {
        params,
        roots,
        excluded,
        flagged_extra_pole,
    })
}

fn nearest_level(spec: &ContainerSpec, e: f64) -> Option<usize> {
    let guess = (spec.box_length() * (2.0 * e).sqrt() / (PI * spec.hbar())).round() as usize;
    (guess.saturating_sub(1).max(1)..=guess + 1).find(|&n| (spec.energy(n) - e).abs() < 1e-9)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl PoleReport {
    /// Line-oriented text form; one `root` line per root with `E |D(E)| width`.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::from("# demon pole report\n");
        let _ = writeln!(out, "box_length {}", fmt_f64(p.box_length));
        let _ = writeln!(out, "hbar {}", fmt_f64(p.hbar));
        let _ = writeln!(out, "p_ref {}", fmt_f64(p.p_ref));
        let _ = writeln!(out, "strength {}", fmt_f64(p.strength));
        let _ = writeln!(out, "window {} {}", fmt_f64(p.e_lo), fmt_f64(p.e_hi));
        match self.flagged_extra_pole {
            Some(e) => {
                let _ = writeln!(out, "extra_pole {}", fmt_f64(e));
            }
            None => out.push_str("extra_pole none\n"),
        }
        for e in &self.excluded {
            let _ = writeln!(out, "excluded {}", fmt_f64(*e));
        }
        out.push_str("# root E |D(E)| bracket_width\n");
        for r in &self.roots {
            let _ = writeln!(
                out,
                "root {} {} {}",
                fmt_f64(r.energy),
                fmt_f64(r.residual),
                fmt_f64(r.bracket_width)
            );
        }
        out
    }

    /// Parse the text form and re-evaluate `D` at every root.
    pub fn parse_verified(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::InvalidParameter(format!("pole report line {line}: {msg}"));
        let mut vals = [None::<f64>; 6];
        let mut roots = Vec::new();
        let mut excluded = Vec::new();
        let mut extra = None;
        let mut saw_extra = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let key = fields.next().unwrap_or_default();
            let nums: Vec<&str> = fields.collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line_no, &format!("bad number '{s}'")));
            let expect = |n: usize| {
                if nums.len() == n {
                    Ok(())
                } else {
                    Err(bad(line_no, &format!("expected {n} value(s) after '{key}'")))
                }
            };
            match key {
                "box_length" | "hbar" | "p_ref" | "strength" => {
                    expect(1)?;
                    let slot = ["box_length", "hbar", "p_ref", "strength"].iter().position(|k| *k == key).unwrap();
                    vals[slot] = Some(num(nums[0])?);
                }
                "window" => {
                    expect(2)?;
                    vals[4] = Some(num(nums[0])?);
                    vals[5] = Some(num(nums[1])?);
                }
                "extra_pole" => {
                    expect(1)?;
                    saw_extra = true;
                    extra = if nums[0] == "none" { None } else { Some(num(nums[0])?) };
                }
                "excluded" => {
                    expect(1)?;
                    excluded.push(num(nums[0])?);
                }
                "root" => {
                    expect(3)?;
                    roots.push(PoleRoot {
                        energy: num(nums[0])?,
                        residual: num(nums[1])?,
                        bracket_width: num(nums[2])?,
                    });
                }
                other => return Err(bad(line_no, &format!("unknown record '{other}'"))),
            }
        }
        let names = ["box_length", "hbar", "p_ref", "strength", "window", "window"];
        let mut v = [0.0; 6];
        for (i, slot) in vals.iter().enumerate() {
            v[i] = slot.ok_or_else(|| Error::InvalidParameter(format!("pole report lacks '{}'", names[i])))?;
        }
        if !saw_extra {
            return Err(Error::InvalidParameter("pole report lacks 'extra_pole'".into()));
        }
        let report = PoleReport {
            params: ScanParameters {
                box_length: v[0],
                hbar: v[1],
                p_ref: v[2],
                strength: v[3],
                e_lo: v[4],
                e_hi: v[5],
            },
            roots,
            excluded,
            flagged_extra_pole: extra,
        };
        report.verify()?;
        Ok(report)
    }

    /// Re-evaluate `D` at each root; also rejects a root at the extra pole.
    pub fn verify(&self) -> Result<()> {
        let p = &self.params;
        let spec = ContainerSpec::new(p.box_length, p.hbar, 32)?;
        let act = ActivationSpec::new(p.p_ref, None, p.strength)?;
        let d = Denominator::new(&spec, &act)?;
        for r in &self.roots {
            let res = d.eval(r.energy).abs();
            if !(res < ROOT_RESIDUAL) {
                return Err(Error::Numerical(format!(
                    "reported root {} has |D| = {res:e}",
                    r.energy
                )));
            }
            if let Some(ek) = self.flagged_extra_pole {
                if (r.energy - ek).abs() <= 1e-9 * ek.max(1.0) {
                    return Err(Error::Numerical(format!("extra pole {ek} reported as a root")));
                }
            }
        }
        Ok(())
    }
}
