use std::f64::consts::PI;

use anyhow::Result;
use converse_core::hill::{solve_converse_ghys, GhysOptions};
use converse_core::{
    count_sign_changes, moment_map, orth_alternating_step, solve_converse_shk, solve_hobby_rice,
    step_from_sphere, CircleFunction, Error, HobbyRiceOptions, SHKProblem, SignedPartition,
};
use serde_json::{json, Value};

use crate::input::{check_positive, load_function, load_system, parse_eps_schedule, parse_point};
use crate::output::{overlay_svg, samples_csv, write_json, write_text};
use crate::{GhysArgs, HobbyRiceArgs, ShkArgs, StepSpaceArgs, VerifyArgs};

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn sign_changes(f: &CircleFunction) -> Result<usize> {
    match count_sign_changes(f, 0.0) {
        Ok(r) => Ok(r.count),
        Err(Error::AllNeutral) => Ok(0),
        Err(e) => Err(e.into()),
    }
}

fn uniform(period: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| period * i as f64 / n as f64).collect()
}

fn check_grid(grid: usize, min: usize) -> Result<()> {
    if grid < min {
        return Err(Error::InvalidInput(format!("--grid must be at least {min}, got {grid}")).into());
    }
    Ok(())
}

pub fn shk(a: &ShkArgs) -> Result<()> {
    check_positive("tol", a.tol)?;
    check_grid(a.grid, 16)?;
    let (spec, system) = load_system(&a.system)?;
    let f = load_function(&a.f, system.period())?;
    let mut problem = SHKProblem::new(f.clone(), system);
    problem.target = a.tol;
    problem.eps_schedule = parse_eps_schedule(&a.eps_schedule)?;
    problem.hobby_rice.seed = a.common.seed;
    let sol = solve_converse_shk(&problem)?;
    let pulled = f.pullback(&sol.phi)?;
    let before = sign_changes(&f)?;
    let after = sign_changes(&pulled)?;

    let period = f.period();
    let xs = uniform(period, a.grid);
    let columns = [
        ("f", xs.iter().map(|&x| f.eval(x)).collect()),
        ("f_phi", xs.iter().map(|&x| pulled.eval(x)).collect()),
        ("phi", xs.iter().map(|&x| sol.phi.eval(x)).collect()),
    ];
    let out = &a.common.out;
    write_text(out, "phi.csv", &sol.phi.to_csv(a.grid))?;
    write_text(out, "samples.csv", &samples_csv(&xs, &columns))?;
    write_text(out, "overlay.svg", &overlay_svg(&xs, &columns[..2], 0.0))?;
    write_json(out, "step.json", &sol.step.to_json())?;
    let report = json!({
        "command": "shk",
        "status": "ok",
        "input": {
            "f": a.f,
            "system": spec,
            "tol": a.tol,
            "eps_schedule": problem.eps_schedule,
            "seed": a.common.seed,
            "grid": a.grid,
        },
        "residuals": sol.residuals,
        "verified_residuals": sol.verified_residuals,
        "max_verified_residual": sol.max_residual(),
        "sign_changes": { "f": before, "pullback": after, "required": problem.system.dimension() + 1 },
        "alpha": sol.alpha,
        "alternation": sol.alternation,
        "step": sol.step.to_json(),
        "phi": sol.phi.header(),
        "phi_min_slope": sol.phi.min_slope(a.grid),
        "diagnostics": sol.diagnostics,
    });
    write_json(out, "report.json", &report)?;
    println!("shk: converged at eps {}", sol.diagnostics.eps);
    println!("max verified residual: {:e}", sol.max_residual());
    println!("sign changes: f {before}, f∘φ {after}");
    Ok(())
}

pub fn ghys(a: &GhysArgs) -> Result<()> {
    check_positive("tol", a.tol)?;
    let k = load_function(&a.k, PI)?;
    let opts = GhysOptions {
        eps_schedule: parse_eps_schedule(&a.eps_schedule)?,
        grid: a.grid,
        verify_grid: 4 * a.grid,
        potential_tol: a.tol,
        ..GhysOptions::default()
    };
    let sol = solve_converse_ghys(&k, &opts)?;
    let out = &a.common.out;
    let xs = uniform(PI, a.grid);
    let columns = [
        ("k", xs.iter().map(|&x| k.eval(x)).collect()),
        ("k_phi", xs.iter().map(|&x| sol.pulled.eval(x)).collect()),
    ];
    let potential = sol.g.potential_samples(0)?;
    let schwarzian = sol.g.schwarzian_samples(0)?;
    let px: Vec<f64> = potential.iter().map(|p| p.0).collect();
    let recovered = [
        ("k_phi", px.iter().map(|&x| sol.pulled.eval(x)).collect()),
        ("recovered", potential.iter().map(|p| p.1).collect()),
        ("schwarzian", schwarzian.iter().map(|s| s.1).collect()),
        ("g", px.iter().map(|&x| sol.g.eval(x)).collect()),
    ];
    write_text(out, "phi.csv", &sol.phi.to_csv(a.grid))?;
    write_text(out, "samples.csv", &samples_csv(&xs, &columns))?;
    write_text(out, "overlay.svg", &overlay_svg(&xs, &columns, 1.0))?;
    write_text(out, "potential.csv", &samples_csv(&px, &recovered))?;
    write_text(out, "curve.csv", &sol.curve.to_csv())?;
    write_text(out, "curve.svg", &sol.curve.to_svg())?;
    let report = json!({
        "command": "ghys",
        "status": "ok",
        "input": {
            "k": a.k,
            "tol": a.tol,
            "eps_schedule": opts.eps_schedule,
            "grid": opts.grid,
            "verify_grid": opts.verify_grid,
        },
        "closure_gap": sol.closure_gap,
        "potential_residual": sol.potential_residual,
        "monodromy": sol.monodromy,
        "alpha": sol.alpha,
        "model": sol.model,
        "tan": sol.tan,
        "phi": sol.phi.header(),
        "phi_min_slope": sol.phi.min_slope(a.grid),
        "diagnostics": sol.diagnostics,
    });
    write_json(out, "report.json", &report)?;
    println!("ghys: converged at eps {}", sol.diagnostics.eps);
    println!("closure gap: {:e}", sol.closure_gap);
    println!("potential residual: {:e}", sol.potential_residual);
    Ok(())
}

fn step_report(step: &converse_core::StepFunction) -> Value {
    json!({
        "step": step.to_json(),
        "canonical": step.canonicalize().to_json(),
        "intervals": step.canonicalize().signs().len(),
    })
}

pub fn hobby_rice(a: &HobbyRiceArgs) -> Result<()> {
    check_positive("tol", a.tol)?;
    let (spec, system) = load_system(&a.system)?;
    let opts = HobbyRiceOptions {
        tol: a.tol,
        seeds: a.seeds,
        seed: a.common.seed,
        ..HobbyRiceOptions::default()
    };
    let sol = solve_hobby_rice(system.basis(), &opts)?;
    let canonical = sol.step.canonicalize();
    let verified = converse_core::stepspace::step_moments(&canonical, system.basis(), &system.rule().refined());
    let out = &a.common.out;
    write_json(out, "step.json", &canonical.to_json())?;
    write_text(out, "step.csv", &canonical.to_csv())?;
    let xs = uniform(canonical.domain(), a.grid.max(16));
    let columns = [("h", xs.iter().map(|&x| canonical.value(x)).collect())];
    write_text(out, "samples.csv", &samples_csv(&xs, &columns))?;
    let mut report = json!({
        "command": "hobby-rice",
        "status": "ok",
        "input": { "system": spec, "tol": a.tol, "seeds": a.seeds, "seed": a.common.seed },
        "partition": sol.partition.coords(),
        "moments": sol.moments,
        "verified_moments": verified,
        "residual": sol.residual,
        "max_verified_residual": max_abs(&verified),
        "iterations": sol.iterations,
        "seed_index": sol.seed_index,
    });
    merge(&mut report, step_report(&sol.step));
    write_json(out, "report.json", &report)?;
    println!("hobby-rice: residual {:e} after {} iterations", sol.residual, sol.iterations);
    println!("breakpoints: {:?}", canonical.interior_breakpoints());
    println!("signs: {:?}", canonical.signs());
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    check_positive("tol", a.tol)?;
    let (spec, system) = load_system(&a.system)?;
    let f = load_function(&a.f, system.period())?;
    let residuals = system.residual_vector(&f)?;
    let verified = system.residual_vector_with(&f, &system.rule().refined())?;
    let max = max_abs(&verified);
    let orthogonal = max < a.tol;
    let count = sign_changes(&f)?;
    let required = system.dimension() + 1;
    let inequality = orthogonal.then_some(count >= required);
    let report = json!({
        "command": "verify",
        "status": "ok",
        "input": { "f": a.f, "system": spec, "tol": a.tol },
        "residuals": residuals,
        "verified_residuals": verified,
        "max_verified_residual": max,
        "orthogonal": orthogonal,
        "sign_changes": count,
        "required": required,
        "sturm_hurwitz": inequality,
    });
    write_json(&a.common.out, "report.json", &report)?;
    println!("residuals: {verified:?}");
    println!("orthogonal: {orthogonal} (max residual {max:e})");
    println!("sign changes: {count}, required {required}");
    match inequality {
        Some(true) => println!("sturm-hurwitz: pass"),
        Some(false) => println!("sturm-hurwitz: FAIL"),
        None => println!("sturm-hurwitz: not applicable"),
    }
    Ok(())
}

pub fn step_space(a: &StepSpaceArgs) -> Result<()> {
    let out = &a.common.out;
    let system = a.system.as_deref().map(load_system).transpose()?;
    let mut report = json!({ "command": "step-space", "status": "ok" });
    let step = match (&a.point, &system) {
        (Some(text), _) => {
            let domain = system.as_ref().map_or(a.domain, |(_, s)| s.period());
            check_positive("domain", domain)?;
            let p = SignedPartition::normalized(parse_point(text)?, domain)?;
            let step = step_from_sphere(&p);
            report["partition"] = json!(p.coords());
            report["domain"] = json!(domain);
            if let Some((spec, s)) = &system {
                report["system"] = json!(spec);
                report["moments"] = json!(moment_map(&p, s.basis(), s.rule()));
            }
            step
        }
        (None, Some((spec, s))) => {
            check_positive("tol", a.tol)?;
            let opts = HobbyRiceOptions {
                tol: a.tol,
                seed: a.common.seed,
                ..HobbyRiceOptions::default()
            };
            let step = orth_alternating_step(s, &opts)?;
            let moments = converse_core::stepspace::step_moments(&step, s.basis(), &s.rule().refined());
            report["system"] = json!(spec);
            report["verified_moments"] = json!(moments);
            report["max_verified_residual"] = json!(max_abs(&moments));
            step
        }
        (None, None) => {
            return Err(Error::InvalidInput("step-space needs --point or --system".into()).into());
        }
    };
    merge(&mut report, step_report(&step));
    let canonical = step.canonicalize();
    write_json(out, "step.json", &canonical.to_json())?;
    write_text(out, "step.csv", &canonical.to_csv())?;
    let xs = uniform(canonical.domain(), a.grid.max(16));
    let columns = [("h", xs.iter().map(|&x| canonical.value(x)).collect())];
    write_text(out, "samples.csv", &samples_csv(&xs, &columns))?;
    write_json(out, "report.json", &report)?;
    println!("intervals: {}", canonical.signs().len());
    println!("breakpoints: {:?}", canonical.interior_breakpoints());
    println!("signs: {:?}", canonical.signs());
    Ok(())
}

fn merge(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}
