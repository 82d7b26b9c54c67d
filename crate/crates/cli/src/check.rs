//! Property-check suites behind `dhom check`.
//!
//! Each property yields one [`CheckLine`]: its worst residual over the
//! samples and the bound it is held to. Lines are sorted by name so output
//! does not depend on evaluation order.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use dhom_core::homcheck::{
    check_hom_sector, check_quantizer_discrete_homogeneity, check_quantizer_homogeneity_with_step,
    quantizer_locality, quantizer_sector_ratio, sample_points, sample_unit, SampleSpec, SectorSpec,
};
use dhom_core::quantizer::spherical_quantize;
use dhom_core::sim::{example_feedback, example_plant, simulate};
use dhom_core::{
    hom_quantize, log_quantize, DMatrix, DVector, Dilation, FundamentalDomain, HomQuantizer,
    HomSpace, QuantizerParams,
};
use rand::Rng;

use crate::commands::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Dilation,
    Norm,
    Quantizer,
    Sector,
    Sim,
    All,
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "dilation" => Self::Dilation,
            "norm" => Self::Norm,
            "quantizer" => Self::Quantizer,
            "sector" => Self::Sector,
            "sim" => Self::Sim,
            "all" => Self::All,
            other => return Err(CliError::UnknownSuite(other.to_string())),
        })
    }
}

/// Inputs shared by the suites. Corrupting `nu` makes every quantizer
/// property fail, which is how the suite is shown to catch bad parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixture {
    pub nu: f64,
    pub delta_angle: f64,
    pub seed: u64,
    pub samples: usize,
}

impl Default for Fixture {
    fn default() -> Self {
        Self {
            nu: 0.7,
            delta_angle: PI / 20.0,
            seed: 42,
            samples: 1000,
        }
    }
}

impl Fixture {
    fn spec(&self) -> SampleSpec {
        SampleSpec::default()
            .with_count(self.samples)
            .with_seed(self.seed)
    }

    fn params(&self, dim: usize) -> Result<QuantizerParams, String> {
        QuantizerParams::new(self.nu, self.delta_angle, dim).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub worst: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckLine {
    fn new(name: impl Into<String>, worst: f64, bound: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            worst,
            bound,
            pass,
        }
    }

    /// Passes when `worst ≤ bound`; NaN fails.
    fn at_most(name: impl Into<String>, worst: f64, bound: f64) -> Self {
        Self::new(name, worst, bound, worst <= bound)
    }

    fn failed(name: impl Into<String>, err: impl fmt::Display) -> Self {
        let name = name.into();
        crate::commands::report(&format!("{name}: {err}"));
        Self::new(name, f64::NAN, 0.0, false)
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(
            f,
            "{tag} {} {:.3e} {:.3e}",
            self.name, self.worst, self.bound
        )
    }
}

/// Test dilations, all with identity weight except `upper2_weighted`.
pub fn test_dilations() -> Vec<(&'static str, Dilation)> {
    let id = DMatrix::identity(2, 2);
    vec![
        ("identity2", Dilation::standard(2)),
        (
            "diag321",
            Dilation::diagonal(&[3.0, 2.0, 1.0]).expect("monotone"),
        ),
        (
            "upper2",
            Dilation::new(
                DMatrix::from_row_slice(2, 2, &[1.5, 0.6, 0.0, 1.0]),
                id.clone(),
            )
            .expect("monotone"),
        ),
        (
            "rotating2",
            Dilation::new(DMatrix::from_row_slice(2, 2, &[2.0, -1.5, 1.0, 1.0]), id)
                .expect("monotone"),
        ),
        (
            "upper2_weighted",
            Dilation::new(
                DMatrix::from_row_slice(2, 2, &[1.5, 0.6, 0.0, 1.0]),
                DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            )
            .expect("monotone"),
        ),
    ]
}

fn run_guarded(name: &str, f: impl FnOnce() -> Result<Vec<CheckLine>, String>) -> Vec<CheckLine> {
    f().unwrap_or_else(|e| vec![CheckLine::failed(name, e)])
}

pub fn dilation_suite(fx: &Fixture) -> Vec<CheckLine> {
    let mut out = Vec::new();
    let mut rng = fx.spec().rng();
    for (name, d) in test_dilations() {
        let (mut group, mut commute, mut sandwich) = (0.0f64, 0.0f64, 0.0f64);
        let g = d.generator();
        for _ in 0..100 {
            let s = rng.random_range(-3.0..3.0);
            let t = rng.random_range(-3.0..3.0);
            let st = d.dilate(s + t);
            group = group.max((d.dilate(s) * d.dilate(t) - &st).norm() / st.norm());
            let e = d.dilate(s);
            commute = commute.max((g * &e - &e * g).norm());
        }
        for _ in 0..fx.samples {
            let x = sample_unit(&d, &mut rng) * rng.random_range(0.1..10.0);
            let s = rng.random_range(-3.0..3.0);
            let (lo, hi) = d.norm_bounds(s);
            let ratio = d.norm(&d.apply(s, &x)) / d.norm(&x);
            sandwich = sandwich.max((lo - ratio) / lo).max((ratio - hi) / hi);
        }
        out.push(CheckLine::at_most(
            format!("dilation.group_law.{name}"),
            group,
            1e-9,
        ));
        out.push(CheckLine::at_most(
            format!("dilation.commutation.{name}"),
            commute,
            1e-10,
        ));
        out.push(CheckLine::at_most(
            format!("dilation.norm_sandwich.{name}"),
            sandwich,
            1e-9,
        ));
        if d.eta_min() >= 1.0 {
            let x = sample_unit(&d, &mut rng);
            let shrink = d.norm(&d.apply(-10.0, &x)) / 1e-3;
            let grow = 1e3 / d.norm(&d.apply(10.0, &x));
            out.push(CheckLine::new(
                format!("dilation.limits.{name}"),
                shrink.max(grow),
                1.0,
                shrink < 1.0 && grow < 1.0,
            ));
        }
    }
    out
}

pub fn norm_suite(fx: &Fixture) -> Vec<CheckLine> {
    let mut out = Vec::new();
    for (name, d) in test_dilations() {
        out.extend(run_guarded(&format!("norm.{name}"), || {
            let space: HomSpace = d.clone().into();
            let mut rng = fx.spec().rng();
            let (mut defining, mut homog, mut sandwich, mut round, mut index) =
                (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
            let fd = FundamentalDomain::new(space.clone(), LN_2, 1.0).map_err(|e| e.to_string())?;
            for x in sample_points(&d, &fx.spec()).map_err(|e| e.to_string())? {
                let r = space.norm(&x).map_err(|e| e.to_string())?;
                defining = defining.max((d.norm(&d.apply(-r.ln(), &x)) - 1.0).abs());

                let s = rng.random_range(-3.0..3.0);
                let rs = space.norm(&d.apply(s, &x)).map_err(|e| e.to_string())?;
                homog = homog.max((rs - s.exp() * r).abs() / (s.exp() * r));

                let nx = d.norm(&x);
                let (a, b) = (r.powf(d.eta_min()), r.powf(d.eta_max()));
                let (lo, hi) = if nx >= 1.0 { (a, b) } else { (b, a) };
                sandwich = sandwich.max((lo - nx) / lo).max((nx - hi) / hi);

                let y = space.phi(&x).map_err(|e| e.to_string())?;
                round = round.max((space.phi_inv(&y) - &x).norm() / x.norm().max(1.0));

                let k = fd.index(&x).map_err(|e| e.to_string())?;
                let hits = (k - 1..=k + 1)
                    .filter(|&j| fd.contains_radius(r * (-(j as f64) * LN_2).exp()))
                    .count();
                if hits != 1 || !fd.contains_radius(r * (-(k as f64) * LN_2).exp()) {
                    index += 1.0;
                }
            }
            Ok(vec![
                CheckLine::at_most(format!("norm.defining_equation.{name}"), defining, 1e-12),
                CheckLine::at_most(format!("norm.homogeneity.{name}"), homog, 1e-7),
                CheckLine::at_most(format!("norm.sandwich.{name}"), sandwich, 1e-8),
                CheckLine::at_most(format!("norm.phi_round_trip.{name}"), round, 1e-8),
                CheckLine::at_most(format!("norm.projection_index.{name}"), index, 0.0),
            ])
        }));
    }
    let space: HomSpace = Dilation::diagonal(&[3.0, 2.0, 1.0])
        .expect("monotone")
        .into();
    let r = space.norm(&DVector::from_column_slice(&[8.0, 0.0, 0.0]));
    out.push(match r {
        Ok(r) => CheckLine::at_most("norm.analytic_diag321", (r - 2.0).abs(), 1e-12),
        Err(e) => CheckLine::failed("norm.analytic_diag321", e),
    });
    out
}

pub fn quantizer_suite(fx: &Fixture) -> Vec<CheckLine> {
    let mut out = Vec::new();
    let p3 = match fx.params(3) {
        Ok(p) => p,
        Err(e) => return vec![CheckLine::failed("quantizer.params_valid", e)],
    };
    let mut rng = fx.spec().rng();

    let mut radial = f64::NEG_INFINITY;
    for _ in 0..fx.samples * 10 {
        let z = 10f64.powf(rng.random_range(-6.0..6.0));
        match log_quantize(&p3, z) {
            Ok(q) => radial = radial.max((q.value - z).abs() - p3.delta() * z),
            Err(e) => return vec![CheckLine::failed("quantizer.radial_sector", e)],
        }
    }
    out.push(CheckLine::at_most("quantizer.radial_sector", radial, 0.0));

    for n in 2..=4 {
        let name = format!("quantizer.spherical_bound.n{n}");
        out.extend(run_guarded(&name, || {
            let space: HomSpace = Dilation::standard(n).into();
            let p = fx.params(n)?;
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..fx.samples * 10 {
                let u = sample_unit(space.dilation(), &mut rng);
                let w = spherical_quantize(&space, &p, &u).map_err(|e| e.to_string())?;
                worst = worst.max((w - u).norm() - p.spherical_error_bound());
            }
            Ok(vec![CheckLine::at_most(name.clone(), worst, 1e-10)])
        }));
    }

    for (name, d) in test_dilations() {
        let label = format!("quantizer.{name}");
        out.extend(run_guarded(&label, || {
            let space: HomSpace = d.clone().into();
            let p = fx.params(d.dim())?;
            let spec = fx.spec();
            let hom = check_quantizer_discrete_homogeneity(&space, &p, &spec)
                .map_err(|e| e.to_string())?;
            let (mut grid, mut idem) = (0.0f64, 0.0f64);
            for x in sample_points(&d, &spec).map_err(|e| e.to_string())? {
                let q = hom_quantize(&space, &p, &x).map_err(|e| e.to_string())?;
                let level =
                    (space.norm(&q).map_err(|e| e.to_string())?.ln() - p.xi0().ln()) / p.nu().ln();
                grid = grid.max((level - level.round()).abs());
                let qq = hom_quantize(&space, &p, &q).map_err(|e| e.to_string())?;
                idem = idem.max((qq - &q).norm() / q.norm());
            }
            let mut lines = vec![
                CheckLine::at_most(format!("quantizer.discrete_homogeneity.{name}"), hom, 1e-7),
                CheckLine::at_most(format!("quantizer.norm_grid.{name}"), grid, 1e-9),
                CheckLine::at_most(format!("quantizer.idempotence.{name}"), idem, 1e-9),
            ];
            if name == "diag321" {
                let wrong = check_quantizer_homogeneity_with_step(&space, &p, 1.0, &spec)
                    .map_err(|e| e.to_string())?;
                lines.push(CheckLine::new(
                    format!("quantizer.wrong_step_detected.{name}"),
                    wrong,
                    1e-3,
                    wrong > 1e-3,
                ));
            }
            Ok(lines)
        }));
    }
    out
}

pub fn sector_suite(fx: &Fixture) -> Vec<CheckLine> {
    let mut out = Vec::new();
    for (name, d) in test_dilations() {
        let label = format!("sector.{name}");
        out.extend(run_guarded(&label, || {
            let space: HomSpace = d.clone().into();
            let p = fx.params(d.dim())?;
            let eps = p.epsilon_tilde();
            let spec = fx.spec();
            let mut ratio = 0.0f64;
            for x in sample_points(&d, &spec).map_err(|e| e.to_string())? {
                ratio =
                    ratio.max(quantizer_sector_ratio(&space, &p, &x).map_err(|e| e.to_string())?);
            }
            let n = d.dim();
            let sector =
                SectorSpec::symmetric(DMatrix::identity(n, n), eps).map_err(|e| e.to_string())?;
            let inner = check_hom_sector(|x| hom_quantize(&space, &p, x), &space, &sector, &spec)
                .map_err(|e| e.to_string())?;
            let loc = quantizer_locality(&space, &p, &spec).map_err(|e| e.to_string())?;
            Ok(vec![
                CheckLine::at_most(
                    format!("sector.ratio_within_epsilon.{name}"),
                    ratio / eps - 1.0,
                    1e-8,
                ),
                CheckLine::new(
                    format!("sector.inner_product.{name}"),
                    inner.worst,
                    1e-10,
                    inner.holds,
                ),
                CheckLine::at_most(
                    format!("sector.locality.{name}"),
                    (loc.local_max - loc.global_max).abs(),
                    1e-7,
                ),
            ])
        }));
    }
    out
}

pub fn sim_suite(fx: &Fixture) -> Vec<CheckLine> {
    let plant = example_plant();
    let fb = example_feedback();
    let x0 = DVector::from_element(3, 1.0);
    let (h, t_end) = (1e-3, 2.0);
    let mut out = Vec::new();

    out.extend(run_guarded("sim.equilibrium", || {
        let traj =
            simulate(&plant, &fb, None, &DVector::zeros(3), h, 0.1).map_err(|e| e.to_string())?;
        let worst = traj.states.iter().map(|x| x.amax()).fold(0.0, f64::max);
        Ok(vec![CheckLine::at_most("sim.equilibrium", worst, 0.0)])
    }));

    out.extend(run_guarded("sim.step_halving", || {
        let a = simulate(&plant, &fb, None, &x0, h, t_end).map_err(|e| e.to_string())?;
        let b = simulate(&plant, &fb, None, &x0, h / 2.0, t_end).map_err(|e| e.to_string())?;
        let (xa, xb) = (
            a.final_state().ok_or("empty")?,
            b.final_state().ok_or("empty")?,
        );
        Ok(vec![CheckLine::at_most(
            "sim.step_halving",
            (xa - xb).norm() / xb.norm(),
            1e-6,
        )])
    }));

    out.extend(run_guarded("sim.scaling_symmetry", || {
        let base = simulate(&plant, &fb, None, &x0, h, t_end).map_err(|e| e.to_string())?;
        let d = plant.space().dilation();
        let mut worst = 0.0f64;
        for s in [-LN_2, LN_2] {
            let scale = (-plant.degree() * s).exp();
            let run = simulate(
                &plant,
                &fb,
                None,
                &d.apply(s, &x0),
                h * scale,
                t_end * scale,
            )
            .map_err(|e| e.to_string())?;
            if run.len() != base.len() {
                return Err(format!(
                    "sample counts differ: {} vs {}",
                    run.len(),
                    base.len()
                ));
            }
            for (x, y) in base.states.iter().zip(&run.states) {
                let expect = d.apply(s, x);
                worst = worst.max((y - &expect).norm() / expect.norm().max(1e-12));
            }
        }
        Ok(vec![CheckLine::at_most(
            "sim.scaling_symmetry",
            worst,
            1e-4,
        )])
    }));

    out.extend(run_guarded("sim.quantized_norm_grid", || {
        let p = fx.params(3)?;
        let q = HomQuantizer::new(plant.space().clone(), p).map_err(|e| e.to_string())?;
        let traj = simulate(&plant, &fb, Some(&q), &x0, h, t_end).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for xq in &traj.quantized_states {
            let r = plant.space().norm(xq).map_err(|e| e.to_string())?;
            if r > 0.0 {
                let level = (r.ln() - p.xi0().ln()) / p.nu().ln();
                worst = worst.max((level - level.round()).abs());
            }
        }
        Ok(vec![CheckLine::at_most(
            "sim.quantized_norm_grid",
            worst,
            1e-9,
        )])
    }));
    out
}

/// Runs `suite` and returns its lines sorted by name.
pub fn run_suite(suite: Suite, fx: &Fixture) -> Vec<CheckLine> {
    let mut lines = match suite {
        Suite::Dilation => dilation_suite(fx),
        Suite::Norm => norm_suite(fx),
        Suite::Quantizer => quantizer_suite(fx),
        Suite::Sector => sector_suite(fx),
        Suite::Sim => sim_suite(fx),
        Suite::All => {
            let mut all = dilation_suite(fx);
            all.extend(norm_suite(fx));
            all.extend(quantizer_suite(fx));
            all.extend(sector_suite(fx));
            all.extend(sim_suite(fx));
            all
        }
    };
    lines.sort_by(|a, b| a.name.cmp(&b.name));
    lines
}
