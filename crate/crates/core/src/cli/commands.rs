use clap::{Args, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::{Command, Ctx, Report, Table, UsageError};
use crate::effective::{
    check_weq, empirical_mean_law, star_l_associativity, wilson_effective, zeta_with_rate, CumulantGenerator, InteractionSpec,
    MeanLawConfig, MeasureSpec, WilsonMethod,
};
use crate::fields::{
    free_action_momentum, free_action_position, gauge_partition, moment_table, random_real_field, support_cross_term,
    supports_separated, FieldVector, GaugeModel, GaussianMeasure, MomentumGrid, QuadratureSettings, RegularizedPropagator,
    SigmaFamily,
};
use crate::hierarchy::{rotation_projector, Hierarchy};
use crate::hopf::{self, Antipode, Forest};
use crate::laurent::LaurentSeries;
use crate::rational::{fmt_q, parse_q, to_f64, Q};
use crate::renorm::{z_ren, Bphz, ToyFeynmanRules, ToyModelParams};
use crate::rng;
use crate::sequences::{
    binomial_free, conv_interaction, conv_nat, conf_interacting, law_rows, poisson_limit_check_with, pointwise_interaction,
    xi_representation, DiscreteLaw, Weight,
};

type CmdResult = Result<Report, UsageError>;

/// Stream indices above this are reserved for auxiliary draws (test fields,
/// sources), keeping them apart from per-sample streams.
const AUX_STREAM: u64 = 1 << 40;

pub(super) fn dispatch(cmd: &Command, ctx: &Ctx) -> CmdResult {
    match cmd {
        Command::HopfCheck(a) => hopf_check(a),
        Command::Renormalize(a) => renormalize(a),
        Command::Zren(a) => zren(a),
        Command::GaussianCheck(a) => gaussian_check(a, ctx),
        Command::GaugeDemo(a) => gauge_demo(a, ctx),
        Command::Wilson(a) => wilson(a, ctx),
        Command::Legendre(a) => legendre(a, ctx),
        Command::MeanLaw(a) => mean_law(a, ctx),
        Command::Sequences(s) => match s {
            SequencesCommand::InteractPointwise(a) => interact_pointwise(a, ctx),
            SequencesCommand::InteractConv(a) => interact_conv(a),
            SequencesCommand::PoissonLimit(a) => poisson_limit(a),
            SequencesCommand::Xi(a) => xi(a),
        },
        Command::Hierarchy(HierarchyCommand::Check(a)) => hierarchy_check(a, ctx),
    }
}

fn rational(name: &str, s: &str) -> Result<Q, UsageError> {
    parse_q(s).ok_or_else(|| UsageError(format!("--{name}: '{s}' is not a rational number (use n/d or a decimal)")))
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

fn series_rows(table: &mut Table, name: &str, s: &LaurentSeries) {
    for (k, poly) in s.terms() {
        for (p, c) in poly.coeffs().iter().enumerate() {
            if !c.is_zero() {
                table.push(vec![name.into(), k.to_string(), p.to_string(), fmt_q(c)]);
            }
        }
    }
}

// ---- hopf / renorm ----

#[derive(Debug, Args, Serialize)]
pub struct HopfCheckArgs {
    /// Largest forest size checked (at most 6).
    #[arg(long, default_value_t = 5)]
    pub max_nodes: usize,
}

fn hopf_check(a: &HopfCheckArgs) -> CmdResult {
    if a.max_nodes > 6 {
        return Err(UsageError(format!("--max-nodes must be at most 6, got {}", a.max_nodes)));
    }
    let forests = hopf::forests_up_to(a.max_nodes);
    let coassociative = forests.iter().all(hopf::is_coassociative_on);
    let mut s = Antipode::new();
    let antipode = forests.iter().all(|f| hopf::antipode_axiom_holds(f, &mut s));
    let graded = forests.iter().all(hopf::is_graded_on);
    let mut pairs = 0usize;
    let mut multiplicative = true;
    for x in &forests {
        for y in &forests {
            if x.size() + y.size() <= a.max_nodes {
                pairs += 1;
                multiplicative &= hopf::is_multiplicative_on(x, y);
            }
        }
    }
    let counts: Vec<usize> = (0..=a.max_nodes).map(|n| hopf::forests_of_size(n).len()).collect();
    let ok = |b: bool| if b { "OK" } else { "FAILED" };
    let mut r = Report::default();
    r.result("forests_checked", forests.len());
    r.result("forests_per_size", counts);
    r.result("pairs_checked", pairs);
    r.holds("coassociativity", coassociative);
    r.holds("multiplicativity", multiplicative);
    r.holds("antipode", antipode);
    r.holds("grading", graded);
    r.summary.push(format!(
        "coassociativity {}, antipode {}, multiplicativity {}, grading {} ({} forests up to {} nodes)",
        ok(coassociative),
        ok(antipode),
        ok(multiplicative),
        ok(graded),
        forests.len(),
        a.max_nodes
    ));
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct RenormalizeArgs {
    /// Tree in parenthesis encoding, e.g. "(())"; a forest is space-separated trees.
    pub tree: String,
    /// Scale logarithm L = ln a as a rational; symbolic in L when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub scale_log: Option<String>,
    /// Highest power of epsilon kept (default: size + 2).
    #[arg(long)]
    pub order: Option<i32>,
}

fn toy_params(scale_log: &Option<String>, order: i32) -> Result<ToyModelParams, UsageError> {
    Ok(match scale_log {
        Some(l) => ToyModelParams::with_scale_log(rational("scale-log", l)?, order),
        None => ToyModelParams::symbolic(order),
    })
}

fn renormalize(a: &RenormalizeArgs) -> CmdResult {
    let forest = Forest::parse(&a.tree)?;
    if forest.is_unit() {
        return Err(UsageError("empty forest".into()));
    }
    let order = a.order.unwrap_or(forest.size() as i32 + 2);
    let bphz = Bphz::new(ToyFeynmanRules::new(toy_params(&a.scale_log, order)?));
    let amplitude = bphz.feynman(&forest)?;
    let counterterm = bphz.counterterm_forest(&forest)?;
    let renormalized = bphz.renormalize_forest(&forest)?;
    let identity = bphz.check_convolution_identity(&forest)?;
    let mut table = Table::new(&["quantity", "eps_power", "l_power", "coefficient"]);
    let mut r = Report::default();
    r.result("input", forest.to_string());
    r.result("order", order);
    if let [t] = forest.trees() {
        let prepared = bphz.prepare(t)?;
        series_rows(&mut table, "prepared", &prepared);
        r.result("prepared", prepared.to_json());
    }
    series_rows(&mut table, "amplitude", &amplitude);
    series_rows(&mut table, "counterterm", &counterterm);
    series_rows(&mut table, "renormalized", &renormalized);
    r.result("amplitude", amplitude.to_json());
    r.result("counterterm", counterterm.to_json());
    r.result("renormalized", renormalized.to_json());
    r.result("pole_part", renormalized.pole_part().to_json());
    r.result("finite_part", renormalized.finite_part().map(|p| p.to_string()).ok());
    r.summary.push(format!("R({forest}) = {renormalized}"));
    r.holds("pole_part_zero", renormalized.is_finite_at_zero());
    r.holds("convolution_identity", identity);
    r.table = Some(table);
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct ZrenArgs {
    /// Coupling as a rational.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub g: String,
    #[arg(long, default_value_t = 4)]
    pub max_nodes: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub scale_log: Option<String>,
    /// Highest power of epsilon kept (default: max-nodes + 2).
    #[arg(long)]
    pub order: Option<i32>,
}

fn zren(a: &ZrenArgs) -> CmdResult {
    let g = rational("g", &a.g)?;
    let order = a.order.unwrap_or(a.max_nodes as i32 + 2);
    let bphz = Bphz::new(ToyFeynmanRules::new(toy_params(&a.scale_log, order)?));
    let report = z_ren(&g, a.max_nodes, &bphz)?;
    let mut table = Table::new(&["quantity", "eps_power", "l_power", "coefficient"]);
    series_rows(&mut table, "z_ren", &report.series);
    let mut r = Report::default();
    r.result("z_ren", report.to_json());
    r.summary.push(format!("Z_ren = {}", report.series));
    r.holds("pole_free", report.pole_free);
    r.table = Some(table);
    Ok(r)
}

// ---- fields ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularization {
    Sharp,
    Smooth,
}

#[derive(Debug, Args, Serialize)]
pub struct GaussianCheckArgs {
    /// Number of lattice sites.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    /// Split point of the two bands.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Upper cutoff of the outer band ("inf" allowed).
    #[arg(long, default_value_t = 2.5)]
    pub lambda_prime: f64,
    #[arg(long, value_enum, default_value_t = Regularization::Sharp)]
    pub regularization: Regularization,
    /// Monte Carlo draws of each band.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    /// Random test fields and sources.
    #[arg(long, default_value_t = 100)]
    pub fields: usize,
}

fn gaussian_check(a: &GaussianCheckArgs, ctx: &Ctx) -> CmdResult {
    if a.samples < 2 || a.fields == 0 {
        return Err(UsageError("need --samples >= 2 and --fields >= 1".into()));
    }
    let grid = MomentumGrid::new(a.n, a.mass)?;
    let band = |ir, uv| match a.regularization {
        Regularization::Sharp => RegularizedPropagator::sharp(&grid, ir, uv),
        Regularization::Smooth => RegularizedPropagator::smooth(&grid, ir, uv),
    };
    let low = GaussianMeasure::new(band(0.0, a.lambda)?);
    let shell = GaussianMeasure::new(band(a.lambda, a.lambda_prime)?);
    let full = GaussianMeasure::new(band(0.0, a.lambda_prime)?);
    let conv = low.convolve(&shell)?;
    let mut r = Report::default();

    let mut aux = rng::stream(ctx.seed, AUX_STREAM);
    let whole = RegularizedPropagator::full(&grid);
    let mut action_dev: f64 = 0.0;
    let mut chi_dev: f64 = 0.0;
    for _ in 0..a.fields {
        let phi = random_real_field(&grid, &mut aux, None);
        let sx = free_action_position(&phi, &grid)?;
        let sp = free_action_momentum(&phi, &whole)?;
        action_dev = action_dev.max((sx - sp).abs() / sx.abs().max(1.0));
        let j = random_real_field(&grid, &mut aux, None);
        let lhs = conv.characteristic_function(&j);
        let rhs = low.characteristic_function(&j) * shell.characteristic_function(&j);
        chi_dev = chi_dev.max((lhs - rhs).norm());
    }
    let cov_dev = conv
        .covariance()
        .iter()
        .zip(full.covariance())
        .map(|(c, f)| if *f == 0.0 { c.abs() } else { (c - f).abs() / f })
        .fold(0.0, f64::max);
    let cov_tol = match a.regularization {
        Regularization::Sharp => 0.0,
        Regularization::Smooth => 1e-14,
    };

    // Support lemma on fields drawn inside each sharp band.
    let low_mask = RegularizedPropagator::sharp(&grid, 0.0, a.lambda)?.band().to_vec();
    let shell_mask = RegularizedPropagator::sharp(&grid, a.lambda, a.lambda_prime)?.band().to_vec();
    let phi = random_real_field(&grid, &mut aux, Some(&low_mask));
    let eta = random_real_field(&grid, &mut aux, Some(&shell_mask));
    let separated = supports_separated(&phi, &eta, &grid) && support_cross_term(&phi, &eta, &grid) == 0.0;

    // φ + η with independent draws reproduces the convolved covariance.
    let draws_low = low.sample(ctx.seed, a.samples);
    let draws_shell = shell.sample(ctx.seed.wrapping_add(1), a.samples);
    let sums: Vec<FieldVector> = draws_low.iter().zip(&draws_shell).map(|(x, y)| x.add(y)).collect();
    let rows = moment_table(&conv, &sums);
    let max_z = rows.iter().map(|m| m.z_score()).fold(0.0, f64::max);

    let mut table = Table::new(&["mode", "momentum", "covariance", "sample_mean", "std_error", "z_score"]);
    for m in &rows {
        table.push(vec![
            m.mode.to_string(),
            m.momentum.to_string(),
            m.weight.to_string(),
            m.mean.to_string(),
            m.std_error.to_string(),
            m.z_score().to_string(),
        ]);
    }
    let modes: Vec<Value> = (0..grid.len())
        .map(|k| json!({ "mode": k, "mode_number": grid.mode_number(k), "momentum": grid.momentum(k), "kernel": grid.kernel(k) }))
        .collect();
    r.result("grid", json!({ "n": grid.len(), "mass": grid.mass(), "modes": modes }));
    r.result(
        "propagators",
        json!({
            "regularization": a.regularization,
            "low": low.covariance(),
            "shell": shell.covariance(),
            "full": full.covariance(),
        }),
    );
    r.result("moments", &rows);
    r.bound("free_action_agreement", action_dev, ctx.tol(1e-10));
    r.bound("covariance_additivity", cov_dev, ctx.tol(cov_tol));
    r.bound("characteristic_function_product", chi_dev, ctx.tol(1e-12));
    r.holds("support_separation", separated);
    r.bound("sampled_covariance_max_z", max_z, 5.0);
    r.table = Some(table);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaChoice {
    All,
    Identity,
    Rotation,
    Squeeze,
    Dilation,
}

#[derive(Debug, Args, Serialize)]
pub struct GaugeDemoArgs {
    #[arg(long, value_enum, default_value_t = SigmaChoice::All)]
    pub sigma: SigmaChoice,
    /// Form on the A field.
    #[arg(long, default_value_t = 1.5)]
    pub b_g: f64,
    #[arg(long, default_value_t = 80)]
    pub outer_nodes: usize,
    #[arg(long, default_value_t = 12)]
    pub inner_nodes: usize,
}

fn gauge_demo(a: &GaugeDemoArgs, ctx: &Ctx) -> CmdResult {
    let families = match a.sigma {
        SigmaChoice::All => vec![SigmaFamily::Identity, SigmaFamily::Rotation, SigmaFamily::Squeeze, SigmaFamily::Dilation],
        SigmaChoice::Identity => vec![SigmaFamily::Identity],
        SigmaChoice::Rotation => vec![SigmaFamily::Rotation],
        SigmaChoice::Squeeze => vec![SigmaFamily::Squeeze],
        SigmaChoice::Dilation => vec![SigmaFamily::Dilation],
    };
    let settings = QuadratureSettings { outer_nodes: a.outer_nodes, inner_nodes: a.inner_nodes };
    let mut r = Report::default();
    let mut table = Table::new(&["sigma", "z", "z_m", "z_g", "relative_deviation", "det_preserving", "factorization_asserted"]);
    let mut reports = Vec::new();
    for sigma in families {
        let model = GaugeModel { b_g: a.b_g, ..GaugeModel::new(sigma) };
        let rep = gauge_partition(&model, &settings)?;
        table.push(vec![
            sigma.name().into(),
            rep.z.to_string(),
            rep.z_m.to_string(),
            rep.z_g.to_string(),
            rep.relative_deviation.to_string(),
            rep.det_preserving.to_string(),
            rep.factorization_asserted.to_string(),
        ]);
        if rep.factorization_asserted {
            let tol = if sigma == SigmaFamily::Squeeze { 1e-8 } else { 1e-10 };
            r.bound(&format!("factorization_{}", sigma.name()), rep.relative_deviation, ctx.tol(tol));
        } else {
            r.holds(&format!("{}_flagged", sigma.name()), rep.warning.is_some());
            if let Some(w) = &rep.warning {
                r.summary.push(format!("warning: {w}"));
            }
        }
        reports.push(rep);
    }
    r.result("families", reports);
    r.result("b_m", GaugeModel::new(SigmaFamily::Identity).b_m);
    r.table = Some(table);
    Ok(r)
}

// ---- effective ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionKind {
    Quartic,
    Quadratic,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    ExactQuadratic,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Args, Serialize)]
pub struct WilsonArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    /// Low band is [0, lambda).
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Shell is [lambda, lambda0).
    #[arg(long, default_value_t = 4.0)]
    pub lambda0: f64,
    /// Interaction c * sum_x phi(x)^d with d = 4, 2 or none.
    #[arg(long, value_enum, default_value_t = InteractionKind::Quartic)]
    pub interaction: InteractionKind,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub coupling: f64,
    #[arg(long, value_enum, default_value_t = MethodKind::Quadrature)]
    pub method: MethodKind,
    /// Gauss-Hermite nodes per shell coordinate.
    #[arg(long, default_value_t = 40)]
    pub nodes: usize,
    /// Monte Carlo shell draws.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    /// Real source on the zero mode.
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    pub source: f64,
    /// Gauss-Hermite nodes per axis for the source identity.
    #[arg(long, default_value_t = 48)]
    pub weq_nodes: usize,
    /// Tabulate S_eff along the zero mode on [-amplitude-max, amplitude-max].
    #[arg(long, default_value_t = 2.0)]
    pub amplitude_max: f64,
    #[arg(long, default_value_t = 21)]
    pub table_points: usize,
}

fn wilson(a: &WilsonArgs, ctx: &Ctx) -> CmdResult {
    let grid = MomentumGrid::new(a.n, a.mass)?;
    let spec = match a.interaction {
        InteractionKind::Quartic => InteractionSpec::quartic(a.coupling)?,
        InteractionKind::Quadratic => InteractionSpec::quadratic(a.coupling)?,
        InteractionKind::Zero => InteractionSpec::zero(),
    };
    let method = match a.method {
        MethodKind::ExactQuadratic => WilsonMethod::ExactQuadratic,
        MethodKind::Quadrature => WilsonMethod::Quadrature { nodes: a.nodes },
        MethodKind::MonteCarlo => WilsonMethod::MonteCarlo { samples: a.samples, seed: ctx.seed },
    };
    let eff = wilson_effective(&spec, &grid, a.lambda, a.lambda0, method)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); grid.len()];
    amps[0] = Complex64::new(a.source, 0.0);
    let j = FieldVector::from_amplitudes(&grid, amps, true)?;
    let weq = check_weq(&spec, &eff, &j, a.weq_nodes)?;
    let rows = eff.tabulate_mode(0, &linspace(-a.amplitude_max, a.amplitude_max, a.table_points))?;

    let mut table = Table::new(&["amplitude", "s_eff", "s_int", "std_error"]);
    for row in &rows {
        table.push(vec![
            row.amplitude.to_string(),
            row.s_eff.to_string(),
            row.s_int.to_string(),
            row.std_error.map(|e| e.to_string()).unwrap_or_default(),
        ]);
    }
    let modes = |p: &RegularizedPropagator| (0..grid.len()).filter(|k| p.in_band(*k)).collect::<Vec<_>>();
    let tol = match a.method {
        MethodKind::ExactQuadratic => 1e-8,
        MethodKind::Quadrature => 1e-6,
        MethodKind::MonteCarlo => 1e-2,
    };
    let mut r = Report::default();
    r.result("method", method);
    r.result("interaction", spec.terms());
    r.result("low_band_modes", modes(eff.low_band()));
    r.result("shell_modes", modes(eff.shell_band()));
    r.result("additive_constant", eff.additive_constant());
    r.result("weq", weq);
    r.result("table", &rows);
    r.bound("weq_identity", weq.deviation, ctx.tol(tol));
    r.table = Some(table);
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    /// Gaussian variance sigma^2.
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub cubic: f64,
    #[arg(long, default_value_t = 0.1)]
    pub quartic: f64,
}

impl MeasureArgs {
    fn spec(&self) -> Result<MeasureSpec, UsageError> {
        let spec = MeasureSpec { variance: self.variance, cubic: self.cubic, quartic: self.quartic };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct LegendreArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub zeta_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub zeta_max: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    /// Random sources for the Fenchel inequality.
    #[arg(long, default_value_t = 20)]
    pub sources: usize,
}

fn legendre(a: &LegendreArgs, ctx: &Ctx) -> CmdResult {
    let spec = a.measure.spec()?;
    if !(a.zeta_min < a.zeta_max) || a.points < 3 {
        return Err(UsageError("need zeta-min < zeta-max and at least 3 points".into()));
    }
    let generator = CumulantGenerator::new(spec)?;
    let zetas = linspace(a.zeta_min, a.zeta_max, a.points);
    let rate = generator.rate_function(&zetas)?;
    let mean = generator.mean()?;
    let at_mean = generator.legendre(mean)?;

    // Γ(ζ) ≥ ζJ − W(J) for every source J.
    let mut aux = rng::stream(ctx.seed, AUX_STREAM);
    let mut fenchel_gap = f64::INFINITY;
    for _ in 0..a.sources {
        let j: f64 = aux.random_range(-3.0..3.0);
        let w = generator.w(j)?;
        for p in &rate.points {
            fenchel_gap = fenchel_gap.min(p.gamma - (p.zeta * j - w));
        }
    }

    let mut table = Table::new(&["zeta", "gamma", "j_star"]);
    for p in &rate.points {
        table.push(vec![p.zeta.to_string(), p.gamma.to_string(), p.j_star.to_string()]);
    }
    let mut r = Report::default();
    r.result("mean", mean);
    r.result("variance", generator.cumulants(0.0)?.variance);
    r.result("gamma_at_mean", at_mean);
    r.result("rate_function", &rate.points);
    r.holds("convexity", rate.is_midpoint_convex(1e-9));
    r.bound("critical_point", at_mean.j_star.abs(), ctx.tol(1e-6));
    r.bound("fenchel_violation", (-fenchel_gap).max(0.0), ctx.tol(1e-9));
    if spec.is_gaussian() {
        let dev = rate
            .points
            .iter()
            .map(|p| (p.gamma - p.zeta * p.zeta / (2.0 * spec.variance)).abs())
            .fold(0.0, f64::max);
        r.bound("gaussian_self_duality", dev, ctx.tol(1e-8));
    }
    r.table = Some(table);
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct MeanLawArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArgs,
    /// Number of averaged samples.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Number of empirical means drawn.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 80)]
    pub bins: usize,
    /// Rate at which the empirical law is compared with the Legendre transform.
    #[arg(long, default_value_t = 1.0)]
    pub target_rate: f64,
    /// Samples of the associativity demo for the mean law of (X+Y)/2.
    #[arg(long, default_value_t = 200_000)]
    pub associativity_samples: usize,
    /// Shift of the third law in the associativity demo.
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub shift: f64,
}

fn mean_law(a: &MeanLawArgs, ctx: &Ctx) -> CmdResult {
    let spec = a.measure.spec()?;
    let generator = CumulantGenerator::new(spec)?;
    let config = MeanLawConfig { n: a.n, samples: a.samples, seed: ctx.seed, bins: a.bins, range: None };
    let hist = empirical_mean_law(&spec, &config)?;
    let zeta_star = zeta_with_rate(&generator, a.target_rate)?;
    let bin = hist
        .bin_of(zeta_star)
        .ok_or_else(|| UsageError(format!("zeta = {zeta_star} with the target rate lies outside the histogram")))?;
    let center = hist.bin_center(bin);
    let gamma = generator.legendre(center)?.gamma;
    let empirical = hist.rate(bin);
    let relative_error = empirical.map(|e| (e - gamma).abs() / gamma.abs()).unwrap_or(f64::INFINITY);
    let assoc = star_l_associativity(&spec, [0.0, 0.0, a.shift], a.associativity_samples, ctx.seed.wrapping_add(1))?;

    let mut table = Table::new(&["bin_center", "count", "probability", "empirical_rate", "gamma"]);
    for i in 0..hist.counts.len() {
        let z = hist.bin_center(i);
        table.push(vec![
            z.to_string(),
            hist.counts[i].to_string(),
            hist.probability(i).to_string(),
            hist.rate(i).map(|x| x.to_string()).unwrap_or_default(),
            generator.legendre(z)?.gamma.to_string(),
        ]);
    }
    let mut r = Report::default();
    r.result("histogram", &hist);
    r.result(
        "comparison",
        json!({
            "zeta_target": zeta_star,
            "bin_center": center,
            "gamma": gamma,
            "empirical_rate": empirical,
            "relative_error": relative_error,
        }),
    );
    r.result("associativity", assoc);
    r.bound("rate_matches_legendre", relative_error, ctx.tol(0.25));
    r.holds("star_l_not_associative", assoc.separation > 10.0);
    if spec.is_gaussian() {
        let want = spec.variance / a.n as f64;
        r.bound("mean_variance_z", (hist.variance - want).abs() / hist.variance_std_error, 5.0);
    }
    r.table = Some(table);
    Ok(r)
}

// ---- sequences ----

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum SequencesCommand {
    /// Law with pointwise interaction weights a^k b^(n-k).
    InteractPointwise(PointwiseArgs),
    /// Binomial law convolved with an interaction law.
    InteractConv(ConvArgs),
    /// Total variation to Poisson(lambda) in the a_n = lambda/(n p) regime.
    PoissonLimit(PoissonArgs),
    /// Tuple representation of interacting configurations.
    Xi(XiArgs),
}

impl SequencesCommand {
    pub(super) fn name(&self) -> &'static str {
        match self {
            SequencesCommand::InteractPointwise(_) => "interact-pointwise",
            SequencesCommand::InteractConv(_) => "interact-conv",
            SequencesCommand::PoissonLimit(_) => "poisson-limit",
            SequencesCommand::Xi(_) => "xi",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PointwiseArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long, default_value = "6/5")]
    pub a: String,
    #[arg(long, default_value = "4/5")]
    pub b: String,
    /// Use floating point instead of exact rationals.
    #[arg(long)]
    pub float: bool,
}

fn law_table<W: Weight>(law: &DiscreteLaw<W>) -> Table {
    let mut t = Table::new(&["k", "mass", "mass_f64"]);
    for (k, m, f) in law_rows(law) {
        t.push(vec![k.to_string(), m, f.to_string()]);
    }
    t
}

fn law_json<W: Weight>(law: &DiscreteLaw<W>) -> Value {
    json!({
        "masses": law.masses().iter().map(Weight::render).collect::<Vec<_>>(),
        "order": law.order(),
        "range": law.range(),
        "total": law.total().render(),
    })
}

fn interact_pointwise(a: &PointwiseArgs, ctx: &Ctx) -> CmdResult {
    if a.n > 2000 {
        return Err(UsageError(format!("--n must be at most 2000, got {}", a.n)));
    }
    let (p, wa, wb) = (rational("p", &a.p)?, rational("a", &a.a)?, rational("b", &a.b)?);
    if !(wa > Q::zero() && wb > Q::zero()) {
        return Err(UsageError("weights a and b must be positive".into()));
    }
    let mut r = Report::default();
    if a.float {
        let law = pointwise_interaction(a.n, to_f64(&p), to_f64(&wa), to_f64(&wb))?;
        r.result("law", law_json(&law));
        r.bound("normalization", (law.total() - 1.0).abs(), ctx.tol(1e-12));
        r.holds("masses_in_unit_interval", law.masses().iter().all(|m| (0.0..=1.0).contains(m)));
        r.table = Some(law_table(&law));
        return Ok(r);
    }
    let law = pointwise_interaction(a.n, p.clone(), wa.clone(), wb.clone())?;
    r.result("law", law_json(&law));
    r.holds("normalization_exact", law.total().is_one());
    r.holds("masses_in_unit_interval", law.masses().iter().all(|m| *m >= Q::zero() && *m <= Q::one()));
    if &wa * &p + &wb * (Q::one() - &p) == Q::one() {
        let bin = binomial_free(a.n, &wa * &p)?;
        r.result("case_a_parameter", fmt_q(&(&wa * &p)));
        r.holds("case_a_binomial", law == bin);
    }
    if wa == wb {
        r.holds("no_perturbation", law == binomial_free(a.n, p)?);
    }
    r.table = Some(law_table(&law));
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct ConvArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "1/2")]
    pub p: String,
    /// Interaction law as comma-separated masses p(0),p(1),...
    #[arg(long = "int", default_value = "1/2,1/2")]
    pub interaction: String,
}

fn interact_conv(a: &ConvArgs) -> CmdResult {
    let p = rational("p", &a.p)?;
    let int: Vec<Q> = a.interaction.split(',').map(|s| rational("int", s)).collect::<Result<_, _>>()?;
    let free = binomial_free(a.n, p)?;
    let law = conv_interaction(&free, &int)?;
    let int_law = DiscreteLaw::new(int)?;
    let order = int_law.order();
    let mut r = Report::default();
    r.result("free", law_json(&free));
    r.result("interaction", law_json(&int_law));
    r.result("law", law_json(&law));
    r.result("conf_free", free.conf().len());
    r.result("conf_interacting", law.conf().len());
    r.holds("normalization_exact", law.total().is_one());
    r.holds("order_additive", law.order() == free.order() + order);
    r.holds("matches_conv_nat", law == conv_nat(&free, &int_law));
    if int_law.mass(order).is_one() {
        let shifted = (0..=law.order()).all(|j| law.mass(j) == if j >= order { free.mass(j - order) } else { Q::zero() });
        r.holds("shift_identity", shifted);
    }
    if int_law.range() == 1 {
        r.holds("no_interaction", law == free);
    }
    r.table = Some(law_table(&law));
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct PoissonArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Free Bernoulli parameter; the limit does not depend on it.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
}

fn poisson_limit(a: &PoissonArgs) -> CmdResult {
    let rep = poisson_limit_check_with(a.n, a.lambda, a.p)?;
    let mut table = Table::new(&["n", "lambda", "p", "a", "b", "total_variation", "tail_bound", "le_cam_bound"]);
    table.push(vec![
        rep.n.to_string(),
        rep.lambda.to_string(),
        rep.p.to_string(),
        rep.a.to_string(),
        rep.b.to_string(),
        rep.total_variation.to_string(),
        rep.tail_bound.to_string(),
        rep.le_cam_bound.to_string(),
    ]);
    let mut r = Report::default();
    r.result("poisson", rep);
    r.summary.push(format!("TV(n = {}, lambda = {}) = {:e} <= {:e}", rep.n, rep.lambda, rep.total_variation, rep.le_cam_bound));
    r.holds("le_cam_bound", rep.within_le_cam());
    r.table = Some(table);
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct XiArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Order of the interaction law.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Single configuration; all of them when omitted.
    #[arg(long)]
    pub k: Option<usize>,
}

fn xi(a: &XiArgs) -> CmdResult {
    if a.n > 10_000 || a.r > a.n {
        return Err(UsageError("need r <= n <= 10000".into()));
    }
    let ks = match a.k {
        Some(k) => vec![k],
        None => conf_interacting(a.n, a.r),
    };
    let tuples: Vec<(usize, Vec<usize>)> = ks
        .iter()
        .map(|k| Ok((*k, xi_representation(*k, a.n, a.r)?)))
        .collect::<Result<_, UsageError>>()?;
    let mut all: Vec<Vec<usize>> = conf_interacting(a.n, a.r)
        .into_iter()
        .map(|k| xi_representation(k, a.n, a.r))
        .collect::<Result<_, _>>()?;
    let total = all.len();
    all.sort();
    all.dedup();
    let mut table = Table::new(&["k", "tuple"]);
    for (k, t) in &tuples {
        let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
        table.push(vec![k.to_string(), format!("({})", parts.join(","))]);
    }
    let mut r = Report::default();
    r.result("tuples", tuples.iter().map(|(k, t)| json!({ "k": k, "tuple": t })).collect::<Vec<_>>());
    r.result("conf_size", total);
    r.holds("injective", all.len() == total);
    r.holds("cardinality_within_range", tuples.iter().all(|(_, t)| t.len() <= a.r + 1));
    r.table = Some(table);
    Ok(r)
}

// ---- hierarchy ----

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum HierarchyCommand {
    /// Pullback identity, lifted idempotents and observable compatibility.
    Check(HierarchyCheckArgs),
}

impl HierarchyCommand {
    pub(super) fn name(&self) -> &'static str {
        "check"
    }
}

#[derive(Debug, Args, Serialize)]
pub struct HierarchyCheckArgs {
    #[arg(long, default_value_t = 3)]
    pub base_points: usize,
    /// Grid resolution m of the barycentric weights.
    #[arg(long, default_value_t = 2)]
    pub resolution: u32,
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
}

/// Lifts are dense `(2·|level|)²` matrices; larger levels are skipped.
const MAX_LIFT_STATES: usize = 300;

fn hierarchy_check(a: &HierarchyCheckArgs, ctx: &Ctx) -> CmdResult {
    let h = Hierarchy::new(a.base_points, a.resolution, a.levels)?;
    let mut aux = rng::stream(ctx.seed, AUX_STREAM);
    let mut r = Report::default();

    let mut exact = true;
    let mut float_dev: f64 = 0.0;
    for level in 0..h.top_level() {
        let size = h.size(level);
        let fq: Vec<Q> = (0..size)
            .map(|_| Q::new(aux.random_range(-50i64..=50).into(), aux.random_range(1i64..=12).into()))
            .collect();
        exact &= h.pullback_identity_exact(level, &fq)?;
        let ff: Vec<f64> = (0..size).map(|_| aux.random_range(-5.0..5.0)).collect();
        float_dev = float_dev.max(h.pullback_identity_check(level, &ff)?);
    }

    let mut defects = Vec::new();
    let mut rank_ok = true;
    let mut skipped = Vec::new();
    for level in 0..h.top_level() {
        if h.size(level + 1) > MAX_LIFT_STATES {
            skipped.push(level);
            continue;
        }
        let n = h.size(level);
        let projectors = [
            ("identity", vec![DMatrix::identity(2, 2); n]),
            ("rank_one", vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]); n]),
            ("rotating", (0..n).map(|w| rotation_projector(0.4 + 0.9 * w as f64)).collect()),
        ];
        for (name, p) in projectors {
            let lifted = h.lift_idempotent(level, &p)?;
            rank_ok &= lifted.ranks().iter().all(|(x, y)| x == y);
            defects.push(json!({ "level": level, "projector": name, "defect": lifted.idempotency_defect() }));
        }
    }
    let max_defect = defects.iter().filter_map(|d| d["defect"].as_f64()).fold(0.0, f64::max);

    let base: Vec<f64> = (0..a.base_points).map(|_| aux.random_range(-5.0..5.0)).collect();
    let family = h.observable_from_base(&base)?;
    let observable = h.check_observable(&family, ctx.tol(1e-12))?;

    let point = Hierarchy::new(1, a.resolution, a.levels)?;
    let point_family = point.observable_from_base(&[base.first().copied().unwrap_or(1.0)])?;
    let trivial = point.level_sizes().iter().all(|s| *s == 1)
        && point.check_observable(&point_family, 0.0)?.compatible
        && (0..point.top_level()).try_fold(true, |acc, l| Ok::<_, UsageError>(acc && point.pullback_identity_exact(l, &[Q::from_integer(7.into())])?))?;

    r.result("level_sizes", h.level_sizes());
    r.result("pullback_float_deviation", float_dev);
    r.result("idempotency_defects", defects);
    r.result("lift_skipped_levels", skipped);
    r.result("observable", &observable);
    r.holds("pullback_identity_exact", exact);
    r.bound("pullback_identity_float", float_dev, ctx.tol(1e-14));
    r.bound("lifted_idempotency", max_defect, ctx.tol(1e-12));
    r.holds("lifted_rank_preserved", rank_ok);
    r.holds("observable_compatible", observable.compatible);
    r.holds("point_base_trivial", trivial);
    Ok(r)
}
