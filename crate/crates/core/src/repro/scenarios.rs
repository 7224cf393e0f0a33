use rayon::prelude::*;
use serde_json::json;

use super::{classify_refined, membership_of, harmonic_pairs, Membership, ReproOptions, HARMONIC_REPRO_TRUNCATION, HARMONIC_SWEEP};
use crate::check::{check_condition, sample_pairs, tightest_constant, Measure, PairSample, Verdict};
use crate::conditions::{evaluate_condition, ConditionSpec, FFunction, Family, PairDistances};
use crate::error::Result;
use crate::maps::SelfMap;
use crate::metric::{IntervalSpace, MetricSpace, Point};
use crate::pa::PaSums;
use crate::picard::{run_picard, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::report::{Measurement, Provenance::*, Report, WitnessRecord};

fn real(p: &Point) -> f64 {
    match p {
        Point::Real(x) => *x,
        _ => f64::NAN,
    }
}

fn nat(p: &Point) -> u64 {
    match p {
        Point::Nat(n) => *n,
        _ => 0,
    }
}

/// Path-averaged ratios on the three-point discrete space with `T = [1,2,2]`.
pub fn repro_example_discrete(opts: &ReproOptions) -> Result<Report> {
    let space = MetricSpace::discrete(3)?;
    let map = SelfMap::table(vec![1, 2, 2])?;
    let horizon = opts.horizon;
    let mut r = Report::new("repro").with_target(&space, &map);
    r.scenario = Some("example-discrete".into());

    let mut tables = Vec::new();
    for (x, y, lhs, rhs) in [(0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0), (1, 2, 0.0, 0.5)] {
        let sums = PaSums::compute(&space, &map, &Point::Index(x), &Point::Index(y), horizon)?;
        let (l, rh) = (sums.shifted[2], 0.5 * sums.sums[2]);
        r.push(Measurement::exact(&format!("pair_{x}_{y}_lhs_n2"), l, lhs, Reference));
        r.push(Measurement::exact(&format!("pair_{x}_{y}_rhs_n2"), rh, rhs, Reference));
        let drift = (3..=horizon)
            .map(|n| (sums.sums[n] - sums.sums[2]).abs() + (sums.shifted[n] - sums.shifted[2]).abs())
            .fold(0.0, f64::max);
        r.push(Measurement::exact(&format!("pair_{x}_{y}_drift_beyond_n2"), drift, 0.0, Reference));
        tables.push(json!({ "pair": [x, y], "S": sums.sums, "S1": sums.shifted }));
    }

    let pairs = sample_pairs(&space, opts.seed);
    let pa = check_condition(&ConditionSpec::pa(0.5, 2, horizon)?, &space, &map, &pairs)?;
    r.push(Measurement::flag("pa_alpha_0.5_n2_holds", pa.verdict == Verdict::HoldsOnSample, true, Reference));
    let banach = tightest_constant(&Measure::Banach, &space, &map, &pairs)?;
    r.push(Measurement::exact("banach_tightest", banach.estimate, 1.0, Reference));
    r.witness = Some(WitnessRecord::from(&banach.witness));

    let (c, _) = classify_refined(&space, &map, &pairs, None, 1..=4, horizon)?;
    let pa_v = c.get(Family::Pa);
    r.push(Measurement::exact("pa_least_alpha", pa_v.estimate.unwrap_or(f64::NAN), 0.5, Derived));
    r.push(Measurement::count("pa_least_alpha_n", pa_v.n_min.unwrap_or(0) as u64, 2, Derived));
    r.push(Measurement::flag("banach_member", c.is_member(Family::Banach), false, Reference));
    r.push(Measurement::flag("pa_member", c.is_member(Family::Pa), true, Reference));

    let trace = run_picard(&space, &map, &Point::Index(0), DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    r.push(Measurement::count("picard_steps", trace.steps.len() as u64, 3, Reference));
    r.push(Measurement::flag(
        "picard_limit_is_2",
        trace.limit_candidate == Some(Point::Index(2)),
        true,
        Reference,
    ));
    r.push(Measurement::exact("picard_total_displacement", trace.total(), 2.0, Derived));

    r.data = Some(json!({ "pair_tables": tables, "classification": c }));
    Ok(r.finish())
}

/// Oracle for `α̂(N)` near the pair `(1, 1⁻)`: ratio of the orbit
/// derivatives `(Tᵏ)'(1) = 2ᵏ / 2^(2ᵏ-1)`.
pub fn square_half_alpha_oracle(n: usize) -> f64 {
    let c = |k: usize| 2f64.powi(k as i32) / 2f64.powf(2f64.powi(k as i32) - 1.0);
    let s: f64 = (0..n).map(c).sum();
    let s1: f64 = (1..=n).map(c).sum();
    s1 / s
}

/// `Tx = x²/2` on `[0, 1]`.
pub fn repro_square_half(opts: &ReproOptions) -> Result<Report> {
    let space = MetricSpace::interval(0.0, 1.0, opts.grid)?;
    let map = SelfMap::SquareHalf;
    let mut r = Report::new("repro").with_target(&space, &map);
    r.scenario = Some("square-half".into());
    let (one, zero) = (Point::Real(1.0), Point::Real(0.0));

    // Kannan at (1, 0).
    let pd = PairDistances::compute(&space, &map, &one, &zero)?;
    r.push(Measurement::exact("kannan_d_tx_ty", pd.d_tx_ty, 0.5, Reference));
    r.push(Measurement::exact("kannan_d_x_tx", pd.d_x_tx, 0.5, Reference));
    r.push(Measurement::exact("kannan_d_y_ty", pd.d_y_ty, 0.0, Reference));
    let e = evaluate_condition(&ConditionSpec::kannan(0.49)?, &space, &map, &one, &zero)?;
    let implied = e.implied_constant().unwrap_or(f64::NAN);
    r.push(Measurement::abs("kannan_implied_k", implied, 1.0, 1e-15, Reference));
    r.push(Measurement::at_least("kannan_implied_k_vs_half", implied, 0.5, 0.0, Reference));

    // Banach ratio (x+y)/2.
    let pairs = sample_pairs(&space, opts.seed);
    let worst_rel = pairs
        .pairs
        .par_iter()
        .map(|(x, y)| {
            let pd = PairDistances::compute(&space, &map, x, y).expect("grid points");
            let want = (real(x) + real(y)) / 2.0;
            ((pd.d_tx_ty / pd.d_x_y) - want).abs() / want
        })
        .reduce(|| 0.0, f64::max);
    r.push(Measurement::at_most("banach_ratio_vs_mean_rel_err", worst_rel, 1e-9, 0.0, Derived));
    let banach = tightest_constant(&Measure::Banach, &space, &map, &pairs)?;
    let top = pairs
        .pairs
        .iter()
        .map(|(x, y)| (real(x) + real(y)) / 2.0)
        .fold(0.0, f64::max);
    r.push(Measurement::rel("banach_sup_on_grid", banach.estimate, top, 1e-12, Derived));
    let coarse_space = MetricSpace::RealInterval(IntervalSpace::new(0.0, 1.0, opts.grid.div_ceil(2))?);
    let coarse_pairs = sample_pairs(&coarse_space, opts.seed);
    let coarse = tightest_constant(&Measure::Banach, &space, &map, &coarse_pairs)?;
    r.push(Measurement::flag(
        "banach_sup_approaches_1",
        super::approaches_bound(1.0, coarse.estimate, banach.estimate),
        true,
        Reference,
    ));

    // LogF on the full grid and on the window [0.99, 1].
    let window_points: Vec<Point> = pairs_points(&space)
        .into_iter()
        .filter(|p| real(p) >= 0.99 - 1e-12)
        .collect();
    let window = PairSample::all_pairs_of(&window_points, "all grid pairs in [0.99, 1]");
    let mut checks = Vec::new();
    for tau in [0.1, 0.01, 0.001] {
        let spec = ConditionSpec::f_contraction(FFunction::Log, tau)?;
        let full = check_condition(&spec, &space, &map, &pairs)?;
        r.push(Measurement::flag(&format!("logf_tau_{tau}_violated"), full.verdict == Verdict::Violated, true, Reference));
        let worst_min = full
            .worst
            .as_ref()
            .map_or(f64::NAN, |w| real(&w.pair.0).min(real(&w.pair.1)));
        r.push(Measurement::at_least(&format!("logf_tau_{tau}_worst_min_coord"), worst_min, 0.99, 1e-12, Reference));
        let win = check_condition(&spec, &space, &map, &window)?;
        let wmin = win
            .witness
            .as_ref()
            .map_or(f64::NAN, |w| real(&w.pair.0).min(real(&w.pair.1)));
        r.push(Measurement::flag(&format!("logf_tau_{tau}_window_violated"), win.verdict == Verdict::Violated, true, Reference));
        r.push(Measurement::at_least(&format!("logf_tau_{tau}_window_witness_min_coord"), wmin, 0.99, 1e-12, Reference));
        checks.push(json!({
            "tau": tau,
            "full_grid_witness": full.witness.as_ref().map(WitnessRecord::from),
            "full_grid_worst": full.worst.as_ref().map(WitnessRecord::from),
            "window_witness": win.witness.as_ref().map(WitnessRecord::from),
        }));
    }
    let tau_hat = tightest_constant(&Measure::FContraction { f: FFunction::Log }, &space, &map, &window)?;
    r.push(Measurement::at_most("logf_tau_sup_window", tau_hat.estimate, (2.0f64 / 1.98).ln(), 1e-9, Derived));

    // Path-averaged constant at N = 5.
    let pa = tightest_constant(&Measure::Pa { n_min: 5, horizon: opts.horizon }, &space, &map, &pairs)?;
    let oracle = square_half_alpha_oracle(5);
    r.push(Measurement::within("pa_alpha_n5", pa.estimate, 0.55, 0.75, Derived));
    r.push(Measurement::below("pa_alpha_n5_below_1", pa.estimate, 1.0, Derived));
    r.push(Measurement::abs("pa_alpha_n5_vs_derivative_oracle", pa.estimate, oracle, 5e-3, Derived));
    r.push(Measurement::at_most("pa_alpha_n5_vs_claimed_0.4", pa.estimate, 0.4, 0.0, Reference).as_discrepancy());
    let (wx, wy) = (real(&pa.witness.pair.0), real(&pa.witness.pair.1));
    r.notes.push(format!(
        "measured alpha(N=5) = {:.6} at pair ({wx}, {wy}), n = {}; the claimed constant 0.4 is exceeded. \
         Pairs approaching (1, 1) drive the ratio toward {oracle:.6}.",
        pa.estimate,
        pa.witness.n.unwrap_or(0)
    ));
    r.witness = Some(WitnessRecord::from(&pa.witness));
    r.data = Some(json!({
        "sample": pairs.descriptor,
        "banach": { "estimate": banach.estimate, "coarse_estimate": coarse.estimate, "witness": WitnessRecord::from(&banach.witness) },
        "logf": checks,
        "logf_window_tau_sup": tau_hat.estimate,
        "pa_n5": { "estimate": pa.estimate, "oracle": oracle, "witness": WitnessRecord::from(&pa.witness) },
    }));
    Ok(r.finish())
}

fn pairs_points(space: &MetricSpace) -> Vec<Point> {
    crate::metric::enumerate_points(space, space.enumerable_len())
}

struct SweepRow {
    n: u64,
    a_err: f64,
    a1_err: f64,
    ratio: f64,
    ratio_err: f64,
}

/// Closed forms of the successor map on the harmonic space.
pub fn repro_successor_harmonic(opts: &ReproOptions) -> Result<Report> {
    let m = HARMONIC_REPRO_TRUNCATION;
    let space = MetricSpace::harmonic(m)?;
    let map = SelfMap::successor(m);
    let mut r = Report::new("repro").with_target(&space, &map);
    r.scenario = Some("successor-harmonic".into());

    let rows: Vec<SweepRow> = (1..=HARMONIC_SWEEP)
        .into_par_iter()
        .map(|n| {
            let h = n as usize;
            let sums = PaSums::compute(&space, &map, &Point::Nat(n), &Point::Nat(n + 1), h)?;
            let nf = n as f64;
            let a = sums.sums[h] / nf;
            let a1 = sums.shifted[h] / nf;
            let (a_want, a1_want) = (1.0 / (2.0 * nf * nf), 1.0 / ((nf + 1.0) * (2.0 * nf + 1.0)));
            let ratio = sums.shifted[h] / sums.sums[h];
            let ratio_want = 2.0 * nf * nf / (2.0 * nf * nf + 3.0 * nf + 1.0);
            Ok(SweepRow {
                n,
                a_err: (a - a_want).abs() / a_want,
                a1_err: (a1 - a1_want).abs() / a1_want,
                ratio,
                ratio_err: (ratio - ratio_want).abs() / ratio_want,
            })
        })
        .collect::<Result<_>>()?;
    let max = |f: fn(&SweepRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let a100 = {
        let s = PaSums::compute(&space, &map, &Point::Nat(100), &Point::Nat(101), 100)?;
        s.sums[100] / 100.0
    };
    r.push(Measurement::rel("a_n_at_100", a100, 5e-5, 1e-12, Reference));
    r.push(Measurement::at_most("a_n_max_rel_err", max(|w| w.a_err), 1e-12, 0.0, Reference));
    r.push(Measurement::at_most("a1_n_max_rel_err", max(|w| w.a1_err), 1e-12, 0.0, Reference));
    r.push(Measurement::at_most("ratio_closed_form_max_rel_err", max(|w| w.ratio_err), 1e-12, 0.0, Derived));
    r.push(Measurement::rel("ratio_at_10", rows[9].ratio, 200.0 / 231.0, 1e-12, Derived));
    let first = rows.iter().find(|w| w.ratio > 0.9).map_or(0, |w| w.n);
    r.push(Measurement::count("first_n_ratio_above_0.9", first, 14, Derived));
    let tail_min = rows.iter().filter(|w| w.n >= 150).map(|w| w.ratio).fold(f64::INFINITY, f64::min);
    r.push(Measurement::at_least("ratio_min_for_n_ge_150", tail_min, 0.99, 0.0, Reference));

    // Chatterjea on (n+1, n).
    let mut chat_err: f64 = 0.0;
    for n in 1..=1000u64 {
        let pd = PairDistances::compute(&space, &map, &Point::Nat(n + 1), &Point::Nat(n))?;
        let got = pd.d_tx_ty / pd.kernel(Family::Chatterjea).expect("pointwise");
        let want = n as f64 / (2.0 * (n as f64 + 1.0));
        chat_err = chat_err.max((got - want).abs() / want);
    }
    r.push(Measurement::at_most("chatterjea_pair_ratio_max_rel_err", chat_err, 1e-12, 0.0, Reference));
    let succ = PairSample::successive_naturals(1, 1000);
    let chat = tightest_constant(&Measure::Chatterjea, &space, &map, &succ)?;
    let chat_coarse = tightest_constant(&Measure::Chatterjea, &space, &map, &PairSample::successive_naturals(1, 500))?;
    r.push(Measurement::within("chatterjea_sup_n_le_1000", chat.estimate, 0.499, 0.5, Derived));
    r.push(Measurement::rel("chatterjea_sup_closed_form", chat.estimate, 1000.0 / 2002.0, 1e-12, Derived));
    let chat_boundary = super::approaches_bound(0.5, chat_coarse.estimate, chat.estimate);
    r.push(Measurement::flag("chatterjea_boundary", chat_boundary, true, Derived));
    r.notes.push(format!(
        "chatterjea supremum over (n, n+1), n <= 1000, is {:.10} and converges to the bound 1/2 \
         (n <= 500 gives {:.10}); boundary: no k < 1/2 is certified",
        chat.estimate, chat_coarse.estimate
    ));

    // Ćirić per-pair ratios.
    let mut ciric_err: f64 = 0.0;
    for a in 1..=300u64 {
        for b in (a + 1)..=300 {
            let pd = PairDistances::compute(&space, &map, &Point::Nat(a), &Point::Nat(b))?;
            let got = pd.d_tx_ty / pd.kernel(Family::Ciric).expect("pointwise");
            let (af, bf) = (a as f64, b as f64);
            let want = af * bf / ((af + 1.0) * (bf + 1.0));
            ciric_err = ciric_err.max((got - want).abs() / want);
        }
    }
    r.push(Measurement::at_most("ciric_pair_ratio_max_rel_err", ciric_err, 1e-12, 0.0, Reference));

    // Path-averaged refutation.
    let pa_pairs = PairSample::successive_naturals(1, 500);
    let mut witnesses = Vec::new();
    for (alpha, want) in [(0.5, (2u64, 2usize)), (0.9, (10, 90)), (0.99, (119, 476))] {
        let rep = check_condition(&ConditionSpec::pa(alpha, 2, 500)?, &space, &map, &pa_pairs)?;
        r.push(Measurement::flag(&format!("pa_alpha_{alpha}_violated"), rep.verdict == Verdict::Violated, true, Reference));
        if let Some(w) = &rep.witness {
            let (n0, h) = (nat(&w.pair.0) as f64, w.n.unwrap_or(0) as f64);
            let closed = n0 * (n0 + h) / ((n0 + 1.0) * (n0 + h + 1.0));
            r.push(Measurement::rel(&format!("pa_alpha_{alpha}_witness_ratio"), w.lhs / (w.rhs / alpha), closed, 1e-12, Derived));
            r.push(Measurement::count(&format!("pa_alpha_{alpha}_witness_n0"), nat(&w.pair.0), want.0, Derived));
            r.push(Measurement::count(&format!("pa_alpha_{alpha}_witness_h"), w.n.unwrap_or(0) as u64, want.1 as u64, Derived));
            witnesses.push(json!({ "alpha": alpha, "witness": WitnessRecord::from(w) }));
        }
    }
    r.witness = witnesses
        .first()
        .and_then(|w| serde_json::from_value(w["witness"].clone()).ok());

    // Membership of the pointwise families on the default sample.
    let fine = harmonic_pairs(&space, 1000);
    let coarse = harmonic_pairs(&space, 500);
    let (cf, cc) = classify_refined(&space, &map, &fine, Some(&coarse), 1..=5, opts.horizon)?;
    let pa_label = membership_of(Family::Pa, &cf, cc.as_ref());
    r.push(Measurement::flag("pa_not_member", pa_label != Membership::Member, true, Reference));

    r.data = Some(json!({
        "chatterjea": { "estimate": chat.estimate, "coarse_estimate": chat_coarse.estimate, "witness": WitnessRecord::from(&chat.witness) },
        "pa_witnesses": witnesses,
        "pa_membership": pa_label,
    }));
    Ok(r.finish())
}
