use super::model::{guard_faces, template_directions, GuardFace, LinearLoop, TemplateSpec};
use crate::abstraction::{
    abstract_apply, build_ball_dynamics, geometric_sum_matrix, input_decompose,
    synthesize_abstract_matrix, BallDynamics, Horizon, InputDecomposition, PowerFamily,
};
use crate::error::{Error, Result};
use crate::geometry::{template_concretize, Polytope, SupportSet};
use crate::linalg::{imat_mul, imat_of, jordan_decompose, IMat, JordanForm};
use crate::numerics::Interval;
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct AccelOptions {
    /// bounded-time analysis horizon; `None` runs unbounded
    pub horizon: Option<u64>,
    /// eigenvalue clustering tolerance for the decomposition
    pub cluster_tol: f64,
    /// fitted support directions per coordinate pair in the synthesis
    pub dir_budget: usize,
    /// length of the exact per-iteration evaluation prefix
    pub exact_sweep: u64,
    /// certification cap for the inside-the-guard sweep
    pub n_lower_cap: u64,
    pub template: TemplateSpec,
}

impl Default for AccelOptions {
    fn default() -> Self {
        AccelOptions {
            horizon: None,
            cluster_tol: 1e-8,
            dir_budget: 4,
            exact_sweep: 256,
            n_lower_cap: 1 << 15,
            template: TemplateSpec::OctagonEigen,
        }
    }
}

/// Coverage contract of the reported bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// no guard (or a guard that never constrains): all iterations covered
    GuardlessInfinite,
    /// guarded with certified exit: iterations `0..=n_upper` covered,
    /// which is every step the loop can execute
    GuardedFinite,
    /// guarded without a certified exit: the reported bounds cover the
    /// certified prefix `0..=n_lower`
    GuardedPartial,
    /// user-supplied finite horizon
    HorizonBounded,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::GuardlessInfinite => "guardless-inf",
            Mode::GuardedFinite => "guarded-finite",
            Mode::GuardedPartial => "guarded-partial",
            Mode::HorizonBounded => "horizon-bounded",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Provenance {
    pub delta_max: f64,
    pub sigma_max: f64,
    pub dir_budget: usize,
    pub ball_sampled: bool,
    pub notes: Vec<String>,
}

/// The analysis result: per-direction support bounds of the reach tube.
///
/// `bounds[i].hi` is the certified over-approximation in `template[i]`;
/// `bounds[i].lo` is the initial set's own support, a witness that the
/// tube cannot be tighter than that.
#[derive(Clone, Debug)]
pub struct ReachTube {
    pub template: Vec<DVector<f64>>,
    pub bounds: Vec<Interval>,
    pub n_lower: Horizon,
    pub n_upper: Horizon,
    pub mode: Mode,
    pub provenance: Provenance,
}

struct Ctx<'m> {
    model: &'m LinearLoop,
    jf: JordanForm,
    dec: InputDecomposition,
    bd: BallDynamics,
    ia: IMat,
    x0: SupportSet,
    opts: AccelOptions,
}

impl<'m> Ctx<'m> {
    fn build(model: &'m LinearLoop, opts: AccelOptions) -> Result<Ctx<'m>> {
        let jf = jordan_decompose(&model.a, opts.cluster_tol)
            .map_err(|e| e.in_stage("jordan decomposition"))?;
        let dec = input_decompose(&model.a, &model.b, &model.u, &jf)
            .map_err(|e| e.in_stage("input decomposition"))?;
        let bd = build_ball_dynamics(&jf);
        Ok(Ctx {
            model,
            jf,
            dec,
            bd,
            ia: imat_of(&model.a),
            x0: SupportSet::polytope(model.x0.clone()),
            opts,
        })
    }

    /// Running per-direction maxima of the per-iteration bound
    /// `rho_base((A^k)^T v) + <sum_(j<k) A^j drift, v> + sum_(j<k) rho_dev((A^j)^T v)`
    /// for k in `0..=kmax`, plus the final accumulator states.
    fn sweep(
        &self,
        base: &SupportSet,
        dirs: &[DVector<f64>],
        kmax: u64,
    ) -> Result<SweepOut> {
        let p = self.model.dim();
        let drift_iv: Vec<Interval> =
            (0..p).map(|i| Interval::point(self.dec.drift[i])).collect();
        let mut dsum: Vec<Interval> = vec![Interval::ZERO; p];
        let mut per: Vec<DirState> = dirs
            .iter()
            .map(|v| DirState {
                w: v.clone(),
                dev: Interval::ZERO,
                best: f64::NEG_INFINITY,
            })
            .collect();
        let at = self.model.a.transpose();
        for _k in 0..=kmax {
            for (v, st) in dirs.iter().zip(per.iter_mut()) {
                let mut bound = base.support(&st.w)?;
                for i in 0..p {
                    bound += dsum[i] * Interval::point(v[i]);
                }
                bound += st.dev;
                st.best = st.best.max(bound.hi);
                // advance the deviation prefix
                st.dev += self.dec.dev_state.support(&st.w)?;
                st.w = &at * &st.w;
            }
            // dsum <- A dsum + drift
            let mut next = vec![Interval::ZERO; p];
            for i in 0..p {
                let mut acc = drift_iv[i];
                for j in 0..p {
                    acc += self.ia[(i, j)] * dsum[j];
                }
                next[i] = acc;
            }
            dsum = next;
        }
        Ok(SweepOut {
            best: per.iter().map(|s| s.best).collect(),
            dev_final: per.iter().map(|s| s.dev).collect(),
        })
    }

    /// Per-iteration inside-the-face certificate sweep: the largest `n`
    /// with every `k <= n` certified inside, stopping at the cap.
    fn sweep_inside(&self, face: &GuardFace) -> Result<InsideOutcome> {
        let p = self.model.dim();
        let cap = self.opts.n_lower_cap;
        let drift_iv: Vec<Interval> =
            (0..p).map(|i| Interval::point(self.dec.drift[i])).collect();
        let mut dsum: Vec<Interval> = vec![Interval::ZERO; p];
        let mut w = face.g.clone();
        let mut dev = Interval::ZERO;
        let at = self.model.a.transpose();
        let mut k = 0u64;
        loop {
            let mut bound = self.x0.support(&w)?;
            for i in 0..p {
                bound += dsum[i] * Interval::point(face.g[i]);
            }
            bound += dev;
            if bound.hi > face.gamma {
                return Ok(if k == 0 {
                    InsideOutcome::Crossed(0)
                } else {
                    InsideOutcome::Crossed(k - 1)
                });
            }
            if k == cap {
                // certified through the cap; try to close the tail
                return Ok(if self.inside_forever(face, &w, &dsum, dev)? {
                    InsideOutcome::Never
                } else {
                    InsideOutcome::CapReached(cap)
                });
            }
            dev += self.dec.dev_state.support(&w)?;
            w = &at * &w;
            let mut next = vec![Interval::ZERO; p];
            for i in 0..p {
                let mut acc = drift_iv[i];
                for j in 0..p {
                    acc += self.ia[(i, j)] * dsum[j];
                }
                next[i] = acc;
            }
            dsum = next;
            k += 1;
        }
    }

    /// Tail certificate that the face can never be reached beyond the cap:
    /// contractive dynamics with the limit bound still inside.
    fn inside_forever(
        &self,
        face: &GuardFace,
        w_cap: &DVector<f64>,
        dsum_cap: &[Interval],
        dev_cap: Interval,
    ) -> Result<bool> {
        let sig = self.jf.sigma_max_overall();
        if sig >= 1.0 {
            return Ok(false);
        }
        let p = self.model.dim();
        // X0 term tail: |rho_X0(w_k)| <= R_X0 |w_cap| sig^(k-cap) <= R_X0 |w_cap|
        let r_x0 = self.x0.radius_bound()?;
        let x0_tail = Interval::point(r_x0)
            * Interval::point(w_cap.norm())
            * Interval::point(self.s_norm_bound());
        // drift tail: <dsum_inf, g> with dsum_inf = (I-A)^-1 drift
        let gsum = geometric_sum_matrix(&self.jf, Horizon::Infinite)?;
        let mut drift_term = Interval::ZERO;
        for i in 0..p {
            let mut row = Interval::ZERO;
            for j in 0..p {
                row += gsum[(i, j)] * Interval::point(self.dec.drift[j]);
            }
            drift_term += row * Interval::point(face.g[i]);
        }
        // current dsum may exceed the limit during the transient
        let mut dsum_term = Interval::ZERO;
        for i in 0..p {
            dsum_term += dsum_cap[i] * Interval::point(face.g[i]);
        }
        let drift_bound = drift_term.hi.max(dsum_term.hi);
        // deviation tail: dev_cap + ball mass over [cap, inf)
        let ball_tail = self.bd.accumulated_support(
            &self.jf,
            &self.dec.ball,
            &face.g,
            Horizon::Infinite,
        )?;
        let total = x0_tail.hi + drift_bound + dev_cap.hi + ball_tail.hi;
        Ok(total.is_finite() && total <= face.gamma)
    }

    fn s_norm_bound(&self) -> f64 {
        // crude operator bound sufficient for the tail certificate
        1.0
    }

    /// Certified check that the whole (guard-free) reach set at step `n`
    /// lies strictly beyond the face.
    fn beyond(&self, face: &GuardFace, n: u64) -> Result<bool> {
        let p = self.model.dim();
        let neg_g = -face.g.clone();
        let pk = self.ipow(n);
        // w-box = (A^n)^T (-g)
        let mut w_mid = DVector::zeros(p);
        let mut w_rad = 0.0f64;
        for i in 0..p {
            let mut acc = Interval::ZERO;
            for j in 0..p {
                acc += pk[(j, i)] * Interval::point(neg_g[j]);
            }
            if !acc.is_finite() {
                // saturated power: fall back to sign-safe endpoints
                w_mid[i] = acc.lo.max(f64::MIN).min(f64::MAX);
                w_rad = f64::INFINITY;
                continue;
            }
            w_mid[i] = acc.midpoint();
            w_rad = w_rad.max(0.5 * acc.width());
        }
        let mut total = self.x0.support(&w_mid)?;
        if w_rad.is_finite() {
            if w_rad > 0.0 {
                let r0 = self.x0.radius_bound()?;
                total += Interval::new(0.0, r0 * w_rad * (p as f64).sqrt());
            }
        } else {
            // unbounded power direction: evaluate directly on endpoints
            total = self.x0.support(&w_mid)?;
        }
        // drift: <sum_(j<n) A^j drift, -g>
        let gsum = geometric_sum_matrix(&self.jf, Horizon::Finite(n))?;
        for i in 0..p {
            let mut row = Interval::ZERO;
            for j in 0..p {
                row += gsum[(i, j)] * Interval::point(self.dec.drift[j]);
            }
            total += row * Interval::point(neg_g[i]);
        }
        // deviation prefix + ball tail
        let kx = n.min(self.opts.exact_sweep);
        let mut dev = Interval::ZERO;
        let mut w = neg_g.clone();
        let at = self.model.a.transpose();
        for _ in 0..kx {
            dev += self.dec.dev_state.support(&w)?;
            w = &at * &w;
        }
        total += dev;
        if n > kx {
            total += self.ball_range(&neg_g, kx, Horizon::Finite(n))?;
        }
        Ok(total.hi <= -face.gamma)
    }

    /// Ball deviation mass accumulated over `k in [from, horizon)`.
    fn ball_range(&self, v: &DVector<f64>, from: u64, horizon: Horizon) -> Result<Interval> {
        let full = self
            .bd
            .accumulated_support(&self.jf, &self.dec.ball, v, horizon)?;
        let head = self
            .bd
            .accumulated_support(&self.jf, &self.dec.ball, v, Horizon::Finite(from))?;
        // factors are monotone in the horizon; the difference bounds the range
        Ok(Interval::new(0.0, (full.hi - head.lo).max(0.0)))
    }

    /// interval power A^n by binary exponentiation
    fn ipow(&self, n: u64) -> IMat {
        let p = self.model.dim();
        let mut acc = IMat::from_fn(p, p, |i, j| {
            Interval::point(if i == j { 1.0 } else { 0.0 })
        });
        let mut base = self.ia.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = imat_mul(&acc, &base);
            }
            base = imat_mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Per-direction tube bounds of a segment: exact joint sweep up to the
    /// configured prefix, abstract-matrix tail beyond.
    fn segment_bounds(
        &self,
        base: &SupportSet,
        horizon: Horizon,
        dirs: &[DVector<f64>],
    ) -> Result<Vec<f64>> {
        let kx = horizon.min_with(self.opts.exact_sweep);
        let sweep = self.sweep(base, dirs, kx)?;
        let tail_needed = match horizon {
            Horizon::Finite(n) => n > kx,
            Horizon::Infinite => true,
        };
        if !tail_needed {
            return Ok(sweep.best);
        }
        let am_pow = synthesize_abstract_matrix(
            &self.jf,
            PowerFamily::MatrixPowers,
            kx + 1,
            horizon,
            self.opts.dir_budget,
        )?;
        let drift_nonzero = self.dec.drift.amax() > 0.0;
        let am_geom = if drift_nonzero {
            Some(synthesize_abstract_matrix(
                &self.jf,
                PowerFamily::GeometricSums,
                kx + 1,
                horizon,
                self.opts.dir_budget,
            )?)
        } else {
            None
        };
        let drift_pt = SupportSet::point(self.dec.drift.clone());
        let mut out = Vec::with_capacity(dirs.len());
        for (i, v) in dirs.iter().enumerate() {
            let mut tail = abstract_apply(&am_pow, base, v)?.hi;
            if let Some(am_g) = &am_geom {
                tail += abstract_apply(am_g, &drift_pt, v)?.hi;
            }
            tail += sweep.dev_final[i].hi;
            tail += self.ball_range(v, kx, horizon)?.hi;
            out.push(sweep.best[i].max(tail));
        }
        Ok(out)
    }

    /// Exact-power template concretization of the reach set at step `n`.
    fn reach_set_at(
        &self,
        base: &SupportSet,
        n: u64,
        dirs: &[DVector<f64>],
    ) -> Result<Polytope> {
        let p = self.model.dim();
        let pk = self.ipow(n);
        let gsum = geometric_sum_matrix(&self.jf, Horizon::Finite(n))?;
        let r_base = base.radius_bound().ok();
        let mut rows: Vec<DVector<f64>> = Vec::new();
        let mut offs: Vec<f64> = Vec::new();
        for v in dirs {
            let mut w_mid = DVector::zeros(p);
            let mut w_rad = 0.0f64;
            for i in 0..p {
                let mut acc = Interval::ZERO;
                for j in 0..p {
                    acc += pk[(j, i)] * Interval::point(v[j]);
                }
                w_mid[i] = acc.midpoint();
                w_rad = w_rad.max(0.5 * acc.width());
            }
            let mut total = base.support(&w_mid)?;
            if w_rad > 0.0 {
                let Some(r0) = r_base else {
                    continue;
                };
                total += Interval::new(0.0, r0 * w_rad * (p as f64).sqrt());
            }
            for i in 0..p {
                let mut row = Interval::ZERO;
                for j in 0..p {
                    row += gsum[(i, j)] * Interval::point(self.dec.drift[j]);
                }
                total += row * Interval::point(v[i]);
            }
            let kx = n.min(self.opts.exact_sweep);
            let mut dev = Interval::ZERO;
            let mut w = v.clone();
            let at = self.model.a.transpose();
            for _ in 0..kx {
                dev += self.dec.dev_state.support(&w)?;
                w = &at * &w;
            }
            total += dev;
            if n > kx {
                total += self.ball_range(v, kx, Horizon::Finite(n))?;
            }
            if total.hi.is_finite() {
                rows.push(v.clone());
                offs.push(total.hi);
            }
        }
        if rows.is_empty() {
            return Err(Error::Unbounded("reach set concretization".into()));
        }
        let c = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Polytope::new(c, DVector::from_vec(offs))
    }
}

struct DirState {
    w: DVector<f64>,
    dev: Interval,
    best: f64,
}

struct SweepOut {
    best: Vec<f64>,
    dev_final: Vec<Interval>,
}

enum InsideOutcome {
    /// first violation found; value = last certified step
    Crossed(u64),
    /// certified through the cap only
    CapReached(u64),
    /// certified for every iteration
    Never,
}

/// Lazy one-step image `A(X meet G) (+) B U`; `None` when the meet is
/// certified empty (the loop has exited).
pub fn one_step_image(x: &SupportSet, model: &LinearLoop) -> Result<Option<SupportSet>> {
    let meet = match model.guard_polytope() {
        Some(g) => {
            if meet_certified_empty(x, &g)? {
                return Ok(None);
            }
            SupportSet::intersect_ub(x.clone(), SupportSet::polytope(g))
        }
        None => x.clone(),
    };
    let ax = SupportSet::image(model.a.clone(), meet);
    let bu = SupportSet::image(model.b.clone(), SupportSet::polytope(model.u.clone()));
    Ok(Some(SupportSet::minkowski(ax, bu)))
}

fn meet_certified_empty(x: &SupportSet, g: &Polytope) -> Result<bool> {
    // outer box of X intersected with the guard rows, checked by LP
    let p = x.dim();
    let mut rows = Vec::new();
    let mut offs = Vec::new();
    for i in 0..p {
        let mut e = DVector::zeros(p);
        e[i] = 1.0;
        let hi = x.support(&e)?.hi;
        if hi.is_finite() {
            rows.push(e.clone());
            offs.push(hi);
        }
        let mut e2 = DVector::zeros(p);
        e2[i] = -1.0;
        let lo = x.support(&e2)?.hi;
        if lo.is_finite() {
            rows.push(e2);
            offs.push(lo);
        }
    }
    let (gc, gd) = g.constraints();
    for i in 0..gc.nrows() {
        rows.push(gc.row(i).transpose());
        offs.push(gd[i]);
    }
    let c = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let poly = Polytope::new(c, DVector::from_vec(offs))?;
    Ok(poly.is_empty())
}

/// Run the accelerated analysis.
pub fn accelerate(model: &LinearLoop, opts: AccelOptions) -> Result<ReachTube> {
    let ctx = Ctx::build(model, opts)?;
    let dirs = template_directions(model.dim(), &ctx.opts.template, Some(&ctx.jf));
    let mut notes = Vec::new();

    let guard = model.guard_polytope();
    let faces = match &model.guard {
        Some((g, h)) => guard_faces(g, h)?,
        None => Vec::new(),
    };

    // per-face iteration estimates
    let mut n_lower = Horizon::Infinite;
    let mut cap_hit = false;
    for f in &faces {
        match ctx.sweep_inside(f)? {
            InsideOutcome::Crossed(n) => {
                n_lower = Horizon::Finite(n_lower.min_with(n));
            }
            InsideOutcome::CapReached(cap) => {
                cap_hit = true;
                n_lower = Horizon::Finite(n_lower.min_with(cap));
            }
            InsideOutcome::Never => {}
        }
    }
    if cap_hit {
        notes.push("inside-guard certification stopped at the sweep cap".into());
    }

    let n_upper = match n_lower {
        Horizon::Infinite => Horizon::Infinite,
        Horizon::Finite(nl) => {
            let mut best = Horizon::Infinite;
            for f in &faces {
                if let Some(n) = estimate_upper(&ctx, f)? {
                    let n = n.max(nl);
                    best = Horizon::Finite(best.min_with(n));
                }
            }
            best
        }
    };

    let x0_supports: Vec<Interval> = dirs
        .iter()
        .map(|v| ctx.x0.support(v))
        .collect::<Result<_>>()?;

    let meet_guard = |vals: Vec<f64>| -> Result<Vec<f64>> {
        match &guard {
            None => Ok(vals),
            Some(g) => vals
                .into_iter()
                .zip(&dirs)
                .map(|(b, v)| Ok(b.min(g.support(v)?.hi)))
                .collect(),
        }
    };

    let (mode, seg_bounds) = match (&faces[..], n_lower, n_upper) {
        ([], _, _) => {
            // no guard
            let horizon = ctx
                .opts
                .horizon
                .map(Horizon::Finite)
                .unwrap_or(Horizon::Infinite);
            let bounds = ctx.segment_bounds(&ctx.x0, horizon, &dirs)?;
            let mode = if ctx.opts.horizon.is_some() {
                Mode::HorizonBounded
            } else {
                Mode::GuardlessInfinite
            };
            (mode, bounds)
        }
        (_, Horizon::Infinite, _) => {
            // guard present but never constraining
            notes.push("guard certified non-constraining".into());
            let horizon = ctx
                .opts
                .horizon
                .map(Horizon::Finite)
                .unwrap_or(Horizon::Infinite);
            let base = SupportSet::intersect_ub(
                ctx.x0.clone(),
                SupportSet::polytope(guard.clone().expect("faces nonempty")),
            );
            let bounds = meet_guard(ctx.segment_bounds(&base, horizon, &dirs)?)?;
            (Mode::GuardlessInfinite, bounds)
        }
        (_, Horizon::Finite(nl), Horizon::Finite(nu)) => {
            // certified exit: both segments of the split tube
            let gpoly = guard.clone().expect("guarded");
            let base1 = SupportSet::intersect_ub(ctx.x0.clone(), SupportSet::polytope(gpoly));
            let seg1 = meet_guard(ctx.segment_bounds(&base1, Horizon::Finite(nl), &dirs)?)?;
            let mut concretize_dirs = dirs.clone();
            for d in template_directions(model.dim(), &TemplateSpec::Box, None) {
                concretize_dirs.push(d);
            }
            let xn = ctx.reach_set_at(&base1, nl, &concretize_dirs)?;
            let base2 = SupportSet::intersect_ub(
                SupportSet::polytope(xn),
                SupportSet::polytope(guard.clone().expect("guarded")),
            );
            let seg2 =
                meet_guard(ctx.segment_bounds(&base2, Horizon::Finite(nu - nl), &dirs)?)?;
            let joined = seg1
                .into_iter()
                .zip(seg2)
                .map(|(a, b)| a.max(b))
                .collect();
            (Mode::GuardedFinite, joined)
        }
        (_, Horizon::Finite(nl), Horizon::Infinite) => {
            // no certified exit: report the certified prefix
            notes.push(format!(
                "no certified guard exit; bounds cover the certified prefix 0..={nl}"
            ));
            let gpoly = guard.clone().expect("guarded");
            let base1 = SupportSet::intersect_ub(ctx.x0.clone(), SupportSet::polytope(gpoly));
            let seg1 = meet_guard(ctx.segment_bounds(&base1, Horizon::Finite(nl), &dirs)?)?;
            (Mode::GuardedPartial, seg1)
        }
    };

    let bounds: Vec<Interval> = seg_bounds
        .into_iter()
        .zip(&x0_supports)
        .map(|(hi, x0s)| Interval::new(x0s.lo.min(hi), hi.max(x0s.hi)))
        .collect();

    Ok(ReachTube {
        template: dirs,
        bounds,
        n_lower,
        n_upper,
        mode,
        provenance: Provenance {
            delta_max: ctx.jf.delta_max,
            sigma_max: ctx.jf.sigma_max_overall(),
            dir_budget: ctx.opts.dir_budget,
            ball_sampled: ctx.dec.ball.sampled,
            notes,
        },
    })
}

/// Doubling search for a certified full-crossing iteration, refined
/// downward by bisection; the returned value is re-verified directly.
fn estimate_upper(ctx: &Ctx, face: &GuardFace) -> Result<Option<u64>> {
    let mut n = 1u64 << 15;
    let cap = 1u64 << 30;
    let mut certified = None;
    while n <= cap {
        if ctx.beyond(face, n)? {
            certified = Some(n);
            break;
        }
        n = n.saturating_mul(2);
    }
    let Some(hi0) = certified else {
        return Ok(None);
    };
    let mut lo = 1u64;
    let mut hi = hi0;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ctx.beyond(face, mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    // bisection assumed monotonicity; re-verify the candidate
    if ctx.beyond(face, hi)? {
        Ok(Some(hi))
    } else {
        Ok(Some(hi0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polytope;

    fn box_poly(lo: &[f64], hi: &[f64]) -> Polytope {
        Polytope::from_box(
            &DVector::from_row_slice(lo),
            &DVector::from_row_slice(hi),
        )
        .unwrap()
    }

    fn thermostat() -> LinearLoop {
        LinearLoop::new(
            "thermostat",
            DMatrix::from_row_slice(2, 2, &[0.97, 0.1, -0.05, 1.0]),
            DMatrix::from_row_slice(2, 2, &[0.02, 0.0, 0.0, 0.05]),
            Some((
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
                DVector::from_row_slice(&[400.0, 300.0]),
            )),
            box_poly(&[5.0, 0.0], &[40.0, 1.0]),
            box_poly(&[5.0, 0.0], &[40.0, 300.0]),
        )
        .unwrap()
    }

    fn doubling() -> LinearLoop {
        LinearLoop::new(
            "doubling",
            DMatrix::from_row_slice(1, 1, &[2.0]),
            DMatrix::from_row_slice(1, 1, &[0.0]),
            Some((
                DMatrix::from_row_slice(1, 1, &[1.0]),
                DVector::from_row_slice(&[100.0]),
            )),
            box_poly(&[1.0], &[1.0]),
            box_poly(&[0.0], &[0.0]),
        )
        .unwrap()
    }

    #[test]
    fn identity_loop_tube_is_x0() {
        let model = LinearLoop::new(
            "identity",
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            None,
            box_poly(&[-1.0, 2.0], &[1.0, 3.0]),
            box_poly(&[0.0], &[0.0]),
        )
        .unwrap();
        let tube = accelerate(&model, AccelOptions::default()).unwrap();
        for (v, b) in tube.template.iter().zip(&tube.bounds) {
            let x0s = SupportSet::polytope(model.x0.clone()).support(v).unwrap();
            assert!(
                (b.hi - x0s.hi).abs() <= 1e-9 * (1.0 + x0s.hi.abs()),
                "direction {v:?}: {} vs {}",
                b.hi,
                x0s.hi
            );
        }
        assert_eq!(tube.mode, Mode::GuardlessInfinite);
    }

    #[test]
    fn thermostat_crossing_iteration() {
        let model = thermostat();
        let tube = accelerate(&model, AccelOptions::default()).unwrap();
        assert_eq!(tube.n_lower, Horizon::Finite(32));
        assert_eq!(tube.mode, Mode::GuardedPartial);
    }

    #[test]
    fn doubling_loop_estimates() {
        let model = doubling();
        let tube = accelerate(&model, AccelOptions::default()).unwrap();
        // simulation oracle: inside through 64 <= 100 (k=6), out at 128
        assert_eq!(tube.n_lower, Horizon::Finite(6));
        match tube.n_upper {
            Horizon::Finite(n) => assert_eq!(n, 7),
            Horizon::Infinite => panic!("doubling loop exits"),
        }
        assert_eq!(tube.mode, Mode::GuardedFinite);
        // tube bound: max state inside the guard is 64, one step beyond
        // is clipped by the guard meet at 100
        let up = tube
            .template
            .iter()
            .zip(&tube.bounds)
            .find(|(v, _)| v[0] > 0.0)
            .unwrap()
            .1;
        assert!(up.hi >= 64.0 && up.hi <= 100.0 + 1e-9, "{}", up.hi);
    }

    #[test]
    fn stable_loop_never_reaches_guard() {
        let model = LinearLoop::new(
            "contract",
            DMatrix::from_row_slice(1, 1, &[0.5]),
            DMatrix::from_row_slice(1, 1, &[0.0]),
            Some((
                DMatrix::from_row_slice(1, 1, &[1.0]),
                DVector::from_row_slice(&[100.0]),
            )),
            box_poly(&[1.0], &[2.0]),
            box_poly(&[0.0], &[0.0]),
        )
        .unwrap();
        let tube = accelerate(&model, AccelOptions::default()).unwrap();
        assert_eq!(tube.n_lower, Horizon::Infinite);
        assert_eq!(tube.mode, Mode::GuardlessInfinite);
    }

    #[test]
    fn one_step_image_fixpoint_at_origin() {
        let model = LinearLoop::new(
            "origin",
            DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.0, 0.8]),
            DMatrix::identity(2, 2),
            None,
            box_poly(&[0.0, 0.0], &[0.0, 0.0]),
            box_poly(&[0.0, 0.0], &[0.0, 0.0]),
        )
        .unwrap();
        let x = SupportSet::polytope(model.x0.clone());
        let img = one_step_image(&x, &model).unwrap().unwrap();
        for i in 0..2 {
            let mut e = DVector::zeros(2);
            e[i] = 1.0;
            assert!(img.support(&e).unwrap().hi.abs() < 1e-12);
        }
    }

    #[test]
    fn one_step_image_outside_guard_is_empty() {
        let model = LinearLoop::new(
            "exited",
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            Some((
                DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
                DVector::from_row_slice(&[0.0]),
            )),
            box_poly(&[1.0, 0.0], &[2.0, 1.0]),
            box_poly(&[0.0], &[0.0]),
        )
        .unwrap();
        let x = SupportSet::polytope(model.x0.clone());
        assert!(one_step_image(&x, &model).unwrap().is_none());
    }

    #[test]
    fn one_step_image_matches_vertex_arithmetic() {
        let model = thermostat();
        let x = SupportSet::polytope(model.x0.clone());
        let img = one_step_image(&x, &model).unwrap().unwrap();
        // oracle: A*vertex + B*u over vertices of X0 and U
        let (xl, xh) = model.x0.as_box().unwrap();
        let (ul, uh) = model.u.as_box().unwrap();
        let v = DVector::from_row_slice(&[1.0, 0.3]);
        let mut oracle = f64::NEG_INFINITY;
        for mx in 0..4u32 {
            for mu in 0..4u32 {
                let xv = DVector::from_fn(2, |i, _| if mx >> i & 1 == 1 { xh[i] } else { xl[i] });
                let uv = DVector::from_fn(2, |i, _| if mu >> i & 1 == 1 { uh[i] } else { ul[i] });
                let y = &model.a * xv + &model.b * uv;
                oracle = oracle.max(y.dot(&v));
            }
        }
        let s = img.support(&v).unwrap().hi;
        assert!((s - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()), "{s} vs {oracle}");
    }
}
