//! Moving-knife steps and their simulation by bisection.
//!
//! A step is a list of devices evaluated in order at a given position of the
//! first knife. Knives hold positions, triggers hold signed values; each
//! device may ask a bounded number of queries through the shared [`Ctx`].
//! [`simulate_step`] brackets a sign change of one trigger and halves the
//! bracket by player 1's value (or by time under RW+), returning an
//! [`EpsOutcome`] where that trigger is within `eps` of zero.

mod builders;

pub use builders::{
    bb_preamble, build_austin_step, build_barbanel_brams_step, build_equitable_step, build_stromquist_step,
    equitable_all_orders, run_procedure, stromquist_allocation, BbCase, BbStart, KnifeRun, Procedure,
};

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::protocols::Ctx;
use crate::query::{QueryModel, Referee};
use crate::rational::{abs, ceil_log2, fmt_q, mid, Q};
use crate::valuation::PiecewiseDensity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceKind {
    Knife,
    Trigger,
}

/// Computes a device from the values of all earlier devices (index 0 is the
/// first knife).
pub type Dependence = Arc<dyn Fn(&[Q], &mut Ctx) -> Result<Q> + Send + Sync>;

#[derive(Clone)]
pub struct Device {
    pub kind: DeviceKind,
    /// `None` for devices held by the referee.
    pub owner: Option<usize>,
    pub label: String,
    /// Upper bound on queries this device may ask.
    pub queries: usize,
    pub dependence: Dependence,
}

impl fmt::Debug for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Device")
            .field("kind", &self.kind)
            .field("owner", &self.owner)
            .field("label", &self.label)
            .field("queries", &self.queries)
            .finish()
    }
}

impl Device {
    pub fn knife(owner: Option<usize>, label: &str, queries: usize, dependence: Dependence) -> Self {
        Device { kind: DeviceKind::Knife, owner, label: label.into(), queries, dependence }
    }

    pub fn trigger(owner: Option<usize>, label: &str, queries: usize, dependence: Dependence) -> Self {
        Device { kind: DeviceKind::Trigger, owner, label: label.into(), queries, dependence }
    }
}

/// Lower and upper bounds on every player's density.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityBounds {
    pub lo: Q,
    pub hi: Q,
}

impl DensityBounds {
    pub fn of(vals: &[PiecewiseDensity]) -> Result<Self> {
        let lo = vals.iter().map(|v| v.min_density()).min().ok_or_else(|| Error::Precondition("no players".into()))?;
        let hi = vals.iter().map(|v| v.max_density()).max().expect("non-empty");
        if !lo.is_positive() {
            return Err(Error::Precondition("moving-knife simulation needs densities bounded away from zero".into()));
        }
        Ok(DensityBounds { lo, hi })
    }
}

#[derive(Clone)]
pub struct MovingKnifeStep {
    pub name: String,
    /// Device 1: knife position as a function of time.
    pub first_knife: Arc<dyn Fn(&Q) -> Q + Send + Sync>,
    /// Devices 2..=K.
    pub devices: Vec<Device>,
    pub alpha: Q,
    pub omega: Q,
    /// Lipschitz constant bounding every device's change per unit of time.
    pub zeta: Q,
    pub bounds: DensityBounds,
    /// 1-based index of the trigger the simulation drives to zero.
    pub trigger: usize,
}

impl fmt::Debug for MovingKnifeStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MovingKnifeStep")
            .field("name", &self.name)
            .field("devices", &self.devices)
            .field("alpha", &self.alpha)
            .field("omega", &self.omega)
            .field("zeta", &self.zeta)
            .field("trigger", &self.trigger)
            .finish()
    }
}

impl MovingKnifeStep {
    /// Number of devices including the first knife.
    pub fn device_count(&self) -> usize {
        self.devices.len() + 1
    }

    /// Largest per-device query count.
    pub fn queries_per_device(&self) -> usize {
        self.devices.iter().map(|d| d.queries).max().unwrap_or(0)
    }

    /// Bisection rounds after which every device moves by at most `eps`.
    pub fn rounds(&self, eps: &Q, model: QueryModel) -> u32 {
        let scale = match model {
            QueryModel::Rw => &self.zeta / (eps * &self.bounds.lo),
            _ => &self.zeta / eps,
        };
        ceil_log2(&scale).max(1)
    }

    /// `2 log2(zeta / (eps delta)) (K l + 1)`, rounded up.
    pub fn query_budget(&self, eps: &Q) -> usize {
        let kl = self.device_count() * self.queries_per_device() + 1;
        2 * ceil_log2(&(&self.zeta / (eps * &self.bounds.lo))) as usize * kl
    }

    /// Values of all devices with the first knife at `x1`.
    pub fn evaluate(&self, x1: &Q, ctx: &mut Ctx) -> Result<Vec<Q>> {
        let mut vals = vec![x1.clone()];
        for (j, d) in self.devices.iter().enumerate() {
            let before = ctx.queries();
            let v = (d.dependence)(&vals, ctx)?;
            if ctx.queries() - before > d.queries {
                return Err(Error::Precondition(format!(
                    "device {} ({}) asked {} queries, above its bound {}",
                    j + 2,
                    d.label,
                    ctx.queries() - before,
                    d.queries
                )));
            }
            vals.push(v);
        }
        Ok(vals)
    }
}

/// A time where the chosen trigger is within `eps` of zero, with all device values there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsOutcome {
    /// 1-based.
    pub trigger_index: usize,
    pub time: Q,
    pub device_values: Vec<Q>,
    pub queries: usize,
    pub rounds: usize,
}

impl EpsOutcome {
    pub fn trigger_value(&self) -> &Q {
        &self.device_values[self.trigger_index - 1]
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "trigger": self.trigger_index,
            "time": fmt_q(&self.time),
            "devices": self.device_values.iter().map(fmt_q).collect::<Vec<_>>(),
            "queries": self.queries,
            "rounds": self.rounds,
        })
    }
}

/// Bisects the first knife until the step's trigger is within `eps` of zero.
pub fn simulate_step(step: &MovingKnifeStep, eps: &Q, ctx: &mut Ctx) -> Result<EpsOutcome> {
    if !eps.is_positive() {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let start = ctx.queries();
    let model = ctx.referee().model();
    let t = step.trigger - 1;
    let mut a = (step.first_knife)(&step.alpha);
    let mut b = (step.first_knife)(&step.omega);
    let mut va = step.evaluate(&a, ctx)?;
    let mut vb = step.evaluate(&b, ctx)?;
    let done = |x: &Q, v: Vec<Q>, ctx: &Ctx, rounds: usize| EpsOutcome {
        trigger_index: step.trigger,
        time: x.clone(),
        device_values: v,
        queries: ctx.queries() - start,
        rounds,
    };
    if abs(&va[t]) <= *eps {
        return Ok(done(&a, va, ctx, 0));
    }
    if abs(&vb[t]) <= *eps {
        return Ok(done(&b, vb, ctx, 0));
    }
    if va[t].is_positive() == vb[t].is_positive() {
        return Err(Error::Precondition(format!(
            "trigger {} does not switch sign: {} at start, {} at end",
            step.trigger,
            fmt_q(&va[t]),
            fmt_q(&vb[t])
        )));
    }
    let rounds = step.rounds(eps, model) as usize;
    for r in 1..=rounds {
        let m = match model {
            QueryModel::Rw => {
                let w = mid(&ctx.eval(0, &a)?, &ctx.eval(0, &b)?);
                ctx.cut(0, &w)?
            }
            _ => mid(&a, &b),
        };
        if m == a || m == b {
            break;
        }
        let vm = step.evaluate(&m, ctx)?;
        if abs(&vm[t]) <= *eps {
            return Ok(done(&m, vm, ctx, r));
        }
        if vm[t].is_positive() == va[t].is_positive() {
            a = m;
            va = vm;
        } else {
            b = m;
            vb = vm;
        }
    }
    let (x, v) = if abs(&va[t]) <= abs(&vb[t]) { (a, va) } else { (b, vb) };
    Err(Error::Precondition(format!(
        "trigger still at {} after {rounds} rounds at {}: the Lipschitz constant {} is too small",
        fmt_q(&v[t]),
        fmt_q(&x),
        fmt_q(&step.zeta)
    )))
}

/// Re-evaluates every device at the outcome's time against concrete
/// valuations. Returns the largest device error, failing if the trigger or
/// any device is off by more than `eps`.
pub fn verify_outcome(step: &MovingKnifeStep, outcome: &EpsOutcome, vals: &[PiecewiseDensity], eps: &Q) -> Result<Q> {
    let mut r = Referee::concrete(QueryModel::RwPlus, vals.to_vec());
    let mut ctx = Ctx::new(&mut r);
    let truth = step.evaluate(&outcome.time, &mut ctx)?;
    if abs(&truth[outcome.trigger_index - 1]) > *eps {
        return Err(Error::Certification(format!(
            "trigger {} is {} at the reported time",
            outcome.trigger_index,
            fmt_q(&truth[outcome.trigger_index - 1])
        )));
    }
    let mut worst = Q::zero();
    for (reported, actual) in outcome.device_values.iter().zip(&truth) {
        worst = worst.max(abs(&(reported - actual)));
    }
    if worst > *eps {
        return Err(Error::Certification(format!("device error {} exceeds epsilon", fmt_q(&worst))));
    }
    Ok(worst)
}

/// Samples the trigger on `steps + 1` evenly spaced times and returns the
/// largest observed slope.
pub fn trigger_slope(step: &MovingKnifeStep, vals: &[PiecewiseDensity], steps: usize) -> Result<Q> {
    let mut r = Referee::concrete(QueryModel::RwPlus, vals.to_vec());
    let mut ctx = Ctx::new(&mut r);
    let span = &step.omega - &step.alpha;
    let dt = &span / Q::from_integer(steps.into());
    let t = step.trigger - 1;
    let mut prev: Option<Q> = None;
    let mut worst = Q::zero();
    for s in 0..=steps {
        let time = &step.alpha + &dt * Q::from_integer(s.into());
        let v = step.evaluate(&(step.first_knife)(&time), &mut ctx)?[t].clone();
        if let Some(p) = prev {
            worst = worst.max(abs(&(&v - p)) / &dt);
        }
        prev = Some(v);
    }
    Ok(worst)
}
