//! Event-driven simulation of the accelerated process with generator `N^2 L_N`.
//!
//! Rates are pre-multiplied by `N^2`, so state times are macroscopic. Each site
//! contributes one aggregate slot `g(eta(x)) * m(x)` to a Fenwick index, where
//! `m(x)` collects every channel that moves a particle out of `x` (bulk jumps
//! and, at the ends, removal into the reservoirs). Two more slots hold the
//! injection rates. An event picks a slot by cumulative rate, then a channel
//! within the slot.
//!
//! Sites are stored 0-based: index `i` is the lattice site `x = i + 1`.

use std::sync::Arc;

use rand::Rng;

use crate::fenwick::Fenwick;
use crate::rate::JumpRate;
use crate::steady::ModelParams;

/// Index rebuild period, bounding rounding drift in the Fenwick tree.
pub const REBUILD_EVERY: u64 = 1 << 20;
/// Cache self-check period in debug builds.
pub const CHECK_EVERY: u64 = 1 << 16;

/// Per-channel rates of the accelerated generator.
#[derive(Clone, Debug)]
pub struct Dynamics {
    n: usize,
    rate: Arc<JumpRate>,
    bulk: f64,
    inject_left: f64,
    inject_right: f64,
    remove_left: f64,
    remove_right: f64,
    /// `m(x)`: the site's total outgoing rate per unit of `g(eta(x))`.
    mult: Vec<f64>,
}

impl Dynamics {
    pub fn new(params: &ModelParams) -> Self {
        let n = params.n as f64;
        let boundary = n.powf(2.0 - params.theta);
        Self::with_rates(
            params.n,
            params.rate.clone(),
            n * n,
            (params.alpha * boundary, params.lambda * boundary),
            (params.beta * boundary, params.delta * boundary),
        )
    }

    /// Bulk dynamics only: reservoirs switched off, particle number conserved.
    pub fn closed(n: usize, rate: Arc<JumpRate>) -> Self {
        let nf = n as f64;
        Self::with_rates(n, rate, nf * nf, (0.0, 0.0), (0.0, 0.0))
    }

    /// Explicit rates: `bulk` per unit of `g`, `(inject, remove)` at each end.
    pub fn with_rates(
        n: usize,
        rate: Arc<JumpRate>,
        bulk: f64,
        (inject_left, remove_left): (f64, f64),
        (inject_right, remove_right): (f64, f64),
    ) -> Self {
        assert!(n >= 2, "lattice needs at least one site");
        let sites = n - 1;
        let mult = (0..sites)
            .map(|i| {
                let mut m = 0.0;
                if i + 1 < sites {
                    m += bulk;
                }
                if i > 0 {
                    m += bulk;
                }
                if i == 0 {
                    m += remove_left;
                }
                if i + 1 == sites {
                    m += remove_right;
                }
                m
            })
            .collect();
        Self { n, rate, bulk, inject_left, inject_right, remove_left, remove_right, mult }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.n - 1
    }

    pub fn rate(&self) -> &JumpRate {
        &self.rate
    }

    /// Total outgoing rate of site index `i` holding `k` particles.
    #[inline]
    pub fn site_rate(&self, i: usize, k: u64) -> f64 {
        self.rate.g(k) * self.mult[i]
    }

    /// Every channel with its rate and effect in configuration `eta`; the
    /// reference enumeration used by brute-force generator checks.
    pub fn channels(&self, eta: &[u64]) -> Vec<(Channel, f64)> {
        let sites = self.sites();
        let mut out = Vec::with_capacity(2 * sites + 4);
        for (i, &k) in eta.iter().enumerate() {
            let g = self.rate.g(k);
            if i + 1 < sites {
                out.push((Channel::Right(i), g * self.bulk));
            }
            if i > 0 {
                out.push((Channel::Left(i), g * self.bulk));
            }
        }
        out.push((Channel::InjectLeft, self.inject_left));
        out.push((Channel::RemoveLeft, self.rate.g(eta[0]) * self.remove_left));
        out.push((Channel::InjectRight, self.inject_right));
        out.push((Channel::RemoveRight, self.rate.g(eta[sites - 1]) * self.remove_right));
        out
    }

    /// Applies `channel` to a copy of `eta`.
    pub fn apply(&self, eta: &[u64], channel: Channel) -> Vec<u64> {
        let mut out = eta.to_vec();
        let last = self.sites() - 1;
        match channel {
            Channel::Right(i) => {
                out[i] -= 1;
                out[i + 1] += 1;
            }
            Channel::Left(i) => {
                out[i] -= 1;
                out[i - 1] += 1;
            }
            Channel::InjectLeft => out[0] += 1,
            Channel::RemoveLeft => out[0] -= 1,
            Channel::InjectRight => out[last] += 1,
            Channel::RemoveRight => out[last] -= 1,
        }
        out
    }
}

/// A transition of the process. Site arguments are 0-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    /// `x -> x + 1`.
    Right(usize),
    /// `x -> x - 1`.
    Left(usize),
    InjectLeft,
    RemoveLeft,
    InjectRight,
    RemoveRight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteChange {
    pub site: usize,
    pub old: u64,
    pub new: u64,
}

/// One realised transition.
#[derive(Clone, Copy, Debug)]
pub struct Event {
    pub time: f64,
    pub dt: f64,
    pub channel: Channel,
    changes: [SiteChange; 2],
    len: u8,
}

impl Event {
    pub fn changes(&self) -> &[SiteChange] {
        &self.changes[..self.len as usize]
    }
}

/// Occupations plus the cached rate index.
#[derive(Clone, Debug)]
pub struct LatticeState {
    dynamics: Arc<Dynamics>,
    eta: Vec<u64>,
    index: Fenwick,
    t: f64,
    events: u64,
}

impl LatticeState {
    pub fn new(dynamics: Arc<Dynamics>, eta: Vec<u64>) -> Self {
        Self::at_time(dynamics, eta, 0.0)
    }

    pub fn at_time(dynamics: Arc<Dynamics>, eta: Vec<u64>, t: f64) -> Self {
        assert_eq!(eta.len(), dynamics.sites(), "configuration length must be N - 1");
        let index = Fenwick::new(&Self::slot_rates(&dynamics, &eta));
        Self { dynamics, eta, index, t, events: 0 }
    }

    pub fn empty(dynamics: Arc<Dynamics>) -> Self {
        let sites = dynamics.sites();
        Self::new(dynamics, vec![0; sites])
    }

    fn slot_rates(dynamics: &Dynamics, eta: &[u64]) -> Vec<f64> {
        let mut slots: Vec<f64> = eta.iter().enumerate().map(|(i, &k)| dynamics.site_rate(i, k)).collect();
        slots.push(dynamics.inject_left);
        slots.push(dynamics.inject_right);
        slots
    }

    pub fn dynamics(&self) -> &Arc<Dynamics> {
        &self.dynamics
    }

    pub fn eta(&self) -> &[u64] {
        &self.eta
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    pub fn total_rate(&self) -> f64 {
        self.index.total()
    }

    pub fn particles(&self) -> u64 {
        self.eta.iter().sum()
    }

    /// Cached total outgoing rate of site index `i`.
    pub fn site_rate(&self, i: usize) -> f64 {
        self.index.value(i)
    }

    /// Compares every cached slot against a fresh evaluation. Returns the first
    /// mismatch as `(slot, cached, fresh)`.
    pub fn check_cache(&self) -> Option<(usize, f64, f64)> {
        let fresh = Self::slot_rates(&self.dynamics, &self.eta);
        fresh.iter().enumerate().find_map(|(i, &f)| {
            let c = self.index.value(i);
            (c != f).then_some((i, c, f))
        })
    }

    /// Draws the holding time; `None` when every rate vanishes.
    #[inline]
    fn holding_time<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        let total = self.index.total();
        if total <= 0.0 {
            return None;
        }
        let u: f64 = rng.random();
        Some(-(-u).ln_1p() / total)
    }

    /// Selects and applies one transition at time `self.t + dt`.
    fn fire<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> Event {
        let target = rng.random::<f64>() * self.index.total();
        let (slot, r) = self.index.find(target);
        let sites = self.dynamics.sites();
        let channel = if slot == sites {
            Channel::InjectLeft
        } else if slot == sites + 1 {
            Channel::InjectRight
        } else {
            self.pick_within_site(slot, r)
        };
        let mut changes = [SiteChange { site: 0, old: 0, new: 0 }; 2];
        let len;
        match channel {
            Channel::Right(i) => {
                changes[0] = self.shift(i, false);
                changes[1] = self.shift(i + 1, true);
                len = 2;
            }
            Channel::Left(i) => {
                changes[0] = self.shift(i, false);
                changes[1] = self.shift(i - 1, true);
                len = 2;
            }
            Channel::InjectLeft => {
                changes[0] = self.shift(0, true);
                len = 1;
            }
            Channel::RemoveLeft => {
                changes[0] = self.shift(0, false);
                len = 1;
            }
            Channel::InjectRight => {
                changes[0] = self.shift(sites - 1, true);
                len = 1;
            }
            Channel::RemoveRight => {
                changes[0] = self.shift(sites - 1, false);
                len = 1;
            }
        }
        self.t += dt;
        self.events += 1;
        if self.events.is_multiple_of(REBUILD_EVERY) {
            self.index.rebuild();
        }
        if cfg!(debug_assertions) && self.events.is_multiple_of(CHECK_EVERY) {
            if let Some((slot, cached, fresh)) = self.check_cache() {
                panic!(
                    "rate cache mismatch at slot {slot}: cached {cached}, fresh {fresh}; t = {}, events = {}, eta = {:?}",
                    self.t, self.events, self.eta
                );
            }
        }
        Event { time: self.t, dt, channel, changes, len }
    }

    #[inline]
    fn pick_within_site(&self, i: usize, r: f64) -> Channel {
        let d = &self.dynamics;
        let sites = d.sites();
        let g = d.rate.g(self.eta[i]);
        let mut acc = 0.0;
        if i + 1 < sites {
            acc += g * d.bulk;
            if r < acc {
                return Channel::Right(i);
            }
        }
        if i > 0 {
            acc += g * d.bulk;
            if r < acc {
                return Channel::Left(i);
            }
        }
        if i == 0 && d.remove_left > 0.0 {
            acc += g * d.remove_left;
            if r < acc || i + 1 < sites || d.remove_right == 0.0 {
                return Channel::RemoveLeft;
            }
        }
        if i + 1 == sites && d.remove_right > 0.0 {
            return Channel::RemoveRight;
        }
        // Rounding pushed `r` past the last piece; fall back to the last
        // channel that exists at this site.
        if i > 0 {
            Channel::Left(i)
        } else {
            Channel::Right(i)
        }
    }

    #[inline]
    fn shift(&mut self, i: usize, up: bool) -> SiteChange {
        let old = self.eta[i];
        let new = if up { old + 1 } else { old - 1 };
        self.eta[i] = new;
        self.index.set(i, self.dynamics.site_rate(i, new));
        SiteChange { site: i, old, new }
    }

    /// Performs one transition regardless of any horizon.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Event> {
        let dt = self.holding_time(rng)?;
        Some(self.fire(dt, rng))
    }

    /// Advances to time `horizon`, feeding observers. The final state time is
    /// exactly `horizon` unless the event budget runs out first.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        horizon: f64,
        observers: &mut [&mut dyn Observer],
        rng: &mut R,
        budget: Option<u64>,
    ) -> RunStatus {
        let start_events = self.events;
        let t0 = self.t;
        let mut grids: Vec<Option<GridClock>> = observers
            .iter()
            .map(|o| match o.sampling() {
                Sampling::EveryEvent => None,
                Sampling::Grid(dt) => Some(GridClock::new(t0, dt)),
            })
            .collect();
        for o in observers.iter_mut() {
            o.start(self);
        }
        let mut completed = true;
        loop {
            if let Some(b) = budget {
                if self.events - start_events >= b {
                    completed = false;
                    break;
                }
            }
            let next = match self.holding_time(rng) {
                Some(dt) if self.t + dt <= horizon => dt,
                _ => break,
            };
            let te = self.t + next;
            for (o, clock) in observers.iter_mut().zip(grids.iter_mut()) {
                if let Some(c) = clock {
                    while let Some(tg) = c.due_before(te, horizon) {
                        o.sample(tg, self);
                    }
                }
            }
            let ev = self.fire(next, rng);
            for o in observers.iter_mut() {
                o.event(self, &ev);
            }
        }
        let end = if completed { horizon } else { self.t };
        for (o, clock) in observers.iter_mut().zip(grids.iter_mut()) {
            if let Some(c) = clock {
                while let Some(tg) = c.due_through(end) {
                    o.sample(tg, self);
                }
            }
        }
        if completed {
            self.t = horizon.max(self.t);
        }
        for o in observers.iter_mut() {
            o.finish(self);
        }
        RunStatus { events: self.events - start_events, completed, time: self.t }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunStatus {
    pub events: u64,
    /// False when the event budget stopped the run before the horizon.
    pub completed: bool,
    pub time: f64,
}

/// How an observer wants to see the trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    /// Only `event` callbacks.
    EveryEvent,
    /// `event` callbacks plus `sample` at `t0 + k dt` for every grid point up to the horizon.
    Grid(f64),
}

/// Trajectory callback. `event` sees the state after the transition; `sample`
/// sees the state holding at the grid time.
pub trait Observer {
    fn sampling(&self) -> Sampling {
        Sampling::EveryEvent
    }
    fn start(&mut self, _state: &LatticeState) {}
    fn event(&mut self, _state: &LatticeState, _event: &Event) {}
    fn sample(&mut self, _t: f64, _state: &LatticeState) {}
    fn finish(&mut self, _state: &LatticeState) {}
}

struct GridClock {
    t0: f64,
    dt: f64,
    k: u64,
}

impl GridClock {
    fn new(t0: f64, dt: f64) -> Self {
        assert!(dt > 0.0, "grid spacing must be positive");
        Self { t0, dt, k: 0 }
    }

    fn at(&self) -> f64 {
        self.t0 + self.k as f64 * self.dt
    }

    fn due_before(&mut self, te: f64, horizon: f64) -> Option<f64> {
        let tg = self.at();
        (tg < te && tg <= horizon + 1e-9 * self.dt).then(|| {
            self.k += 1;
            tg.min(horizon)
        })
    }

    fn due_through(&mut self, end: f64) -> Option<f64> {
        let tg = self.at();
        (tg <= end + 1e-9 * self.dt).then(|| {
            self.k += 1;
            tg.min(end)
        })
    }
}

/// `c + sum_i (a_i g(eta(i)) + b_i eta(i))`. Every observable of the field
/// analysis has this form.
#[derive(Clone, Debug, Default)]
pub struct LinearFunctional {
    pub constant: f64,
    pub g_coef: Vec<f64>,
    pub eta_coef: Vec<f64>,
}

impl LinearFunctional {
    pub fn zeros(sites: usize) -> Self {
        Self { constant: 0.0, g_coef: vec![0.0; sites], eta_coef: vec![0.0; sites] }
    }

    pub fn eval(&self, eta: &[u64], rate: &JumpRate) -> f64 {
        let mut s = self.constant;
        for (i, &k) in eta.iter().enumerate() {
            s += self.g_coef[i] * rate.g(k) + self.eta_coef[i] * k as f64;
        }
        s
    }

    #[inline]
    pub fn delta(&self, change: &SiteChange, rate: &JumpRate) -> f64 {
        let i = change.site;
        self.g_coef[i] * (rate.g(change.new) - rate.g(change.old))
            + self.eta_coef[i] * (change.new as f64 - change.old as f64)
    }
}

/// One row of a [`FunctionalRecorder`].
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub t: f64,
    pub values: Vec<f64>,
    pub integrals: Vec<f64>,
    pub jump_sq: Vec<f64>,
}

/// Tracks a bank of linear functionals along a trajectory: current values,
/// exact time integrals, and the running sum of squared jumps. Rows are
/// recorded on the grid, if any, and at the end.
#[derive(Clone, Debug)]
pub struct FunctionalRecorder {
    functionals: Vec<LinearFunctional>,
    grid: Option<f64>,
    values: Vec<f64>,
    integrals: Vec<f64>,
    jump_sq: Vec<f64>,
    last_t: f64,
    seen: u64,
    /// Values at the start of the run.
    pub initial: Vec<f64>,
    pub records: Vec<Record>,
}

impl FunctionalRecorder {
    pub fn new(functionals: Vec<LinearFunctional>, grid: Option<f64>) -> Self {
        let k = functionals.len();
        Self {
            functionals,
            grid,
            values: vec![0.0; k],
            integrals: vec![0.0; k],
            jump_sq: vec![0.0; k],
            last_t: 0.0,
            seen: 0,
            initial: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn functionals(&self) -> &[LinearFunctional] {
        &self.functionals
    }

    fn row(&self, t: f64) -> Record {
        let dt = t - self.last_t;
        Record {
            t,
            values: self.values.clone(),
            integrals: self.integrals.iter().zip(&self.values).map(|(i, v)| i + v * dt).collect(),
            jump_sq: self.jump_sq.clone(),
        }
    }

    fn reevaluate(&mut self, state: &LatticeState) {
        let rate = state.dynamics().rate();
        for (v, f) in self.values.iter_mut().zip(&self.functionals) {
            *v = f.eval(state.eta(), rate);
        }
    }
}

impl Observer for FunctionalRecorder {
    fn sampling(&self) -> Sampling {
        match self.grid {
            Some(dt) => Sampling::Grid(dt),
            None => Sampling::EveryEvent,
        }
    }

    fn start(&mut self, state: &LatticeState) {
        self.last_t = state.time();
        self.integrals.iter_mut().for_each(|x| *x = 0.0);
        self.jump_sq.iter_mut().for_each(|x| *x = 0.0);
        self.records.clear();
        self.seen = 0;
        self.reevaluate(state);
        self.initial = self.values.clone();
    }

    fn event(&mut self, state: &LatticeState, event: &Event) {
        let dt = event.time - self.last_t;
        let rate = state.dynamics().rate();
        for (j, f) in self.functionals.iter().enumerate() {
            self.integrals[j] += self.values[j] * dt;
            let jump: f64 = event.changes().iter().map(|c| f.delta(c, rate)).sum();
            self.values[j] += jump;
            self.jump_sq[j] += jump * jump;
        }
        self.last_t = event.time;
        self.seen += 1;
        if self.seen.is_multiple_of(CHECK_EVERY) {
            self.reevaluate(state);
        }
    }

    fn sample(&mut self, t: f64, _state: &LatticeState) {
        let row = self.row(t);
        self.records.push(row);
    }

    fn finish(&mut self, state: &LatticeState) {
        let t = state.time();
        let done = self.records.last().is_some_and(|r| r.t == t);
        if !done {
            let row = self.row(t);
            self.records.push(row);
        }
    }
}

/// Exact time integral of an arbitrary configuration functional, re-evaluated
/// after every event.
pub struct PathIntegral<F: FnMut(&[u64]) -> f64> {
    f: F,
    value: f64,
    last_t: f64,
    pub integral: f64,
}

impl<F: FnMut(&[u64]) -> f64> PathIntegral<F> {
    pub fn new(f: F) -> Self {
        Self { f, value: 0.0, last_t: 0.0, integral: 0.0 }
    }
}

impl<F: FnMut(&[u64]) -> f64> Observer for PathIntegral<F> {
    fn start(&mut self, state: &LatticeState) {
        self.value = (self.f)(state.eta());
        self.last_t = state.time();
        self.integral = 0.0;
    }

    fn event(&mut self, state: &LatticeState, event: &Event) {
        self.integral += self.value * (event.time - self.last_t);
        self.last_t = event.time;
        self.value = (self.f)(state.eta());
    }

    fn finish(&mut self, state: &LatticeState) {
        self.integral += self.value * (state.time() - self.last_t);
        self.last_t = state.time();
    }
}

/// Keeps configurations at grid times.
#[derive(Clone, Debug)]
pub struct Snapshots {
    dt: f64,
    pub times: Vec<f64>,
    pub configs: Vec<Vec<u64>>,
}

impl Snapshots {
    pub fn new(dt: f64) -> Self {
        Self { dt, times: Vec::new(), configs: Vec::new() }
    }
}

impl Observer for Snapshots {
    fn sampling(&self) -> Sampling {
        Sampling::Grid(self.dt)
    }

    fn sample(&mut self, t: f64, state: &LatticeState) {
        self.times.push(t);
        self.configs.push(state.eta().to_vec());
    }
}
