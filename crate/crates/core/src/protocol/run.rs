//! Prover and verifier drivers, the local two-thread runner and reports.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cnf::{CnfFormula, Var};
use crate::error::{CheckKind, Error, Phase, ProtocolAbort, Result};
use crate::zk::channel::Frame;
use crate::zk::clause::CPoly;
use crate::zk::{duplex, Backend, Channel, ProverBackend, ProverTape, Role, Session, Tag, Tamper, VerifierBackend, VerifierTape};

use super::config::Config;
use super::instance::{Instance, PublicInstance};
use super::phases::{commit_secret, p1, p2, p3, p4, private_codes, P1Prover};
use super::plan::{prepare, secs, Mutation, Plan, PlanStats};
use super::statement::{Statement, TapeBudget};

/// What the verifier learns about the secret side.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Leakage {
    pub n_sec: usize,
    pub n_pub: usize,
    pub w: usize,
    pub m: usize,
    /// Resolution steps.
    pub r: usize,
    /// Stored resolvents.
    pub r_stored: usize,
    pub chains: Vec<usize>,
}

impl Leakage {
    fn new(st: &Statement, n_pub: usize) -> Self {
        Self {
            n_sec: st.n_sec,
            n_pub,
            w: st.w,
            m: st.m,
            r: st.num_steps(),
            r_stored: st.num_stored(),
            chains: st.chains.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PhaseTimes {
    #[serde(with = "secs")]
    pub commit: Duration,
    #[serde(with = "secs")]
    pub p1: Duration,
    #[serde(with = "secs")]
    pub p2: Duration,
    #[serde(with = "secs")]
    pub p3: Duration,
    #[serde(with = "secs")]
    pub p4: Duration,
    #[serde(with = "secs")]
    pub total: Duration,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrafficReport {
    pub frames_sent: u64,
    pub frames_received: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
}

/// Outcome of one protocol run from one party's side.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub role: &'static str,
    pub accepted: bool,
    pub leakage: Leakage,
    pub times: PhaseTimes,
    pub traffic: TrafficReport,
    pub tape: TapeBudget,
    pub tape_used: u64,
    /// Prover only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanStats>,
    /// Frames the verifier received, when recording was requested.
    #[serde(skip)]
    pub view: Vec<(Phase, Frame)>,
}

struct Clock {
    start: Instant,
    mark: Instant,
    times: PhaseTimes,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Self { start: now, mark: now, times: PhaseTimes::default() }
    }

    fn lap(&mut self) -> Duration {
        let now = Instant::now();
        let d = now - self.mark;
        self.mark = now;
        d
    }

    fn done(mut self) -> PhaseTimes {
        self.times.total = self.start.elapsed();
        self.times
    }
}

fn traffic(s: &Session) -> TrafficReport {
    let t = s.traffic();
    TrafficReport {
        frames_sent: t.frames_sent,
        frames_received: t.frames_received,
        bytes_sent: t.bytes_sent,
        bytes_received: t.bytes_received,
    }
}

/// Tell the peer why we stopped, then return the error.
fn bail(sess: &mut Session, e: Error) -> Error {
    let a = match &e {
        Error::Abort(a) => a.clone(),
        other => ProtocolAbort { phase: sess.phase(), kind: CheckKind::Witness, reason: other.to_string() },
    };
    if !a.reason.starts_with("peer:") {
        sess.send_abort(&a);
    }
    e
}

/// Correlation source for one party.
pub enum TapeSource<T> {
    /// Generate from the shared dealer seed in the config.
    Seeded,
    /// Use a pre-generated tape.
    Given(T),
}

/// Run the prover over `chan`.
pub fn run_prover(plan: &Plan, cfg: &Config, chan: Box<dyn Channel>, tape: TapeSource<ProverTape>) -> Result<Report> {
    let mut sess = Session::new(Role::Prover, chan);
    let st = &plan.statement;
    let public = &plan.instance.public;
    let budget = TapeBudget::new(st, public.phi_pub.len(), public.private_vars().len());
    if let Err(e) = sess.send(Tag::Hello, st.encode()) {
        return Err(bail(&mut sess, e));
    }
    let tape = match tape {
        TapeSource::Seeded => ProverTape::seeded(cfg.dealer_seed, budget.total()),
        TapeSource::Given(t) => t,
    };
    if let Err(e) = tape.reserve(budget.total()) {
        return Err(bail(&mut sess, e));
    }
    let mut b = ProverBackend::new(sess, tape);
    b.tamper_open = plan.mutation == Some(Mutation::TamperMac);
    let mut clock = Clock::new();
    let res = prover_body(&mut b, plan, cfg, &mut clock);
    let accepted = match res {
        Ok(()) => true,
        Err(e) => return Err(bail(&mut b.sess, e)),
    };
    Ok(Report {
        role: "prover",
        accepted,
        leakage: Leakage::new(st, public.phi_pub.len()),
        times: clock.done(),
        traffic: traffic(&b.sess),
        tape: budget,
        tape_used: b.tape_used(),
        plan: Some(plan.stats.clone()),
        view: Vec::new(),
    })
}

fn prover_body(b: &mut ProverBackend, plan: &Plan, cfg: &Config, clock: &mut Clock) -> Result<()> {
    let st = &plan.statement;
    let ctx = &plan.ctx;
    let sec = commit_secret(b, st, Some((ctx, &plan.instance.phi_sec.clauses)))?;
    clock.times.commit = clock.lap();
    let index = plan.index_entries();
    let pp = P1Prover { ctx, committed_pub: &plan.committed_pub, index: &index };
    let (pubs, codes) = p1(b, st, &plan.instance.public, Some(pp))?;
    clock.times.p1 = clock.lap();
    let mut cells: Vec<CPoly<_>> = sec.clone();
    cells.extend(pubs);
    p2(b, st, cfg.batch_steps, &mut cells, Some((ctx, &plan.p2)))?;
    clock.times.p2 = clock.lap();
    p3(b, st, &sec, Some(&plan.assignment_codes))?;
    clock.times.p3 = clock.lap();
    let priv_codes = private_codes(&plan.instance.public, &codes)?;
    p4(b, &sec, &priv_codes, st.w)?;
    clock.times.p4 = clock.lap();
    b.set_phase(Phase::Verdict);
    let v = b.sess.recv(Tag::Verdict)?;
    if v != [1] {
        return Err(b.sess.abort(CheckKind::Peer, "verifier rejected"));
    }
    Ok(())
}

/// Verifier options beyond the config.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Keep every received frame in the report.
    pub record: bool,
}

/// Run the verifier over `chan`.
pub fn run_verifier(
    public: &PublicInstance,
    cfg: &Config,
    chan: Box<dyn Channel>,
    tape: TapeSource<VerifierTape>,
    opts: VerifyOptions,
) -> Result<Report> {
    let mut sess = Session::new(Role::Verifier, chan);
    if opts.record {
        sess.start_recording();
    }
    let mut clock = Clock::new();
    let hello = match sess.recv(Tag::Hello) {
        Ok(h) => h,
        Err(e) => return Err(bail(&mut sess, e)),
    };
    let st = match Statement::decode(&hello).and_then(|st| {
        st.validate(&cfg.digest(), cfg.compress, public)?;
        Ok(st)
    }) {
        Ok(st) => st,
        Err(why) => {
            let e = sess.abort(CheckKind::Statement, why);
            return Err(bail(&mut sess, e));
        }
    };
    let budget = TapeBudget::new(&st, public.phi_pub.len(), public.private_vars().len());
    let tape = match tape {
        TapeSource::Seeded => VerifierTape::seeded(cfg.dealer_seed, budget.total()),
        TapeSource::Given(t) => t,
    };
    if let Err(e) = tape.reserve(budget.total()) {
        return Err(bail(&mut sess, e));
    }
    let mut b = VerifierBackend::new(sess, tape, cfg.verifier_seed);
    if let Err(e) = verifier_body(&mut b, public, &st, cfg, &mut clock) {
        return Err(bail(&mut b.sess, e));
    }
    let view = b.sess.take_recording();
    Ok(Report {
        role: "verifier",
        accepted: true,
        leakage: Leakage::new(&st, public.phi_pub.len()),
        times: clock.done(),
        traffic: traffic(&b.sess),
        tape: budget,
        tape_used: b.tape_used(),
        plan: None,
        view,
    })
}

fn verifier_body(
    b: &mut VerifierBackend,
    public: &PublicInstance,
    st: &Statement,
    cfg: &Config,
    clock: &mut Clock,
) -> Result<()> {
    clock.lap();
    let sec = commit_secret(b, st, None)?;
    clock.times.commit = clock.lap();
    let (pubs, codes) = p1(b, st, public, None)?;
    clock.times.p1 = clock.lap();
    let mut cells = sec.clone();
    cells.extend(pubs);
    p2(b, st, cfg.batch_steps, &mut cells, None)?;
    clock.times.p2 = clock.lap();
    p3(b, st, &sec, None)?;
    clock.times.p3 = clock.lap();
    let priv_codes = private_codes(public, &codes)?;
    p4(b, &sec, &priv_codes, st.w)?;
    clock.times.p4 = clock.lap();
    b.set_phase(Phase::Verdict);
    b.sess.send(Tag::Verdict, vec![1])?;
    b.sess.flush()
}

/// Both sides of one in-process run.
#[derive(Debug)]
pub struct LocalRun {
    pub prover: Result<Report>,
    pub verifier: Result<Report>,
}

impl LocalRun {
    pub fn accepted(&self) -> bool {
        matches!(&self.verifier, Ok(r) if r.accepted)
    }

    /// The verifier's abort, if it rejected.
    pub fn abort(&self) -> Option<&ProtocolAbort> {
        self.verifier.as_ref().err().and_then(Error::as_abort)
    }
}

/// Plan and run both parties on two threads. Fails before any message is
/// sent when the prover finds no refutation.
pub fn run_local(inst: &Instance, cfg: &Config, mutation: Option<Mutation>, opts: VerifyOptions) -> Result<LocalRun> {
    let plan = prepare(inst, cfg, mutation)?;
    Ok(run_plan(&plan, cfg, opts))
}

/// Blueprint mode: prove `phi_prop ∧ phi_sys` unsatisfiable while keeping
/// `phi_sys` secret. `interface` lists the variables the two may share.
pub fn run_blueprint(
    phi_prop: &CnfFormula,
    phi_sys: &CnfFormula,
    interface: &[Var],
    cfg: &Config,
    mutation: Option<Mutation>,
    opts: VerifyOptions,
) -> Result<LocalRun> {
    let inst = Instance::blueprint(phi_prop.clone(), phi_sys.clone(), interface)?;
    run_local(&inst, cfg, mutation, opts)
}

/// Run an already prepared plan against a fresh verifier.
pub fn run_plan(plan: &Plan, cfg: &Config, opts: VerifyOptions) -> LocalRun {
    let (a, b) = duplex();
    let pchan: Box<dyn Channel> = match plan.mutation {
        Some(Mutation::FlipWireByte { frame, byte }) => Box::new(Tamper::new(a, frame, byte)),
        _ => Box::new(a),
    };
    let public = &plan.instance.public;
    std::thread::scope(|s| {
        let h = s.spawn(move || run_prover(plan, cfg, pchan, TapeSource::Seeded));
        let verifier = run_verifier(public, cfg, Box::new(b), TapeSource::Seeded, opts);
        LocalRun { prover: h.join().expect("prover thread"), verifier }
    })
}
