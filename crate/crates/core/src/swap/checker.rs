//! Exhaustive schedule exploration for a two-party swap.
//!
//! Alice escrows credit A for Bob, Bob escrows credit B for Alice. Starting
//! from an empty chain, the explorer tries every [`Step`] at every reachable
//! state, up to a bounded number of successful steps, and treats every
//! prefix as a possible abort point. Each reachable state is classified:
//!
//! * a party is *harmed* when its own leg was redeemed by the counterparty
//!   but it has not redeemed the counter leg;
//! * a harmed party has *recourse* while the counter leg is open and a
//!   redeem window `[max(now, preimage visible), timelock)` is nonempty.
//!
//! A harmed party without recourse is a [`Verdict::Violation`] unless it had
//! recourse earlier on the same path and let it lapse
//! ([`Verdict::Forfeited`]). Bob only learns the preimage from a sealed
//! block, so a reveal in the last block before expiry gives him nothing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{initiate, participate, redeem, refund, Secret, SwapError, SwapState};
use crate::address::{Address, Hash32};
use crate::amount::Amount;
use crate::ledger::{CreditUnitId, Ledger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    Initiate,
    Participate,
    RedeemA,
    RedeemB,
    RefundA,
    RefundB,
    AdvanceClock,
}

pub const ALL_STEPS: [Step; 7] = [
    Step::Initiate,
    Step::Participate,
    Step::RedeemA,
    Step::RedeemB,
    Step::RefundA,
    Step::RefundB,
    Step::AdvanceClock,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BothSettled,
    BothRefundable,
    /// One leg redeemed; the other party can still redeem its leg.
    RedeemPending,
    /// A party let its redeem window lapse.
    Forfeited,
    Violation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckerConfig {
    /// Maximum number of successful steps in a schedule.
    pub horizon: usize,
    /// Safety margin `D` in blocks.
    pub delta: u64,
    pub value_a: Amount,
    pub value_b: Amount,
    /// Blocks between the two legs' timelocks. The protocol uses `delta`;
    /// zero models a participant who does not shorten the lock.
    pub leg_gap: u64,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig::new(12, 2)
    }
}

impl CheckerConfig {
    pub fn new(horizon: usize, delta: u64) -> Self {
        CheckerConfig {
            horizon,
            delta,
            value_a: Amount::from_credits(100),
            value_b: Amount::from_credits(80),
            leg_gap: delta,
        }
    }
}

#[derive(Debug, Clone)]
struct World {
    ledger: Ledger,
    alice: Address,
    bob: Address,
    credit_a: CreditUnitId,
    credit_b: CreditUnitId,
    secret: Secret,
    leg_a: Option<Hash32>,
    leg_b: Option<Hash32>,
    had_recourse: [bool; 2],
}

const ALICE: usize = 0;
const BOB: usize = 1;

impl World {
    fn genesis(cfg: &CheckerConfig) -> World {
        let mut ledger = Ledger::default();
        let (alice, bob) = (Address::derive("checker/alice"), Address::derive("checker/bob"));
        let credit_a = ledger
            .register_credit("credit-a", cfg.value_a, alice)
            .expect("fresh ledger");
        let credit_b = ledger
            .register_credit("credit-b", cfg.value_b, bob)
            .expect("fresh ledger");
        World {
            ledger,
            alice,
            bob,
            credit_a,
            credit_b,
            secret: Secret::derive("checker/secret"),
            leg_a: None,
            leg_b: None,
            had_recourse: [false; 2],
        }
    }

    fn state(&self, leg: Option<Hash32>) -> Option<SwapState> {
        leg.and_then(|id| self.ledger.contract(&id)).map(|c| c.state)
    }

    /// What Bob can read off the chain once the reveal block is sealed.
    fn bob_preimage(&self) -> Option<Secret> {
        let c = self.ledger.contract(&self.leg_b?)?;
        match (c.revealed_preimage, c.revealed_at) {
            (Some(p), Some(at)) if at <= self.ledger.height() => Some(p),
            _ => None,
        }
    }

    /// `None` when the step does not apply to this state. A refused step
    /// still returns the post-attempt world so callers can inspect it.
    fn attempt(&self, step: Step, cfg: &CheckerConfig) -> Option<(World, Result<(), SwapError>)> {
        let mut next = self.clone();
        let l = &mut next.ledger;
        let res = match step {
            Step::Initiate => {
                if self.leg_a.is_some() {
                    return None;
                }
                let (lock_a, _) = super::session_timelocks(l.height(), cfg.delta);
                initiate(l, self.alice, self.bob, &self.credit_a, cfg.value_a, &self.secret, lock_a)
                    .map(|c| next.leg_a = Some(c.id))
            }
            Step::Participate => {
                let leg_a = self.ledger.contract(&self.leg_a?)?;
                if self.leg_b.is_some() {
                    return None;
                }
                let lock_b = leg_a.timelock.saturating_sub(cfg.leg_gap);
                let limit = (cfg.leg_gap > 0).then_some(leg_a.timelock);
                participate(l, self.bob, self.alice, &self.credit_b, cfg.value_b, leg_a.hashlock, lock_b, limit)
                    .map(|c| next.leg_b = Some(c.id))
            }
            Step::RedeemA => {
                let id = self.leg_a?;
                // Without the published preimage Bob can only guess.
                let preimage = self.bob_preimage().unwrap_or(Secret([0xee; 32]));
                redeem(l, &id, self.bob, &preimage).map(drop)
            }
            Step::RedeemB => redeem(l, &self.leg_b?, self.alice, &self.secret).map(drop),
            Step::RefundA => refund(l, &self.leg_a?, self.alice).map(drop),
            Step::RefundB => refund(l, &self.leg_b?, self.bob).map(drop),
            Step::AdvanceClock => {
                let t = l.last_block().timestamp + 1;
                l.seal_block(t).map(drop).map_err(SwapError::Rejected)
            }
        };
        Some((next, res))
    }

    /// `(harmed, has_recourse)` for each party.
    fn positions(&self) -> [(bool, bool); 2] {
        let height = self.ledger.height();
        let leg = |id: Option<Hash32>| id.and_then(|id| self.ledger.contract(&id));
        let (a, b) = (leg(self.leg_a), leg(self.leg_b));
        let redeemed = |c: Option<&super::SwapContract>| c.is_some_and(|c| c.state == SwapState::Redeemed);

        let alice_harmed = redeemed(a) && !redeemed(b);
        let alice_recourse = b.is_some_and(|b| b.is_open() && height < b.timelock);

        let bob_harmed = redeemed(b) && !redeemed(a);
        let bob_recourse = match (a, b.and_then(|b| b.revealed_at)) {
            (Some(a), Some(visible)) => a.is_open() && height.max(visible) < a.timelock,
            _ => false,
        };
        [(alice_harmed, alice_recourse), (bob_harmed, bob_recourse)]
    }

    fn note_recourse(&mut self) {
        for (p, (harmed, recourse)) in self.positions().into_iter().enumerate() {
            if harmed && recourse {
                self.had_recourse[p] = true;
            }
        }
    }

    fn verdict(&self) -> Verdict {
        let positions = self.positions();
        let mut verdict = None;
        for p in [ALICE, BOB] {
            let (harmed, recourse) = positions[p];
            if !harmed {
                continue;
            }
            let v = if recourse {
                Verdict::RedeemPending
            } else if self.had_recourse[p] {
                Verdict::Forfeited
            } else {
                Verdict::Violation
            };
            verdict = verdict.max(Some(v));
        }
        verdict.unwrap_or_else(|| {
            let settled = self.state(self.leg_a) == Some(SwapState::Redeemed)
                && self.state(self.leg_b) == Some(SwapState::Redeemed);
            if settled {
                Verdict::BothSettled
            } else {
                Verdict::BothRefundable
            }
        })
    }

    fn conserves(&self, cfg: &CheckerConfig) -> bool {
        self.ledger.circulating(&self.credit_a) == cfg.value_a
            && self.ledger.circulating(&self.credit_b) == cfg.value_b
    }

    /// Observable swap state: both parties' balances and both legs.
    fn fingerprint(&self) -> (Vec<Amount>, Option<SwapState>, Option<SwapState>) {
        let balances = [self.alice, self.bob]
            .iter()
            .flat_map(|p| [self.ledger.balance(p, &self.credit_a), self.ledger.balance(p, &self.credit_b)])
            .collect();
        (balances, self.state(self.leg_a), self.state(self.leg_b))
    }
}

/// Outcome of replaying one schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOutcome {
    pub verdict: Verdict,
    pub applied: Vec<Step>,
    pub rejected: Vec<(Step, Option<SwapError>)>,
    pub conserved: bool,
}

/// Replays `schedule`, skipping steps that are rejected or do not apply,
/// and classifies the final state.
pub fn check_atomicity(cfg: &CheckerConfig, schedule: &[Step]) -> ScheduleOutcome {
    let mut world = World::genesis(cfg);
    let mut applied = Vec::new();
    let mut rejected = Vec::new();
    let mut conserved = world.conserves(cfg);
    for &step in schedule {
        match world.attempt(step, cfg) {
            Some((mut next, Ok(()))) => {
                next.note_recourse();
                world = next;
                applied.push(step);
                conserved &= world.conserves(cfg);
            }
            Some((_, Err(e))) => rejected.push((step, Some(e))),
            None => rejected.push((step, None)),
        }
    }
    ScheduleOutcome {
        verdict: world.verdict(),
        applied,
        rejected,
        conserved,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub config: CheckerConfig,
    /// Distinct schedules explored, counting every abort prefix.
    pub schedules: u64,
    pub terminal_states: BTreeMap<Verdict, u64>,
    /// Attempted steps the contracts refused.
    pub rejected_attempts: u64,
    pub conservation_failures: u64,
    /// Refused steps that still changed balances or leg states.
    pub state_machine_failures: u64,
    /// Up to 16 schedules ending in a violation.
    pub violation_examples: Vec<Vec<Step>>,
}

impl CheckReport {
    pub fn violations(&self) -> u64 {
        self.terminal_states
            .get(&Verdict::Violation)
            .copied()
            .unwrap_or(0)
    }

    pub fn is_atomic(&self) -> bool {
        self.violations() == 0 && self.conservation_failures == 0 && self.state_machine_failures == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Enumerates every schedule of up to `cfg.horizon` successful steps.
pub fn explore(cfg: &CheckerConfig) -> CheckReport {
    let mut report = CheckReport {
        config: *cfg,
        schedules: 0,
        terminal_states: BTreeMap::new(),
        rejected_attempts: 0,
        conservation_failures: 0,
        state_machine_failures: 0,
        violation_examples: Vec::new(),
    };
    let mut path = Vec::with_capacity(cfg.horizon);
    visit(World::genesis(cfg), cfg, &mut path, &mut report);
    report
}

fn visit(world: World, cfg: &CheckerConfig, path: &mut Vec<Step>, report: &mut CheckReport) {
    report.schedules += 1;
    let verdict = world.verdict();
    *report.terminal_states.entry(verdict).or_insert(0) += 1;
    if verdict == Verdict::Violation && report.violation_examples.len() < 16 {
        report.violation_examples.push(path.clone());
    }
    if !world.conserves(cfg) {
        report.conservation_failures += 1;
    }
    if path.len() >= cfg.horizon {
        return;
    }
    let before = world.fingerprint();
    for step in ALL_STEPS {
        match world.attempt(step, cfg) {
            None => {}
            Some((after, Err(_))) => {
                report.rejected_attempts += 1;
                // The reverted transaction is on chain but must not move funds.
                if after.fingerprint() != before {
                    report.state_machine_failures += 1;
                }
            }
            Some((mut next, Ok(()))) => {
                next.note_recourse();
                path.push(step);
                visit(next, cfg, path, report);
                path.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn happy_path_settles() {
        let cfg = CheckerConfig::default();
        let out = check_atomicity(
            &cfg,
            &[Step::Initiate, Step::Participate, Step::RedeemB, Step::AdvanceClock, Step::RedeemA],
        );
        assert_eq!(out.verdict, Verdict::BothSettled);
        assert!(out.rejected.is_empty());
        assert!(out.conserved);
    }

    #[test]
    fn absent_participant_leaves_refundable() {
        let cfg = CheckerConfig::default();
        let mut schedule = vec![Step::Initiate];
        schedule.extend([Step::AdvanceClock; 4]);
        schedule.push(Step::RefundA);
        let out = check_atomicity(&cfg, &schedule);
        assert_eq!(out.verdict, Verdict::BothRefundable);
        assert_eq!(out.applied.len(), schedule.len());
    }

    #[test]
    fn redeem_without_visible_preimage_is_refused() {
        let cfg = CheckerConfig::default();
        let out = check_atomicity(&cfg, &[Step::Initiate, Step::Participate, Step::RedeemB, Step::RedeemA]);
        assert_eq!(out.verdict, Verdict::RedeemPending);
        assert!(matches!(out.rejected[..], [(Step::RedeemA, Some(SwapError::WrongPreimage))]));
    }

    #[test]
    fn lapsed_window_is_forfeit_not_violation() {
        let cfg = CheckerConfig::default();
        let mut schedule = vec![Step::Initiate, Step::Participate, Step::RedeemB];
        schedule.extend([Step::AdvanceClock; 4]);
        schedule.push(Step::RefundA);
        let out = check_atomicity(&cfg, &schedule);
        assert_eq!(out.verdict, Verdict::Forfeited);
    }

    #[test]
    fn small_horizon_exploration_is_atomic() {
        let report = explore(&CheckerConfig::new(7, 2));
        assert!(report.is_atomic(), "{}", report.to_json());
        assert!(report.terminal_states.contains_key(&Verdict::BothSettled));
    }

    #[test]
    fn equal_timelocks_are_caught() {
        let mut cfg = CheckerConfig::new(8, 1);
        cfg.leg_gap = 0;
        let report = explore(&cfg);
        assert!(report.violations() > 0);
        let example = &report.violation_examples[0];
        assert_eq!(check_atomicity(&cfg, example).verdict, Verdict::Violation);
    }
}
