//! One simulation loop per session: latched commands in, frames out.

use std::sync::Arc;
use std::time::Duration;

use rovergym_core::{Env, EnvError, RenderFrame, Twist};
use tokio::sync::{mpsc, watch};
use tokio::task::JoinHandle;
use tokio::time::{interval, MissedTickBehavior};

use crate::command::CommandMessage;

/// A broadcast frame. `seq` increases by one per publication and never
/// resets, unlike the frame's tick.
#[derive(Clone, Debug)]
pub struct Frame {
    pub seq: u64,
    pub json: Arc<str>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TickOutcome {
    Stepped,
    /// A latched reset ran instead of a step; the new episode is at tick 0.
    Reset,
    /// The episode has ended; the session waits for a reset.
    Finished,
}

/// The simulation side of a session without any timing or transport.
pub struct SessionCore {
    env: Box<dyn Env>,
    twist: Twist,
    motors: [f64; 4],
    pending_reset: bool,
    finished: bool,
}

impl SessionCore {
    pub fn new(mut env: Box<dyn Env>) -> Self {
        env.reset();
        SessionCore {
            env,
            twist: Twist::default(),
            motors: [0.0; 4],
            pending_reset: false,
            finished: false,
        }
    }

    /// Latch a command. Later commands overwrite earlier ones; `reset` is
    /// held until the next tick boundary.
    pub fn apply(&mut self, command: CommandMessage) {
        match command {
            CommandMessage::Twist { twist } => self.twist = Twist::new(twist.linear, twist.angular),
            CommandMessage::Suspension { motors } => self.motors = motors,
            CommandMessage::Reset {} => self.pending_reset = true,
            CommandMessage::Stop {} => {
                self.twist = Twist::default();
                self.motors = [0.0; 4];
            }
        }
    }

    pub fn latched(&self) -> (Twist, [f64; 4]) {
        (self.twist, self.motors)
    }

    pub fn tick(&mut self) -> Result<TickOutcome, EnvError> {
        if self.pending_reset {
            self.pending_reset = false;
            self.finished = false;
            self.env.reset();
            return Ok(TickOutcome::Reset);
        }
        if self.finished {
            return Ok(TickOutcome::Finished);
        }
        let action = self.env.teleop_action(&self.twist, &self.motors);
        let result = self.env.step(&action)?;
        self.finished = result.done;
        Ok(TickOutcome::Stepped)
    }

    pub fn frame(&self) -> Result<RenderFrame, EnvError> {
        self.env.render()
    }

    pub fn env(&self) -> &dyn Env {
        self.env.as_ref()
    }
}

fn period(hz: f64) -> Duration {
    Duration::from_secs_f64(1.0 / hz)
}

/// Handles held by the server for a running session loop.
pub(crate) struct SessionHandle {
    pub commands: mpsc::UnboundedSender<CommandMessage>,
    pub frames: watch::Receiver<Frame>,
    stop: watch::Sender<bool>,
    join: JoinHandle<()>,
}

impl SessionHandle {
    pub fn spawn(core: SessionCore, sim_hz: f64, broadcast_hz: f64) -> Result<Self, EnvError> {
        let first = Frame {
            seq: 0,
            json: core.frame()?.to_json().into(),
        };
        let (frames_tx, frames) = watch::channel(first);
        let (commands, commands_rx) = mpsc::unbounded_channel();
        let (stop, stop_rx) = watch::channel(false);
        let join = tokio::spawn(run(core, commands_rx, frames_tx, stop_rx, sim_hz, broadcast_hz));
        Ok(SessionHandle {
            commands,
            frames,
            stop,
            join,
        })
    }

    pub fn signal(&self) {
        self.stop.send_replace(true);
    }

    pub async fn join(self) {
        self.signal();
        let _ = self.join.await;
    }
}

async fn run(
    mut core: SessionCore,
    mut commands: mpsc::UnboundedReceiver<CommandMessage>,
    frames: watch::Sender<Frame>,
    mut stop: watch::Receiver<bool>,
    sim_hz: f64,
    broadcast_hz: f64,
) {
    let mut sim = interval(period(sim_hz));
    // catch up after a stall so simulated time tracks wall time
    sim.set_missed_tick_behavior(MissedTickBehavior::Burst);
    let mut cast = interval(period(broadcast_hz));
    cast.set_missed_tick_behavior(MissedTickBehavior::Skip);
    let mut seq = 0;
    let mut publish = |core: &SessionCore| match core.frame() {
        Ok(frame) => {
            seq += 1;
            frames.send_replace(Frame {
                seq,
                json: frame.to_json().into(),
            });
            true
        }
        Err(_) => false,
    };
    loop {
        tokio::select! {
            biased;
            _ = stop.wait_for(|s| *s) => break,
            _ = sim.tick() => {
                while let Ok(command) = commands.try_recv() {
                    core.apply(command);
                }
                match core.tick() {
                    Ok(TickOutcome::Reset) => {
                        if !publish(&core) {
                            break;
                        }
                    }
                    Ok(_) => {}
                    Err(_) => break,
                }
            }
            _ = cast.tick() => {
                if !publish(&core) {
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::command::TwistCommand;
    use rovergym_core::make;

    fn core() -> SessionCore {
        SessionCore::new(make("lsd_force_lidar-v0", 0).unwrap())
    }

    fn twist(linear: f64, angular: f64) -> CommandMessage {
        CommandMessage::Twist {
            twist: TwistCommand { linear, angular },
        }
    }

    #[test]
    fn last_write_wins() {
        let mut c = core();
        let x0 = c.frame().unwrap().pose.x;
        c.apply(twist(0.3, 0.0));
        c.apply(twist(0.5, 0.0));
        c.tick().unwrap();
        let dx = c.frame().unwrap().pose.x - x0;
        assert!((dx - 0.5 * 0.02).abs() < 1e-12, "{dx}");
    }

    #[test]
    fn linear_clipped_to_v_max() {
        let mut c = core();
        let x0 = c.frame().unwrap().pose.x;
        c.apply(twist(99.0, 0.0));
        c.tick().unwrap();
        let dx = c.frame().unwrap().pose.x - x0;
        assert!((dx - 1.5 * 0.02).abs() < 1e-12, "{dx}");
    }

    #[test]
    fn reset_then_tick_zero() {
        let mut c = core();
        c.apply(twist(1.0, 0.0));
        for _ in 0..5 {
            c.tick().unwrap();
        }
        assert_eq!(c.frame().unwrap().tick, 5);
        c.apply(CommandMessage::Reset {});
        assert_eq!(c.tick().unwrap(), TickOutcome::Reset);
        assert_eq!(c.frame().unwrap().tick, 0);
        // the twist survives a reset
        assert_eq!(c.tick().unwrap(), TickOutcome::Stepped);
        assert_eq!(c.frame().unwrap().tick, 1);
    }

    #[test]
    fn stop_zeroes_everything() {
        let mut c = core();
        c.apply(twist(1.0, 0.5));
        c.apply(CommandMessage::Suspension { motors: [1.0; 4] });
        c.apply(CommandMessage::Stop {});
        assert_eq!(c.latched(), (Twist::default(), [0.0; 4]));
    }
}
