use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    /// Terminal for bootstrapping purposes (time-limit ends are not).
    pub done: bool,
}

/// Fixed-capacity ring of transitions with uniform sampling.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

/// Column-major view of a sampled minibatch.
#[derive(Clone, Debug, Default)]
pub struct Batch {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: Vec<f64>,
    pub next_obs: Vec<f64>,
    pub done: Vec<bool>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn get(&self, index: usize) -> Option<&Transition> {
        self.items.get(index)
    }

    /// Indices drawn uniformly with replacement; `None` until the buffer
    /// holds at least `batch` items.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Option<Vec<usize>> {
        if batch == 0 || self.items.len() < batch {
            return None;
        }
        Some((0..batch).map(|_| rng.random_range(0..self.items.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Option<Batch> {
        let idx = self.sample_indices(batch, rng)?;
        let mut out = Batch::default();
        for i in idx {
            let t = &self.items[i];
            out.obs.extend_from_slice(&t.obs);
            out.action.extend_from_slice(&t.action);
            out.reward.push(t.reward);
            out.next_obs.extend_from_slice(&t.next_obs);
            out.done.push(t.done);
        }
        Some(out)
    }
}
