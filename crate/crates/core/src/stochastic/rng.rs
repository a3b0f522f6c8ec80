use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

/// What a random stream is used for. Each purpose has its own id space so the
/// arrival stream can never collide with a task stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Arrivals,
    Task,
}

/// A reproducible stream of random bits identified by `(seed, stream_id)`.
///
/// Streams are derived by hashing the pair into the seed of a
/// xoshiro256++ generator, so the draws of one stream never depend on how many
/// values other streams consumed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: Xoshiro256PlusPlus,
}

const TASK_INDEX_BITS: u32 = 24;

fn mix(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let key = mix(seed) ^ mix(stream_id.rotate_left(17) ^ 0x6a09_e667_f3bc_c908);
        RngStream {
            seed,
            stream_id,
            inner: Xoshiro256PlusPlus::seed_from_u64(key),
        }
    }

    pub fn stream_id_for(purpose: StreamPurpose, job: u64, task: u32) -> u64 {
        let tag = match purpose {
            StreamPurpose::Arrivals => 1u64,
            StreamPurpose::Task => 2u64,
        };
        debug_assert!(task < (1 << TASK_INDEX_BITS));
        (tag << 62) ^ (job << TASK_INDEX_BITS) ^ u64::from(task)
    }

    /// Stream for the execution and overhead draws of task `task` of job `job`.
    pub fn for_task(seed: u64, job: u64, task: u32) -> Self {
        RngStream::new(seed, Self::stream_id_for(StreamPurpose::Task, job, task))
    }

    pub fn for_arrivals(seed: u64) -> Self {
        RngStream::new(seed, Self::stream_id_for(StreamPurpose::Arrivals, 0, 0))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
