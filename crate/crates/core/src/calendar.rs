//! Time-ordered event calendar.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

#[derive(Debug)]
struct Entry<E> {
    time: f64,
    rank: u8,
    seq: u64,
    event: E,
}

impl<E> Entry<E> {
    fn key(&self) -> (f64, u8, u64) {
        (self.time, self.rank, self.seq)
    }
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        let (t1, r1, s1) = self.key();
        let (t2, r2, s2) = other.key();
        t1.total_cmp(&t2).then(r1.cmp(&r2)).then(s1.cmp(&s2))
    }
}

/// Min-priority queue of events keyed by `(time, rank, insertion order)`.
///
/// At equal times lower ranks pop first; equal time and rank pop in the
/// order they were scheduled, which makes the ordering total.
#[derive(Debug)]
pub struct EventCalendar<E> {
    heap: BinaryHeap<Reverse<Entry<E>>>,
    next_seq: u64,
    now: f64,
}

impl<E> Default for EventCalendar<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventCalendar<E> {
    pub fn new() -> Self {
        EventCalendar {
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: 0.0,
        }
    }

    /// Panics if `time` precedes the last popped event or is not finite.
    pub fn schedule(&mut self, time: f64, rank: u8, event: E) {
        assert!(time.is_finite(), "event time must be finite, got {time}");
        assert!(time >= self.now, "event scheduled in the past: {time} < {}", self.now);
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry { time, rank, seq, event }));
    }

    pub fn pop(&mut self) -> Option<(f64, E)> {
        let Reverse(entry) = self.heap.pop()?;
        self.now = entry.time;
        Some((entry.time, entry.event))
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
