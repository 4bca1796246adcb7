use std::fmt;

/// Upper bound on the number of tendered requests; a [`RequestSet`] is one machine word.
pub const MAX_REQUESTS: usize = 64;

/// A subset of request ids `0..n` with `n <= 64`, stored as a bitmask.
///
/// Iteration always yields ids in ascending order, so the mask is the
/// canonical form of the set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RequestSet(u64);

impl RequestSet {
    pub const EMPTY: RequestSet = RequestSet(0);

    #[inline]
    pub const fn from_mask(mask: u64) -> Self {
        RequestSet(mask)
    }

    #[inline]
    pub const fn mask(self) -> u64 {
        self.0
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_REQUESTS, "at most {MAX_REQUESTS} requests");
        if n == MAX_REQUESTS {
            RequestSet(u64::MAX)
        } else {
            RequestSet((1u64 << n) - 1)
        }
    }

    #[inline]
    pub fn singleton(id: usize) -> Self {
        assert!(id < MAX_REQUESTS, "request id {id} out of range");
        RequestSet(1u64 << id)
    }

    /// Builds a set from ids; returns `None` on an out-of-range or repeated id.
    pub fn try_from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Option<Self> {
        let mut mask = 0u64;
        for id in ids {
            if id >= MAX_REQUESTS || mask & (1u64 << id) != 0 {
                return None;
            }
            mask |= 1u64 << id;
        }
        Some(RequestSet(mask))
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn contains(self, id: usize) -> bool {
        id < MAX_REQUESTS && self.0 & (1u64 << id) != 0
    }

    #[inline]
    pub fn with(self, id: usize) -> Self {
        RequestSet(self.0 | (1u64 << id))
    }

    #[inline]
    pub fn without(self, id: usize) -> Self {
        RequestSet(self.0 & !(1u64 << id))
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        RequestSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        RequestSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Self) -> Self {
        RequestSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest member id.
    #[inline]
    pub fn lowest(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Largest member id.
    #[inline]
    pub fn highest(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn iter(self) -> Ids {
        Ids(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Orders by cardinality first, then by mask.
    pub fn size_then_mask(self) -> (usize, u64) {
        (self.len(), self.0)
    }
}

/// Ascending iterator over the ids of a [`RequestSet`].
#[derive(Clone)]
pub struct Ids(u64);

impl Iterator for Ids {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let id = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(id)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Ids {}

impl IntoIterator for RequestSet {
    type Item = usize;
    type IntoIter = Ids;

    fn into_iter(self) -> Ids {
        self.iter()
    }
}

impl FromIterator<usize> for RequestSet {
    /// Panics on ids `>= 64`; duplicates are absorbed.
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(RequestSet::EMPTY, |acc, id| {
            acc.union(RequestSet::singleton(id))
        })
    }
}

impl fmt::Debug for RequestSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for RequestSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, id) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

impl serde::Serialize for RequestSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> serde::Deserialize<'de> for RequestSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ids = Vec::<usize>::deserialize(deserializer)?;
        RequestSet::try_from_ids(ids.iter().copied()).ok_or_else(|| {
            serde::de::Error::custom(format!(
                "request ids must be distinct and below {MAX_REQUESTS}, got {ids:?}"
            ))
        })
    }
}
