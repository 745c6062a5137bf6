//! Predicate evaluation and hashable index keys shared by the three engines.
//!
//! Numbers compare by value across the integer/float split: `3 == 3.0`, and
//! `-0.0 == 0.0`. NaN equals nothing, including itself, and is never indexed.

use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::model::{Properties, PropertyValue};
use crate::workload::{Comparator, Predicate};

/// Integral floats in the `i64` range collapse onto the integer they equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Num {
    Int(i64),
    Float(u64),
}

const TWO_63: f64 = 9_223_372_036_854_775_808.0;

fn num(v: &PropertyValue) -> Option<Option<Num>> {
    match *v {
        PropertyValue::Int(i) => Some(Some(Num::Int(i))),
        PropertyValue::Float(f) if f.is_nan() => Some(None),
        PropertyValue::Float(f) => {
            if f.fract() == 0.0 && (-TWO_63..TWO_63).contains(&f) {
                Some(Some(Num::Int(f as i64)))
            } else {
                Some(Some(Num::Float(f.to_bits())))
            }
        }
        _ => None,
    }
}

pub fn loose_eq(a: &PropertyValue, b: &PropertyValue) -> bool {
    use PropertyValue::*;
    match (a, b) {
        (Null, Null) => true,
        (Bool(x), Bool(y)) => x == y,
        (Text(x), Text(y)) => x == y,
        (Int(x), Int(y)) => x == y,
        (List(x), List(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| loose_eq(p, q)),
        (Map(x), Map(y)) => {
            x.len() == y.len()
                && x.iter().zip(y).all(|((kx, vx), (ky, vy))| kx == ky && loose_eq(vx, vy))
        }
        _ => match (num(a), num(b)) {
            (Some(Some(x)), Some(Some(y))) => x == y,
            _ => false,
        },
    }
}

pub fn value_matches(v: &PropertyValue, comparator: &Comparator) -> bool {
    match comparator {
        Comparator::Eq { value } => loose_eq(v, value),
        Comparator::In { values } => values.iter().any(|x| loose_eq(v, x)),
        Comparator::Range { min, max } => v.as_f64().is_some_and(|x| *min <= x && x <= *max),
    }
}

/// True when every predicate holds; a missing field fails its predicate.
pub fn props_match(props: &Properties, predicates: &[Predicate]) -> bool {
    predicates.iter().all(|p| {
        props
            .get(&p.field)
            .is_some_and(|v| value_matches(v, &p.comparator))
    })
}

/// Hash under which loosely equal values collide. `None` for values
/// containing NaN, which match no equality probe.
pub fn key_hash(v: &PropertyValue) -> Option<u64> {
    let mut h = DefaultHasher::new();
    feed(v, &mut h)?;
    Some(h.finish())
}

fn feed(v: &PropertyValue, h: &mut DefaultHasher) -> Option<()> {
    match v {
        PropertyValue::Null => 0u8.hash(h),
        PropertyValue::Bool(b) => (1u8, b).hash(h),
        PropertyValue::Int(_) | PropertyValue::Float(_) => (2u8, num(v)??).hash(h),
        PropertyValue::Text(s) => (3u8, s).hash(h),
        PropertyValue::List(items) => {
            (4u8, items.len()).hash(h);
            for item in items {
                feed(item, h)?;
            }
        }
        PropertyValue::Map(map) => {
            (5u8, map.len()).hash(h);
            for (k, item) in map {
                k.hash(h);
                feed(item, h)?;
            }
        }
    }
    Some(())
}

struct Bucket {
    representative: PropertyValue,
    rows: Vec<u32>,
    /// Set when two values that are not loosely equal share the hash.
    mixed: bool,
}

/// Equality index from property values to row numbers. Keys are hashes, so
/// building it never copies the indexed values.
#[derive(Default)]
pub struct ValueIndex {
    buckets: HashMap<u64, Bucket>,
}

impl ValueIndex {
    pub fn insert(&mut self, row: u32, value: &PropertyValue) {
        if let Some(h) = key_hash(value) {
            self.insert_hashed(h, row, value);
        }
    }

    fn insert_hashed(&mut self, h: u64, row: u32, value: &PropertyValue) {
        match self.buckets.entry(h) {
            Entry::Occupied(mut e) => {
                let b = e.get_mut();
                if !b.mixed && !loose_eq(&b.representative, value) {
                    b.mixed = true;
                }
                b.rows.push(row);
            }
            Entry::Vacant(e) => {
                e.insert(Bucket {
                    representative: value.clone(),
                    rows: vec![row],
                    mixed: false,
                });
            }
        }
    }

    /// Rows whose value is loosely equal to `value`, in insertion order.
    /// `value_of` is consulted only when a hash collision mixed two values.
    pub fn lookup<'a>(&self, value: &PropertyValue, value_of: impl Fn(u32) -> Option<&'a PropertyValue>) -> Vec<u32> {
        let Some(h) = key_hash(value) else {
            return Vec::new();
        };
        self.lookup_hashed(h, value, value_of)
    }

    fn lookup_hashed<'a>(
        &self,
        h: u64,
        value: &PropertyValue,
        value_of: impl Fn(u32) -> Option<&'a PropertyValue>,
    ) -> Vec<u32> {
        match self.buckets.get(&h) {
            None => Vec::new(),
            Some(b) if b.mixed => b
                .rows
                .iter()
                .copied()
                .filter(|&r| value_of(r).is_some_and(|v| loose_eq(v, value)))
                .collect(),
            Some(b) if loose_eq(&b.representative, value) => b.rows.clone(),
            Some(_) => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PropertyValue as V;

    #[test]
    fn numeric_equality_crosses_types() {
        assert!(loose_eq(&V::Int(3), &V::Float(3.0)));
        assert!(loose_eq(&V::Float(-0.0), &V::Int(0)));
        assert!(!loose_eq(&V::Float(3.5), &V::Int(3)));
        assert!(!loose_eq(&V::Float(f64::NAN), &V::Float(f64::NAN)));
        assert!(!loose_eq(&V::Text("3".into()), &V::Int(3)));
        assert!(loose_eq(&V::Int(i64::MAX), &V::Int(i64::MAX)));
        assert!(!loose_eq(&V::Int(i64::MAX), &V::Float(TWO_63)));
    }

    #[test]
    fn hashes_agree_with_loose_eq() {
        let values = [
            V::Null,
            V::Bool(true),
            V::Int(0),
            V::Float(-0.0),
            V::Float(0.5),
            V::Int(1 << 53),
            V::Float((1u64 << 53) as f64),
            V::Int((1 << 53) + 1),
            V::Text("a".into()),
            V::List(vec![V::Int(1), V::Float(2.0)]),
            V::List(vec![V::Float(1.0), V::Int(2)]),
            V::Float(f64::INFINITY),
        ];
        for a in &values {
            for b in &values {
                if loose_eq(a, b) {
                    assert_eq!(key_hash(a), key_hash(b), "{a:?} vs {b:?}");
                }
            }
        }
        assert!(key_hash(&V::List(vec![V::Float(f64::NAN)])).is_none());
    }

    #[test]
    fn index_survives_forced_collisions() {
        let values = [V::Text("x".into()), V::Int(2), V::Float(2.0), V::Text("y".into())];
        let value_of = |r: u32| values.get(r as usize);
        let mut index = ValueIndex::default();
        for (i, v) in values.iter().enumerate() {
            index.insert_hashed(7, i as u32, v);
        }
        assert_eq!(index.lookup_hashed(7, &V::Int(2), value_of), vec![1, 2]);
        assert_eq!(index.lookup_hashed(7, &V::Text("y".into()), value_of), vec![3]);
        assert!(index.lookup_hashed(7, &V::Null, value_of).is_empty());

        let mut clean = ValueIndex::default();
        for (i, v) in values.iter().enumerate() {
            clean.insert(i as u32, v);
        }
        assert_eq!(clean.lookup(&V::Float(2.0), value_of), vec![1, 2]);
        assert!(clean.lookup(&V::Float(f64::NAN), value_of).is_empty());
        assert!(clean.lookup(&V::Text("z".into()), value_of).is_empty());
    }

    #[test]
    fn range_and_missing_fields() {
        let mut props = Properties::new();
        props.insert("age".into(), V::Int(60));
        props.insert("tag".into(), V::Text("65".into()));
        assert!(props_match(&props, &[Predicate::range("age", 60.0, 90.0)]));
        assert!(!props_match(&props, &[Predicate::range("tag", 60.0, 90.0)]));
        assert!(!props_match(&props, &[Predicate::eq("missing", V::Null)]));
        assert!(props_match(&props, &[]));
    }
}
