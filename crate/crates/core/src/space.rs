//! Ordered variable spaces with a conjugation involution.
//!
//! Three regimes recur throughout the pipeline: holomorphic jet spaces
//! (z, w) with no conjugates, doubled spaces (z, z̄, w, w̄) where conjugation
//! swaps partner variables, and real coordinate spaces (x, y, u, v) fixed by
//! conjugation. Antiholomorphic variables are spelled with a `~` prefix.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::SeriesError;

/// Registry for the standard space constructors, so every call site shares
/// one `Arc` per shape. Shared pointers make space-equality checks O(1) and
/// let caches key on pointer identity.
fn registry() -> &'static Mutex<HashMap<(u8, usize, usize), Arc<VariableSpace>>> {
    static REG: OnceLock<Mutex<HashMap<(u8, usize, usize), Arc<VariableSpace>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

fn memoized(
    tag: u8,
    m: usize,
    d: usize,
    build: impl FnOnce() -> Arc<VariableSpace>,
) -> Arc<VariableSpace> {
    let mut reg = registry().lock().expect("space registry poisoned");
    Arc::clone(reg.entry((tag, m, d)).or_insert_with(build))
}

/// Kind of a variable with respect to conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Holomorphic,
    Antiholomorphic,
    Real,
}

/// An ordered list of named variables plus the conjugation pairing.
///
/// `conj[i] = Some(j)` pairs position i with j (i = j for real variables);
/// `None` marks an unpaired holomorphic variable, which only jet spaces
/// carry. Equality is structural; spaces are shared behind `Arc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpace {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    conj: Vec<Option<usize>>,
}

impl VariableSpace {
    pub fn new(
        names: Vec<String>,
        kinds: Vec<VarKind>,
        conj: Vec<Option<usize>>,
    ) -> Result<Arc<Self>, SeriesError> {
        if names.is_empty() {
            return Err(SeriesError::InvalidSpace("no variables".into()));
        }
        if names.len() != kinds.len() || names.len() != conj.len() {
            return Err(SeriesError::InvalidSpace(
                "names, kinds, and conjugation must have equal length".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(SeriesError::InvalidSpace(format!("duplicate variable `{n}`")));
            }
        }
        for (i, c) in conj.iter().enumerate() {
            match *c {
                Some(j) => {
                    if j >= names.len() || conj[j] != Some(i) {
                        return Err(SeriesError::InvalidSpace(
                            "conjugation is not an involution".into(),
                        ));
                    }
                    let ok = match (kinds[i], kinds[j]) {
                        (VarKind::Real, VarKind::Real) => i == j,
                        (VarKind::Holomorphic, VarKind::Antiholomorphic) => i != j,
                        (VarKind::Antiholomorphic, VarKind::Holomorphic) => i != j,
                        _ => false,
                    };
                    if !ok {
                        return Err(SeriesError::InvalidSpace(
                            "conjugation must swap holomorphic/antiholomorphic and fix real variables"
                                .into(),
                        ));
                    }
                }
                None => {
                    if kinds[i] != VarKind::Holomorphic {
                        return Err(SeriesError::InvalidSpace(
                            "only holomorphic variables may be unpaired".into(),
                        ));
                    }
                }
            }
        }
        Ok(Arc::new(VariableSpace { names, kinds, conj }))
    }

    /// Jet space (z1..zm, w1..wd): holomorphic, no conjugate partners.
    pub fn holomorphic_jet(m: usize, d: usize) -> Arc<Self> {
        memoized(0, m, d, || {
            let mut names = Vec::with_capacity(m + d);
            for i in 1..=m {
                names.push(format!("z{i}"));
            }
            for j in 1..=d {
                names.push(format!("w{j}"));
            }
            let kinds = vec![VarKind::Holomorphic; m + d];
            let conj = vec![None; m + d];
            Self::new(names, kinds, conj).expect("jet space is well formed")
        })
    }

    /// Doubled space (z1..zm, ~z1..~zm, w1..wd, ~w1..~wd).
    pub fn doubled(m: usize, d: usize) -> Arc<Self> {
        memoized(1, m, d, || Self::build_doubled(m, d))
    }

    fn build_doubled(m: usize, d: usize) -> Arc<Self> {
        let mut names = Vec::with_capacity(2 * (m + d));
        let mut kinds = Vec::with_capacity(2 * (m + d));
        let mut conj = vec![None; 2 * (m + d)];
        for i in 1..=m {
            names.push(format!("z{i}"));
            kinds.push(VarKind::Holomorphic);
        }
        for i in 1..=m {
            names.push(format!("~z{i}"));
            kinds.push(VarKind::Antiholomorphic);
        }
        for j in 1..=d {
            names.push(format!("w{j}"));
            kinds.push(VarKind::Holomorphic);
        }
        for j in 1..=d {
            names.push(format!("~w{j}"));
            kinds.push(VarKind::Antiholomorphic);
        }
        for i in 0..m {
            conj[i] = Some(m + i);
            conj[m + i] = Some(i);
        }
        for j in 0..d {
            conj[2 * m + j] = Some(2 * m + d + j);
            conj[2 * m + d + j] = Some(2 * m + j);
        }
        Self::new(names, kinds, conj).expect("doubled space is well formed")
    }

    /// Real coordinate space (x1..xm, y1..ym, u1..ud, v1..vd).
    pub fn real_coords(m: usize, d: usize) -> Arc<Self> {
        memoized(2, m, d, || {
            let mut names = Vec::with_capacity(2 * m + 2 * d);
            for i in 1..=m {
                names.push(format!("x{i}"));
            }
            for i in 1..=m {
                names.push(format!("y{i}"));
            }
            for j in 1..=d {
                names.push(format!("u{j}"));
            }
            for j in 1..=d {
                names.push(format!("v{j}"));
            }
            let n = names.len();
            let kinds = vec![VarKind::Real; n];
            let conj = (0..n).map(Some).collect();
            Self::new(names, kinds, conj).expect("real space is well formed")
        })
    }

    /// Graph coordinate space (x1..xm, y1..ym, u1..ud): the domain of graph
    /// germs, with the v-block removed.
    pub fn graph_coords(m: usize, d: usize) -> Arc<Self> {
        memoized(3, m, d, || {
            let mut names = Vec::with_capacity(2 * m + d);
            for i in 1..=m {
                names.push(format!("x{i}"));
            }
            for i in 1..=m {
                names.push(format!("y{i}"));
            }
            for j in 1..=d {
                names.push(format!("u{j}"));
            }
            let n = names.len();
            let kinds = vec![VarKind::Real; n];
            let conj = (0..n).map(Some).collect();
            Self::new(names, kinds, conj).expect("graph space is well formed")
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn kind(&self, i: usize) -> VarKind {
        self.kinds[i]
    }

    pub fn conj_of(&self, i: usize) -> Option<usize> {
        self.conj[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// True when every variable has a conjugation partner.
    pub fn is_fully_paired(&self) -> bool {
        self.conj.iter().all(|c| c.is_some())
    }
}

/// Structural equality with a pointer fast path for shared spaces.
pub fn same_space(a: &Arc<VariableSpace>, b: &Arc<VariableSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubled_space_pairs_partners() {
        let s = VariableSpace::doubled(2, 1);
        assert_eq!(
            s.names(),
            &["z1", "z2", "~z1", "~z2", "w1", "~w1"]
        );
        assert_eq!(s.conj_of(0), Some(2));
        assert_eq!(s.conj_of(2), Some(0));
        assert_eq!(s.conj_of(4), Some(5));
        assert_eq!(s.kind(3), VarKind::Antiholomorphic);
        assert!(s.is_fully_paired());
    }

    #[test]
    fn jet_space_is_unpaired_holomorphic() {
        let s = VariableSpace::holomorphic_jet(1, 1);
        assert_eq!(s.names(), &["z1", "w1"]);
        assert_eq!(s.conj_of(0), None);
        assert!(!s.is_fully_paired());
    }

    #[test]
    fn real_spaces_fix_every_variable() {
        let s = VariableSpace::real_coords(1, 1);
        assert_eq!(s.names(), &["x1", "y1", "u1", "v1"]);
        for i in 0..s.len() {
            assert_eq!(s.conj_of(i), Some(i));
            assert_eq!(s.kind(i), VarKind::Real);
        }
        let g = VariableSpace::graph_coords(1, 2);
        assert_eq!(g.names(), &["x1", "y1", "u1", "u2"]);
    }

    #[test]
    fn rejects_broken_involutions() {
        let err = VariableSpace::new(
            vec!["a".into(), "b".into()],
            vec![VarKind::Holomorphic, VarKind::Antiholomorphic],
            vec![Some(1), Some(0)],
        );
        assert!(err.is_ok());
        let err = VariableSpace::new(
            vec!["a".into(), "b".into()],
            vec![VarKind::Holomorphic, VarKind::Holomorphic],
            vec![Some(1), Some(0)],
        );
        assert!(err.is_err());
        let err = VariableSpace::new(
            vec!["a".into()],
            vec![VarKind::Real],
            vec![None],
        );
        assert!(err.is_err());
    }
}
