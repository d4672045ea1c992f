//! Absolute move strings for structures.
//!
//! Cubic and square moves are single letters: `F`/`B` along ±x, `L`/`R`
//! along ±y, `U`/`D` along ±z (cubic only). FCC moves are two letters, the
//! sum of two such unit moves on different axes, e.g. `FL` = (1,1,0) and
//! `LU` = (0,1,1). Side-chain structures put each residue's side-chain move
//! in parentheses at the residue's position: `(L)F(R)F(U)` is a three
//! residue chain whose side chains point +y, -y and +z.

use thiserror::Error;

use crate::lattice::{LatticeKind, Point};
use crate::model::{
    validate_structure, BackboneStructure, HpSequence, Monomer, ModelKind, SideChainStructure, Structure,
    ValidationReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("unknown move `{token}` at character {position}")]
    UnknownMove { position: usize, token: String },
    #[error("unbalanced or misplaced parenthesis at character {position}")]
    Parenthesis { position: usize },
    #[error("missing side-chain move for residue {residue}")]
    MissingSideChain { residue: usize },
    #[error("invalid structure: {0}")]
    Invalid(ValidationReport),
}

const AXES: [(char, Point); 6] = [
    ('F', Point::new(1, 0, 0)),
    ('B', Point::new(-1, 0, 0)),
    ('L', Point::new(0, 1, 0)),
    ('R', Point::new(0, -1, 0)),
    ('U', Point::new(0, 0, 1)),
    ('D', Point::new(0, 0, -1)),
];

fn unit(c: char) -> Option<Point> {
    AXES.iter().find(|(l, _)| *l == c).map(|&(_, v)| v)
}

/// The move token for a neighbour vector.
pub fn move_token(v: Point, lattice: LatticeKind) -> Option<String> {
    if !lattice.lattice().neighbor_vectors().contains(&v) {
        return None;
    }
    match lattice {
        LatticeKind::Cubic | LatticeKind::Sqr => AXES.iter().find(|(_, u)| *u == v).map(|(c, _)| c.to_string()),
        LatticeKind::Fcc => {
            let mut out = String::new();
            for (c, u) in AXES {
                let along = u.x * v.x + u.y * v.y + u.z * v.z;
                if along == 1 {
                    out.push(c);
                }
            }
            Some(out)
        }
    }
}

fn token_vector(token: &str, lattice: LatticeKind) -> Option<Point> {
    let chars: Vec<char> = token.chars().collect();
    let v = match (lattice, chars.as_slice()) {
        (LatticeKind::Cubic | LatticeKind::Sqr, [c]) => unit(*c)?,
        (LatticeKind::Fcc, [a, b]) => unit(*a)? + unit(*b)?,
        _ => return None,
    };
    // Rejects tokens such as `FB` or `LF` whose canonical spelling differs.
    let canonical = move_token(v, lattice)?;
    (canonical == token).then_some(v)
}

fn token_len(lattice: LatticeKind) -> usize {
    match lattice {
        LatticeKind::Fcc => 2,
        _ => 1,
    }
}

fn moves(points: &[Point], lattice: LatticeKind) -> Result<Vec<String>, CodecError> {
    points
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            move_token(w[1] - w[0], lattice).ok_or(CodecError::Invalid(ValidationReport {
                violations: vec![crate::model::Violation::Connectivity { index: i }],
            }))
        })
        .collect()
}

/// Encodes a valid structure as a move string.
pub fn encode(structure: &Structure, lattice: LatticeKind) -> Result<String, CodecError> {
    let placeholder = HpSequence::from_monomers(vec![Monomer::P; structure.len()]);
    let report = validate_structure(&placeholder, structure, lattice.lattice());
    if !report.is_ok() {
        return Err(CodecError::Invalid(report));
    }
    match structure {
        Structure::Backbone(b) => Ok(moves(&b.points, lattice)?.concat()),
        Structure::SideChain(s) => {
            let backbone = moves(&s.backbone, lattice)?;
            let mut out = String::new();
            for i in 0..s.backbone.len() {
                let side = move_token(s.side_chains[i] - s.backbone[i], lattice)
                    .expect("validated side chains are attached");
                out.push('(');
                out.push_str(&side);
                out.push(')');
                if let Some(m) = backbone.get(i) {
                    out.push_str(m);
                }
            }
            Ok(out)
        }
    }
}

/// Decodes a move string starting at the origin and validates the result.
pub fn decode(text: &str, lattice: LatticeKind, model: ModelKind) -> Result<Structure, CodecError> {
    let chars: Vec<char> = text.chars().collect();
    let width = token_len(lattice);
    let mut backbone = vec![Point::ORIGIN];
    let mut sides: Vec<Option<Point>> = vec![None];
    let mut i = 0;
    while i < chars.len() {
        let position = i + 1;
        if chars[i] == '(' {
            if model != ModelKind::SideChain {
                return Err(CodecError::Parenthesis { position });
            }
            let close = chars[i + 1..].iter().position(|&c| c == ')').map(|p| p + i + 1);
            let Some(close) = close else {
                return Err(CodecError::Parenthesis { position });
            };
            let token: String = chars[i + 1..close].iter().collect();
            let v = token_vector(&token, lattice)
                .ok_or(CodecError::UnknownMove { position: position + 1, token: token.clone() })?;
            let last = sides.last_mut().expect("one slot per residue");
            if last.is_some() {
                return Err(CodecError::Parenthesis { position });
            }
            *last = Some(*backbone.last().expect("nonempty") + v);
            i = close + 1;
            continue;
        }
        if chars[i] == ')' {
            return Err(CodecError::Parenthesis { position });
        }
        let end = (i + width).min(chars.len());
        let token: String = chars[i..end].iter().collect();
        let v = token_vector(&token, lattice).ok_or(CodecError::UnknownMove { position, token })?;
        backbone.push(*backbone.last().expect("nonempty") + v);
        sides.push(None);
        i = end;
    }
    let structure = match model {
        ModelKind::Backbone => Structure::Backbone(BackboneStructure { points: backbone }),
        ModelKind::SideChain => {
            let side_chains = sides
                .iter()
                .enumerate()
                .map(|(r, s)| s.ok_or(CodecError::MissingSideChain { residue: r + 1 }))
                .collect::<Result<Vec<_>, _>>()?;
            Structure::SideChain(SideChainStructure { backbone, side_chains })
        }
    };
    let placeholder = HpSequence::from_monomers(vec![Monomer::P; structure.len()]);
    let report = validate_structure(&placeholder, &structure, lattice.lattice());
    if !report.is_ok() {
        return Err(CodecError::Invalid(report));
    }
    Ok(structure)
}

/// Translates a structure so its first backbone monomer is at the origin.
pub fn anchored(structure: &Structure) -> Structure {
    let shift = |pts: &[Point], o: Point| pts.iter().map(|&p| p - o).collect::<Vec<_>>();
    match structure {
        Structure::Backbone(b) => {
            let o = b.points.first().copied().unwrap_or(Point::ORIGIN);
            Structure::Backbone(BackboneStructure { points: shift(&b.points, o) })
        }
        Structure::SideChain(s) => {
            let o = s.backbone.first().copied().unwrap_or(Point::ORIGIN);
            Structure::SideChain(SideChainStructure {
                backbone: shift(&s.backbone, o),
                side_chains: shift(&s.side_chains, o),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i32, i32, i32)]) -> Vec<Point> {
        v.iter().map(|&(x, y, z)| Point::new(x, y, z)).collect()
    }

    #[test]
    fn encode_cubic() {
        let s = Structure::Backbone(BackboneStructure { points: pts(&[(0, 0, 0), (1, 0, 0), (1, 1, 0)]) });
        assert_eq!(encode(&s, LatticeKind::Cubic).unwrap(), "FL");
    }

    #[test]
    fn decode_examples() {
        assert_eq!(
            decode("FF", LatticeKind::Cubic, ModelKind::Backbone).unwrap(),
            Structure::Backbone(BackboneStructure { points: pts(&[(0, 0, 0), (1, 0, 0), (2, 0, 0)]) })
        );
        assert!(matches!(
            decode("FB", LatticeKind::Cubic, ModelKind::Backbone),
            Err(CodecError::Invalid(r)) if matches!(r.violations[0], crate::model::Violation::SelfAvoidance { .. })
        ));
        assert_eq!(
            decode("FLFR", LatticeKind::Fcc, ModelKind::Backbone).unwrap(),
            Structure::Backbone(BackboneStructure { points: pts(&[(0, 0, 0), (1, 1, 0), (2, 0, 0)]) })
        );
        assert_eq!(
            decode("FFQ", LatticeKind::Cubic, ModelKind::Backbone),
            Err(CodecError::UnknownMove { position: 3, token: "Q".into() })
        );
        assert!(matches!(decode("FU", LatticeKind::Sqr, ModelKind::Backbone), Err(CodecError::UnknownMove { position: 2, .. })));
        assert!(matches!(decode("LF", LatticeKind::Fcc, ModelKind::Backbone), Err(CodecError::UnknownMove { position: 1, .. })));
    }

    #[test]
    fn side_chain_round_trip() {
        let s = decode("(L)F(R)F(U)", LatticeKind::Cubic, ModelKind::SideChain).unwrap();
        let Structure::SideChain(sc) = &s else { panic!() };
        assert_eq!(sc.side_chains, pts(&[(0, 1, 0), (1, -1, 0), (2, 0, 1)]));
        assert_eq!(encode(&s, LatticeKind::Cubic).unwrap(), "(L)F(R)F(U)");
        assert_eq!(
            decode("(L)F", LatticeKind::Cubic, ModelKind::SideChain),
            Err(CodecError::MissingSideChain { residue: 2 })
        );
    }

    #[test]
    fn every_fcc_vector_has_a_token() {
        for &v in LatticeKind::Fcc.lattice().neighbor_vectors() {
            let t = move_token(v, LatticeKind::Fcc).unwrap();
            assert_eq!(token_vector(&t, LatticeKind::Fcc), Some(v));
        }
    }
}
