use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Entity categories annotated in the corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    Material,
    Process,
}

impl EntityType {
    pub const ALL: [EntityType; 2] = [EntityType::Material, EntityType::Process];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Material => "material",
            EntityType::Process => "process",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the five IOB labels. Discriminants are the tag ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    BMaterial = 0,
    IMaterial = 1,
    BProcess = 2,
    IProcess = 3,
    O = 4,
}

impl Tag {
    pub const ALL: [Tag; 5] = [
        Tag::BMaterial,
        Tag::IMaterial,
        Tag::BProcess,
        Tag::IProcess,
        Tag::O,
    ];

    /// Label written into padded positions.
    pub const PADDING: Tag = Tag::O;

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Tag> {
        Tag::ALL.get(id).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::BMaterial => "B-material",
            Tag::IMaterial => "I-material",
            Tag::BProcess => "B-process",
            Tag::IProcess => "I-process",
            Tag::O => "O",
        }
    }

    pub fn begin(ty: EntityType) -> Tag {
        match ty {
            EntityType::Material => Tag::BMaterial,
            EntityType::Process => Tag::BProcess,
        }
    }

    pub fn inside(ty: EntityType) -> Tag {
        match ty {
            EntityType::Material => Tag::IMaterial,
            EntityType::Process => Tag::IProcess,
        }
    }

    pub fn entity_type(self) -> Option<EntityType> {
        match self {
            Tag::BMaterial | Tag::IMaterial => Some(EntityType::Material),
            Tag::BProcess | Tag::IProcess => Some(EntityType::Process),
            Tag::O => None,
        }
    }

    pub fn is_begin(self) -> bool {
        matches!(self, Tag::BMaterial | Tag::BProcess)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown tag {0:?}")]
pub struct UnknownTag(pub String);

impl FromStr for Tag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownTag(s.to_string()))
    }
}

/// Bidirectional tag/id mapping. The label inventory is fixed; the type exists
/// so that a serialized model can be checked against the labels it was trained on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagSet {
    tags: Vec<Tag>,
}

impl Default for TagSet {
    fn default() -> Self {
        TagSet {
            tags: Tag::ALL.to_vec(),
        }
    }
}

impl TagSet {
    pub fn standard() -> Self {
        Self::default()
    }

    /// Rebuilds a tag set from its names in id order; must name exactly the five
    /// standard labels in standard order.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, String> {
        let parsed: Vec<Tag> = names
            .iter()
            .map(|n| n.as_ref().parse::<Tag>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        if parsed != Tag::ALL {
            return Err(format!(
                "tag set {:?} differs from expected {:?}",
                names.iter().map(|n| n.as_ref()).collect::<Vec<_>>(),
                Tag::ALL.iter().map(|t| t.as_str()).collect::<Vec<_>>()
            ));
        }
        Ok(TagSet { tags: parsed })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn id(&self, tag: Tag) -> usize {
        tag.id()
    }

    pub fn tag(&self, id: usize) -> Option<Tag> {
        self.tags.get(id).copied()
    }

    pub fn padding_id(&self) -> usize {
        Tag::PADDING.id()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.tags.iter().map(|t| t.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense() {
        let ts = TagSet::standard();
        assert_eq!(ts.len(), 5);
        for (i, t) in Tag::ALL.iter().enumerate() {
            assert_eq!(ts.id(*t), i);
            assert_eq!(ts.tag(i), Some(*t));
            assert_eq!(t.as_str().parse::<Tag>().unwrap(), *t);
        }
        assert_eq!(ts.padding_id(), Tag::O.id());
    }

    #[test]
    fn unknown_tag_rejected() {
        assert!("B-alloy".parse::<Tag>().is_err());
        assert!("b-material".parse::<Tag>().is_err());
    }

    #[test]
    fn from_names_checks_order() {
        let names: Vec<_> = Tag::ALL.iter().map(|t| t.as_str()).collect();
        assert!(TagSet::from_names(&names).is_ok());
        let mut swapped = names.clone();
        swapped.swap(0, 1);
        assert!(TagSet::from_names(&swapped).is_err());
    }
}
