//! Map-definition files: a JSON document mirroring the node tree, versioned
//! with `"schema": "mapnode/1"`. Load/store round-trips are loss-free (JSON
//! floats are emitted with shortest round-trip decimal representation).

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{CircleMap, MapNode};

pub const MAP_SCHEMA: &str = "mapnode/1";

#[derive(Serialize, Deserialize)]
pub struct MapFile {
    pub schema: String,
    pub critical: f64,
    pub root: Arc<MapNode>,
}

pub fn to_map_file(map: &CircleMap) -> MapFile {
    MapFile {
        schema: MAP_SCHEMA.to_string(),
        critical: map.critical,
        root: map.root.clone(),
    }
}

pub fn save_map(map: &CircleMap, path: &Path) -> Result<()> {
    let file = to_map_file(map);
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_map(path: &Path) -> Result<CircleMap> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text)
}

pub fn from_json(text: &str) -> Result<CircleMap> {
    let file: MapFile = serde_json::from_str(text)?;
    if file.schema != MAP_SCHEMA {
        return Err(Error::Invalid(format!(
            "unsupported map schema {:?}, expected {MAP_SCHEMA:?}",
            file.schema
        )));
    }
    Ok(CircleMap::new(file.root, file.critical))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_lossless() {
        let omega = 0.606_661_063_469_342_2_f64;
        let bump = MapNode::bump(0.125, 0.017, 1.3e-7).unwrap();
        let map = CircleMap::new(
            MapNode::compose(vec![bump, MapNode::sine(omega, 1.0)]),
            0.0,
        );
        let text = serde_json::to_string(&to_map_file(&map)).unwrap();
        assert!(text.contains("\"schema\":\"mapnode/1\""));
        assert!(text.contains("sine-family"));
        let back = from_json(&text).unwrap();
        // bit-identical evaluation after the round trip
        for x in [0.0, 0.1, 0.127, 0.99] {
            assert_eq!(
                map.root.eval_jet(x).unwrap(),
                back.root.eval_jet(x).unwrap()
            );
        }
    }

    #[test]
    fn rejects_unknown_schema() {
        let text = r#"{"schema":"mapnode/9","critical":0.0,"root":{"kind":"affine","a":1.0,"b":0.5}}"#;
        assert!(from_json(text).is_err());
    }
}
