//! Contextual views by exhaustive filtering over a manifest read as raw
//! JSON.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::Value;

#[derive(Debug, Clone)]
pub struct PlainManifest {
    /// activity → parent activity
    pub parent: HashMap<String, Option<String>>,
    /// object → (activity, concepts)
    pub objects: BTreeMap<String, (String, BTreeSet<String>)>,
    pub concepts: Vec<String>,
}

fn walk(node: &Value, parent: Option<&str>, out: &mut HashMap<String, Option<String>>) {
    let id = node["id"].as_str().expect("activity id");
    out.insert(id.to_string(), parent.map(str::to_string));
    if let Some(children) = node["children"].as_array() {
        for c in children {
            walk(c, Some(id), out);
        }
    }
}

impl PlainManifest {
    pub fn parse(doc: &str) -> Self {
        let v: Value = serde_json::from_str(doc).expect("manifest JSON");
        let mut parent = HashMap::new();
        match &v["activities"] {
            Value::Array(roots) => roots.iter().for_each(|r| walk(r, None, &mut parent)),
            root => walk(root, None, &mut parent),
        }
        let objects = v["objects"]
            .as_object()
            .expect("objects")
            .iter()
            .map(|(k, o)| {
                let concepts = o["concepts"]
                    .as_array()
                    .map(|a| a.iter().map(|c| c.as_str().unwrap().to_string()).collect())
                    .unwrap_or_default();
                (k.clone(), (o["activity"].as_str().unwrap().to_string(), concepts))
            })
            .collect();
        let concepts = v["concepts"]
            .as_array()
            .expect("concepts")
            .iter()
            .map(|c| c.as_str().unwrap().to_string())
            .collect();
        PlainManifest {
            parent,
            objects,
            concepts,
        }
    }

    pub fn activities(&self) -> Vec<String> {
        let mut a: Vec<String> = self.parent.keys().cloned().collect();
        a.sort();
        a
    }

    /// Is `activity` equal to or below `ancestor`?
    pub fn under(&self, activity: &str, ancestor: &str) -> bool {
        let mut cur = Some(activity.to_string());
        while let Some(a) = cur {
            if a == ancestor {
                return true;
            }
            cur = self.parent.get(&a).cloned().flatten();
        }
        false
    }
}

#[derive(Debug, Clone, Default)]
pub struct PlainAttachment {
    pub activity: Option<String>,
    pub concepts: BTreeSet<String>,
}

/// Every message id (ascending) whose attachment satisfies the tab rule.
pub fn view(
    manifest: &PlainManifest,
    attachments: &BTreeMap<u64, PlainAttachment>,
    messages: &[u64],
    object: &str,
    activity_tab: bool,
) -> Vec<u64> {
    let (obj_activity, obj_concepts) = &manifest.objects[object];
    let mut out: Vec<u64> = messages
        .iter()
        .copied()
        .filter(|m| match attachments.get(m) {
            None => false,
            Some(a) if activity_tab => a
                .activity
                .as_deref()
                .is_some_and(|act| manifest.under(act, obj_activity)),
            Some(a) => a.concepts.iter().any(|c| obj_concepts.contains(c)),
        })
        .collect();
    out.sort_unstable();
    out
}
