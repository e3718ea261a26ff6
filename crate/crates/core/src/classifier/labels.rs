use std::collections::HashMap;

use crate::error::{Error, Result};

/// Bijection between distinct training messages and class ids, assigned in
/// order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelCodec {
    messages: Vec<String>,
    ids: HashMap<String, usize>,
}

impl LabelCodec {
    pub fn fit<S: AsRef<str>>(train_messages: &[S]) -> Result<Self> {
        if train_messages.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut codec = LabelCodec {
            messages: Vec::new(),
            ids: HashMap::new(),
        };
        for m in train_messages {
            codec.insert(m.as_ref());
        }
        Ok(codec)
    }

    fn insert(&mut self, msg: &str) -> usize {
        if let Some(&id) = self.ids.get(msg) {
            return id;
        }
        let id = self.messages.len();
        self.messages.push(msg.to_owned());
        self.ids.insert(msg.to_owned(), id);
        id
    }

    pub(crate) fn from_messages(messages: Vec<String>) -> Result<Self> {
        let codec = LabelCodec::fit(&messages)?;
        if codec.class_count() != messages.len() {
            return Err(Error::format("label table", "duplicate message"));
        }
        Ok(codec)
    }

    pub fn class_count(&self) -> usize {
        self.messages.len()
    }

    pub fn id(&self, msg: &str) -> Option<usize> {
        self.ids.get(msg).copied()
    }

    pub fn message(&self, id: usize) -> Option<&str> {
        self.messages.get(id).map(String::as_str)
    }

    pub fn messages(&self) -> &[String] {
        &self.messages
    }

    /// Class ids of `msgs`; fails on a message the codec has not seen.
    pub fn encode<S: AsRef<str>>(&self, msgs: &[S]) -> Result<Vec<usize>> {
        msgs.iter()
            .map(|m| {
                self.id(m.as_ref())
                    .ok_or_else(|| Error::format("label", format!("unknown message `{}`", m.as_ref())))
            })
            .collect()
    }
}
