//! Providers that log what they were asked (live side) and answer from the
//! log (replay side).

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use taleweaver_core::gateway::{PromptBundle, ProviderError};
use taleweaver_core::ChatProvider;

use crate::transcript::{Purpose, RecordKind};

/// Wraps a provider and keeps one `ProviderExchange` per call.
pub struct RecordingProvider<'a> {
    inner: &'a dyn ChatProvider,
    purpose: Purpose,
    log: Mutex<Vec<RecordKind>>,
}

impl<'a> RecordingProvider<'a> {
    pub fn new(inner: &'a dyn ChatProvider, purpose: Purpose) -> Self {
        Self { inner, purpose, log: Mutex::new(Vec::new()) }
    }

    pub fn into_records(self) -> Vec<RecordKind> {
        self.log.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl ChatProvider for RecordingProvider<'_> {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ProviderError> {
        let result = self.inner.complete(bundle);
        let (reply, error) = match &result {
            Ok(r) => (Some(r.clone()), None),
            Err(e) => (None, Some(e.clone())),
        };
        let record = RecordKind::ProviderExchange { purpose: self.purpose, request_hash: bundle.digest(), reply, error };
        self.log.lock().unwrap_or_else(|e| e.into_inner()).push(record);
        result
    }
}

/// One recorded exchange: the request digest and what came back.
#[derive(Debug, Clone)]
pub struct Exchange {
    pub request_hash: String,
    pub result: Result<String, ProviderError>,
}

/// Serves recorded replies in order and checks every request against its
/// recorded digest.
#[derive(Debug)]
pub struct ReplayProvider {
    queue: Mutex<VecDeque<Exchange>>,
    fault: Mutex<Option<String>>,
    faulted: AtomicBool,
}

impl ReplayProvider {
    pub fn new(exchanges: impl IntoIterator<Item = Exchange>) -> Self {
        Self { queue: Mutex::new(exchanges.into_iter().collect()), fault: Mutex::new(None), faulted: AtomicBool::new(false) }
    }

    /// The first divergence seen, or leftover exchanges that were never asked for.
    pub fn finish(self) -> Result<(), String> {
        if let Some(f) = self.fault.into_inner().unwrap_or_else(|e| e.into_inner()) {
            return Err(f);
        }
        let left = self.queue.into_inner().unwrap_or_else(|e| e.into_inner()).len();
        if left > 0 {
            return Err(format!("{left} recorded exchange(s) were not consumed"));
        }
        Ok(())
    }

    fn fail(&self, reason: String) -> ProviderError {
        if !self.faulted.swap(true, Ordering::SeqCst) {
            *self.fault.lock().unwrap_or_else(|e| e.into_inner()) = Some(reason.clone());
        }
        ProviderError::Transport(reason)
    }
}

impl ChatProvider for ReplayProvider {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ProviderError> {
        let next = self.queue.lock().unwrap_or_else(|e| e.into_inner()).pop_front();
        match next {
            None => Err(self.fail("request beyond the recorded exchanges".into())),
            Some(ex) if ex.request_hash != bundle.digest() => {
                Err(self.fail(format!("request hash {} differs from recorded {}", bundle.digest(), ex.request_hash)))
            }
            Some(ex) => ex.result,
        }
    }
}
