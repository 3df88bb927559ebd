//! HTTP clients for the real backends: an OpenAI-compatible chat endpoint
//! and a Stable Diffusion web-UI style txt2img endpoint.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use taleweaver_core::gateway::{PromptBundle, ProviderError};
use taleweaver_core::imagery::{ImageError, ImagePrompt, SegmentationHint};
use taleweaver_core::{ChatProvider, ImageService, Raster};

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into()
}

fn endpoint(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path)
}

/// `POST {base_url}/chat/completions`.
pub struct OpenAiChat {
    base_url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl OpenAiChat {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        Self { base_url: base_url.into(), api_key, agent: agent(timeout) }
    }
}

#[derive(Deserialize)]
struct Completions {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

fn transport(e: ureq::Error) -> ProviderError {
    match e {
        ureq::Error::Timeout(_) => ProviderError::Timeout,
        other => ProviderError::Transport(other.to_string()),
    }
}

impl ChatProvider for OpenAiChat {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ProviderError> {
        let body = json!({
            "model": bundle.params.model,
            "messages": bundle.messages,
            "temperature": bundle.params.temperature,
            "max_tokens": bundle.params.max_tokens,
        });
        let mut request = self.agent.post(endpoint(&self.base_url, "chat/completions"));
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = request.send_json(&body).map_err(transport)?;
        let parsed: Completions = response.body_mut().read_json().map_err(transport)?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ProviderError::Transport("response has no choices[0].message.content".into()))
    }
}

/// `POST {base_url}/sdapi/v1/txt2img` with the segmentation hint attached.
pub struct SdImageService {
    base_url: String,
    agent: ureq::Agent,
}

impl SdImageService {
    pub fn new(base_url: impl Into<String>, timeout: Duration) -> Self {
        Self { base_url: base_url.into(), agent: agent(timeout) }
    }
}

#[derive(Deserialize)]
struct Txt2Img {
    #[serde(default)]
    images: Vec<String>,
    #[serde(default)]
    image: Option<String>,
}

fn image_err(e: ureq::Error) -> ImageError {
    match e {
        ureq::Error::Timeout(_) => ImageError::Timeout,
        other => ImageError::Service(other.to_string()),
    }
}

impl ImageService for SdImageService {
    fn generate(&self, prompt: &ImagePrompt, hint: &SegmentationHint) -> Result<Raster, ImageError> {
        let body = json!({
            "prompt": prompt.positive,
            "negative_prompt": prompt.negative,
            "seed": prompt.seed,
            "width": prompt.size.0,
            "height": prompt.size.1,
            "controlnet": {"module": "segmentation", "image": hint.raster.to_base64_png()?},
        });
        let mut response =
            self.agent.post(endpoint(&self.base_url, "sdapi/v1/txt2img")).send_json(&body).map_err(image_err)?;
        let parsed: Txt2Img = response.body_mut().read_json().map_err(image_err)?;
        let encoded = parsed
            .images
            .into_iter()
            .next()
            .or(parsed.image)
            .ok_or_else(|| ImageError::Service("response carries no image".into()))?;
        // some servers prefix a data URL
        let encoded = encoded.rsplit(',').next().unwrap_or(&encoded);
        Ok(Raster::from_base64_png(encoded)?)
    }
}
