//! Config-driven data stories: parameterized queries per section, composed
//! into a document and rendered as HTML or JSON.

mod compose;
mod config;
mod executor;
mod render;

pub use self::compose::{
    compose_story, execute_section, Cell, ProvenanceEntry, SectionPayload, StoryDocument, StoryError,
    StorySection, EMPTY_NOTICE, MAP_NOTICE,
};
pub use self::config::{
    bind_object, load_story_config, load_story_config_file, ConfigMismatch, Endpoint, SectionSpec,
    StoryConfig, StoryConfigError, StoryConfigErrorKind, ViewKind, OBJECT_PLACEHOLDER,
};
pub use self::executor::{EndpointClient, ExecError, LocalExecutor, QueryExecutor, MAX_GET_QUERY_LEN};
pub use self::render::{
    contrast_ratio, relative_luminance, render_html, render_json, story_link, THEME, VIEWER_SCRIPT,
};
