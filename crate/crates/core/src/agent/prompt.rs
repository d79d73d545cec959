//! Prompt templates for the analyst and supervisor passes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::DatasetMetadata;

/// Placeholders resolvable in prompt templates.
pub const PROMPT_PLACEHOLDERS: [&str; 4] = ["dataset_name", "subdirectory_path", "question", "packages"];

pub const DEFAULT_ANALYSIS_TEMPLATE: &str = r#"You are an expert data scientist tasked with analyzing a dataset to answer a specific research question.
The research question is contained in the `info.json' file along with metadata about the dataset.
Use the metadata from `info.json' to understand the dataset structure and context.
The dataset itself is provided in the `{dataset_name}.csv' file.
You only have access to the `{subdirectory_path}' subdirectory and its contents - no other files or directories.
Create a data analysis that answers the research question.
You are allowed to import packages that are listed in the provided `packages.txt' file (along with their installed versions) to help with your analysis.
When executing Python scripts, ALWAYS use the command `poetry run python <filename.py>'. Never use `python' or `python3' directly.
Your data analysis should result in two outputs:
(1) an integer scalar that places your "Yes" or "No" response on a Likert scale from 0 to 100,
where 0 represents a strong "No" answer and 100 represents a strong "Yes" answer, and
(2) an explanation of the reasoning and evidence that led you to your conclusion.
When asked if a relationship between two variables exist, follow best practices taking into account
statistical significance when determining the Yes/No answer as well as its strength on the Likert scale.
For example, two variables which lack evidence of a relationship (though consistent statistical significance) should receive a "No" answer
with a scale value reflecting the lack of such evidence, while relationships that are consistently statistically significant
should receive "Yes" answers with scale values reflecting the strength of their relationship.
These outputs must be written to a file called `conclusion.txt' in JSON format, with the integer scalar stored under the key "response" and the explanation stored under the key "explanation".
The `conclusion.txt' file must contain ONLY this JSON object, with no additional text or lines.

Research question (as stored in `info.json'):
{question}
"#;

pub const DEFAULT_CONFIDENCE_TEMPLATE: &str = r#"You are an expert data scientist tasked with reviewing an analysis of a dataset to answer a specific research question.
The research question is contained in the `info.json' file along with metadata about the dataset, which is itself provided in the `{dataset_name}.csv' file.
You only have access to the `{subdirectory_path}' subdirectory and its contents - no other files or directories.
Your task is to evaluate your confidence in the conclusion of the analysis, which is contained in the `conclusion.txt' file in the subdirectory.
The `conclusion.txt' file contains two pieces of information: (1) the "response", an integer scalar that represents the analyst's answer on a Likert scale from 0 to 100, where 0 represents a strong "No" answer and 100 represents a strong "Yes" answer,
and (2) the "explanation", a text string that provides the analyst's reasoning and evidence that led them to their conclusion.
You are NOT to run any analyses of your own to evaluate the confidence of the conclusion.
Your task is only to evaluate the confidence of the conclusion based on your knowledge of data science and the information provided in the subdirectory, including the conclusion itself.
This confidence must be an integer from 0 to 100, where the number represents:
- If you were to reconduct this analysis 100 times with slightly different reasonable decisions in the data science pipeline, how many times would you expect to get an answer more positive (larger on the Likert scale) than the seen in the conclusion?
Your confidence must be written to a file called `confidence.txt' in JSON format, with the integer scalar stored under the key "confidence" and your explanation stored under the key "explanation".
The `confidence.txt' file must contain ONLY this JSON object, with no additional text or lines.
"#;

/// User-overridable prompt templates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplates {
    pub analysis: String,
    pub confidence: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            analysis: DEFAULT_ANALYSIS_TEMPLATE.to_owned(),
            confidence: DEFAULT_CONFIDENCE_TEMPLATE.to_owned(),
        }
    }
}

/// Names of every `{identifier}` token in `template`.
pub fn placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) => {
                let name = &after[..end];
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    out.push(name.to_owned());
                }
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    out
}

/// Substitute `{name}` tokens; any token without a value is an error.
pub fn render_template(template: &str, values: &[(&str, &str)]) -> Result<String> {
    let unresolved: Vec<String> = placeholders(template)
        .into_iter()
        .filter(|p| !values.iter().any(|(k, _)| k == p))
        .collect();
    if !unresolved.is_empty() {
        let mut uniq = unresolved;
        uniq.dedup();
        return Err(Error::UnresolvedPlaceholders(uniq));
    }
    let mut out = template.to_owned();
    for (k, v) in values {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    Ok(out)
}

pub fn render_analysis_prompt(
    template: &str,
    metadata: &DatasetMetadata,
    dataset_name: &str,
    workspace_path: &str,
    packages_note: &str,
) -> Result<String> {
    render_template(
        template,
        &[
            ("dataset_name", dataset_name),
            ("subdirectory_path", workspace_path),
            ("question", &metadata.question),
            ("packages", packages_note),
        ],
    )
}

pub fn render_confidence_prompt(
    template: &str,
    metadata: &DatasetMetadata,
    dataset_name: &str,
    workspace_path: &str,
) -> Result<String> {
    render_template(
        template,
        &[
            ("dataset_name", dataset_name),
            ("subdirectory_path", workspace_path),
            ("question", &metadata.question),
            ("packages", ""),
        ],
    )
}
