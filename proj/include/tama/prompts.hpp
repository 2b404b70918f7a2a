#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace tama {

/// Templates for the three model-facing stages. Slots are written
/// {{name}}; see fill_template.
struct PromptSet {
  std::string reference;
  std::string analyze;
  std::string reflect;
};

/// Templates compiled in from assets/prompts.
[[nodiscard]] const PromptSet& builtin_prompts();

/// Reads reference.txt, analyze.txt and reflect.txt from `dir`. A missing
/// file falls back to the built-in template.
[[nodiscard]] PromptSet load_prompts(const std::filesystem::path& dir);

/// Replaces each {{name}} with values.at(name). Substituted text is not
/// rescanned. Throws ConfigError for an unknown or unterminated slot.
[[nodiscard]] std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values);

}  // namespace tama
