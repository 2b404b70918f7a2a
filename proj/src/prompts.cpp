#include "tama/prompts.hpp"

#include <fstream>
#include <sstream>

#include "tama/error.hpp"

namespace tama {
namespace {

std::string read_or(const std::filesystem::path& path, const std::string& fallback) {
  if (!std::filesystem::exists(path)) return fallback;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read prompt template " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

PromptSet load_prompts(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir.string());
  const auto& builtin = builtin_prompts();
  return {read_or(dir / "reference.txt", builtin.reference), read_or(dir / "analyze.txt", builtin.analyze),
          read_or(dir / "reflect.txt", builtin.reflect)};
}

std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t pos = 0;
  while (true) {
    const auto open = tpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      return out;
    }
    const auto close = tpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw ConfigError("unterminated template slot");
    const std::string name(tpl.substr(open + 2, close - open - 2));
    const auto it = values.find(name);
    if (it == values.end()) throw ConfigError("template slot '" + name + "' has no value");
    out.append(tpl.substr(pos, open - pos));
    out.append(it->second);
    pos = close + 2;
  }
}

}  // namespace tama
