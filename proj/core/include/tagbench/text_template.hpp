#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tagbench {

// Minimal logic-less templates:
//   {{name}}            value lookup through the section stack (innermost first)
//   {{#name}}..{{/name}} repeated per array element, entered once for any other
//                       truthy value, skipped for null/false/""/[]/{}
//   {{^name}}..{{/name}} rendered only when name is falsy
// No escaping, no partials, and whitespace is never trimmed. Referencing a
// variable that no enclosing scope defines is an error.
class TextTemplate {
 public:
  // Throws TemplateError on unbalanced or malformed tags.
  static TextTemplate compile(std::string_view source, std::string name = "<template>");

  std::string render(const nlohmann::json& context) const;

  const std::string& name() const { return name_; }

  struct Node;

 private:
  std::string name_;
  std::shared_ptr<const std::vector<Node>> nodes_;
};

}  // namespace tagbench
