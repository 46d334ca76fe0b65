#include "tagbench/text_template.hpp"

#include "tagbench/error.hpp"

namespace tagbench {

using nlohmann::json;

struct TextTemplate::Node {
  enum class Kind { text, variable, section, inverted };
  Kind kind;
  std::string value;  // literal text or tag name
  std::vector<Node> children;
};

namespace {

using Node = TextTemplate::Node;

std::string_view trim_tag(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

struct Parser {
  std::string_view source;
  const std::string& name;
  std::size_t pos = 0;

  std::vector<Node> parse(std::string_view closing) {
    std::vector<Node> nodes;
    while (pos < source.size()) {
      const auto open = source.find("{{", pos);
      if (open == std::string_view::npos) {
        nodes.push_back({Node::Kind::text, std::string(source.substr(pos)), {}});
        pos = source.size();
        break;
      }
      if (open > pos) nodes.push_back({Node::Kind::text, std::string(source.substr(pos, open - pos)), {}});
      const auto close = source.find("}}", open + 2);
      if (close == std::string_view::npos) throw TemplateError(name + ": unterminated tag");
      std::string_view tag = trim_tag(source.substr(open + 2, close - open - 2));
      pos = close + 2;
      if (tag.empty()) throw TemplateError(name + ": empty tag");
      const char sigil = tag.front();
      if (sigil == '/') {
        auto tag_name = trim_tag(tag.substr(1));
        if (tag_name != closing) {
          throw TemplateError(name + ": unexpected closing tag '" + std::string(tag_name) + "'");
        }
        return nodes;
      }
      if (sigil == '#' || sigil == '^') {
        auto tag_name = std::string(trim_tag(tag.substr(1)));
        Node section{sigil == '#' ? Node::Kind::section : Node::Kind::inverted, tag_name, {}};
        section.children = parse(tag_name);
        nodes.push_back(std::move(section));
        continue;
      }
      nodes.push_back({Node::Kind::variable, std::string(tag), {}});
    }
    if (!closing.empty()) throw TemplateError(name + ": section '" + std::string(closing) + "' is never closed");
    return nodes;
  }
};

bool truthy(const json& v) {
  if (v.is_null()) return false;
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) return !v.get_ref<const std::string&>().empty();
  if (v.is_array() || v.is_object()) return !v.empty();
  return true;
}

struct Renderer {
  const std::string& name;
  std::vector<const json*> stack;
  std::string out;

  const json* lookup(const std::string& key) const {
    if (key == ".") return stack.back();
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      const json& scope = **it;
      if (!scope.is_object()) continue;
      auto found = scope.find(key);
      if (found != scope.end()) return &*found;
    }
    return nullptr;
  }

  void emit(const json& v, const std::string& key) {
    if (v.is_string()) {
      out += v.get_ref<const std::string&>();
    } else if (v.is_number_integer() || v.is_number_unsigned()) {
      out += v.dump();
    } else if (v.is_number_float()) {
      out += v.dump();
    } else if (v.is_boolean()) {
      out += v.get<bool>() ? "true" : "false";
    } else if (!v.is_null()) {
      throw TemplateError(name + ": '" + key + "' is not a scalar");
    }
  }

  void render(const std::vector<Node>& nodes) {
    for (const auto& node : nodes) {
      switch (node.kind) {
        case Node::Kind::text:
          out += node.value;
          break;
        case Node::Kind::variable: {
          const json* v = lookup(node.value);
          if (!v) throw TemplateError(name + ": undefined variable '" + node.value + "'");
          emit(*v, node.value);
          break;
        }
        case Node::Kind::section: {
          const json* v = lookup(node.value);
          if (!v || !truthy(*v)) break;
          if (v->is_array()) {
            for (const auto& item : *v) {
              stack.push_back(&item);
              render(node.children);
              stack.pop_back();
            }
          } else if (v->is_object()) {
            stack.push_back(v);
            render(node.children);
            stack.pop_back();
          } else {
            render(node.children);
          }
          break;
        }
        case Node::Kind::inverted: {
          const json* v = lookup(node.value);
          if (!v || !truthy(*v)) render(node.children);
          break;
        }
      }
    }
  }
};

}  // namespace

TextTemplate TextTemplate::compile(std::string_view source, std::string name) {
  TextTemplate t;
  Parser parser{source, name};
  t.nodes_ = std::make_shared<const std::vector<Node>>(parser.parse(""));
  t.name_ = std::move(name);
  return t;
}

std::string TextTemplate::render(const json& context) const {
  Renderer r{name_, {&context}, {}};
  r.render(*nodes_);
  return std::move(r.out);
}

}  // namespace tagbench
