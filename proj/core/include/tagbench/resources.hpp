#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace tagbench {

// Files under core/templates and core/data compiled into the library,
// addressed by their relative path ("templates/zero_shot.txt").
std::optional<std::string_view> embedded_resource(std::string_view name);
std::vector<std::string_view> embedded_resource_names();

}  // namespace tagbench
