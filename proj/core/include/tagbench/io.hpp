#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace tagbench {

// Calls fn(line, 1-based line number) for every line; strips a trailing '\r'.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view bytes);

// UTC now as 2026-01-31T12:00:00Z.
std::string iso8601_now();

}  // namespace tagbench
