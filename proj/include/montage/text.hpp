#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 and file helpers shared by the text-facing modules.
namespace montage::text {

bool is_valid_utf8(std::string_view bytes) noexcept;
std::string latin1_to_utf8(std::string_view bytes);

/// Decodes the code point starting at `pos` and advances `pos`. Invalid
/// sequences decode as U+FFFD and consume one byte.
char32_t next_code_point(std::string_view s, std::size_t& pos) noexcept;
void append_utf8(std::string& out, char32_t cp);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split_whitespace(std::string_view s);
/// Lowercases ASCII letters only; other bytes pass through unchanged.
std::string ascii_lower(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace montage::text
