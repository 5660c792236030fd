#pragma once

#include <filesystem>
#include <string>

namespace annosim {

// Writes content to a temp file in the target directory, then renames it
// over the destination. Readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

// Shortest round-trip decimal representation (std::to_chars). The same
// double always yields the same bytes, which the deterministic-output
// contracts rely on.
std::string format_double(double value);

std::string csv_escape(const std::string& field);

}  // namespace annosim
