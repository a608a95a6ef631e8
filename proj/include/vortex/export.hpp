#pragma once

// Shared helpers for the text and binary artefacts written by the toolkit.

#include <filesystem>
#include <string>
#include <string_view>

namespace vortex {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// Writes content to a temporary sibling file and renames it over path, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace vortex
