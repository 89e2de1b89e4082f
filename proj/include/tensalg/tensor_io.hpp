#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

#include "tensalg/tensor.hpp"

namespace tensalg {

/// Text tensor format:
///
///   tensorfile 1
///   space X 3
///   space Y 4
///   indices x^,y_
///   data
///   <components, canonical row-major, whitespace separated>
///
/// Blank lines and lines starting with '#' are ignored before `data`.

/// Reads a tensor, building the registry from the file's space lines. When
/// `expected` is given the file must declare exactly those spaces and the
/// result uses `expected`.
DenseTensor read_tensor(const std::filesystem::path& path, const RegistryPtr& expected = nullptr);
DenseTensor parse_tensor(std::istream& in, std::string_view source, const RegistryPtr& expected = nullptr);

/// Text form with 17 significant digits, one row of the last axis per line.
std::string format_tensor(const DenseTensor& t);
void write_tensor(const std::filesystem::path& path, const DenseTensor& t);

/// Writes `content` to a sibling temporary file, then renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

/// 17 significant digits, enough to read back the same double.
std::string format_double(double v);

}  // namespace tensalg
