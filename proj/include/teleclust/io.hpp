#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "teleclust/layers.hpp"
#include "teleclust/partition.hpp"

namespace teleclust {

/// Writes to a temporary sibling and renames it over the target.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);
/// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string digest_hex(std::string_view bytes);
/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Observations plus optional ground truth and provenance.
struct Dataset {
  LayerStack data;
  /// One partition per layer, or empty when unknown.
  std::vector<Partition> truth;
  std::string scenario;
  std::uint64_t seed = 0;
  nlohmann::json parameters = nlohmann::json::object();
};

/// Directory layout: data.csv (header row, wide format), truth.csv (optional,
/// one row per layer) and manifest.json mapping columns to layers.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset read_dataset(const std::string& dir);

/// Reads a plain CSV of observations whose header names columns; every
/// column is one coordinate of `layer_of_column` (0-based layer per column).
LayerStack read_wide_csv(const std::string& path, const std::vector<int>& layer_of_column, const std::vector<std::string>& layer_names);

/// Writes an n x m matrix as CSV with the given header (may be empty).
std::string matrix_to_csv(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& header);

}  // namespace teleclust
