#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "teleclust/partition.hpp"

namespace teleclust {

struct TraceMeta {
  std::string model;
  std::uint64_t seed = 0;
  int chain = 0;
  long iterations = 0;
  long burn_in = 0;
  long thin = 1;
  std::size_t num_subjects = 0;
  std::vector<int> parents;
  std::vector<std::string> hyper_names;
  /// Model configuration that produced the run, for replay.
  nlohmann::json config = nlohmann::json::object();
};

struct Draw {
  long iteration = 0;
  std::vector<Partition> layers;
  std::vector<double> hyper;
};

class Trace {
 public:
  Trace() = default;
  explicit Trace(TraceMeta meta) : meta_(std::move(meta)) {}

  const TraceMeta& meta() const { return meta_; }
  TraceMeta& meta() { return meta_; }
  const std::vector<Draw>& draws() const { return draws_; }
  std::size_t size() const { return draws_.size(); }
  bool empty() const { return draws_.empty(); }
  int num_layers() const { return static_cast<int>(meta_.parents.size()); }

  /// Appends a draw; partitions must already be canonical and match the
  /// metadata shape.
  void append(Draw draw);

  std::vector<Partition> layer(int l) const;
  std::vector<double> hyper(const std::string& name) const;

  /// Concatenation of traces with identical shape; metadata of the first.
  static Trace merge(const std::vector<Trace>& traces);

  /// Writes <stem>.csv (iteration,layer,s0..) and <stem>.json.
  void write(const std::string& dir, const std::string& stem) const;
  static Trace read(const std::string& csv_path, const std::string& json_path);

  std::string labels_csv() const;
  nlohmann::json sidecar() const;

 private:
  TraceMeta meta_;
  std::vector<Draw> draws_;
};

}  // namespace teleclust
