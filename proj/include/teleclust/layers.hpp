#pragma once

#include <span>
#include <string>
#include <vector>

namespace teleclust {

/// Observations of all n subjects at one layer, row-major n x dim. A layer of
/// dimension 0 carries no data (its likelihood is identically one).
struct Layer {
  std::string name;
  int dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::vector<double> column(int d) const;
};

class LayerStack {
 public:
  LayerStack() = default;
  explicit LayerStack(std::size_t n) : n_(n) {}

  /// Layers with no data, for prior simulation.
  static LayerStack empty(std::size_t n, int num_layers);

  std::size_t num_subjects() const { return n_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const Layer& layer(int l) const { return layers_[static_cast<std::size_t>(l)]; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<int> dims() const;

  /// Appends a layer; values must hold n * dim finite numbers.
  void add_layer(Layer layer);

 private:
  std::size_t n_ = 0;
  std::vector<Layer> layers_;
};

/// Directed layer dependence: parent[l] is -1 for the unique root.
class Polytree {
 public:
  Polytree() = default;
  explicit Polytree(std::vector<int> parent);

  /// Markov chain 0 -> 1 -> ... -> L-1.
  static Polytree chain(int num_layers);

  int num_layers() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  int parent(int l) const { return parent_[static_cast<std::size_t>(l)]; }
  const std::vector<int>& parents() const { return parent_; }
  const std::vector<int>& children(int l) const { return children_[static_cast<std::size_t>(l)]; }
  /// Parents precede children.
  const std::vector<int>& topological_order() const { return order_; }

 private:
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<int> order_;
  int root_ = 0;
};

}  // namespace teleclust
