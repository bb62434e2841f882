#include "teleclust/layers.hpp"

#include <cmath>

#include "teleclust/error.hpp"

namespace teleclust {

std::vector<double> Layer::column(int d) const {
  const std::size_t n = dim == 0 ? 0 : values.size() / static_cast<std::size_t>(dim);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = values[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)];
  return out;
}

LayerStack LayerStack::empty(std::size_t n, int num_layers) {
  LayerStack stack(n);
  for (int l = 0; l < num_layers; ++l) stack.add_layer(Layer{"layer" + std::to_string(l + 1), 0, {}});
  return stack;
}

std::vector<int> LayerStack::dims() const {
  std::vector<int> out;
  for (const Layer& l : layers_) out.push_back(l.dim);
  return out;
}

void LayerStack::add_layer(Layer layer) {
  if (layer.dim < 0) throw ValidationError("layer '" + layer.name + "': negative dimension");
  if (layer.values.size() != n_ * static_cast<std::size_t>(layer.dim)) {
    throw ValidationError("layer '" + layer.name + "': expected " + std::to_string(n_) + " rows of dimension " +
                          std::to_string(layer.dim));
  }
  for (double v : layer.values) {
    if (!std::isfinite(v)) throw ValidationError("layer '" + layer.name + "': non-finite observation");
  }
  layers_.push_back(std::move(layer));
}

Polytree::Polytree(std::vector<int> parent) : parent_(std::move(parent)) {
  const int num = static_cast<int>(parent_.size());
  if (num == 0) throw ValidationError("polytree: no layers");
  int roots = 0;
  children_.assign(parent_.size(), {});
  for (int l = 0; l < num; ++l) {
    const int p = parent_[static_cast<std::size_t>(l)];
    if (p == -1) {
      ++roots;
      root_ = l;
    } else if (p < 0 || p >= num || p == l) {
      throw ValidationError("polytree: layer " + std::to_string(l) + " has invalid parent " + std::to_string(p));
    } else {
      children_[static_cast<std::size_t>(p)].push_back(l);
    }
  }
  if (roots != 1) throw ValidationError("polytree: exactly one layer must have no parent (found " + std::to_string(roots) + ")");
  // Breadth-first from the root; layers never reached sit on a cycle.
  order_.push_back(root_);
  for (std::size_t head = 0; head < order_.size(); ++head) {
    for (int c : children_[static_cast<std::size_t>(order_[head])]) order_.push_back(c);
  }
  if (static_cast<int>(order_.size()) != num) throw ValidationError("polytree: parent relation contains a cycle");
}

Polytree Polytree::chain(int num_layers) {
  std::vector<int> parent(static_cast<std::size_t>(num_layers));
  for (int l = 0; l < num_layers; ++l) parent[static_cast<std::size_t>(l)] = l - 1;
  return Polytree(std::move(parent));
}

}  // namespace teleclust
