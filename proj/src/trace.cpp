#include "teleclust/trace.hpp"

#include <filesystem>
#include <sstream>

#include "teleclust/error.hpp"
#include "teleclust/io.hpp"

namespace teleclust {

using nlohmann::json;

void Trace::append(Draw draw) {
  if (static_cast<int>(draw.layers.size()) != num_layers()) throw ValidationError("trace: draw has the wrong number of layers");
  for (const Partition& p : draw.layers) {
    if (p.size() != meta_.num_subjects) throw ValidationError("trace: draw has the wrong number of subjects");
  }
  if (draw.hyper.size() != meta_.hyper_names.size()) throw ValidationError("trace: draw has the wrong number of hyperparameters");
  draws_.push_back(std::move(draw));
}

std::vector<Partition> Trace::layer(int l) const {
  if (l < 0 || l >= num_layers()) throw ValidationError("trace: layer index out of range");
  std::vector<Partition> out;
  out.reserve(draws_.size());
  for (const Draw& d : draws_) out.push_back(d.layers[static_cast<std::size_t>(l)]);
  return out;
}

std::vector<double> Trace::hyper(const std::string& name) const {
  for (std::size_t k = 0; k < meta_.hyper_names.size(); ++k) {
    if (meta_.hyper_names[k] != name) continue;
    std::vector<double> out;
    out.reserve(draws_.size());
    for (const Draw& d : draws_) out.push_back(d.hyper[k]);
    return out;
  }
  throw ValidationError("trace: no hyperparameter named '" + name + "'");
}

Trace Trace::merge(const std::vector<Trace>& traces) {
  if (traces.empty()) throw ValidationError("trace merge: no traces");
  Trace out(traces.front().meta());
  out.meta_.chain = -1;
  for (const Trace& t : traces) {
    if (t.meta().num_subjects != out.meta_.num_subjects || t.meta().parents != out.meta_.parents ||
        t.meta().hyper_names != out.meta_.hyper_names) {
      throw ValidationError("trace merge: traces have different shapes");
    }
    out.draws_.insert(out.draws_.end(), t.draws_.begin(), t.draws_.end());
  }
  return out;
}

std::string Trace::labels_csv() const {
  std::string out = "iteration,layer";
  for (std::size_t i = 0; i < meta_.num_subjects; ++i) out += ",s" + std::to_string(i);
  out += '\n';
  for (const Draw& d : draws_) {
    for (std::size_t l = 0; l < d.layers.size(); ++l) {
      out += std::to_string(d.iteration) + "," + std::to_string(l) + "," + to_csv_row(d.layers[l]) + "\n";
    }
  }
  return out;
}

json Trace::sidecar() const {
  json hyper = json::object();
  for (std::size_t k = 0; k < meta_.hyper_names.size(); ++k) {
    json col = json::array();
    for (const Draw& d : draws_) col.push_back(d.hyper[k]);
    hyper[meta_.hyper_names[k]] = col;
  }
  json iterations = json::array();
  for (const Draw& d : draws_) iterations.push_back(d.iteration);
  return json{{"format", "teleclust-trace"},
              {"format_version", 1},
              {"generator", std::string("teleclust ") + TELECLUST_VERSION},
              {"model", meta_.model},
              {"seed", meta_.seed},
              {"chain", meta_.chain},
              {"iterations", meta_.iterations},
              {"burn_in", meta_.burn_in},
              {"thin", meta_.thin},
              {"n", meta_.num_subjects},
              {"parents", meta_.parents},
              {"retained", draws_.size()},
              {"draw_iterations", iterations},
              {"hyper_names", meta_.hyper_names},
              {"hyperparameters", hyper},
              {"config", meta_.config}};
}

void Trace::write(const std::string& dir, const std::string& stem) const {
  namespace fs = std::filesystem;
  const std::string csv = labels_csv();
  json side = sidecar();
  side["labels_digest"] = digest_hex(csv);
  write_file_atomic((fs::path(dir) / (stem + ".csv")).string(), csv);
  write_file_atomic((fs::path(dir) / (stem + ".json")).string(), side.dump(2) + "\n");
}

Trace Trace::read(const std::string& csv_path, const std::string& json_path) {
  json side;
  try {
    side = json::parse(read_file(json_path));
  } catch (const json::exception& e) {
    throw IoError(json_path + ": " + e.what());
  }
  TraceMeta meta;
  std::vector<long> iterations;
  std::vector<std::vector<double>> columns;
  try {
    if (side.value("format", "") != "teleclust-trace") throw IoError(json_path + ": not a trace sidecar");
    meta.model = side.at("model").get<std::string>();
    meta.seed = side.at("seed").get<std::uint64_t>();
    meta.chain = side.at("chain").get<int>();
    meta.iterations = side.at("iterations").get<long>();
    meta.burn_in = side.at("burn_in").get<long>();
    meta.thin = side.at("thin").get<long>();
    meta.num_subjects = side.at("n").get<std::size_t>();
    meta.parents = side.at("parents").get<std::vector<int>>();
    meta.config = side.value("config", json::object());
    iterations = side.at("draw_iterations").get<std::vector<long>>();
    meta.hyper_names = side.at("hyper_names").get<std::vector<std::string>>();
    for (const std::string& name : meta.hyper_names) {
      columns.push_back(side.at("hyperparameters").at(name).get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw IoError(json_path + ": " + e.what());
  }

  Trace trace(meta);
  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw IoError(csv_path + ": empty file");
  const std::size_t num_layers = meta.parents.size();
  std::size_t row = 1;
  Draw current;
  std::size_t draw_index = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw IoError(csv_path + ": malformed row " + std::to_string(row));
    long iteration = 0;
    std::size_t layer = 0;
    try {
      iteration = std::stol(line.substr(0, c1));
      layer = static_cast<std::size_t>(std::stoul(line.substr(c1 + 1, c2 - c1 - 1)));
    } catch (const std::exception&) {
      throw IoError(csv_path + ": malformed row " + std::to_string(row));
    }
    if (layer != current.layers.size()) throw IoError(csv_path + ": layers out of order at row " + std::to_string(row));
    current.iteration = iteration;
    current.layers.push_back(partition_from_csv_row(std::string_view(line).substr(c2 + 1)));
    if (current.layers.size() == num_layers) {
      if (draw_index >= iterations.size() || iterations[draw_index] != iteration) {
        throw IoError(csv_path + ": draw at row " + std::to_string(row) + " does not match the sidecar");
      }
      for (const auto& col : columns) {
        if (draw_index >= col.size()) throw IoError(json_path + ": hyperparameter column too short");
        current.hyper.push_back(col[draw_index]);
      }
      trace.append(std::move(current));
      current = Draw{};
      ++draw_index;
    }
  }
  if (!current.layers.empty()) throw IoError(csv_path + ": truncated final draw");
  if (draw_index != iterations.size()) throw IoError(csv_path + ": fewer draws than the sidecar lists");
  return trace;
}

}  // namespace teleclust
