#include "teleclust/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "teleclust/error.hpp"

namespace teleclust {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t end = line.find(',', pos);
    std::string_view cell = line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    out.push_back(cell);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

double parse_double(std::string_view cell, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw IoError(where + ": invalid number '" + std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

void write_file_atomic(const std::string& path, std::string_view content) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + target.parent_path().string() + "': " + ec.message());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string digest_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

void write_dataset(const Dataset& ds, const std::string& dir) {
  const LayerStack& data = ds.data;
  const std::size_t n = data.num_subjects();

  std::string csv;
  std::vector<std::string> header;
  json layers = json::array();
  for (int l = 0; l < data.num_layers(); ++l) {
    const Layer& layer = data.layer(l);
    json cols = json::array();
    for (int d = 0; d < layer.dim; ++d) {
      std::string col = layer.name + "_" + std::to_string(d + 1);
      header.push_back(col);
      cols.push_back(col);
    }
    layers.push_back({{"name", layer.name}, {"dim", layer.dim}, {"columns", cols}});
  }
  for (std::size_t c = 0; c < header.size(); ++c) csv += (c ? "," : "") + header[c];
  csv += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    bool first = true;
    for (int l = 0; l < data.num_layers(); ++l) {
      for (double v : data.layer(l).row(i)) {
        if (!first) csv += ',';
        csv += format_double(v);
        first = false;
      }
    }
    csv += '\n';
  }

  json manifest{{"format", "teleclust-dataset"},
                {"format_version", 1},
                {"generator", std::string("teleclust ") + TELECLUST_VERSION},
                {"scenario", ds.scenario},
                {"seed", ds.seed},
                {"n", n},
                {"layers", layers},
                {"parameters", ds.parameters}};
  json digests{{"data.csv", digest_hex(csv)}};

  if (!ds.truth.empty()) {
    if (static_cast<int>(ds.truth.size()) != data.num_layers()) {
      throw ValidationError("dataset: truth must hold one partition per layer");
    }
    std::string truth = "layer";
    for (std::size_t i = 0; i < n; ++i) truth += ",s" + std::to_string(i);
    truth += '\n';
    for (std::size_t l = 0; l < ds.truth.size(); ++l) {
      truth += std::to_string(l) + "," + to_csv_row(ds.truth[l]) + "\n";
    }
    digests["truth.csv"] = digest_hex(truth);
    write_file_atomic((fs::path(dir) / "truth.csv").string(), truth);
  }
  manifest["digests"] = digests;
  write_file_atomic((fs::path(dir) / "data.csv").string(), csv);
  write_file_atomic((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

LayerStack read_wide_csv(const std::string& path, const std::vector<int>& layer_of_column,
                         const std::vector<std::string>& layer_names) {
  const auto lines = lines_of(read_file(path));
  if (lines.empty()) throw IoError(path + ": empty file");
  const auto header = split_row(lines[0]);
  if (header.size() != layer_of_column.size()) {
    throw IoError(path + ": header has " + std::to_string(header.size()) + " columns, expected " +
                  std::to_string(layer_of_column.size()));
  }
  const std::size_t n = lines.size() - 1;
  const int num_layers = static_cast<int>(layer_names.size());
  std::vector<Layer> layers(static_cast<std::size_t>(num_layers));
  for (int l = 0; l < num_layers; ++l) layers[static_cast<std::size_t>(l)].name = layer_names[static_cast<std::size_t>(l)];
  for (int col : layer_of_column) {
    if (col < 0 || col >= num_layers) throw IoError(path + ": column mapped to unknown layer");
    ++layers[static_cast<std::size_t>(col)].dim;
  }
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_row(lines[r]);
    if (cells.size() != layer_of_column.size()) {
      throw IoError(path + ": row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) + " cells");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_double(cells[c], path + " row " + std::to_string(r + 1));
      layers[static_cast<std::size_t>(layer_of_column[c])].values.push_back(v);
    }
  }
  LayerStack stack(n);
  for (Layer& l : layers) stack.add_layer(std::move(l));
  return stack;
}

Dataset read_dataset(const std::string& dir) {
  const fs::path base(dir);
  json manifest;
  try {
    manifest = json::parse(read_file((base / "manifest.json").string()));
  } catch (const json::exception& e) {
    throw IoError("manifest.json: " + std::string(e.what()));
  }
  Dataset ds;
  try {
    ds.scenario = manifest.value("scenario", "");
    ds.seed = manifest.value("seed", std::uint64_t{0});
    ds.parameters = manifest.value("parameters", json::object());
    const json& layers = manifest.at("layers");
    std::map<std::string, int> column_layer;
    std::vector<std::string> names;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      names.push_back(layers[l].at("name").get<std::string>());
      for (const json& c : layers[l].at("columns")) column_layer[c.get<std::string>()] = static_cast<int>(l);
    }
    const auto lines = lines_of(read_file((base / "data.csv").string()));
    if (lines.empty()) throw IoError("data.csv: empty file");
    std::vector<int> mapping;
    for (std::string_view h : split_row(lines[0])) {
      auto it = column_layer.find(std::string(h));
      if (it == column_layer.end()) throw IoError("data.csv: column '" + std::string(h) + "' is not listed in manifest.json");
      mapping.push_back(it->second);
    }
    ds.data = read_wide_csv((base / "data.csv").string(), mapping, names);
    if (manifest.contains("n") && manifest.at("n").get<std::size_t>() != ds.data.num_subjects()) {
      throw IoError("data.csv: row count disagrees with manifest.json");
    }
  } catch (const json::exception& e) {
    throw IoError("manifest.json: " + std::string(e.what()));
  }
  const fs::path truth_path = base / "truth.csv";
  if (fs::exists(truth_path)) {
    const auto lines = lines_of(read_file(truth_path.string()));
    for (std::size_t r = 1; r < lines.size(); ++r) {
      const std::size_t comma = lines[r].find(',');
      if (comma == std::string::npos) throw IoError("truth.csv: malformed row " + std::to_string(r + 1));
      ds.truth.push_back(partition_from_csv_row(std::string_view(lines[r]).substr(comma + 1)));
    }
    if (static_cast<int>(ds.truth.size()) != ds.data.num_layers()) {
      throw IoError("truth.csv: expected one row per layer");
    }
    for (const Partition& p : ds.truth) {
      if (p.size() != ds.data.num_subjects()) throw IoError("truth.csv: row length disagrees with data.csv");
    }
  }
  return ds;
}

std::string matrix_to_csv(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  if (!header.empty()) out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_double(row[c]);
    out += '\n';
  }
  return out;
}

}  // namespace teleclust
