#include "wingbench/csv_io.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace wingbench {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view tok, const std::string& path, std::size_t line) {
  double x = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw std::runtime_error(path + ":" + std::to_string(line) + ": bad number '" +
                             std::string(tok) + "'");
  return x;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string column_name(const char* prefix, int i) {
  std::string s(prefix);
  if (i < 10) s += '0';
  s += std::to_string(i);
  return s;
}

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& ds,
                       const std::vector<int>* labels) {
  if (labels && static_cast<Eigen::Index>(labels->size()) != ds.rows())
    throw std::invalid_argument("write_dataset_csv: label count mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  for (int j = 1; j <= kNumFeatures; ++j) {
    if (j > 1) out << ',';
    out << column_name("f", j);
  }
  for (int j = 1; j <= kNumStations; ++j) out << ',' << column_name("y", j);
  if (labels) out << ",cluster";
  out << '\n';

  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(ds.features(i, j));
    }
    for (Eigen::Index j = 0; j < ds.outputs.cols(); ++j)
      out << ',' << format_double(ds.outputs(i, j));
    if (labels) out << ',' << (*labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path, std::vector<int>* labels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv(line);
  const std::size_t base = kNumFeatures + kNumStations;
  bool has_cluster = false;
  if (header.size() == base + 1 && header.back() == "cluster")
    has_cluster = true;
  else if (header.size() != base)
    throw std::runtime_error(path + ": unexpected column count " +
                             std::to_string(header.size()));
  for (int j = 0; j < kNumFeatures; ++j)
    if (header[static_cast<std::size_t>(j)] != column_name("f", j + 1))
      throw std::runtime_error(path + ": unexpected header column '" +
                               std::string(header[static_cast<std::size_t>(j)]) + "'");
  for (int j = 0; j < kNumStations; ++j)
    if (header[static_cast<std::size_t>(kNumFeatures + j)] != column_name("y", j + 1))
      throw std::runtime_error(path + ": unexpected header column '" +
                               std::string(header[static_cast<std::size_t>(kNumFeatures + j)]) +
                               "'");

  std::vector<double> flat;
  std::vector<int> labs;
  std::size_t n = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto toks = split_csv(line);
    if (toks.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(toks.size()));
    for (std::size_t j = 0; j < base; ++j)
      flat.push_back(parse_double(toks[j], path, lineno));
    if (has_cluster)
      labs.push_back(static_cast<int>(parse_double(toks[base], path, lineno)));
    ++n;
  }
  if (n == 0) throw std::runtime_error(path + ": no data rows");

  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), kNumFeatures);
  ds.outputs.resize(static_cast<Eigen::Index>(n), kNumStations);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < kNumFeatures; ++j)
      ds.features(static_cast<Eigen::Index>(i), j) = flat[i * base + static_cast<std::size_t>(j)];
    for (int j = 0; j < kNumStations; ++j)
      ds.outputs(static_cast<Eigen::Index>(i), j) =
          flat[i * base + kNumFeatures + static_cast<std::size_t>(j)];
  }
  ds.case_kind.assign(n, CaseKind::Gust);
  if (labels) {
    if (!has_cluster)
      throw std::runtime_error(path + ": no cluster column (run the cluster step first)");
    *labels = std::move(labs);
  }
  return ds;
}

namespace {

nlohmann::json geometry_to_json(const WingGeometry& g) {
  return {{"span_L", g.span_L},
          {"chord_root_Co", g.chord_root_Co},
          {"chord_tip_Ct", g.chord_tip_Ct},
          {"tank_Lf", g.tank_Lf},
          {"tank_Ctf", g.tank_Ctf},
          {"tank_Cof", g.tank_Cof},
          {"box_height_root", g.box_height_root},
          {"box_height_tip", g.box_height_tip},
          {"sigma_max", g.sigma_max},
          {"rho", g.rho},
          {"cover_weight_fraction", g.cover_weight_fraction}};
}

WingGeometry geometry_from_json(const nlohmann::json& j) {
  WingGeometry g;
  g.span_L = j.at("span_L").get<double>();
  g.chord_root_Co = j.at("chord_root_Co").get<double>();
  g.chord_tip_Ct = j.at("chord_tip_Ct").get<double>();
  g.tank_Lf = j.at("tank_Lf").get<double>();
  g.tank_Ctf = j.at("tank_Ctf").get<double>();
  g.tank_Cof = j.at("tank_Cof").get<double>();
  g.box_height_root = j.at("box_height_root").get<double>();
  g.box_height_tip = j.at("box_height_tip").get<double>();
  g.sigma_max = j.at("sigma_max").get<double>();
  g.rho = j.at("rho").get<double>();
  g.cover_weight_fraction = j.at("cover_weight_fraction").get<double>();
  return g;
}

}  // namespace

void write_dataset_metadata(const std::string& path, const Dataset& ds, uint64_t seed,
                            const WingGeometry& geometry) {
  nlohmann::json j;
  j["stations"] = std::vector<double>(ds.stations.data(), ds.stations.data() + ds.stations.size());
  j["mtow_tons"] = ds.mtow_tons;
  j["seed"] = seed;
  j["geometry"] = geometry_to_json(geometry);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

DatasetMetadata read_dataset_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  DatasetMetadata md;
  const auto st = j.at("stations").get<std::vector<double>>();
  md.stations = Eigen::Map<const Vec>(st.data(), static_cast<Eigen::Index>(st.size()));
  md.mtow_tons = j.at("mtow_tons").get<int>();
  md.seed = j.at("seed").get<uint64_t>();
  md.geometry = geometry_from_json(j.at("geometry"));
  return md;
}

}  // namespace wingbench
