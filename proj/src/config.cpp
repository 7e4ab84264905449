#include "wingbench/config.hpp"

#include "wingbench/csv_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wingbench {

void WorkbenchConfig::validate() const {
  geometry.validate();
  if (variants.empty()) throw std::invalid_argument("config: no variants listed");
  if (n_rows.size() != variants.size())
    throw std::invalid_argument("config: n_rows must parallel variants");
  if (!seeds.empty() && seeds.size() != variants.size())
    throw std::invalid_argument("config: seeds must parallel variants");
  for (long long n : n_rows)
    if (n < 0) throw std::invalid_argument("config: negative row count");
  if (!(noise_rel >= 0.0)) throw std::invalid_argument("config: negative noise");
  for (int c : configs)
    if (c < 1 || c > 8) throw std::invalid_argument("config: configuration id outside 1..8");
  if (configs.empty()) throw std::invalid_argument("config: no configurations listed");
  if (algos.empty()) throw std::invalid_argument("config: no algorithms listed");
  if (repeats < 1) throw std::invalid_argument("config: repeats must be positive");
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw std::invalid_argument("config: split_fraction outside (0, 1)");
  if (!(pca_threshold > 0.0 && pca_threshold <= 1.0))
    throw std::invalid_argument("config: pca_threshold outside (0, 1]");
  if (k < 0) throw std::invalid_argument("config: k must be non-negative");
  if (k == 0 && k_range.size() < 3)
    throw std::invalid_argument("config: k_range needs at least 3 values for the elbow scan");
}

namespace {

struct Value {
  enum class Kind { Number, String, NumberArray, StringArray } kind;
  std::string token;                // Number: raw text, so integers stay exact
  std::string str;
  std::vector<std::string> tokens;  // NumberArray
  std::vector<std::string> strs;
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& tok, int lineno) {
  double x = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad number '" +
                                tok + "'");
  return x;
}

Value parse_value(const std::string& raw, int lineno) {
  Value v;
  if (raw.empty())
    throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unterminated string");
    v.kind = Value::Kind::String;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']')
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unterminated array");
    const std::string body = trim(std::string_view(raw).substr(1, raw.size() - 2));
    v.kind = Value::Kind::NumberArray;
    if (body.empty()) return v;
    std::size_t start = 0;
    while (start <= body.size()) {
      const std::size_t comma = body.find(',', start);
      const std::string item =
          trim(std::string_view(body).substr(start, comma == std::string::npos
                                                        ? std::string::npos
                                                        : comma - start));
      if (item.empty())
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": empty array element");
      if (item.front() == '"') {
        v.kind = Value::Kind::StringArray;
        if (item.size() < 2 || item.back() != '"')
          throw std::invalid_argument("config line " + std::to_string(lineno) +
                                      ": unterminated string");
        v.strs.push_back(item.substr(1, item.size() - 2));
      } else {
        parse_number(item, lineno);  // syntax check
        v.tokens.push_back(item);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!v.strs.empty() && !v.tokens.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": mixed array types");
    return v;
  }
  v.kind = Value::Kind::Number;
  parse_number(raw, lineno);  // syntax check
  v.token = raw;
  return v;
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

template <typename T>
T to_integer_token(const std::string& tok, const std::string& key) {
  T x{};
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (res.ec == std::errc() && res.ptr == tok.data() + tok.size()) return x;
  // tolerate scientific notation for whole numbers
  const double d = parse_number(tok, 0);
  const T cast = static_cast<T>(d);
  if (static_cast<double>(cast) != d)
    throw std::invalid_argument("config: " + key + " must be a whole number, got '" + tok + "'");
  return cast;
}

template <typename T>
std::vector<T> to_int_vector(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::NumberArray)
    throw std::invalid_argument("config: " + key + " must be an array of numbers");
  std::vector<T> out;
  out.reserve(v.tokens.size());
  for (const auto& tok : v.tokens) out.push_back(to_integer_token<T>(tok, key));
  return out;
}

double to_number(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::Number)
    throw std::invalid_argument("config: " + key + " must be a number");
  return parse_number(v.token, 0);
}

template <typename T>
T to_integer(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::Number)
    throw std::invalid_argument("config: " + key + " must be a number");
  return to_integer_token<T>(v.token, key);
}

std::string to_string_value(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::String)
    throw std::invalid_argument("config: " + key + " must be a quoted string");
  return v.str;
}

}  // namespace

WorkbenchConfig parse_workbench_config(const std::string& text) {
  WorkbenchConfig cfg;
  std::istringstream in(text);
  std::string line, block;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(strip_comment(line));
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated block header");
      block = trim(std::string_view(stripped).substr(1, stripped.size() - 2));
      if (block != "geometry" && block != "dataset" && block != "experiment" &&
          block != "paths")
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unknown block [" + block + "]");
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const Value val = parse_value(trim(std::string_view(stripped).substr(eq + 1)), lineno);
    const std::string qual = block + "." + key;

    if (block == "geometry") {
      auto& g = cfg.geometry;
      if (key == "span_L") g.span_L = to_number(val, qual);
      else if (key == "chord_root_Co") g.chord_root_Co = to_number(val, qual);
      else if (key == "chord_tip_Ct") g.chord_tip_Ct = to_number(val, qual);
      else if (key == "tank_Lf") g.tank_Lf = to_number(val, qual);
      else if (key == "tank_Ctf") g.tank_Ctf = to_number(val, qual);
      else if (key == "tank_Cof") g.tank_Cof = to_number(val, qual);
      else if (key == "box_height_root") g.box_height_root = to_number(val, qual);
      else if (key == "box_height_tip") g.box_height_tip = to_number(val, qual);
      else if (key == "sigma_max") g.sigma_max = to_number(val, qual);
      else if (key == "rho") g.rho = to_number(val, qual);
      else if (key == "cover_weight_fraction") g.cover_weight_fraction = to_number(val, qual);
      else throw std::invalid_argument("config: unknown key " + qual);
    } else if (block == "dataset") {
      if (key == "variants") cfg.variants = to_int_vector<int>(val, qual);
      else if (key == "n_rows") cfg.n_rows = to_int_vector<long long>(val, qual);
      else if (key == "seeds") cfg.seeds = to_int_vector<uint64_t>(val, qual);
      else if (key == "seed") cfg.seed = to_integer<uint64_t>(val, qual);
      else if (key == "noise_rel") cfg.noise_rel = to_number(val, qual);
      else throw std::invalid_argument("config: unknown key " + qual);
    } else if (block == "experiment") {
      if (key == "configs") cfg.configs = to_int_vector<int>(val, qual);
      else if (key == "algos") {
        if (val.kind != Value::Kind::StringArray)
          throw std::invalid_argument("config: " + qual + " must be an array of strings");
        cfg.algos.clear();
        for (const auto& s : val.strs) cfg.algos.push_back(algo_from_string(s));
      }
      else if (key == "repeats") cfg.repeats = to_integer<int>(val, qual);
      else if (key == "split_fraction") cfg.split_fraction = to_number(val, qual);
      else if (key == "pca_threshold") cfg.pca_threshold = to_number(val, qual);
      else if (key == "k") cfg.k = to_integer<int>(val, qual);
      else if (key == "k_range") cfg.k_range = to_int_vector<int>(val, qual);
      else throw std::invalid_argument("config: unknown key " + qual);
    } else if (block == "paths") {
      if (key == "data_dir") cfg.data_dir = to_string_value(val, qual);
      else if (key == "model_dir") cfg.model_dir = to_string_value(val, qual);
      else if (key == "report_dir") cfg.report_dir = to_string_value(val, qual);
      else throw std::invalid_argument("config: unknown key " + qual);
    } else {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key outside any block");
    }
  }
  cfg.validate();
  return cfg;
}

WorkbenchConfig load_workbench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_workbench_config(ss.str());
}

std::string serialize_workbench_config(const WorkbenchConfig& cfg) {
  std::ostringstream out;
  auto num_array = [](const auto& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(xs[i]);
    }
    return s + "]";
  };

  const auto& g = cfg.geometry;
  out << "[geometry]\n";
  out << "span_L = " << format_double(g.span_L) << '\n';
  out << "chord_root_Co = " << format_double(g.chord_root_Co) << '\n';
  out << "chord_tip_Ct = " << format_double(g.chord_tip_Ct) << '\n';
  out << "tank_Lf = " << format_double(g.tank_Lf) << '\n';
  out << "tank_Ctf = " << format_double(g.tank_Ctf) << '\n';
  out << "tank_Cof = " << format_double(g.tank_Cof) << '\n';
  out << "box_height_root = " << format_double(g.box_height_root) << '\n';
  out << "box_height_tip = " << format_double(g.box_height_tip) << '\n';
  out << "sigma_max = " << format_double(g.sigma_max) << '\n';
  out << "rho = " << format_double(g.rho) << '\n';
  out << "cover_weight_fraction = " << format_double(g.cover_weight_fraction) << '\n';

  out << "\n[dataset]\n";
  out << "variants = " << num_array(cfg.variants) << '\n';
  out << "n_rows = " << num_array(cfg.n_rows) << '\n';
  if (!cfg.seeds.empty()) out << "seeds = " << num_array(cfg.seeds) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "noise_rel = " << format_double(cfg.noise_rel) << '\n';

  out << "\n[experiment]\n";
  out << "configs = " << num_array(cfg.configs) << '\n';
  out << "algos = [";
  for (std::size_t i = 0; i < cfg.algos.size(); ++i) {
    if (i) out << ", ";
    out << '"' << to_string(cfg.algos[i]) << '"';
  }
  out << "]\n";
  out << "repeats = " << cfg.repeats << '\n';
  out << "split_fraction = " << format_double(cfg.split_fraction) << '\n';
  out << "pca_threshold = " << format_double(cfg.pca_threshold) << '\n';
  out << "k = " << cfg.k << '\n';
  out << "k_range = " << num_array(cfg.k_range) << '\n';

  out << "\n[paths]\n";
  out << "data_dir = \"" << cfg.data_dir << "\"\n";
  out << "model_dir = \"" << cfg.model_dir << "\"\n";
  out << "report_dir = \"" << cfg.report_dir << "\"\n";
  return out.str();
}

}  // namespace wingbench
