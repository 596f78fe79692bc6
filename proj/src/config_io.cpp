#include "evp/config_io.hpp"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "evp/image_io.hpp"

namespace evp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("missing '=' on line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw FormatError("empty key on line " + std::to_string(lineno));
    kv.entries_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw FormatError("missing key: " + key);
  return it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
  try {
    size_t pos = 0;
    const std::string v = get_string(key);
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::invalid_argument&) {
    throw FormatError("not a number for key: " + key);
  }
}

double KeyValueFile::get_double(const std::string& key,
                                double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueFile::get_int(const std::string& key) const {
  const double d = get_double(key);
  const int i = static_cast<int>(std::lround(d));
  if (std::abs(d - i) > 1e-12)
    throw FormatError("not an integer for key: " + key);
  return i;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

void KeyValueFile::set(const std::string& key, double value) {
  entries_[key] = format_double(value);
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

void KeyValueFile::save(const std::string& path) const {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp);
    if (!out) throw FormatError("cannot open for write: " + path);
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
    if (!out) throw FormatError("write failed: " + path);
  }
  fs::rename(tmp, path);
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

Intrinsics read_intrinsics(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  return Intrinsics(kv.get_double("fx"), kv.get_double("fy"),
                    kv.get_double("cx"), kv.get_double("cy"),
                    kv.get_int("width"), kv.get_int("height"));
}

void write_intrinsics(const std::string& path, const Intrinsics& K) {
  KeyValueFile kv;
  kv.set("fx", K.fx);
  kv.set("fy", K.fy);
  kv.set("cx", K.cx);
  kv.set("cy", K.cy);
  kv.set("width", static_cast<double>(K.width));
  kv.set("height", static_cast<double>(K.height));
  kv.save(path);
}

LossWeights read_loss_weights(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  LossWeights w;
  w.lambda_st = kv.get_double("lambda_st", w.lambda_st);
  w.lambda_ms = kv.get_double("lambda_ms", w.lambda_ms);
  w.lambda_vis = kv.get_double("lambda_vis", w.lambda_vis);
  w.lambda_dne = kv.get_double("lambda_dne", w.lambda_dne);
  w.lambda_vs = kv.get_double("lambda_vs", w.lambda_vs);
  w.beta = kv.get_double("beta", w.beta);
  w.alpha = kv.get_double("alpha", w.alpha);
  w.n_scales = kv.get_int("n_scales", w.n_scales);
  w.validate();
  return w;
}

void write_loss_weights(const std::string& path, const LossWeights& w) {
  KeyValueFile kv;
  kv.set("lambda_st", w.lambda_st);
  kv.set("lambda_ms", w.lambda_ms);
  kv.set("lambda_vis", w.lambda_vis);
  kv.set("lambda_dne", w.lambda_dne);
  kv.set("lambda_vs", w.lambda_vs);
  kv.set("beta", w.beta);
  kv.set("alpha", w.alpha);
  kv.set("n_scales", static_cast<double>(w.n_scales));
  kv.save(path);
}

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& kv) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp);
    if (!out) throw FormatError("cannot open for write: " + path);
    out << "evp_report_version = 1\n";
    for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
    if (!out) throw FormatError("write failed: " + path);
  }
  fs::rename(tmp, path);
}

}  // namespace evp
