// Plain-text key=value configuration files and structured report output.

#ifndef EVP_CONFIG_IO_HPP
#define EVP_CONFIG_IO_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evp/geometry.hpp"
#include "evp/losses.hpp"

namespace evp {

/// key = value file with '#' comments. Unknown keys are preserved.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::string& path);
  static KeyValueFile parse(const std::string& text);

  bool has(const std::string& key) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key) const;

  void set(const std::string& key, double value);
  void set(const std::string& key, const std::string& value);
  void save(const std::string& path) const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
};

Intrinsics read_intrinsics(const std::string& path);
void write_intrinsics(const std::string& path, const Intrinsics& K);

LossWeights read_loss_weights(const std::string& path);
void write_loss_weights(const std::string& path, const LossWeights& w);

/// Structured key/value report. First line carries the schema version.
void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& kv);
std::string format_double(double v);

}  // namespace evp

#endif  // EVP_CONFIG_IO_HPP
