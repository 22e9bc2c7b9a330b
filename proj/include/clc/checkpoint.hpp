#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace clc {

// Flat named-entry container with a versioned binary file format. Doubles are
// stored as raw IEEE-754 bytes, so save/load round trips are bit-exact.
// Entries are kept sorted by name; identical content produces identical files.
class Checkpoint {
 public:
  void put_real(const std::string& name, double v) { reals_[name] = v; }
  void put_int(const std::string& name, std::int64_t v) { ints_[name] = v; }
  void put_vector(const std::string& name, Eigen::VectorXd v) {
    vectors_[name] = std::move(v);
  }
  void put_string(const std::string& name, std::string v) {
    strings_[name] = std::move(v);
  }

  bool has_real(const std::string& name) const { return reals_.count(name) > 0; }
  bool has_int(const std::string& name) const { return ints_.count(name) > 0; }
  bool has_vector(const std::string& name) const { return vectors_.count(name) > 0; }
  bool has_string(const std::string& name) const { return strings_.count(name) > 0; }

  double real(const std::string& name) const;
  std::int64_t integer(const std::string& name) const;
  const Eigen::VectorXd& vector(const std::string& name) const;
  const std::string& str(const std::string& name) const;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, double> reals_;
  std::map<std::string, std::int64_t> ints_;
  std::map<std::string, Eigen::VectorXd> vectors_;
  std::map<std::string, std::string> strings_;
};

}  // namespace clc
