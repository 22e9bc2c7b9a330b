#include "clc/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace clc {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'C', 'C', 'K', 'P', 'T', '\x01'};

enum Kind : std::uint8_t { kReal = 0, kInt = 1, kVector = 2, kString = 3 };

void write_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ostream& out, T v) {
  write_bytes(out, &v, sizeof(v));
}

void write_name(std::ostream& out, const std::string& name) {
  const auto len = static_cast<std::uint32_t>(name.size());
  write_pod(out, len);
  write_bytes(out, name.data(), name.size());
}

void read_bytes(std::istream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("checkpoint file truncated");
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  read_bytes(in, &v, sizeof(v));
  return v;
}

std::string read_name(std::istream& in) {
  const auto len = read_pod<std::uint32_t>(in);
  std::string name(len, '\0');
  if (len > 0) read_bytes(in, name.data(), len);
  return name;
}

}  // namespace

double Checkpoint::real(const std::string& name) const {
  auto it = reals_.find(name);
  if (it == reals_.end()) throw std::runtime_error("checkpoint is missing real " + name);
  return it->second;
}

std::int64_t Checkpoint::integer(const std::string& name) const {
  auto it = ints_.find(name);
  if (it == ints_.end()) throw std::runtime_error("checkpoint is missing int " + name);
  return it->second;
}

const Eigen::VectorXd& Checkpoint::vector(const std::string& name) const {
  auto it = vectors_.find(name);
  if (it == vectors_.end()) {
    throw std::runtime_error("checkpoint is missing vector " + name);
  }
  return it->second;
}

const std::string& Checkpoint::str(const std::string& name) const {
  auto it = strings_.find(name);
  if (it == strings_.end()) {
    throw std::runtime_error("checkpoint is missing string " + name);
  }
  return it->second;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  write_bytes(out, kMagic, sizeof(kMagic));
  const std::uint64_t count =
      reals_.size() + ints_.size() + vectors_.size() + strings_.size();
  write_pod(out, count);
  for (const auto& [name, v] : reals_) {
    write_pod<std::uint8_t>(out, kReal);
    write_name(out, name);
    write_pod(out, v);
  }
  for (const auto& [name, v] : ints_) {
    write_pod<std::uint8_t>(out, kInt);
    write_name(out, name);
    write_pod(out, v);
  }
  for (const auto& [name, v] : vectors_) {
    write_pod<std::uint8_t>(out, kVector);
    write_name(out, name);
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
    write_bytes(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  for (const auto& [name, v] : strings_) {
    write_pod<std::uint8_t>(out, kString);
    write_name(out, name);
    write_pod<std::uint64_t>(out, v.size());
    write_bytes(out, v.data(), v.size());
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[sizeof(kMagic)];
  read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a recognized checkpoint file: " + path.string());
  }
  Checkpoint ck;
  const auto count = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto kind = read_pod<std::uint8_t>(in);
    const std::string name = read_name(in);
    switch (kind) {
      case kReal:
        ck.reals_[name] = read_pod<double>(in);
        break;
      case kInt:
        ck.ints_[name] = read_pod<std::int64_t>(in);
        break;
      case kVector: {
        const auto n = read_pod<std::uint64_t>(in);
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        if (n > 0) read_bytes(in, v.data(), sizeof(double) * n);
        ck.vectors_[name] = std::move(v);
        break;
      }
      case kString: {
        const auto n = read_pod<std::uint64_t>(in);
        std::string v(n, '\0');
        if (n > 0) read_bytes(in, v.data(), n);
        ck.strings_[name] = std::move(v);
        break;
      }
      default:
        throw std::runtime_error("unknown checkpoint entry kind");
    }
  }
  return ck;
}

}  // namespace clc
