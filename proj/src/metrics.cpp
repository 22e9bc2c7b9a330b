#include "clc/metrics.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace clc {

namespace {

constexpr const char* kHeader =
    "episode,total_reward,reward_ma,safety,warning,comfort,fuel,lateral,steps,"
    "termination,warning_count,crash,critic_loss,actor_loss,value_loss,alpha,"
    "entropy,updates";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Termination termination_from_name(const std::string& name) {
  for (Termination t : {Termination::Running, Termination::Success, Termination::Crash,
                        Termination::OutOfBounds, Termination::Timeout}) {
    if (name == termination_name(t)) return t;
  }
  throw std::runtime_error("unknown termination kind in metrics file: " + name);
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpisodeRecord>& records,
                       std::uint64_t coefficients_hash) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("cannot write metrics file " + path.string());
  char hashbuf[32];
  std::snprintf(hashbuf, sizeof(hashbuf), "%016" PRIx64, coefficients_hash);
  out << "# reward_coefficients_hash: " << hashbuf << "\n";
  out << kHeader << "\n";
  double window_sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EpisodeRecord& r = records[i];
    window_sum += r.total_reward;
    if (i >= static_cast<std::size_t>(kRewardWindow)) {
      window_sum -= records[i - kRewardWindow].total_reward;
    }
    const double denom = static_cast<double>(
        std::min<std::size_t>(i + 1, static_cast<std::size_t>(kRewardWindow)));
    const double ma = window_sum / denom;
    out << r.episode << ',' << fmt(r.total_reward) << ',' << fmt(ma) << ','
        << fmt(r.safety_sum) << ',' << fmt(r.warning_sum) << ',' << fmt(r.comfort_sum)
        << ',' << fmt(r.fuel_sum) << ',' << fmt(r.lateral_sum) << ',' << r.steps << ','
        << termination_name(r.termination) << ',' << r.warning_count << ','
        << (r.crashed ? 1 : 0) << ',' << fmt(r.critic_loss) << ',' << fmt(r.actor_loss)
        << ',' << fmt(r.value_loss) << ',' << fmt(r.alpha) << ',' << fmt(r.entropy)
        << ',' << r.updates << "\n";
  }
  if (!out) throw std::runtime_error("write failure on metrics file " + path.string());
}

MetricsFile read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read metrics file " + path.string());
  MetricsFile file;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("metrics file is empty: " + path.string());
  }
  const std::string prefix = "# reward_coefficients_hash: ";
  if (line.rfind(prefix, 0) != 0) {
    throw std::runtime_error("metrics file lacks the coefficients-hash line: " +
                             path.string());
  }
  file.coefficients_hash = std::stoull(line.substr(prefix.size()), nullptr, 16);
  if (!std::getline(in, line) || line != kHeader) {
    throw std::runtime_error("metrics file has an unexpected header: " + path.string());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 18) {
      throw std::runtime_error("malformed metrics row: " + line);
    }
    EpisodeRecord r;
    r.episode = std::stoi(cells[0]);
    r.total_reward = std::stod(cells[1]);
    r.reward_ma = std::stod(cells[2]);
    r.safety_sum = std::stod(cells[3]);
    r.warning_sum = std::stod(cells[4]);
    r.comfort_sum = std::stod(cells[5]);
    r.fuel_sum = std::stod(cells[6]);
    r.lateral_sum = std::stod(cells[7]);
    r.steps = std::stoi(cells[8]);
    r.termination = termination_from_name(cells[9]);
    r.warning_count = std::stoi(cells[10]);
    r.crashed = cells[11] == "1";
    r.critic_loss = std::stod(cells[12]);
    r.actor_loss = std::stod(cells[13]);
    r.value_loss = std::stod(cells[14]);
    r.alpha = std::stod(cells[15]);
    r.entropy = std::stod(cells[16]);
    r.updates = std::stol(cells[17]);
    file.records.push_back(r);
  }
  return file;
}

}  // namespace clc
