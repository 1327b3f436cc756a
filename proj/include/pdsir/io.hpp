#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pdsir/diagnostics.hpp"
#include "pdsir/mcmc.hpp"
#include "pdsir/model.hpp"
#include "pdsir/version.hpp"

namespace pdsir {

/// Data/validation failure (bad file, impossible counts); the CLI maps it to
/// exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// %.17g round-trips doubles exactly, keeping CSV output byte-stable.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace detail

struct LoadedIncidence {
  ObservationGrid grid;
  IncidenceCounts counts;
  std::string time_unit;  // from an optional "# time_unit: ..." comment
};

/// Parses incidence CSV: optional "#" comment lines (a "# time_unit: X"
/// comment declares the unit), then the required header
/// "interval_end_time,count", then one row per interval with strictly
/// increasing positive end times and non-negative integer counts. The grid is
/// t_0 = 0 plus the end times.
inline LoadedIncidence load_incidence_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open incidence file: " + path);

  std::string line;
  std::int64_t line_no = 0;
  std::string time_unit;
  bool header_seen = false;
  std::vector<double> breakpoints{0.0};
  std::vector<std::int64_t> counts;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string key = "# time_unit:";
      if (t.rfind(key, 0) == 0) time_unit = detail::trim(t.substr(key.size()));
      continue;
    }
    if (!header_seen) {
      if (t != "interval_end_time,count")
        throw DataError("line " + std::to_string(line_no) +
                        ": expected header 'interval_end_time,count', got '" + t + "'");
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos)
      throw DataError("line " + std::to_string(line_no) + ": expected 'time,count'");
    const std::string time_str = detail::trim(t.substr(0, comma));
    const std::string count_str = detail::trim(t.substr(comma + 1));
    double end_time = 0.0;
    try {
      std::size_t used = 0;
      end_time = std::stod(time_str, &used);
      if (used != time_str.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw DataError("line " + std::to_string(line_no) + ": bad interval_end_time '" +
                      time_str + "'");
    }
    if (!(end_time > breakpoints.back()))
      throw DataError("line " + std::to_string(line_no) +
                      ": interval_end_time must be strictly increasing (got " + time_str + ")");
    std::int64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoll(count_str, &used);
      if (used != count_str.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw DataError("line " + std::to_string(line_no) + ": count must be an integer, got '" +
                      count_str + "'");
    }
    if (count < 0)
      throw DataError("line " + std::to_string(line_no) + ": count must be non-negative");
    breakpoints.push_back(end_time);
    counts.push_back(count);
  }
  if (!header_seen) throw DataError(path + ": missing 'interval_end_time,count' header");
  if (counts.empty()) throw DataError(path + ": no data rows");
  return {ObservationGrid(std::move(breakpoints)), IncidenceCounts{std::move(counts)},
          std::move(time_unit)};
}

inline void write_incidence_csv(const std::string& path, const ObservationGrid& grid,
                                const IncidenceCounts& counts,
                                const std::string& time_unit = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!time_unit.empty()) out << "# time_unit: " << time_unit << "\n";
  out << "interval_end_time,count\n";
  for (std::int64_t k = 0; k < grid.num_intervals(); ++k)
    out << detail::format_double(grid.right(k)) << ","
        << counts.counts[static_cast<std::size_t>(k)] << "\n";
}

/// True latent path; infinite times are written as "inf".
inline void write_path_csv(const std::string& path, const LatentPath& lp) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "individual,infection_time,removal_time,initially_infectious\n";
  for (std::int64_t j = 0; j < lp.size(); ++j) {
    const double zr = lp.removal_time[static_cast<std::size_t>(j)];
    out << j << "," << detail::format_double(lp.infection_time[static_cast<std::size_t>(j)])
        << "," << (std::isfinite(zr) ? detail::format_double(zr) : "inf") << ","
        << (j < lp.i0 ? 1 : 0) << "\n";
  }
}

inline void write_samples_csv(const std::string& path, const ChainOutput& chain) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,beta,lambda,r0,loglik,accepted\n";
  for (std::int64_t i = 0; i < chain.num_draws(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out << chain.iteration[idx] << "," << detail::format_double(chain.beta[idx]) << ","
        << detail::format_double(chain.lambda[idx]) << ","
        << detail::format_double(chain.r0[idx]) << ","
        << detail::format_double(chain.loglik[idx]) << ","
        << static_cast<int>(chain.accepted[idx]) << "\n";
  }
}

inline nlohmann::json summary_to_json(const PosteriorSummary& s) {
  const auto param = [](const ParamSummary& p) {
    return nlohmann::json{{"mean", p.mean},         {"sd", p.sd},
                          {"ess", p.ess},           {"ess_per_sec", p.ess_per_sec},
                          {"ci_lower", p.ci_lower}, {"ci_upper", p.ci_upper}};
  };
  return nlohmann::json{{"beta", param(s.beta)},
                        {"lambda", param(s.lambda)},
                        {"r0", param(s.r0)},
                        {"acceptance_rate", s.acceptance_rate},
                        {"draws_used", s.draws_used},
                        {"burn_in_draws", s.burn_in_draws},
                        {"ci_mass", s.ci_mass}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for checksum: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

/// Everything needed to replay a run byte for byte: the subcommand, its full
/// configuration, the seed and the input-data checksum. Wall time is recorded
/// for reporting and is the one field that varies across replays.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string data_checksum;  // hex fnv1a64 of the input file; empty if none
  double wall_seconds = 0.0;
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
  write_json(path, nlohmann::json{{"software", "pdsir"},
                                  {"version", kVersion},
                                  {"subcommand", m.subcommand},
                                  {"config", m.config},
                                  {"seed", m.seed},
                                  {"data_checksum", m.data_checksum},
                                  {"wall_seconds", m.wall_seconds}});
}

}  // namespace pdsir
