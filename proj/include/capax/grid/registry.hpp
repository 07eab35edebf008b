#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "capax/grid/types.hpp"

namespace capax::grid {

std::string encode_record(const RunRecord& record);

/// Throws RegistryCorrupt (line 0) on malformed input; callers that know the
/// line number rethrow with it.
RunRecord decode_record(std::string_view line);

/// In-memory state of the append-only run log.
class RunRegistry {
 public:
  RunRegistry() = default;

  /// Replays a newline-delimited log. Blank lines are skipped. Throws
  /// RegistryCorrupt naming the 1-based line of the first bad record.
  static RunRegistry parse(std::istream& in);

  /// Missing file yields an empty registry.
  static RunRegistry load(const std::filesystem::path& path);

  /// Appends to the in-memory log. A second finished record for a run_id
  /// throws RegistryCorrupt.
  void apply(RunRecord record);

  /// Every record in log order.
  const std::vector<RunRecord>& log() const { return log_; }

  bool is_finished(const std::string& run_id) const { return finished_.count(run_id) > 0; }

  /// One record per finished run_id, ordered by run_id.
  std::vector<RunRecord> finished_records() const;

  std::size_t failed_count() const;

  std::string serialize() const;

  bool operator==(const RunRegistry& other) const { return log_ == other.log_; }

 private:
  std::vector<RunRecord> log_;
  std::map<std::string, std::size_t> finished_;  // run_id -> index in log_
};

/// Serialized appender shared by worker threads.
class RegistryWriter {
 public:
  explicit RegistryWriter(const std::filesystem::path& path);

  void append(const RunRecord& record);

 private:
  std::mutex mutex_;
  std::ofstream out_;
  std::filesystem::path path_;
};

}  // namespace capax::grid
