#pragma once

#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "recsim/session.hpp"

namespace recsim {

struct ExportFilter {
  std::optional<SessionMode> mode;
  std::optional<std::string> user_id;

  bool matches(const Trajectory& t) const;
};

/// Append-only JSONL trajectory store. Each append is flushed and fsynced before it
/// returns; on open, existing records are reloaded. A torn final line (no trailing
/// newline) is dropped and truncated away.
class TrajectoryStore {
 public:
  explicit TrajectoryStore(std::filesystem::path path);
  ~TrajectoryStore();
  TrajectoryStore(const TrajectoryStore&) = delete;
  TrajectoryStore& operator=(const TrajectoryStore&) = delete;

  void append(const Trajectory& t);
  std::vector<Trajectory> list(const ExportFilter& filter = {}) const;
  std::optional<Trajectory> find(const std::string& session_id) const;
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::vector<Trajectory> records_;
};

/// One JSONL line per matching trajectory, in store order.
std::size_t export_trajectories(const TrajectoryStore& store, const ExportFilter& filter, std::ostream& out);
std::vector<Trajectory> import_trajectories(std::istream& in, const std::string& source = "<stream>");

}  // namespace recsim
