#include "recsim/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "recsim/error.hpp"

namespace recsim {

bool ExportFilter::matches(const Trajectory& t) const {
  if (mode && t.mode != *mode) return false;
  if (user_id && t.user_id != *user_id) return false;
  return true;
}

namespace {

std::string sys_error(const std::string& what, const std::filesystem::path& p) {
  return what + " " + p.string() + ": " + std::strerror(errno);
}

Trajectory parse_line(const std::string& line, const std::string& source, std::size_t line_no) {
  try {
    return trajectory_from_json(Json::parse(line));
  } catch (const Json::exception& e) {
    throw ParseError(source, line_no, "", e.what());
  }
}

}  // namespace

TrajectoryStore::TrajectoryStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::string content;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    content = ss.str();
  }
  std::size_t keep = content.size();
  if (!content.empty() && content.back() != '\n') {
    const auto nl = content.rfind('\n');
    keep = nl == std::string::npos ? 0 : nl + 1;
  }
  std::size_t line_no = 0, pos = 0;
  while (pos < keep) {
    const auto nl = content.find('\n', pos);
    ++line_no;
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    records_.push_back(parse_line(line, path_.string(), line_no));
  }

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(sys_error("cannot open store", path_));
  if (keep != content.size() && ::ftruncate(fd_, static_cast<off_t>(keep)) != 0) {
    throw Error(sys_error("cannot truncate torn record in", path_));
  }
}

TrajectoryStore::~TrajectoryStore() {
  if (fd_ >= 0) ::close(fd_);
}

void TrajectoryStore::append(const Trajectory& t) {
  const std::string line = to_jsonl_line(t) + "\n";
  std::lock_guard lock(mu_);
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(sys_error("write failed on", path_));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error(sys_error("fsync failed on", path_));
  records_.push_back(t);
}

std::vector<Trajectory> TrajectoryStore::list(const ExportFilter& filter) const {
  std::lock_guard lock(mu_);
  std::vector<Trajectory> out;
  for (const auto& t : records_) {
    if (filter.matches(t)) out.push_back(t);
  }
  return out;
}

std::optional<Trajectory> TrajectoryStore::find(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->session_id == session_id) return *it;
  }
  return std::nullopt;
}

std::size_t TrajectoryStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::size_t export_trajectories(const TrajectoryStore& store, const ExportFilter& filter, std::ostream& out) {
  const auto rows = store.list(filter);
  for (const auto& t : rows) out << to_jsonl_line(t) << '\n';
  return rows.size();
}

std::vector<Trajectory> import_trajectories(std::istream& in, const std::string& source) {
  std::vector<Trajectory> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(parse_line(line, source, line_no));
  }
  return out;
}

}  // namespace recsim
