#pragma once

// Interestingness-test oracle: writes each variant into a fresh temporary
// directory and runs a command on it. Exit status 0 means the property holds.
//
//   CMD... <dir>/<candidate_filename>     with DD_CANDIDATE=<same path>
//
// POSIX only.

#include "ddkit/oracle.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

extern char** environ;

namespace ddkit {

struct ExternalOracleConfig
{
  /// Executable followed by its fixed arguments; the candidate path is
  /// appended as the last argument.
  std::vector<std::string> command;
  std::string candidate_filename = "candidate";
  double timeout_s = 300.0;
  /// When set, stdout/stderr of query N go to <log_dir>/query-N.{stdout,stderr}.
  std::optional<std::filesystem::path> log_dir;
};

/// Whitespace split, no quoting. Enough for "sh check.sh" style commands.
inline std::vector<std::string> split_command(std::string_view cmd)
{
  std::vector<std::string> out;
  std::istringstream in{std::string(cmd)};
  std::string word;
  while (in >> word)
    out.push_back(word);
  return out;
}

namespace detail {

inline std::optional<std::filesystem::path> resolve_executable(const std::string& name)
{
  namespace fs = std::filesystem;
  auto executable = [](const fs::path& p) {
    struct stat st{};
    return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string::npos)
    return executable(name) ? std::optional<fs::path>(fs::absolute(name)) : std::nullopt;
  const char* path = std::getenv("PATH");
  std::string_view dirs = path ? path : "/usr/bin:/bin";
  while (!dirs.empty()) {
    auto colon = dirs.find(':');
    auto dir = dirs.substr(0, colon);
    fs::path candidate = fs::path(dir.empty() ? "." : std::string(dir)) / name;
    if (executable(candidate))
      return candidate;
    if (colon == std::string_view::npos)
      break;
    dirs.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

class TempDir
{
public:
  TempDir()
  {
    auto pattern = (std::filesystem::temp_directory_path() / "ddkit-XXXXXX").string();
    if (!::mkdtemp(pattern.data()))
      throw oracle_unavailable(std::string("cannot create temporary directory: ") + std::strerror(errno));
    path_ = pattern;
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
};

class Fd
{
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept
  {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }
  int get() const noexcept { return fd_; }
  void reset()
  {
    if (fd_ >= 0)
      ::close(fd_);
    fd_ = -1;
  }

private:
  int fd_ = -1;
};

inline Fd open_or_throw(const char* path, int flags)
{
  int fd = ::open(path, flags | O_CLOEXEC, 0644);
  if (fd < 0)
    throw oracle_unavailable(std::string("cannot open ") + path + ": " + std::strerror(errno));
  return Fd(fd);
}

} // namespace detail

class ExternalOracle
{
public:
  explicit ExternalOracle(ExternalOracleConfig cfg) : cfg_(std::move(cfg))
  {
    if (cfg_.command.empty())
      throw std::invalid_argument("oracle command is empty");
    if (!(cfg_.timeout_s > 0))
      throw std::invalid_argument("oracle timeout must be positive");
    if (cfg_.candidate_filename.empty() || cfg_.candidate_filename.find('/') != std::string::npos)
      throw std::invalid_argument("candidate filename must be a plain file name");
    auto exe = detail::resolve_executable(cfg_.command.front());
    if (!exe)
      throw oracle_unavailable("oracle command not found or not executable: " + cfg_.command.front());
    executable_ = exe->string();
    if (cfg_.log_dir)
      std::filesystem::create_directories(*cfg_.log_dir);
  }

  Verdict operator()(const ElementList& list) { return run(reassemble(list)); }

  /// Runs the command on raw bytes.
  Verdict run(std::string_view bytes)
  {
    detail::TempDir dir;
    auto candidate = dir.path() / cfg_.candidate_filename;
    {
      std::ofstream out(candidate, std::ios::binary);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out)
        throw oracle_unavailable("cannot write candidate file " + candidate.string());
    }
    auto n = spawns_.fetch_add(1) + 1;

    std::vector<std::string> args = cfg_.command;
    args.push_back(candidate.string());
    std::vector<char*> argv;
    for (auto& a : args)
      argv.push_back(a.data());
    argv.push_back(nullptr);

    std::string env_entry = "DD_CANDIDATE=" + candidate.string();
    std::vector<char*> envp;
    for (char** e = environ; e && *e; ++e)
      if (std::strncmp(*e, "DD_CANDIDATE=", 13) != 0)
        envp.push_back(*e);
    envp.push_back(env_entry.data());
    envp.push_back(nullptr);

    detail::Fd in = detail::open_or_throw("/dev/null", O_RDONLY);
    detail::Fd out, err;
    if (cfg_.log_dir) {
      auto base = (*cfg_.log_dir / ("query-" + std::to_string(n))).string();
      out = detail::open_or_throw((base + ".stdout").c_str(), O_WRONLY | O_CREAT | O_TRUNC);
      err = detail::open_or_throw((base + ".stderr").c_str(), O_WRONLY | O_CREAT | O_TRUNC);
    } else {
      out = detail::open_or_throw("/dev/null", O_WRONLY);
      err = detail::open_or_throw("/dev/null", O_WRONLY);
    }

    int status_pipe[2];
    if (::pipe2(status_pipe, O_CLOEXEC) != 0)
      throw oracle_unavailable(std::string("pipe failed: ") + std::strerror(errno));
    detail::Fd status_read(status_pipe[0]), status_write(status_pipe[1]);

    const std::string workdir = dir.path().string();
    pid_t pid = ::fork();
    if (pid < 0)
      throw oracle_unavailable(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
      ::setpgid(0, 0);
      ::dup2(in.get(), 0);
      ::dup2(out.get(), 1);
      ::dup2(err.get(), 2);
      if (::chdir(workdir.c_str()) == 0)
        ::execve(executable_.c_str(), argv.data(), envp.data());
      int e = errno;
      [[maybe_unused]] auto w = ::write(status_write.get(), &e, sizeof e);
      ::_exit(127);
    }
    status_write.reset();
    int child_errno = 0;
    ssize_t got;
    do {
      got = ::read(status_read.get(), &child_errno, sizeof child_errno);
    } while (got < 0 && errno == EINTR);
    if (got == static_cast<ssize_t>(sizeof child_errno)) {
      ::waitpid(pid, nullptr, 0);
      throw oracle_unavailable("cannot execute " + executable_ + ": " + std::strerror(child_errno));
    }

    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration<double>(cfg_.timeout_s);
    auto pause = std::chrono::microseconds(50);
    int status = 0;
    for (;;) {
      pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid)
        break;
      if (r < 0 && errno != EINTR)
        throw oracle_unavailable(std::string("waitpid failed: ") + std::strerror(errno));
      if (clock::now() >= deadline) {
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
        while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
        }
        timeouts_.fetch_add(1);
        return Verdict::timeout;
      }
      std::this_thread::sleep_for(pause);
      pause = std::min(pause * 2, std::chrono::microseconds(2000));
    }
    return WIFEXITED(status) && WEXITSTATUS(status) == 0 ? Verdict::holds : Verdict::fails;
  }

  std::size_t spawns() const noexcept { return spawns_.load(); }
  std::size_t timeouts() const noexcept { return timeouts_.load(); }
  const ExternalOracleConfig& config() const noexcept { return cfg_; }

private:
  ExternalOracleConfig cfg_;
  std::string executable_;
  std::atomic<std::size_t> spawns_{0};
  std::atomic<std::size_t> timeouts_{0};
};

/// Wraps a shared external oracle as a PropertyOracle.
inline PropertyOracle as_property(std::shared_ptr<ExternalOracle> oracle)
{
  std::string desc;
  for (const auto& part : oracle->config().command)
    desc += (desc.empty() ? "" : " ") + part;
  return PropertyOracle([o = std::move(oracle)](const ElementList& l) { return (*o)(l); },
                        std::move(desc));
}

/// One cached external evaluation.
inline Evaluation eval_external(const ElementList& list, ExternalOracle& oracle, QueryCache& cache)
{
  auto digest = content_digest(list);
  if (auto hit = cache.lookup(digest))
    return {*hit, true};
  return {cache.insert(digest, oracle(list)), false};
}

} // namespace ddkit
