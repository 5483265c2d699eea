#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "reflow/errors.hpp"

namespace reflow {

namespace {

std::once_flag sigpipe_once;

}  // namespace

SolverProcess::SolverProcess(const std::string& executable, const std::vector<std::string>& args) {
  std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });
  int in[2];
  int out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw SolverError("pipe failed: " + std::string(std::strerror(errno)));
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw SolverError("pipe failed: " + std::string(std::strerror(errno)));
  }
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(executable.c_str()));
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in[0], in[1], out[0], out[1]}) ::close(fd);
    throw SolverError("fork failed: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::dup2(out[1], STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
}

SolverProcess::~SolverProcess() { kill(); }

void SolverProcess::kill() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

void SolverProcess::write(const std::string& text) {
  std::size_t done = 0;
  while (done < text.size()) {
    ssize_t n = ::write(to_child_, text.data() + done, text.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SolverError("solver stdin closed: " + std::string(std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::vector<std::string> SolverProcess::read_until(const std::string& marker,
                                                   std::chrono::steady_clock::time_point deadline) {
  std::vector<std::string> lines;
  for (;;) {
    std::size_t nl;
    while ((nl = buffer_.find('\n')) != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line == marker) return lines;
      lines.push_back(std::move(line));
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw SolverError("solver timed out");
    pollfd p{from_child_, POLLIN, 0};
    int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw SolverError("poll failed: " + std::string(std::strerror(errno)));
    }
    if (rc == 0) continue;
    char chunk[65536];
    ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SolverError("solver read failed: " + std::string(std::strerror(errno)));
    }
    if (n == 0) {
      std::string tail;
      for (const auto& l : lines) tail += l + "\n";
      throw SolverError("solver exited unexpectedly" + (tail.empty() ? std::string() : ": " + tail + buffer_));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace reflow
