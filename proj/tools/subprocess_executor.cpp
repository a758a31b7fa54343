#include "subprocess_executor.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "ppset/errors.hpp"

namespace ppset {

namespace {

using Clock = std::chrono::steady_clock;

struct Fd {
    int fd = -1;
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

void make_pipe(Fd& r, Fd& w) {
    int p[2];
    if (::pipe2(p, O_CLOEXEC) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
    r.fd = p[0];
    w.fd = p[1];
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

SubprocessExecutor::SubprocessExecutor(std::string command, std::vector<std::string> payloads,
                                       std::chrono::milliseconds timeout)
    : command_(std::move(command)), payloads_(std::move(payloads)), timeout_(timeout) {
    // A child that exits without reading its stdin must not kill us.
    std::signal(SIGPIPE, SIG_IGN);
}

int SubprocessExecutor::operator()(std::size_t index) const {
    if (index >= payloads_.size()) throw ExecutorError(index, "no such program");
    Fd in_r, in_w, out_r, out_w;
    make_pipe(in_r, in_w);
    make_pipe(out_r, out_w);

    const pid_t pid = ::fork();
    if (pid < 0) throw ExecutorError(index, std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_r.fd, STDIN_FILENO);
        ::dup2(out_w.fd, STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    in_r.reset();
    out_w.reset();
    ::fcntl(in_w.fd, F_SETFL, O_NONBLOCK);

    const std::string& payload = payloads_[index];
    std::size_t written = 0;
    if (payload.empty()) in_w.reset();
    std::string output;
    const auto deadline = Clock::now() + timeout_;
    bool timed_out = false;

    while (out_r.fd >= 0) {
        pollfd fds[2];
        nfds_t n = 0;
        fds[n++] = pollfd{out_r.fd, POLLIN, 0};
        if (in_w.fd >= 0) fds[n++] = pollfd{in_w.fd, POLLOUT, 0};
        int wait_ms = -1;
        if (timeout_.count() > 0) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
            if (left <= 0) {
                timed_out = true;
                break;
            }
            wait_ms = static_cast<int>(left);
        }
        int rc = ::poll(fds, n, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) continue;
        if (n == 2 && fds[1].revents) {
            ssize_t k = ::write(in_w.fd, payload.data() + written, payload.size() - written);
            if (k > 0) written += static_cast<std::size_t>(k);
            if (k < 0 && errno != EAGAIN) written = payload.size();  // reader went away
            if (written == payload.size()) in_w.reset();
        }
        if (fds[0].revents) {
            char buf[4096];
            ssize_t k = ::read(out_r.fd, buf, sizeof buf);
            if (k > 0) output.append(buf, static_cast<std::size_t>(k));
            else if (k == 0 || errno != EINTR) out_r.reset();
            if (output.size() > (1u << 16)) output.resize(1u << 16);
        }
    }
    in_w.reset();
    out_r.reset();

    int status = 0;
    if (timed_out) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        throw ExecutorError(index, "timed out after " + std::to_string(timeout_.count()) + " ms");
    }
    // stdout closed; give the child the rest of its budget to exit.
    while (true) {
        pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0 && errno != EINTR) throw ExecutorError(index, "waitpid failed");
        if (timeout_.count() > 0 && Clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            throw ExecutorError(index, "timed out after " + std::to_string(timeout_.count()) + " ms");
        }
        ::usleep(1000);
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        std::string why = WIFEXITED(status) ? "exit status " + std::to_string(WEXITSTATUS(status))
                                            : "killed by signal " + std::to_string(WTERMSIG(status));
        throw ExecutorError(index, "executor failed (" + why + ")");
    }
    const std::string verdict = trim(output);
    if (verdict == "1") return 1;
    if (verdict == "0") return 0;
    throw ExecutorError(index, "executor printed '" + verdict.substr(0, 40) + "', expected 1 or 0");
}

}  // namespace ppset
