#include <cerrno>
#include <csignal>
#include <cstring>
#include <unordered_map>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "moenas/error.hpp"
#include "moenas/evaluators.hpp"

namespace moenas {

namespace {

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

} // namespace

ExternalEvaluator::ExternalEvaluator(ExternalSpec spec) : spec_(std::move(spec)) {
    if (spec_.command.empty()) {
        throw Error("external evaluator needs a command");
    }
    if (!(spec_.timeout_seconds > 0.0)) {
        throw Error("external evaluator timeout must be > 0");
    }
    // Writes to a dead child must surface as errors, not kill the engine.
    std::signal(SIGPIPE, SIG_IGN);
}

ExternalEvaluator::~ExternalEvaluator() {
    stop();
}

void ExternalEvaluator::ensure_running() {
    if (pid_ > 0) {
        int status = 0;
        if (::waitpid(pid_, &status, WNOHANG) == 0) {
            return;
        }
        pid_ = -1;
        close_fd(to_child_);
        close_fd(from_child_);
    }
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
        throw EvaluationError(std::string("pipe failed: ") + std::strerror(errno));
    }
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw EvaluationError(std::string("pipe failed: ") + std::strerror(errno));
    }
    std::vector<std::string> argv_storage;
    argv_storage.push_back(spec_.command);
    argv_storage.insert(argv_storage.end(), spec_.args.begin(), spec_.args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) {
        argv.push_back(a.data());
    }
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
        throw EvaluationError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    buffer_.clear();
    ++launches_;
}

void ExternalEvaluator::stop() {
    close_fd(to_child_);
    close_fd(from_child_);
    if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
    buffer_.clear();
}

void ExternalEvaluator::send_line(const std::string& line) {
    std::string data = line + "\n";
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        const ssize_t n = ::write(to_child_, p, left);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw ProtocolError(std::string("protocol-error: cannot write to worker: ") + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

std::string ExternalEvaluator::read_line(std::chrono::steady_clock::time_point deadline) {
    while (true) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            throw EvaluationTimeout("timeout: worker did not answer within " + std::to_string(spec_.timeout_seconds) + " s");
        }
        const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
        pollfd pfd{from_child_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(wait_ms, 60000)));
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw ProtocolError(std::string("protocol-error: poll failed: ") + std::strerror(errno));
        }
        if (rc == 0) {
            continue;
        }
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw ProtocolError(std::string("protocol-error: read failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            throw ProtocolError("protocol-error: worker closed its output");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

TrainingMetrics ExternalEvaluator::evaluate(const Genome& g, const ObjectiveConfig& cfg) {
    return evaluate_batch(std::span<const Genome>(&g, 1), cfg).front();
}

std::vector<TrainingMetrics> ExternalEvaluator::evaluate_batch(std::span<const Genome> genomes,
                                                               const ObjectiveConfig& cfg) {
    std::lock_guard lock(mutex_);
    for (const auto& g : genomes) {
        require_valid(g);
    }
    try {
        ensure_running();
        std::unordered_map<std::int64_t, std::size_t> pending;
        for (std::size_t i = 0; i < genomes.size(); ++i) {
            const auto id = next_id_++;
            pending.emplace(id, i);
            send_line(make_request(id, genomes[i], cfg).dump());
        }
        std::vector<TrainingMetrics> out(genomes.size());
        const auto timeout = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(spec_.timeout_seconds));
        while (!pending.empty()) {
            const auto line = read_line(std::chrono::steady_clock::now() + timeout);
            auto [id, metrics] = parse_response(line, cfg);
            const auto it = pending.find(id);
            if (it == pending.end()) {
                throw ProtocolError("protocol-error: unexpected response id " + std::to_string(id));
            }
            out[it->second] = metrics;
            pending.erase(it);
        }
        return out;
    } catch (const EvaluationError&) {
        stop();
        throw;
    }
}

} // namespace moenas
