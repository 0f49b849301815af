#include "scengen/sim_bridge.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <optional>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace scengen {

using nlohmann::json;

namespace detail {

namespace {

void ignore_sigpipe_once()
{
    static const bool installed = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)installed;
}

using Clock = std::chrono::steady_clock;

double seconds_until(Clock::time_point deadline)
{
    return std::chrono::duration<double>(deadline - Clock::now()).count();
}

} // namespace

/// One line out, one line in, with a deadline. Implementations own the
/// transport and tear it down on destruction.
class LineChannel {
public:
    virtual ~LineChannel() = default;

    virtual void send_line(const std::string& line) = 0;

    /// nullopt on timeout. Throws EvaluationError when the peer goes away.
    std::optional<std::string> recv_line(double timeout_s)
    {
        const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                                 std::chrono::duration<double>(timeout_s));
        for (;;) {
            const auto newline = buffer_.find('\n');
            if (newline != std::string::npos) {
                std::string line = buffer_.substr(0, newline);
                buffer_.erase(0, newline + 1);
                return line;
            }
            const double remaining = seconds_until(deadline);
            if (remaining <= 0.0) {
                return std::nullopt;
            }
            struct pollfd pfd{read_fd(), POLLIN, 0};
            const int timeout_ms = static_cast<int>(remaining * 1000.0) + 1;
            const int ready = ::poll(&pfd, 1, timeout_ms);
            if (ready < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw EvaluationError(std::string("bridge poll failed: ") + std::strerror(errno));
            }
            if (ready == 0) {
                return std::nullopt;
            }
            char chunk[4096];
            const ssize_t n = ::read(read_fd(), chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw EvaluationError(std::string("bridge read failed: ") + std::strerror(errno));
            }
            if (n == 0) {
                throw EvaluationError("bridge peer closed the connection");
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

protected:
    void write_all(int fd, const std::string& data)
    {
        std::size_t written = 0;
        while (written < data.size()) {
            const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw EvaluationError(std::string("bridge write failed: ") + std::strerror(errno));
            }
            written += static_cast<std::size_t>(n);
        }
    }

    virtual int read_fd() const = 0;

private:
    std::string buffer_;
};

namespace {

class SubprocessChannel final : public LineChannel {
public:
    explicit SubprocessChannel(const std::string& command)
    {
        ignore_sigpipe_once();
        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
            throw EvaluationError(std::string("bridge pipe failed: ") + std::strerror(errno));
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            throw EvaluationError(std::string("bridge fork failed: ") + std::strerror(errno));
        }
        if (pid_ == 0) {
            ::setpgid(0, 0); // own process group, so teardown reaches sh's descendants
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
        ::fcntl(write_fd_, F_SETFD, FD_CLOEXEC);
        ::fcntl(read_fd_, F_SETFD, FD_CLOEXEC);
    }

    ~SubprocessChannel() override
    {
        if (write_fd_ >= 0) {
            ::close(write_fd_);
        }
        if (read_fd_ >= 0) {
            ::close(read_fd_);
        }
        if (pid_ > 0) {
            ::kill(-pid_, SIGKILL); // the whole process group
            ::kill(pid_, SIGKILL);
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

    void send_line(const std::string& line) override { write_all(write_fd_, line + "\n"); }

protected:
    int read_fd() const override { return read_fd_; }

private:
    pid_t pid_ = -1;
    int write_fd_ = -1;
    int read_fd_ = -1;
};

class TcpChannel final : public LineChannel {
public:
    TcpChannel(const std::string& host, const std::string& port)
    {
        ignore_sigpipe_once();
        struct addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        struct addrinfo* result = nullptr;
        const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &result);
        if (rc != 0) {
            throw EvaluationError("bridge cannot resolve " + host + ":" + port + ": " +
                                  ::gai_strerror(rc));
        }
        for (struct addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
            fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd_ < 0) {
                continue;
            }
            if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) {
                break;
            }
            ::close(fd_);
            fd_ = -1;
        }
        ::freeaddrinfo(result);
        if (fd_ < 0) {
            throw EvaluationError("bridge cannot connect to " + host + ":" + port);
        }
    }

    ~TcpChannel() override
    {
        if (fd_ >= 0) {
            ::close(fd_);
        }
    }

    void send_line(const std::string& line) override { write_all(fd_, line + "\n"); }

protected:
    int read_fd() const override { return fd_; }

private:
    int fd_ = -1;
};

std::unique_ptr<LineChannel> open_channel(const std::string& endpoint)
{
    if (endpoint.rfind("tcp:", 0) == 0) {
        const std::string rest = endpoint.substr(4);
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos) {
            throw EvaluationError("bridge endpoint \"" + endpoint + "\" is not tcp:HOST:PORT");
        }
        return std::make_unique<TcpChannel>(rest.substr(0, colon), rest.substr(colon + 1));
    }
    return std::make_unique<SubprocessChannel>(endpoint);
}

} // namespace

} // namespace detail

std::string make_bridge_request(const ConcreteScenario& scenario, const SimConfig& sim_cfg)
{
    json request;
    request["cmd"] = "run";
    request["scenario"] = json::parse(serialize_scenario(scenario));
    request["sim_config"] = {{"dt", sim_cfg.dt},
                             {"cruise_speed", sim_cfg.cruise_speed},
                             {"max_decel", sim_cfg.max_decel},
                             {"detection_range", sim_cfg.detection_range},
                             {"detection_fov_half_width", sim_cfg.detection_fov_half_width},
                             {"wetness_brake_penalty", sim_cfg.wetness_brake_penalty},
                             {"weather_visibility_penalty", sim_cfg.weather_visibility_penalty},
                             {"night_visibility_penalty", sim_cfg.night_visibility_penalty},
                             {"ego_radius", sim_cfg.ego_radius},
                             {"pedestrian_radius", sim_cfg.pedestrian_radius}};
    return request.dump();
}

BridgeClient::BridgeClient(BridgeConfig cfg, SimConfig sim_cfg)
    : cfg_(std::move(cfg)), sim_cfg_(sim_cfg)
{
    if (!(cfg_.request_timeout_s > 0.0)) {
        throw std::invalid_argument("bridge request timeout must be > 0");
    }
}

BridgeClient::~BridgeClient() = default;

SimulationTrace BridgeClient::attempt(const std::string& request_line)
{
    if (!channel_) {
        channel_ = detail::open_channel(cfg_.endpoint);
    }
    std::optional<std::string> reply;
    try {
        channel_->send_line(request_line);
        reply = channel_->recv_line(cfg_.request_timeout_s);
    } catch (const EvaluationError&) {
        channel_.reset();
        throw;
    }
    if (!reply) {
        // A late reply would desynchronize the stream; start over next time.
        channel_.reset();
        throw EvaluationError("bridge request timed out after " +
                              std::to_string(cfg_.request_timeout_s) + " s");
    }

    json doc;
    try {
        doc = json::parse(*reply);
    } catch (const json::parse_error&) {
        throw BridgeProtocolError("bridge response is not valid JSON; raw payload: " + *reply);
    }
    if (!doc.is_object() || !doc.contains("status") || !doc["status"].is_string()) {
        throw BridgeProtocolError("bridge response has no status; raw payload: " + *reply);
    }
    const std::string status = doc["status"].get<std::string>();
    if (status == "error") {
        const std::string message =
            doc.contains("message") && doc["message"].is_string() ? doc["message"].get<std::string>()
                                                                  : "(no message)";
        throw EvaluationError("bridge backend reported an error: " + message);
    }
    if (status != "ok") {
        throw BridgeProtocolError("bridge response has unknown status \"" + status +
                                  "\"; raw payload: " + *reply);
    }
    if (!doc.contains("trace")) {
        throw BridgeProtocolError("bridge response lacks a trace; raw payload: " + *reply);
    }
    try {
        return trace_from_json(doc["trace"].dump());
    } catch (const TraceError& e) {
        throw BridgeProtocolError(std::string("bridge trace rejected: ") + e.what() +
                                  "; raw payload: " + *reply);
    }
}

SimulationTrace BridgeClient::run(const ConcreteScenario& scenario)
{
    const std::string request = make_bridge_request(scenario, sim_cfg_);
    const int attempts = 1 + std::max(0, cfg_.max_retries);
    for (int attempt = 1;; ++attempt) {
        try {
            return this->attempt(request);
        } catch (const BridgeProtocolError&) {
            throw; // retrying cannot fix a protocol mismatch
        } catch (const EvaluationError&) {
            // Transport failures reset channel_; remote-reported errors keep
            // it. Only the former are worth retrying on a fresh connection.
            if (attempt >= attempts || channel_) {
                throw;
            }
        }
    }
}

} // namespace scengen
