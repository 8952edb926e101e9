#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <unordered_map>

#include <json.hpp>

#include "aoicache/errors.hpp"
#include "aoicache/log.hpp"
#include "aoicache/predictor.hpp"

namespace aoicache {

namespace plugin_protocol {

using nlohmann::json;

std::string encode_hello() { return json{{"hello", {{"protocol", kVersion}}}}.dump(); }

std::string decode_ready(const std::string& line) {
    json msg;
    try {
        msg = json::parse(line);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("handshake reply is not JSON: ") + e.what());
    }
    if (!msg.is_object() || msg.size() != 1 || !msg.contains("ready") || !msg["ready"].is_object() ||
        !msg["ready"].contains("name") || !msg["ready"]["name"].is_string())
        throw ProtocolError("expected {\"ready\": {\"name\": string}}, got " + line);
    return msg["ready"]["name"].get<std::string>();
}

std::string encode_predict(std::span<const PredictionRequest> requests) {
    json items = json::array();
    for (const auto& r : requests) {
        items.push_back({{"id", r.id},
                         {"history", r.history},
                         {"horizon", r.horizon},
                         {"t_gen", r.context.t_gen},
                         {"now", r.context.now}});
    }
    return json{{"predict", {{"items", std::move(items)}}}}.dump();
}

std::vector<PredictionResponse> decode_predictions(const std::string& line,
                                                   std::span<const PredictionRequest> requests) {
    json msg;
    try {
        msg = json::parse(line);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("prediction reply is not JSON: ") + e.what());
    }
    if (!msg.is_object() || msg.size() != 1 || !msg.contains("predictions") || !msg["predictions"].is_array())
        throw ProtocolError("expected {\"predictions\": [...]}, got " + line.substr(0, 200));
    std::unordered_map<ContentId, std::vector<double>> by_id;
    for (const auto& p : msg["predictions"]) {
        if (!p.is_object() || !p.contains("id") || !p.contains("values") || !p["values"].is_array() ||
            !p["id"].is_number_unsigned())
            throw ProtocolError("malformed prediction entry");
        std::vector<double> values;
        for (const auto& v : p["values"]) {
            if (!v.is_number()) throw ProtocolError("prediction values must be numbers");
            values.push_back(v.get<double>());
        }
        by_id[p["id"].get<ContentId>()] = std::move(values);
    }
    std::vector<PredictionResponse> out;
    out.reserve(requests.size());
    for (const auto& r : requests) {
        auto it = by_id.find(r.id);
        if (it == by_id.end()) throw ProtocolError("no prediction for content " + std::to_string(r.id));
        PredictionResponse resp{it->second};
        validate_response(resp, r.horizon);
        out.push_back(std::move(resp));
    }
    return out;
}

}  // namespace plugin_protocol

/// Child process wired to one end of a socket pair as stdin and stdout.
class PluginPredictor::Channel {
public:
    Channel(const std::string& command, std::chrono::milliseconds timeout) : timeout_(timeout) {
        int fds[2];
        if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0)
            throw ProtocolError(std::string("socketpair: ") + std::strerror(errno));
        pid_ = ::fork();
        if (pid_ < 0) {
            ::close(fds[0]);
            ::close(fds[1]);
            throw ProtocolError(std::string("fork: ") + std::strerror(errno));
        }
        if (pid_ == 0) {
            ::dup2(fds[1], STDIN_FILENO);
            ::dup2(fds[1], STDOUT_FILENO);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(fds[1]);
        fd_ = fds[0];
    }

    ~Channel() {
        if (fd_ >= 0) ::close(fd_);
        if (pid_ > 0) {
            for (int i = 0; i < 50; ++i) {
                if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
                ::usleep(2000);
            }
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
    }

    Channel(const Channel&) = delete;
    Channel& operator=(const Channel&) = delete;

    void send_line(const std::string& line) {
        std::string data = line + "\n";
        std::size_t off = 0;
        while (off < data.size()) {
            const auto n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError(std::string("write to plugin failed: ") + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line() {
        const auto deadline = std::chrono::steady_clock::now() + timeout_;
        while (true) {
            if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
                std::string line = buffer_.substr(0, pos);
                buffer_.erase(0, pos + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) throw ProtocolError("plugin reply timed out");
            pollfd pfd{fd_, POLLIN, 0};
            const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError(std::string("poll: ") + std::strerror(errno));
            }
            if (rc == 0) throw ProtocolError("plugin reply timed out");
            char buf[65536];
            const auto n = ::recv(fd_, buf, sizeof buf, 0);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError(std::string("read from plugin failed: ") + std::strerror(errno));
            }
            if (n == 0) throw ProtocolError("plugin closed its output");
            buffer_.append(buf, static_cast<std::size_t>(n));
        }
    }

private:
    std::chrono::milliseconds timeout_;
    pid_t pid_ = -1;
    int fd_ = -1;
    std::string buffer_;
};

PluginPredictor::PluginPredictor(PluginOptions options)
    : options_(std::move(options)), fallback_(std::max<std::int64_t>(options_.fallback_window, 1)) {
    try {
        channel_ = std::make_unique<Channel>(options_.command, options_.timeout);
        channel_->send_line(plugin_protocol::encode_hello());
        plugin_name_ = plugin_protocol::decode_ready(channel_->read_line());
        log::info("prediction plugin '" + plugin_name_ + "' ready");
    } catch (const ProtocolError& e) {
        fail(std::string("handshake failed: ") + e.what());
    }
}

PluginPredictor::~PluginPredictor() = default;

void PluginPredictor::fail(const std::string& reason) {
    failed_ = true;
    failure_reason_ = reason;
    channel_.reset();
    log::warning("prediction plugin failed (" + reason + "); falling back to window-average(" +
                 std::to_string(fallback_.window()) + ")");
}

std::vector<PredictionResponse> PluginPredictor::compute(std::span<const PredictionRequest> requests) {
    if (!failed_) {
        try {
            channel_->send_line(plugin_protocol::encode_predict(requests));
            return plugin_protocol::decode_predictions(channel_->read_line(), requests);
        } catch (const ProtocolError& e) {
            fail(e.what());
        }
    }
    ++fallback_events_;
    return fallback_.predict_batch(requests);
}

}  // namespace aoicache
