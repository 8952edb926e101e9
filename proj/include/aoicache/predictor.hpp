#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aoicache/core.hpp"
#include "aoicache/workload.hpp"

namespace aoicache {

struct PredictionContext {
    Slot snapshot_slot = 0;
    Slot t_gen = 0;
    /// First slot of the predicted horizon.
    Slot now = 0;
    Slot current_aoi() const { return aoi(now, t_gen); }
};

struct PredictionRequest {
    ContentId id = 0;
    /// Observed per-slot counts up to the snapshot, most recent last.
    std::vector<std::int64_t> history;
    std::int64_t horizon = 1;
    PredictionContext context;

    /// Throws std::invalid_argument for horizon < 1 or negative counts.
    void validate() const;
};

struct PredictionResponse {
    /// Non-negative intensities for slots now .. now + horizon - 1.
    std::vector<double> predicted;
};

/// Throws ProtocolError unless the response has `horizon` finite non-negative entries.
void validate_response(const PredictionResponse& response, std::int64_t horizon);

/// Popularity forecaster. Calls validate requests on the way in and responses
/// on the way out; implementations only supply compute().
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::string name() const = 0;

    PredictionResponse predict(const PredictionRequest& request);
    std::vector<PredictionResponse> predict_batch(std::span<const PredictionRequest> requests);

    /// Number of times the predictor answered from its fallback.
    virtual std::int64_t fallback_events() const { return 0; }

protected:
    virtual std::vector<PredictionResponse> compute(std::span<const PredictionRequest> requests) = 0;
};

/// Ground truth from the trace; zero past the end of the trace.
class PerfectPredictor final : public Predictor {
public:
    explicit PerfectPredictor(std::shared_ptr<const RequestTrace> trace) : trace_(std::move(trace)) {}
    std::string name() const override { return "perfect"; }

protected:
    std::vector<PredictionResponse> compute(std::span<const PredictionRequest> requests) override;

private:
    std::shared_ptr<const RequestTrace> trace_;
};

/// Mean of the last min(window, |history|) counts, repeated over the horizon.
class WindowAveragePredictor final : public Predictor {
public:
    explicit WindowAveragePredictor(std::int64_t window);
    std::string name() const override { return "window-average"; }
    std::int64_t window() const { return window_; }

protected:
    std::vector<PredictionResponse> compute(std::span<const PredictionRequest> requests) override;

private:
    std::int64_t window_;
};

namespace plugin_protocol {

inline constexpr int kVersion = 1;

std::string encode_hello();
/// Returns the plugin name from a {"ready": {"name": ...}} line.
std::string decode_ready(const std::string& line);
std::string encode_predict(std::span<const PredictionRequest> requests);
/// Maps a {"predictions": [...]} line onto `requests` order. Throws
/// ProtocolError on any deviation (missing ids, wrong lengths, negatives).
std::vector<PredictionResponse> decode_predictions(const std::string& line,
                                                   std::span<const PredictionRequest> requests);

}  // namespace plugin_protocol

struct PluginOptions {
    /// Shell command line that starts the plugin process.
    std::string command;
    std::chrono::milliseconds timeout{10'000};
    /// Window of the fallback predictor used after a plugin failure.
    std::int64_t fallback_window = 10;
};

/// Line-protocol client for an external predictor process. Any failure
/// (spawn, handshake, timeout, malformed reply) marks the plugin failed and
/// all later calls are answered by a window-average fallback.
class PluginPredictor final : public Predictor {
public:
    explicit PluginPredictor(PluginOptions options);
    ~PluginPredictor() override;
    PluginPredictor(const PluginPredictor&) = delete;
    PluginPredictor& operator=(const PluginPredictor&) = delete;

    std::string name() const override { return "plugin"; }
    bool failed() const { return failed_; }
    const std::string& plugin_name() const { return plugin_name_; }
    const std::string& failure_reason() const { return failure_reason_; }
    std::int64_t fallback_events() const override { return fallback_events_; }

protected:
    std::vector<PredictionResponse> compute(std::span<const PredictionRequest> requests) override;

private:
    class Channel;
    void fail(const std::string& reason);

    PluginOptions options_;
    std::unique_ptr<Channel> channel_;
    WindowAveragePredictor fallback_;
    bool failed_ = false;
    std::string plugin_name_;
    std::string failure_reason_;
    std::int64_t fallback_events_ = 0;
};

}  // namespace aoicache
