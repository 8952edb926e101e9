#include "aoicache/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aoicache/errors.hpp"

namespace aoicache {

void PredictionRequest::validate() const {
    if (horizon < 1) throw std::invalid_argument("prediction horizon must be >= 1");
    for (auto c : history)
        if (c < 0) throw std::invalid_argument("negative request count in history of content " + std::to_string(id));
    if (context.now < context.snapshot_slot) throw std::invalid_argument("prediction starts before the snapshot");
}

void validate_response(const PredictionResponse& response, std::int64_t horizon) {
    if (static_cast<std::int64_t>(response.predicted.size()) != horizon)
        throw ProtocolError("prediction has " + std::to_string(response.predicted.size()) + " values, expected " +
                            std::to_string(horizon));
    for (double v : response.predicted)
        if (!std::isfinite(v) || v < 0.0) throw ProtocolError("prediction values must be finite and >= 0");
}

PredictionResponse Predictor::predict(const PredictionRequest& request) {
    return std::move(predict_batch(std::span(&request, 1)).front());
}

std::vector<PredictionResponse> Predictor::predict_batch(std::span<const PredictionRequest> requests) {
    for (const auto& r : requests) r.validate();
    auto out = compute(requests);
    if (out.size() != requests.size()) throw ProtocolError("predictor returned the wrong number of responses");
    for (std::size_t i = 0; i < out.size(); ++i) validate_response(out[i], requests[i].horizon);
    return out;
}

std::vector<PredictionResponse> PerfectPredictor::compute(std::span<const PredictionRequest> requests) {
    std::vector<PredictionResponse> out;
    out.reserve(requests.size());
    std::vector<std::int64_t> counts;
    for (const auto& r : requests) {
        counts.assign(static_cast<std::size_t>(r.horizon), 0);
        trace_->copy_counts(r.id, r.context.now, counts);
        out.push_back({std::vector<double>(counts.begin(), counts.end())});
    }
    return out;
}

WindowAveragePredictor::WindowAveragePredictor(std::int64_t window) : window_(window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
}

std::vector<PredictionResponse> WindowAveragePredictor::compute(std::span<const PredictionRequest> requests) {
    std::vector<PredictionResponse> out;
    out.reserve(requests.size());
    for (const auto& r : requests) {
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(window_), r.history.size());
        double mean = 0.0;
        if (n > 0) {
            std::int64_t sum = 0;
            for (std::size_t i = r.history.size() - n; i < r.history.size(); ++i) sum += r.history[i];
            mean = static_cast<double>(sum) / static_cast<double>(n);
        }
        out.push_back({std::vector<double>(static_cast<std::size_t>(r.horizon), mean)});
    }
    return out;
}

}  // namespace aoicache
