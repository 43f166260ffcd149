#include "hedgen/external.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hedgen/error.hpp"

namespace hedgen {

using nlohmann::json;

namespace {

json history_to_json(const HistoryWindow& history) {
    json turns = json::array();
    for (const Turn& t : history.turns) {
        turns.push_back({{"speaker", to_string(t.speaker)}, {"text", t.text}});
    }
    return turns;
}

HistoryWindow history_from_json(const json& turns) {
    HistoryWindow history;
    for (const auto& t : turns) {
        Turn turn;
        const std::string speaker = t.at("speaker").get<std::string>();
        if (speaker == "tutor") {
            turn.speaker = Speaker::Tutor;
        } else if (speaker == "tutee") {
            turn.speaker = Speaker::Tutee;
        } else {
            throw StructuralError("unknown speaker '" + speaker + "'");
        }
        turn.text = t.at("text").get<std::string>();
        history.turns.push_back(std::move(turn));
    }
    history.window_size = static_cast<int>(history.turns.size());
    history.target_position = static_cast<int>(history.turns.size()) + 1;
    return history;
}

}  // namespace

CandidatePool external_generate(const std::string& endpoint, const HistoryWindow& history,
                                const DecodingConfig& config) {
    json request;
    request["history"] = history_to_json(history);
    request["num_candidates"] = config.pool_size;
    request["max_tokens"] = config.max_tokens;
    request["no_repeat_ngram"] = config.no_repeat_ngram;
    request["repetition_penalty"] = config.repetition_penalty;

    httplib::Client client(endpoint);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);
    auto res = client.Post("/generate", request.dump(), "application/json");
    if (!res) {
        throw ExternalError(ExternalError::Kind::Transport,
                            "generator endpoint " + endpoint + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status >= 500) {
        throw ExternalError(ExternalError::Kind::Transport,
                            "generator returned status " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw ExternalError(ExternalError::Kind::Protocol,
                            "generator returned status " + std::to_string(res->status));
    }

    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("candidates") ||
        !body["candidates"].is_array()) {
        throw ExternalError(ExternalError::Kind::Protocol, "generator response is not a candidate list");
    }

    CandidatePool pool;
    pool.requested = config.pool_size;
    std::size_t index = 0;
    for (const auto& c : body["candidates"]) {
        if (!c.is_object() || !c.contains("text") || !c["text"].is_string() || !c.contains("log_prob") ||
            !c["log_prob"].is_number()) {
            throw ExternalError(ExternalError::Kind::Protocol,
                                "candidate " + std::to_string(index) + " is missing text or log_prob");
        }
        const std::string text = c["text"].get<std::string>();
        const double score = c["log_prob"].get<double>();
        if (text.empty()) {
            throw ExternalError(ExternalError::Kind::Validation,
                                "candidate " + std::to_string(index) + " has empty text");
        }
        if (!std::isfinite(score)) {
            throw ExternalError(ExternalError::Kind::Validation,
                                "candidate " + std::to_string(index) + " has non-finite log_prob");
        }
        pool.candidates.push_back({text, score, CandidateSource::External});
        ++index;
    }

    std::stable_sort(pool.candidates.begin(), pool.candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    if (static_cast<int>(pool.candidates.size()) < config.pool_size) {
        pool.note = "pool produced " + std::to_string(pool.candidates.size()) + " of " +
                    std::to_string(config.pool_size) + " requested candidates";
    }
    return pool;
}

std::vector<CandidatePool> external_generate_many(const std::string& endpoint,
                                                  const std::vector<HistoryWindow>& histories,
                                                  const DecodingConfig& config, int max_in_flight) {
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be positive");
    std::vector<CandidatePool> pools(histories.size());
    std::vector<std::exception_ptr> errors(histories.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= histories.size()) return;
            try {
                pools[i] = external_generate(endpoint, histories[i], config);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    std::vector<std::thread> threads;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), histories.size());
    for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return pools;
}

struct StubServer::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    bool model_mode = false;
    NGramModel model;
    std::string canned;

    void route() {
        server.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
            if (!canned.empty()) {
                res.set_content(canned, "application/json");
                return;
            }
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object() || !body.contains("history")) {
                res.status = 400;
                res.set_content(R"({"error":"malformed request"})", "application/json");
                return;
            }
            try {
                HistoryWindow history = history_from_json(body["history"]);
                DecodingConfig config;
                config.pool_size = body.value("num_candidates", 50);
                config.max_tokens = body.value("max_tokens", 30);
                config.no_repeat_ngram = body.value("no_repeat_ngram", 2);
                config.repetition_penalty = body.value("repetition_penalty", 1.2);
                CandidatePool pool = beam_generate(model, history, config);
                json candidates = json::array();
                for (const Candidate& c : pool.candidates) {
                    candidates.push_back({{"text", c.text}, {"log_prob", c.score}});
                }
                res.set_content(json{{"candidates", candidates}}.dump(), "application/json");
            } catch (const std::exception& e) {
                res.status = 500;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            }
        });
    }
};

StubServer::StubServer(NGramModel model) : impl_(new Impl) {
    impl_->model_mode = true;
    impl_->model = std::move(model);
    impl_->route();
}

StubServer::StubServer(std::string canned_response_body) : impl_(new Impl) {
    impl_->canned = std::move(canned_response_body);
    impl_->route();
}

StubServer::~StubServer() { stop(); }

int StubServer::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port)) {
            throw IoError("cannot bind stub server to port " + std::to_string(port));
        }
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    while (!impl_->server.is_running()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return impl_->port;
}

void StubServer::stop() {
    if (impl_ && impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

int StubServer::port() const { return impl_->port; }

std::string StubServer::endpoint() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

}  // namespace hedgen
