#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hedgen/corpus.hpp"
#include "hedgen/generate.hpp"
#include "hedgen/ngram.hpp"

namespace hedgen {

// One POST /generate round trip. Request:
//   {"history": [{"speaker","text"}...], "num_candidates", "max_tokens",
//    "no_repeat_ngram", "repetition_penalty"}
// Response:
//   {"candidates": [{"text", "log_prob"}...]}
// Candidates are validated (finite scores, non-empty text) and re-sorted by
// score descending locally. Throws ExternalError: Transport when the service
// is unreachable or answers 5xx (retryable), Protocol for malformed bodies,
// Validation for well-formed bodies carrying bad values.
CandidatePool external_generate(const std::string& endpoint, const HistoryWindow& history,
                                const DecodingConfig& config);

// Same call fanned out over many histories with at most `max_in_flight`
// concurrent requests. Pools come back in input order no matter how the
// requests complete. A failed item rethrows its error after all workers stop.
std::vector<CandidatePool> external_generate_many(const std::string& endpoint,
                                                  const std::vector<HistoryWindow>& histories,
                                                  const DecodingConfig& config,
                                                  int max_in_flight = 4);

// In-process generation service for tests and the serve-stub subcommand.
// Either decodes from a model or replays one canned response body verbatim.
class StubServer {
  public:
    explicit StubServer(NGramModel model);
    explicit StubServer(std::string canned_response_body);
    ~StubServer();

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    // Binds 127.0.0.1 and serves on a background thread. Port 0 picks an
    // ephemeral port; the bound port is returned and exposed by port().
    int start(int port = 0);
    void stop();
    int port() const;
    std::string endpoint() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hedgen
