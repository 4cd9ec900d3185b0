#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "selfseg/caption_engine.hpp"
#include "selfseg/guidance.hpp"
#include "selfseg/love_evaluator.hpp"

namespace selfseg {

struct HttpEndpoint {
  std::string base_url;  // e.g. "http://127.0.0.1:8601"
  int retries = 2;       // extra attempts after a connection failure
  int timeout_seconds = 120;
};

/// POST /v1/caption. Connection failures (after retries) raise
/// TransportError; a non-200 answer or a malformed body raises DecodeError.
class HttpDecoderClient : public DecoderClient {
 public:
  explicit HttpDecoderClient(HttpEndpoint endpoint);
  std::string caption(const EmbeddingSubset& embeddings, const DecodeParams& params) override;

  /// Request body for the wire contract.
  static std::string request_body(const EmbeddingSubset& embeddings, const DecodeParams& params);

 private:
  HttpEndpoint endpoint_;
};

/// POST /v1/segment; the reply is a P5 PGM body with an X-Vocab-Json header.
class HttpSegmentorClient : public SegmentorClient {
 public:
  explicit HttpSegmentorClient(HttpEndpoint endpoint);
  SegmentorResponse segment(const std::string& image_path, const std::vector<std::string>& class_names) override;

  static std::string request_body(const std::string& image_path, const std::vector<std::string>& class_names);

 private:
  HttpEndpoint endpoint_;
};

/// POST /v1/generate.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpEndpoint endpoint);
  std::vector<std::string> generate(const std::vector<Dialog>& dialogs) override;

  static std::string request_body(const std::vector<Dialog>& dialogs);

 private:
  HttpEndpoint endpoint_;
};

/// Stable 64-bit hash of an embedding subset (shape plus float bit patterns).
std::uint64_t hash_subset(const EmbeddingSubset& embeddings);

/// Picks `captions[mix(hash(subset), seed) % n]`, so re-captioning with new
/// seeds walks through the table.
class MockDecoderClient : public DecoderClient {
 public:
  explicit MockDecoderClient(std::vector<std::string> captions);
  /// Fixture: {"captions": ["...", ...]}
  static MockDecoderClient from_file(const std::filesystem::path& path);

  std::string caption(const EmbeddingSubset& embeddings, const DecodeParams& params) override;
  const std::vector<std::string>& captions() const noexcept { return captions_; }

 private:
  std::vector<std::string> captions_;
};

/// Serves stored region masks. For image `<stem>.*` it reads
/// `<fixture_dir>/<stem>.json`:
///   {"mask": "<stem>.regions.pgm", "regions": {"1": ["bus", "vehicle"], ...}}
/// Each region takes the first listed name present in the requested class
/// list; unlisted regions and regions without a match become index 0.
class MockSegmentorClient : public SegmentorClient {
 public:
  explicit MockSegmentorClient(std::filesystem::path fixture_dir);
  SegmentorResponse segment(const std::string& image_path, const std::vector<std::string>& class_names) override;

 private:
  std::filesystem::path dir_;
};

/// Scripted LLM. Fixture:
///   {"rules": [{"contains": "puppy exclusively", "response": "'dog'"}, ...],
///    "default": "'background'"}
/// The first rule whose substring occurs in the dialog's last message wins.
class MockLlmClient : public LlmClient {
 public:
  struct Rule {
    std::string contains;
    std::string response;
  };
  MockLlmClient(std::vector<Rule> rules, std::string default_response);
  static MockLlmClient from_file(const std::filesystem::path& path);

  std::vector<std::string> generate(const std::vector<Dialog>& dialogs) override;

 private:
  std::vector<Rule> rules_;
  std::string default_;
};

}  // namespace selfseg
