#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "selfseg/clients.hpp"

namespace selfseg {
namespace {

httplib::Result post_with_retries(const HttpEndpoint& ep, const std::string& path, const std::string& body) {
  httplib::Client cli(ep.base_url);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(ep.timeout_seconds);
  cli.set_write_timeout(ep.timeout_seconds);
  for (int attempt = 0;; ++attempt) {
    auto res = cli.Post(path, body, "application/json");
    if (res || attempt >= ep.retries) {
      if (!res)
        throw TransportError("POST " + ep.base_url + path + " failed: " + httplib::to_string(res.error()) +
                             " after " + std::to_string(attempt + 1) + " attempt(s)");
      return res;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100 * (attempt + 1)));
  }
}

}  // namespace

HttpDecoderClient::HttpDecoderClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpDecoderClient::request_body(const EmbeddingSubset& embeddings, const DecodeParams& params) {
  nlohmann::ordered_json j;
  j["embeddings"] = embeddings;
  j["min_len"] = params.min_len;
  j["max_len"] = params.max_len;
  j["top_p"] = params.top_p;
  j["repetition_penalty"] = params.repetition_penalty;
  j["seed"] = params.seed;
  return j.dump();
}

std::string HttpDecoderClient::caption(const EmbeddingSubset& embeddings, const DecodeParams& params) {
  auto res = post_with_retries(endpoint_, "/v1/caption", request_body(embeddings, params));
  if (res->status != 200) throw DecodeError("caption service answered HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body).at("caption").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("caption service sent a malformed body: ") + e.what());
  }
}

HttpSegmentorClient::HttpSegmentorClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpSegmentorClient::request_body(const std::string& image_path,
                                              const std::vector<std::string>& class_names) {
  nlohmann::ordered_json j;
  j["image_path"] = image_path;
  j["class_names"] = class_names;
  return j.dump();
}

SegmentorResponse HttpSegmentorClient::segment(const std::string& image_path,
                                               const std::vector<std::string>& class_names) {
  auto res = post_with_retries(endpoint_, "/v1/segment", request_body(image_path, class_names));
  if (res->status != 200) throw TransportError("segment service answered HTTP " + std::to_string(res->status));
  SegmentorResponse out;
  try {
    decode_pgm(res->body, out.height, out.width, out.labels);
    LabelMask vocab_holder;
    vocab_from_json(res->get_header_value("X-Vocab-Json"), vocab_holder);
    out.vocabulary = std::move(vocab_holder.vocabulary);
  } catch (const ValidationError& e) {
    throw TransportError(std::string("segment service sent a malformed reply: ") + e.what());
  }
  return out;
}

HttpLlmClient::HttpLlmClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpLlmClient::request_body(const std::vector<Dialog>& dialogs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& d : dialogs) {
    nlohmann::ordered_json msgs = nlohmann::ordered_json::array();
    for (const auto& m : d) msgs.push_back({{"role", m.role}, {"content", m.content}});
    arr.push_back(std::move(msgs));
  }
  nlohmann::ordered_json j;
  j["dialogs"] = std::move(arr);
  return j.dump();
}

std::vector<std::string> HttpLlmClient::generate(const std::vector<Dialog>& dialogs) {
  auto res = post_with_retries(endpoint_, "/v1/generate", request_body(dialogs));
  if (res->status != 200) throw TransportError("generate service answered HTTP " + std::to_string(res->status));
  try {
    auto responses = nlohmann::json::parse(res->body).at("responses").get<std::vector<std::string>>();
    if (responses.size() != dialogs.size()) throw TransportError("generate service returned a misaligned batch");
    return responses;
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("generate service sent a malformed body: ") + e.what());
  }
}

}  // namespace selfseg
