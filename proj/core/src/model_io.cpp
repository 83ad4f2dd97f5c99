// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "scd/errors.hpp"
#include "scd/model.hpp"

namespace scd {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open model spec: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// nlohmann reports byte offsets; turn one into a 1-based line number.
std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw config_error(origin + ": " + msg);
}

Vocabulary parse_vocab(const json& doc, const std::string& origin) {
  if (!doc.contains("vocab") || !doc["vocab"].is_array()) {
    fail(origin, "missing \"vocab\" array");
  }
  std::vector<std::string> tokens;
  for (const auto& t : doc["vocab"]) {
    if (!t.is_string()) fail(origin, "\"vocab\" entries must be strings");
    tokens.push_back(t.get<std::string>());
  }
  std::optional<std::string> eos;
  if (doc.contains("eos")) {
    if (!doc["eos"].is_string()) fail(origin, "\"eos\" must be a string");
    eos = doc["eos"].get<std::string>();
  }
  try {
    return Vocabulary(std::move(tokens), std::move(eos));
  } catch (const std::invalid_argument& e) {
    fail(origin, e.what());
  }
}

ModelSpec parse_table(const json& doc, Vocabulary vocab, const std::string& origin) {
  if (!doc.contains("logits") || !doc["logits"].is_object()) {
    fail(origin, "table model needs a \"logits\" object");
  }
  std::map<std::vector<TokenId>, LogitVector> table;
  for (const auto& [key, row] : doc["logits"].items()) {
    std::vector<TokenId> ctx;
    try {
      ctx = tokenize(vocab, key);
    } catch (const config_error& e) {
      fail(origin, std::string("bad context key \"") + key + "\": " + e.what());
    }
    if (!row.is_array()) fail(origin, "logit rows must be arrays of numbers");
    LogitVector logits;
    for (const auto& v : row) {
      if (!v.is_number()) fail(origin, "logit rows must be arrays of numbers");
      logits.values.push_back(v.get<double>());
    }
    table[std::move(ctx)] = std::move(logits);
  }
  try {
    return ModelSpec::table(std::move(vocab), std::move(table));
  } catch (const std::exception& e) {
    fail(origin, e.what());
  }
}

ModelSpec parse_ngram(const json& doc, Vocabulary vocab, const std::string& base_dir,
                      const std::string& origin) {
  if (!doc.contains("order") || !doc["order"].is_number_integer()) {
    fail(origin, "ngram model needs an integer \"order\"");
  }
  if (!doc.contains("smoothing") || !doc["smoothing"].is_number()) {
    fail(origin, "ngram model needs a numeric \"smoothing\"");
  }
  if (!doc.contains("corpus_path") || !doc["corpus_path"].is_string()) {
    fail(origin, "ngram model needs a \"corpus_path\" string");
  }
  const int order = doc["order"].get<int>();
  const double smoothing = doc["smoothing"].get<double>();
  std::filesystem::path corpus_path = doc["corpus_path"].get<std::string>();
  if (corpus_path.is_relative() && !base_dir.empty()) {
    corpus_path = std::filesystem::path(base_dir) / corpus_path;
  }
  std::ifstream in(corpus_path);
  if (!in) fail(origin, "cannot open corpus: " + corpus_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    const auto corpus = tokenize(vocab, buf.str());
    return train_ngram(std::move(vocab), corpus, order, smoothing);
  } catch (const config_error& e) {
    fail(origin, e.what());
  }
}

}  // namespace

std::shared_ptr<const ModelSpec> parse_model(const std::string& json_text,
                                             const std::string& base_dir,
                                             const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(origin, "parse error at line " + std::to_string(line_of_offset(json_text, e.byte)) +
                     ": " + e.what());
  }
  if (!doc.is_object()) fail(origin, "model spec must be a JSON object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    fail(origin, "missing \"kind\" (\"table\" or \"ngram\")");
  }
  Vocabulary vocab = parse_vocab(doc, origin);
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "table") {
    return std::make_shared<const ModelSpec>(parse_table(doc, std::move(vocab), origin));
  }
  if (kind == "ngram") {
    return std::make_shared<const ModelSpec>(
        parse_ngram(doc, std::move(vocab), base_dir, origin));
  }
  fail(origin, "unknown model kind: " + kind);
}

std::shared_ptr<const ModelSpec> load_model(const std::string& path) {
  const std::string text = read_file(path);
  const std::string base_dir = std::filesystem::path(path).parent_path().string();
  return parse_model(text, base_dir, path);
}

}  // namespace scd
