// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal JSON emitter for reports and history lines. Keys keep insertion
// order and doubles are printed with %.17g, so identical inputs serialize to
// identical bytes and reports can be diffed bytewise.

#ifndef PARTMAT_REPORT_JSON_HPP_
#define PARTMAT_REPORT_JSON_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace partmat {

class JsonNode {
 public:
  JsonNode();

  static JsonNode object();
  static JsonNode array();
  static JsonNode number(double v);
  static JsonNode integer(int64_t v) { return JsonNode(v); }
  static JsonNode boolean(bool v) { return JsonNode(v); }
  static JsonNode string(std::string v) { return JsonNode(std::move(v)); }

  JsonNode& set(std::string_view key, JsonNode value);
  JsonNode& set(std::string_view key, double v) {
    return set(key, number(v));
  }
  JsonNode& set(std::string_view key, int64_t v) {
    return set(key, integer(v));
  }
  JsonNode& set(std::string_view key, int32_t v) {
    return set(key, integer(v));
  }
  JsonNode& set(std::string_view key, uint64_t v) {
    return set(key, integer(static_cast<int64_t>(v)));
  }
  JsonNode& set(std::string_view key, bool v) { return set(key, boolean(v)); }
  JsonNode& set(std::string_view key, const char* v) {
    return set(key, string(v));
  }
  JsonNode& set(std::string_view key, std::string v) {
    return set(key, string(std::move(v)));
  }

  JsonNode& push(JsonNode value);
  JsonNode& push(double v) { return push(number(v)); }

  /// indent <= 0 gives the compact single-line form.
  std::string dump(int indent = 2) const;

 private:
  struct Array;
  struct Object;
  using Value = std::variant<bool, int64_t, double, std::string,
                             std::unique_ptr<Array>, std::unique_ptr<Object>>;

  struct Array {
    std::vector<JsonNode> items;
  };
  struct Object {
    std::vector<std::pair<std::string, JsonNode>> members;
  };

  explicit JsonNode(bool v) : value_(v) {}
  explicit JsonNode(int64_t v) : value_(v) {}
  explicit JsonNode(double v) : value_(v) {}
  explicit JsonNode(std::string v) : value_(std::move(v)) {}
  explicit JsonNode(Array a) : value_(std::make_unique<Array>(std::move(a))) {}
  explicit JsonNode(Object o)
      : value_(std::make_unique<Object>(std::move(o))) {}

  void write(std::string& out, int indent, int depth) const;

  Value value_;
};

}  // namespace partmat

#endif  // PARTMAT_REPORT_JSON_HPP_
