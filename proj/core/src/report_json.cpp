// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/report_json.hpp"

#include <cmath>
#include <cstdio>

#include "partmat/errors.hpp"

namespace partmat {

namespace {

void append_escaped(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_number(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_newline_indent(std::string& out, int indent, int depth) {
  if (indent <= 0) return;
  out += '\n';
  out.append(static_cast<size_t>(indent) * static_cast<size_t>(depth), ' ');
}

}  // namespace

JsonNode::JsonNode() : value_(std::make_unique<Object>()) {}

JsonNode JsonNode::object() { return JsonNode(Object{}); }

JsonNode JsonNode::array() { return JsonNode(Array{}); }

JsonNode JsonNode::number(double v) {
  if (!std::isfinite(v)) {
    throw InvalidArgument("JsonNode: non-finite number cannot be serialized");
  }
  return JsonNode(v);
}

JsonNode& JsonNode::set(std::string_view key, JsonNode value) {
  auto* obj = std::get_if<std::unique_ptr<Object>>(&value_);
  if (!obj) throw InvalidArgument("JsonNode::set on a non-object node");
  (*obj)->members.emplace_back(std::string(key), std::move(value));
  return *this;
}

JsonNode& JsonNode::push(JsonNode value) {
  auto* arr = std::get_if<std::unique_ptr<Array>>(&value_);
  if (!arr) throw InvalidArgument("JsonNode::push on a non-array node");
  (*arr)->items.push_back(std::move(value));
  return *this;
}

void JsonNode::write(std::string& out, int indent, int depth) const {
  if (const auto* b = std::get_if<bool>(&value_)) {
    out += *b ? "true" : "false";
  } else if (const auto* i = std::get_if<int64_t>(&value_)) {
    out += std::to_string(*i);
  } else if (const auto* d = std::get_if<double>(&value_)) {
    append_number(out, *d);
  } else if (const auto* s = std::get_if<std::string>(&value_)) {
    append_escaped(out, *s);
  } else if (const auto* arr = std::get_if<std::unique_ptr<Array>>(&value_)) {
    const auto& items = (*arr)->items;
    if (items.empty()) {
      out += "[]";
      return;
    }
    out += '[';
    for (size_t i = 0; i < items.size(); ++i) {
      if (i > 0) out += indent > 0 ? "," : ",";
      append_newline_indent(out, indent, depth + 1);
      items[i].write(out, indent, depth + 1);
    }
    append_newline_indent(out, indent, depth);
    out += ']';
  } else {
    const auto& members =
        std::get<std::unique_ptr<Object>>(value_)->members;
    if (members.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    for (size_t i = 0; i < members.size(); ++i) {
      if (i > 0) out += ',';
      append_newline_indent(out, indent, depth + 1);
      append_escaped(out, members[i].first);
      out += indent > 0 ? ": " : ":";
      members[i].second.write(out, indent, depth + 1);
    }
    append_newline_indent(out, indent, depth);
    out += '}';
  }
}

std::string JsonNode::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  return out;
}

}  // namespace partmat
